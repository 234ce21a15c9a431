#include "asmlp/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace asmlp::oracle {

namespace {

std::int64_t resolve(std::int64_t src, std::int64_t len, ShiftPadding mode) {
  if (src >= 0 && src < len) return src;
  switch (mode) {
    case ShiftPadding::zero:
      return -1;
    case ShiftPadding::replicate:
      return src < 0 ? 0 : len - 1;
    case ShiftPadding::circular:
      return ((src % len) + len) % len;
    case ShiftPadding::reflect:
      // Mirror about the edge samples without repeating them.
      while (src < 0 || src >= len) src = src < 0 ? -src : 2 * (len - 1) - src;
      return src;
  }
  return -1;
}

void expect_rank(const Tensor<double>& t, std::size_t rank, const char* who) {
  if (t.rank() != rank) throw ShapeError(std::string(who) + ": unexpected rank " + shape_str(t.dims()));
}

}  // namespace

Tensor<double> shift(const Tensor<double>& x, Axis axis, const ShiftConfig& cfg) {
  expect_rank(x, 4, "oracle::shift");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::int64_t s = static_cast<std::int64_t>(axis == Axis::width ? cfg.shift_h : cfg.shift_v);
  const std::int64_t d = static_cast<std::int64_t>(cfg.dilation);
  const std::int64_t width = (static_cast<std::int64_t>(C) + s - 1) / s;
  Tensor<double> y({B, C, H, W});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      const std::int64_t offset = (static_cast<std::int64_t>(c) / width - s / 2) * d;
      for (std::size_t i = 0; i < H; ++i) {
        for (std::size_t j = 0; j < W; ++j) {
          std::int64_t si = static_cast<std::int64_t>(i), sj = static_cast<std::int64_t>(j);
          if (axis == Axis::width) {
            sj = resolve(sj - offset, static_cast<std::int64_t>(W), cfg.padding);
          } else {
            si = resolve(si - offset, static_cast<std::int64_t>(H), cfg.padding);
          }
          y.at({b, c, i, j}) = (si < 0 || sj < 0)
                                   ? 0.0
                                   : x.at({b, c, static_cast<std::size_t>(si), static_cast<std::size_t>(sj)});
        }
      }
    }
  }
  return y;
}

Tensor<double> matmul_channels(const Tensor<double>& x, const Tensor<double>& w,
                               const Tensor<double>& bias) {
  expect_rank(x, 4, "oracle::matmul_channels");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), O = w.dim(0);
  if (w.dim(1) != C) throw ShapeError("oracle::matmul_channels: weight/input mismatch");
  Tensor<double> y({B, O, H, W});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (std::size_t c = 0; c < C; ++c) acc += w.at({o, c}) * x.at({b, c, i, j});
          y.at({b, o, i, j}) = acc;
        }
  return y;
}

Tensor<double> layer_norm(const Tensor<double>& x, const Tensor<double>& gamma,
                          const Tensor<double>& beta, double eps) {
  if (x.rank() != 2 && x.rank() != 4) throw ShapeError("oracle::layer_norm: rank must be 2 or 4");
  const std::size_t B = x.dim(0), C = x.dim(1);
  const std::size_t S = x.rank() == 4 ? x.dim(2) * x.dim(3) : 1;
  Tensor<double> y(x.dims());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t p = 0; p < S; ++p) {
      double mean = 0.0, var = 0.0;
      for (std::size_t c = 0; c < C; ++c) mean += x[(b * C + c) * S + p];
      mean /= static_cast<double>(C);
      for (std::size_t c = 0; c < C; ++c) {
        const double u = x[(b * C + c) * S + p] - mean;
        var += u * u;
      }
      var /= static_cast<double>(C);
      for (std::size_t c = 0; c < C; ++c) {
        y[(b * C + c) * S + p] =
            (x[(b * C + c) * S + p] - mean) / std::sqrt(var + eps) * gamma[c] + beta[c];
      }
    }
  }
  return y;
}

Tensor<double> gelu(const Tensor<double>& x) {
  Tensor<double> y(x.dims());
  for (std::size_t k = 0; k < x.numel(); ++k) y[k] = 0.5 * x[k] * (1.0 + std::erf(x[k] / std::sqrt(2.0)));
  return y;
}

Tensor<double> global_mix(const Tensor<double>& x, const Tensor<double>& w) {
  expect_rank(x, 4, "oracle::global_mix");
  const std::size_t B = x.dim(0), C = x.dim(1), N = x.dim(2) * x.dim(3);
  Tensor<double> y(x.dims());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t p = 0; p < N; ++p) {
        double acc = 0.0;
        for (std::size_t q = 0; q < N; ++q) acc += w.at({p, q}) * x[(b * C + c) * N + q];
        y[(b * C + c) * N + p] = acc;
      }
  return y;
}

Tensor<double> axial_mix(const Tensor<double>& x, const Tensor<double>& w_h,
                         const Tensor<double>& w_v, bool parallel) {
  expect_rank(x, 4, "oracle::axial_mix");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  auto rows = [&](const Tensor<double>& in) {
    Tensor<double> out(in.dims());
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < H; ++i)
          for (std::size_t p = 0; p < W; ++p) {
            double acc = 0.0;
            for (std::size_t q = 0; q < W; ++q) acc += w_h.at({p, q}) * in.at({b, c, i, q});
            out.at({b, c, i, p}) = acc;
          }
    return out;
  };
  auto cols = [&](const Tensor<double>& in) {
    Tensor<double> out(in.dims());
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < W; ++j)
          for (std::size_t p = 0; p < H; ++p) {
            double acc = 0.0;
            for (std::size_t q = 0; q < H; ++q) acc += w_v.at({p, q}) * in.at({b, c, q, j});
            out.at({b, c, p, j}) = acc;
          }
    return out;
  };
  if (!parallel) return cols(rows(x));
  Tensor<double> r = rows(x), c = cols(x);
  for (std::size_t k = 0; k < r.numel(); ++k) r[k] += c[k];
  return r;
}

Tensor<double> window_mix(const Tensor<double>& x, const Tensor<double>& w, std::size_t m) {
  expect_rank(x, 4, "oracle::window_mix");
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  Tensor<double> y(x.dims());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          const std::size_t wi = i / m * m, wj = j / m * m;
          const std::size_t p = (i - wi) * m + (j - wj);
          double acc = 0.0;
          for (std::size_t q = 0; q < m * m; ++q) acc += w.at({p, q}) * x.at({b, c, wi + q / m, wj + q % m});
          y.at({b, c, i, j}) = acc;
        }
  return y;
}

double smoothed_cross_entropy(const Tensor<double>& logits, const std::vector<std::size_t>& targets,
                              double smoothing) {
  expect_rank(logits, 2, "oracle::smoothed_cross_entropy");
  const std::size_t B = logits.dim(0), K = logits.dim(1);
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) z += std::exp(logits.at({b, k}));
    for (std::size_t k = 0; k < K; ++k) {
      const double log_p = logits.at({b, k}) - std::log(z);
      const double q = (k == targets[b] ? 1.0 - smoothing : 0.0) + smoothing / static_cast<double>(K);
      total -= q * log_p;
    }
  }
  return total / static_cast<double>(B);
}

Offsets cross(const ShiftConfig& cfg) {
  Offsets out;
  const int d = static_cast<int>(cfg.dilation);
  for (int k = -static_cast<int>(cfg.shift_v / 2); k <= static_cast<int>(cfg.shift_v / 2); ++k) out.insert({k * d, 0});
  for (int k = -static_cast<int>(cfg.shift_h / 2); k <= static_cast<int>(cfg.shift_h / 2); ++k) out.insert({0, k * d});
  return out;
}

Offsets minkowski_sum(const Offsets& a, const Offsets& b) {
  Offsets out;
  for (const auto& [ai, aj] : a)
    for (const auto& [bi, bj] : b) out.insert({ai + bi, aj + bj});
  return out;
}

double central_difference(const std::function<double()>& f, double& entry, double step) {
  const double saved = entry;
  entry = saved + step;
  const double up = f();
  entry = saved - step;
  const double down = f();
  entry = saved;
  return (up - down) / (2.0 * step);
}

}  // namespace asmlp::oracle
