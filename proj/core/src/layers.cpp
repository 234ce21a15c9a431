#include "asmlp/layers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace asmlp {

template <std::floating_point T>
Linear<T> make_linear(std::size_t in, std::size_t out, bool bias, Rng& rng, bool meta) {
  Linear<T> p;
  if (meta) {
    p.weight = Tensor<T>::meta({out, in});
    if (bias) p.bias = Tensor<T>::meta({out});
    return p;
  }
  p.weight = trunc_normal<T>({out, in}, rng);
  if (bias) p.bias = Tensor<T>(Shape{out});
  return p;
}

template <std::floating_point T>
LayerNormParams<T> make_layer_norm(std::size_t channels, bool meta, double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("layer_norm: epsilon must be positive");
  LayerNormParams<T> p;
  p.epsilon = epsilon;
  if (meta) {
    p.gamma = Tensor<T>::meta({channels});
    p.beta = Tensor<T>::meta({channels});
  } else {
    p.gamma = Tensor<T>(Shape{channels}, T(1));
    p.beta = Tensor<T>(Shape{channels});
  }
  return p;
}

template <std::floating_point T>
MlpParams<T> make_mlp(std::size_t channels, std::size_t ratio, Rng& rng, bool meta) {
  if (ratio == 0) throw std::invalid_argument("mlp: expansion ratio must be positive");
  MlpParams<T> p;
  p.ratio = ratio;
  p.fc1 = make_linear<T>(channels, ratio * channels, true, rng, meta);
  p.fc2 = make_linear<T>(ratio * channels, channels, true, rng, meta);
  return p;
}

template <std::floating_point T>
void visit_params(const std::string& prefix, Linear<T>& p, const ParamVisitor<T>& fn) {
  fn(prefix + ".weight", p.weight, ParamKind::weight);
  if (p.has_bias()) fn(prefix + ".bias", p.bias, ParamKind::bias);
}

template <std::floating_point T>
void visit_params(const std::string& prefix, LayerNormParams<T>& p, const ParamVisitor<T>& fn) {
  fn(prefix + ".gamma", p.gamma, ParamKind::norm);
  fn(prefix + ".beta", p.beta, ParamKind::norm);
}

template <std::floating_point T>
void visit_params(const std::string& prefix, MlpParams<T>& p, const ParamVisitor<T>& fn) {
  visit_params(prefix + ".fc1", p.fc1, fn);
  visit_params(prefix + ".fc2", p.fc2, fn);
}

template <std::floating_point T>
Var<T> linear(Context<T>& ctx, Var<T> x, const Linear<T>& p) {
  Var<T> w = ctx.param(p.weight);
  Var<T> b = p.has_bias() ? ctx.param(p.bias) : Var<T>{};
  return matmul_channels(x, w, b);
}

template <std::floating_point T>
Var<T> layer_norm(Context<T>& ctx, Var<T> x, const LayerNormParams<T>& p) {
  const Shape dims = x.dims();
  if (dims.size() != 2 && dims.size() != 4) {
    throw ShapeError("layer_norm: expected [b,C] or [b,C,h,w], got " + shape_str(dims));
  }
  if (p.gamma.dims() != Shape{dims[1]} || p.beta.dims() != Shape{dims[1]}) {
    throw ShapeError("layer_norm: " + std::to_string(dims[1]) + " channels vs parameters " +
                     shape_str(p.gamma.dims()));
  }
  auto& tape = ctx.tape();
  Var<T> gamma = ctx.param(p.gamma);
  Var<T> beta = ctx.param(p.beta);
  if (x.value().is_meta() || p.gamma.is_meta()) {
    return tape.record(Tensor<T>::meta(dims), {x, gamma, beta}, nullptr);
  }

  const std::size_t batch = dims[0], channels = dims[1];
  const std::size_t hw = dims.size() == 4 ? dims[2] * dims[3] : 1;
  const T eps = static_cast<T>(p.epsilon);
  Tensor<T> out(dims);
  Tensor<T> xhat(dims);
  Tensor<T> inv_std(Shape{batch * hw});
  const T* xv = x.value().raw();
  const T* gv = p.gamma.raw();
  const T* bv = p.beta.raw();
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * channels * hw;
    for (std::size_t i = 0; i < hw; ++i) {
      T mu = 0;
      for (std::size_t c = 0; c < channels; ++c) mu += xv[base + c * hw + i];
      mu /= static_cast<T>(channels);
      T var = 0;
      for (std::size_t c = 0; c < channels; ++c) {
        const T d = xv[base + c * hw + i] - mu;
        var += d * d;
      }
      var /= static_cast<T>(channels);
      const T rs = T(1) / std::sqrt(var + eps);
      inv_std[b * hw + i] = rs;
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t k = base + c * hw + i;
        xhat[k] = (xv[k] - mu) * rs;
        out[k] = gv[c] * xhat[k] + bv[c];
      }
    }
  }

  return tape.record(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat, inv_std, batch, channels, hw](Tape<T>& t, const Tensor<T>& g) {
        const T* gam = t.value(gamma).raw();
        if (t.requires_grad(x)) {
          Tensor<T> gx(xhat.dims());
          const T n_inv = T(1) / static_cast<T>(channels);
          for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t base = b * channels * hw;
            for (std::size_t i = 0; i < hw; ++i) {
              T mean_d = 0, mean_dx = 0;
              for (std::size_t c = 0; c < channels; ++c) {
                const std::size_t k = base + c * hw + i;
                const T d = g[k] * gam[c];
                mean_d += d;
                mean_dx += d * xhat[k];
              }
              mean_d *= n_inv;
              mean_dx *= n_inv;
              const T rs = inv_std[b * hw + i];
              for (std::size_t c = 0; c < channels; ++c) {
                const std::size_t k = base + c * hw + i;
                gx[k] = rs * (g[k] * gam[c] - mean_d - xhat[k] * mean_dx);
              }
            }
          }
          t.accumulate(x, std::move(gx));
        }
        if (t.requires_grad(gamma) || t.requires_grad(beta)) {
          Tensor<T> gg(Shape{channels});
          Tensor<T> gb(Shape{channels});
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t c = 0; c < channels; ++c) {
              T sg = 0, sb = 0;
              for (std::size_t i = 0; i < hw; ++i) {
                const std::size_t k = (b * channels + c) * hw + i;
                sg += g[k] * xhat[k];
                sb += g[k];
              }
              gg[c] += sg;
              gb[c] += sb;
            }
          }
          t.accumulate(gamma, std::move(gg));
          t.accumulate(beta, std::move(gb));
        }
      });
}

template <std::floating_point T>
Var<T> gelu(Var<T> x) {
  auto& tape = *x.tape();
  if (x.value().is_meta()) return tape.record(Tensor<T>::meta(x.dims()), {x}, nullptr);
  Tensor<T> out = x.value();
  for (auto& v : out.data()) v = T(0.5) * v * (T(1) + std::erf(v * std::numbers::sqrt2_v<T> / T(2)));
  return tape.record(std::move(out), {x}, [x](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gx = g;
    const T* xv = t.value(x).raw();
    const T inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<T> / std::numbers::sqrt2_v<T>;
    for (std::size_t i = 0; i < gx.numel(); ++i) {
      const T v = xv[i];
      const T cdf = T(0.5) * (T(1) + std::erf(v * std::numbers::sqrt2_v<T> / T(2)));
      const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
      gx[i] *= cdf + v * pdf;
    }
    t.accumulate(x, std::move(gx));
  });
}

template <std::floating_point T>
Var<T> mlp_forward(Context<T>& ctx, Var<T> x, const MlpParams<T>& p) {
  if (p.fc1.out_features() != p.ratio * p.fc1.in_features()) {
    throw ShapeError("mlp: inner width " + std::to_string(p.fc1.out_features()) + " is not " +
                     std::to_string(p.ratio) + " x " + std::to_string(p.fc1.in_features()));
  }
  return linear(ctx, gelu(linear(ctx, x, p.fc1)), p.fc2);
}

template <std::floating_point T>
Var<T> drop_path(Var<T> x, double rate, bool training, Rng* rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("drop_path: rate " + std::to_string(rate) + " outside [0, 1)");
  }
  if (!training || rate == 0.0) return x;
  if (rng == nullptr) throw std::invalid_argument("drop_path: training mode needs an rng");
  auto& tape = *x.tape();
  const Shape dims = x.dims();
  const std::size_t batch = dims.at(0);
  const std::size_t per = shape_numel(dims) / batch;
  std::bernoulli_distribution keep(1.0 - rate);
  std::vector<T> mask(batch);
  for (auto& m : mask) m = keep(*rng) ? static_cast<T>(1.0 / (1.0 - rate)) : T(0);
  if (x.value().is_meta()) return tape.record(Tensor<T>::meta(dims), {x}, nullptr);
  Tensor<T> out = x.value();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < per; ++i) out[b * per + i] *= mask[b];
  }
  return tape.record(std::move(out), {x}, [x, mask, per](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gx = g;
    for (std::size_t b = 0; b < mask.size(); ++b) {
      for (std::size_t i = 0; i < per; ++i) gx[b * per + i] *= mask[b];
    }
    t.accumulate(x, std::move(gx));
  });
}

#define ASMLP_INSTANTIATE_LAYERS(T)                                                              \
  template Linear<T> make_linear(std::size_t, std::size_t, bool, Rng&, bool);                    \
  template LayerNormParams<T> make_layer_norm(std::size_t, bool, double);                        \
  template MlpParams<T> make_mlp(std::size_t, std::size_t, Rng&, bool);                          \
  template void visit_params(const std::string&, Linear<T>&, const ParamVisitor<T>&);            \
  template void visit_params(const std::string&, LayerNormParams<T>&, const ParamVisitor<T>&);   \
  template void visit_params(const std::string&, MlpParams<T>&, const ParamVisitor<T>&);         \
  template Var<T> linear(Context<T>&, Var<T>, const Linear<T>&);                                 \
  template Var<T> layer_norm(Context<T>&, Var<T>, const LayerNormParams<T>&);                    \
  template Var<T> gelu(Var<T>);                                                                  \
  template Var<T> mlp_forward(Context<T>&, Var<T>, const MlpParams<T>&);                         \
  template Var<T> drop_path(Var<T>, double, bool, Rng*);

ASMLP_INSTANTIATE_LAYERS(float)
ASMLP_INSTANTIATE_LAYERS(double)

}  // namespace asmlp
