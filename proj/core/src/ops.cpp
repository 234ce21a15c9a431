#include "asmlp/ops.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "asmlp/mac_counter.hpp"

namespace asmlp {

std::string_view to_string(PadMode mode) {
  switch (mode) {
    case PadMode::zero: return "zero";
    case PadMode::reflect: return "reflect";
    case PadMode::replicate: return "replicate";
  }
  return "?";
}

PadMode parse_pad_mode(std::string_view name) {
  if (name == "zero") return PadMode::zero;
  if (name == "reflect") return PadMode::reflect;
  if (name == "replicate") return PadMode::replicate;
  throw std::invalid_argument("unknown padding mode '" + std::string(name) + "'");
}

namespace {

template <std::floating_point T>
Tape<T>& tape_of(Var<T> v) {
  if (!v.valid()) throw std::logic_error("op: input variable is not on a tape");
  return *v.tape();
}

template <std::floating_point T>
void require_same_tape(Var<T> a, Var<T> b) {
  if (a.tape() != b.tape()) throw std::logic_error("op: operands live on different tapes");
}

void require_rank(const Shape& dims, std::size_t rank, const char* op) {
  if (dims.size() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(dims));
  }
}

// [outer, len, inner] view of `dims` around `axis`.
struct AxisView {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisView axis_view(const Shape& dims, std::size_t axis) {
  if (axis >= dims.size()) {
    throw std::out_of_range("axis " + std::to_string(axis) + " out of range for " +
                            shape_str(dims));
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= dims[i];
  v.len = dims[axis];
  for (std::size_t i = axis + 1; i < dims.size(); ++i) v.inner *= dims[i];
  return v;
}

// Builds a gather map that copies `src_dims` into `out_dims` with `axis`
// remapped by `pick(i)` (returning -1 for a zero-filled slot).
template <class Pick>
IndexMap axis_map(const Shape& src_dims, std::size_t axis, std::size_t out_len, Pick pick) {
  const AxisView v = axis_view(src_dims, axis);
  auto map = std::make_shared<std::vector<std::int64_t>>(v.outer * out_len * v.inner);
  std::size_t k = 0;
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < out_len; ++i) {
      const std::int64_t s = pick(i);
      for (std::size_t n = 0; n < v.inner; ++n) {
        (*map)[k++] = s < 0 ? -1
                            : static_cast<std::int64_t>((o * v.len + static_cast<std::size_t>(s)) *
                                                            v.inner +
                                                        n);
      }
    }
  }
  return map;
}

template <std::floating_point T>
bool any_meta(std::initializer_list<Var<T>> vars) {
  for (const auto& v : vars) {
    if (v.valid() && v.value().is_meta()) return true;
  }
  return false;
}

}  // namespace

template <std::floating_point T>
Var<T> gather(Var<T> x, Shape out_dims, IndexMap src) {
  auto& tape = tape_of(x);
  const Tensor<T>& xv = x.value();
  if (xv.is_meta()) return tape.record(Tensor<T>::meta(std::move(out_dims)), {x}, nullptr);
  Tensor<T> out(out_dims);
  if (src->size() != out.numel()) throw ShapeError("gather: index map size mismatch");
  const T* in = xv.raw();
  T* o = out.raw();
  const auto& idx = *src;
  for (std::size_t i = 0; i < idx.size(); ++i) o[i] = idx[i] < 0 ? T(0) : in[idx[i]];
  const Shape in_dims = xv.dims();
  return tape.record(std::move(out), {x}, [x, in_dims, src](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gx(in_dims);
    T* d = gx.raw();
    const T* gv = g.raw();
    const auto& idx = *src;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= 0) d[idx[i]] += gv[i];
    }
    t.accumulate(x, std::move(gx));
  });
}

template <std::floating_point T>
Var<T> matmul_channels(Var<T> x, Var<T> w, Var<T> bias) {
  auto& tape = tape_of(x);
  require_same_tape(x, w);
  const Shape& xd = x.dims();
  const Shape& wd = w.dims();
  require_rank(xd, 4, "matmul_channels(x)");
  require_rank(wd, 2, "matmul_channels(w)");
  if (xd[1] != wd[1]) {
    throw ShapeError("matmul_channels: input has " + std::to_string(xd[1]) +
                     " channels but weight is " + shape_str(wd));
  }
  const std::size_t batch = xd[0], cin = xd[1], cout = wd[0], hw = xd[2] * xd[3];
  if (bias.valid()) {
    require_same_tape(x, bias);
    if (bias.dims() != Shape{cout}) {
      throw ShapeError("matmul_channels: bias " + shape_str(bias.dims()) + " for " +
                       std::to_string(cout) + " outputs");
    }
  }
  MacCounter::charge(static_cast<std::uint64_t>(batch) * hw * cout * cin);
  Shape out_dims{batch, cout, xd[2], xd[3]};
  if (any_meta({x, w, bias})) {
    return tape.record(Tensor<T>::meta(std::move(out_dims)), {x, w}, nullptr);
  }

  Tensor<T> out(out_dims);
  const T* xv = x.value().raw();
  const T* wv = w.value().raw();
  const T* bv = bias.valid() ? bias.value().raw() : nullptr;
  T* ov = out.raw();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < cout; ++o) {
      T* dst = ov + (b * cout + o) * hw;
      const T b0 = bv ? bv[o] : T(0);
      std::fill(dst, dst + hw, b0);
      for (std::size_t c = 0; c < cin; ++c) {
        const T wc = wv[o * cin + c];
        const T* src = xv + (b * cin + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) dst[i] += wc * src[i];
      }
    }
  }

  std::vector<Var<T>> inputs{x, w};
  if (bias.valid()) inputs.push_back(bias);
  return tape.record(
      std::move(out), inputs,
      [x, w, bias, batch, cin, cout, hw](Tape<T>& t, const Tensor<T>& g) {
        const T* gv = g.raw();
        const T* xv = t.value(x).raw();
        const T* wv = t.value(w).raw();
        if (t.requires_grad(x)) {
          Tensor<T> gx(t.value(x).dims());
          T* d = gx.raw();
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t o = 0; o < cout; ++o) {
              const T* go = gv + (b * cout + o) * hw;
              for (std::size_t c = 0; c < cin; ++c) {
                const T wc = wv[o * cin + c];
                T* dst = d + (b * cin + c) * hw;
                for (std::size_t i = 0; i < hw; ++i) dst[i] += wc * go[i];
              }
            }
          }
          t.accumulate(x, std::move(gx));
        }
        if (t.requires_grad(w)) {
          Tensor<T> gw(t.value(w).dims());
          T* d = gw.raw();
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t o = 0; o < cout; ++o) {
              const T* go = gv + (b * cout + o) * hw;
              for (std::size_t c = 0; c < cin; ++c) {
                const T* src = xv + (b * cin + c) * hw;
                T acc = 0;
                for (std::size_t i = 0; i < hw; ++i) acc += go[i] * src[i];
                d[o * cin + c] += acc;
              }
            }
          }
          t.accumulate(w, std::move(gw));
        }
        if (bias.valid() && t.requires_grad(bias)) {
          Tensor<T> gb(Shape{cout});
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t o = 0; o < cout; ++o) {
              const T* go = gv + (b * cout + o) * hw;
              T acc = 0;
              for (std::size_t i = 0; i < hw; ++i) acc += go[i];
              gb[o] += acc;
            }
          }
          t.accumulate(bias, std::move(gb));
        }
      });
}

template <std::floating_point T>
Var<T> roll(Var<T> x, std::size_t axis, std::int64_t offset) {
  const Shape dims = x.dims();
  const auto len = static_cast<std::int64_t>(axis_view(dims, axis).len);
  const std::int64_t k = ((offset % len) + len) % len;
  auto map = axis_map(dims, axis, static_cast<std::size_t>(len), [&](std::size_t i) {
    return (static_cast<std::int64_t>(i) - k + len) % len;
  });
  return gather(x, dims, std::move(map));
}

template <std::floating_point T>
Var<T> pad_axis(Var<T> x, std::size_t axis, std::size_t amount, PadMode mode) {
  Shape dims = x.dims();
  const auto len = static_cast<std::int64_t>(axis_view(dims, axis).len);
  const auto a = static_cast<std::int64_t>(amount);
  if (mode == PadMode::reflect && a >= len) {
    throw ShapeError("pad: reflect padding of " + std::to_string(amount) +
                     " needs an axis longer than the pad, got " + std::to_string(len));
  }
  auto map = axis_map(dims, axis, static_cast<std::size_t>(len + 2 * a), [&](std::size_t i) {
    std::int64_t s = static_cast<std::int64_t>(i) - a;
    if (s >= 0 && s < len) return s;
    switch (mode) {
      case PadMode::zero: return std::int64_t{-1};
      case PadMode::replicate: return std::clamp<std::int64_t>(s, 0, len - 1);
      case PadMode::reflect: return s < 0 ? -s : 2 * (len - 1) - s;
    }
    return std::int64_t{-1};
  });
  dims[axis] = static_cast<std::size_t>(len + 2 * a);
  return gather(x, std::move(dims), std::move(map));
}

template <std::floating_point T>
Var<T> pad_spatial(Var<T> x, std::size_t amount, PadMode mode) {
  require_rank(x.dims(), 4, "pad_spatial");
  return pad_axis(pad_axis(x, 2, amount, mode), 3, amount, mode);
}

template <std::floating_point T>
Var<T> slice(Var<T> x, std::size_t axis, std::size_t begin, std::size_t length) {
  Shape dims = x.dims();
  const std::size_t len = axis_view(dims, axis).len;
  if (length == 0 || begin + length > len) {
    throw ShapeError("slice: [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                     ") outside axis of length " + std::to_string(len));
  }
  auto map = axis_map(dims, axis, length,
                      [&](std::size_t i) { return static_cast<std::int64_t>(begin + i); });
  dims[axis] = length;
  return gather(x, std::move(dims), std::move(map));
}

template <std::floating_point T>
Var<T> crop_spatial(Var<T> x, std::size_t amount) {
  require_rank(x.dims(), 4, "crop_spatial");
  const Shape& d = x.dims();
  if (2 * amount >= d[2] || 2 * amount >= d[3]) {
    throw ShapeError("crop_spatial: cannot remove " + std::to_string(amount) + " from each side of " +
                     shape_str(d));
  }
  auto y = slice(x, 2, amount, d[2] - 2 * amount);
  return slice(y, 3, amount, y.dim(3) - 2 * amount);
}

template <std::floating_point T>
std::vector<Var<T>> chunk_channels(Var<T> x, std::size_t parts) {
  require_rank(x.dims(), 4, "chunk_channels");
  const std::size_t channels = x.dim(1);
  if (parts == 0 || parts > channels) {
    throw ShapeError("chunk_channels: cannot split " + std::to_string(channels) + " channels into " +
                     std::to_string(parts) + " groups");
  }
  const std::size_t width = (channels + parts - 1) / parts;
  std::vector<Var<T>> groups;
  for (std::size_t begin = 0; begin < channels; begin += width) {
    groups.push_back(slice(x, 1, begin, std::min(width, channels - begin)));
  }
  return groups;
}

template <std::floating_point T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  auto& tape = tape_of(parts.front());
  const Shape& first = parts.front().dims();
  require_rank(first, 4, "concat_channels");
  std::size_t channels = 0;
  bool meta = false;
  for (const auto& p : parts) {
    require_same_tape(parts.front(), p);
    const Shape& d = p.dims();
    require_rank(d, 4, "concat_channels");
    if (d[0] != first[0] || d[2] != first[2] || d[3] != first[3]) {
      throw ShapeError("concat_channels: " + shape_str(d) + " vs " + shape_str(first));
    }
    channels += d[1];
    meta = meta || p.value().is_meta();
  }
  const std::size_t batch = first[0], hw = first[2] * first[3];
  Shape out_dims{batch, channels, first[2], first[3]};
  if (meta) return tape.record(Tensor<T>::meta(std::move(out_dims)), parts, nullptr);

  Tensor<T> out(out_dims);
  std::size_t c0 = 0;
  for (const auto& p : parts) {
    const std::size_t pc = p.dim(1);
    const T* src = p.value().raw();
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy(src + b * pc * hw, src + (b + 1) * pc * hw, out.raw() + (b * channels + c0) * hw);
    }
    c0 += pc;
  }
  return tape.record(std::move(out), parts,
                     [parts, batch, channels, hw](Tape<T>& t, const Tensor<T>& g) {
                       std::size_t c0 = 0;
                       for (const auto& p : parts) {
                         const std::size_t pc = p.dim(1);
                         if (t.requires_grad(p)) {
                           Tensor<T> gp(p.dims());
                           for (std::size_t b = 0; b < batch; ++b) {
                             const T* src = g.raw() + (b * channels + c0) * hw;
                             std::copy(src, src + pc * hw, gp.raw() + b * pc * hw);
                           }
                           t.accumulate(p, std::move(gp));
                         }
                         c0 += pc;
                       }
                     });
}

namespace {

template <std::floating_point T>
void require_same_dims(Var<T> a, Var<T> b, const char* op) {
  require_same_tape(a, b);
  if (a.dims() != b.dims()) {
    throw ShapeError(std::string(op) + ": " + shape_str(a.dims()) + " vs " + shape_str(b.dims()));
  }
}

}  // namespace

template <std::floating_point T>
Var<T> add(Var<T> a, Var<T> b) {
  require_same_dims(a, b, "add");
  auto& tape = tape_of(a);
  if (any_meta({a, b})) return tape.record(Tensor<T>::meta(a.dims()), {a, b}, nullptr);
  Tensor<T> out = a.value();
  const T* bv = b.value().raw();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

template <std::floating_point T>
Var<T> sub(Var<T> a, Var<T> b) {
  require_same_dims(a, b, "sub");
  auto& tape = tape_of(a);
  if (any_meta({a, b})) return tape.record(Tensor<T>::meta(a.dims()), {a, b}, nullptr);
  Tensor<T> out = a.value();
  const T* bv = b.value().raw();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= bv[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    t.accumulate(a, g);
    Tensor<T> neg = g;
    for (auto& v : neg.data()) v = -v;
    t.accumulate(b, std::move(neg));
  });
}

template <std::floating_point T>
Var<T> mul(Var<T> a, Var<T> b) {
  require_same_dims(a, b, "mul");
  auto& tape = tape_of(a);
  if (any_meta({a, b})) return tape.record(Tensor<T>::meta(a.dims()), {a, b}, nullptr);
  Tensor<T> out = a.value();
  const T* bv = b.value().raw();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    if (t.requires_grad(a)) {
      Tensor<T> ga = g;
      const T* bv = t.value(b).raw();
      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= bv[i];
      t.accumulate(a, std::move(ga));
    }
    if (t.requires_grad(b)) {
      Tensor<T> gb = g;
      const T* av = t.value(a).raw();
      for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] *= av[i];
      t.accumulate(b, std::move(gb));
    }
  });
}

template <std::floating_point T>
Var<T> scale(Var<T> x, T factor) {
  auto& tape = tape_of(x);
  if (any_meta({x})) return tape.record(Tensor<T>::meta(x.dims()), {x}, nullptr);
  Tensor<T> out = x.value();
  for (auto& v : out.data()) v *= factor;
  return tape.record(std::move(out), {x}, [x, factor](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gx = g;
    for (auto& v : gx.data()) v *= factor;
    t.accumulate(x, std::move(gx));
  });
}

template <std::floating_point T>
Var<T> reshape(Var<T> x, Shape dims) {
  auto& tape = tape_of(x);
  if (shape_numel(dims) != shape_numel(x.dims())) {
    throw ShapeError("reshape: " + shape_str(x.dims()) + " -> " + shape_str(dims));
  }
  if (any_meta({x})) return tape.record(Tensor<T>::meta(std::move(dims)), {x}, nullptr);
  const Shape in_dims = x.dims();
  return tape.record(x.value().reshaped(std::move(dims)), {x},
                     [x, in_dims](Tape<T>& t, const Tensor<T>& g) {
                       t.accumulate(x, g.reshaped(in_dims));
                     });
}

template <std::floating_point T>
Var<T> sum(Var<T> x) {
  auto& tape = tape_of(x);
  if (any_meta({x})) return tape.record(Tensor<T>::meta(Shape{1}), {x}, nullptr);
  T acc = 0;
  for (T v : x.value().data()) acc += v;
  const Shape in_dims = x.dims();
  return tape.record(Tensor<T>::scalar(acc), {x}, [x, in_dims](Tape<T>& t, const Tensor<T>& g) {
    t.accumulate(x, Tensor<T>(in_dims, g[0]));
  });
}

template <std::floating_point T>
Var<T> sum_axis(Var<T> x, std::size_t axis) {
  auto& tape = tape_of(x);
  const Shape in_dims = x.dims();
  const AxisView v = axis_view(in_dims, axis);
  Shape out_dims = in_dims;
  out_dims[axis] = 1;
  if (any_meta({x})) return tape.record(Tensor<T>::meta(std::move(out_dims)), {x}, nullptr);
  Tensor<T> out(out_dims);
  const T* src = x.value().raw();
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t n = 0; n < v.inner; ++n) {
      T acc = 0;
      for (std::size_t i = 0; i < v.len; ++i) acc += src[(o * v.len + i) * v.inner + n];
      out[o * v.inner + n] = acc;
    }
  }
  return tape.record(std::move(out), {x}, [x, in_dims, v](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T> gx(in_dims);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < v.len; ++i) {
        for (std::size_t n = 0; n < v.inner; ++n) {
          gx[(o * v.len + i) * v.inner + n] = g[o * v.inner + n];
        }
      }
    }
    t.accumulate(x, std::move(gx));
  });
}

template <std::floating_point T>
Var<T> mean_axis(Var<T> x, std::size_t axis) {
  const std::size_t len = axis_view(x.dims(), axis).len;
  return scale(sum_axis(x, axis), T(1) / static_cast<T>(len));
}

template <std::floating_point T>
Var<T> variance_axis(Var<T> x, std::size_t axis) {
  auto& tape = tape_of(x);
  const Shape in_dims = x.dims();
  const AxisView v = axis_view(in_dims, axis);
  Shape out_dims = in_dims;
  out_dims[axis] = 1;
  if (any_meta({x})) return tape.record(Tensor<T>::meta(std::move(out_dims)), {x}, nullptr);
  Tensor<T> out(out_dims);
  Tensor<T> means(out_dims);
  const T* src = x.value().raw();
  const T n_inv = T(1) / static_cast<T>(v.len);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t n = 0; n < v.inner; ++n) {
      T mu = 0;
      for (std::size_t i = 0; i < v.len; ++i) mu += src[(o * v.len + i) * v.inner + n];
      mu *= n_inv;
      T acc = 0;
      for (std::size_t i = 0; i < v.len; ++i) {
        const T d = src[(o * v.len + i) * v.inner + n] - mu;
        acc += d * d;
      }
      out[o * v.inner + n] = acc * n_inv;
      means[o * v.inner + n] = mu;
    }
  }
  return tape.record(std::move(out), {x},
                     [x, in_dims, v, means, n_inv](Tape<T>& t, const Tensor<T>& g) {
                       Tensor<T> gx(in_dims);
                       const T* src = t.value(x).raw();
                       for (std::size_t o = 0; o < v.outer; ++o) {
                         for (std::size_t i = 0; i < v.len; ++i) {
                           for (std::size_t n = 0; n < v.inner; ++n) {
                             const std::size_t k = (o * v.len + i) * v.inner + n;
                             gx[k] = T(2) * n_inv * (src[k] - means[o * v.inner + n]) *
                                     g[o * v.inner + n];
                           }
                         }
                       }
                       t.accumulate(x, std::move(gx));
                     });
}

template <std::floating_point T>
Var<T> mix_last_axis(Var<T> x, Var<T> w) {
  auto& tape = tape_of(x);
  require_same_tape(x, w);
  const Shape& xd = x.dims();
  require_rank(w.dims(), 2, "mix_last_axis(w)");
  const std::size_t len = xd.back();
  if (w.dim(0) != len || w.dim(1) != len) {
    throw ShapeError("mix_last_axis: weight " + shape_str(w.dims()) + " for last axis of " +
                     shape_str(xd));
  }
  const std::size_t rows = shape_numel(xd) / len;
  MacCounter::charge(static_cast<std::uint64_t>(rows) * len * len);
  if (any_meta({x, w})) return tape.record(Tensor<T>::meta(xd), {x, w}, nullptr);
  Tensor<T> out(xd);
  const T* xv = x.value().raw();
  const T* wv = w.value().raw();
  for (std::size_t n = 0; n < rows; ++n) {
    const T* src = xv + n * len;
    T* dst = out.raw() + n * len;
    for (std::size_t p = 0; p < len; ++p) {
      T acc = 0;
      for (std::size_t q = 0; q < len; ++q) acc += wv[p * len + q] * src[q];
      dst[p] = acc;
    }
  }
  return tape.record(std::move(out), {x, w}, [x, w, rows, len](Tape<T>& t, const Tensor<T>& g) {
    const T* xv = t.value(x).raw();
    const T* wv = t.value(w).raw();
    if (t.requires_grad(x)) {
      Tensor<T> gx(t.value(x).dims());
      for (std::size_t n = 0; n < rows; ++n) {
        for (std::size_t p = 0; p < len; ++p) {
          const T gp = g[n * len + p];
          for (std::size_t q = 0; q < len; ++q) gx[n * len + q] += wv[p * len + q] * gp;
        }
      }
      t.accumulate(x, std::move(gx));
    }
    if (t.requires_grad(w)) {
      Tensor<T> gw(t.value(w).dims());
      for (std::size_t n = 0; n < rows; ++n) {
        for (std::size_t p = 0; p < len; ++p) {
          const T gp = g[n * len + p];
          for (std::size_t q = 0; q < len; ++q) gw[p * len + q] += gp * xv[n * len + q];
        }
      }
      t.accumulate(w, std::move(gw));
    }
  });
}

template <std::floating_point T>
Var<T> mean_spatial(Var<T> x) {
  require_rank(x.dims(), 4, "mean_spatial");
  const Shape& d = x.dims();
  auto flat = reshape(x, Shape{d[0], d[1], d[2] * d[3]});
  return reshape(mean_axis(flat, 2), Shape{d[0], d[1]});
}

#define ASMLP_INSTANTIATE_OPS(T)                                                        \
  template Var<T> gather(Var<T>, Shape, IndexMap);                                      \
  template Var<T> matmul_channels(Var<T>, Var<T>, Var<T>);                              \
  template Var<T> roll(Var<T>, std::size_t, std::int64_t);                              \
  template Var<T> pad_axis(Var<T>, std::size_t, std::size_t, PadMode);                  \
  template Var<T> pad_spatial(Var<T>, std::size_t, PadMode);                            \
  template Var<T> slice(Var<T>, std::size_t, std::size_t, std::size_t);                 \
  template Var<T> crop_spatial(Var<T>, std::size_t);                                    \
  template std::vector<Var<T>> chunk_channels(Var<T>, std::size_t);                     \
  template Var<T> concat_channels(const std::vector<Var<T>>&);                          \
  template Var<T> add(Var<T>, Var<T>);                                                  \
  template Var<T> sub(Var<T>, Var<T>);                                                  \
  template Var<T> mul(Var<T>, Var<T>);                                                  \
  template Var<T> scale(Var<T>, T);                                                     \
  template Var<T> reshape(Var<T>, Shape);                                               \
  template Var<T> sum(Var<T>);                                                          \
  template Var<T> sum_axis(Var<T>, std::size_t);                                        \
  template Var<T> mean_axis(Var<T>, std::size_t);                                       \
  template Var<T> variance_axis(Var<T>, std::size_t);                                   \
  template Var<T> mix_last_axis(Var<T>, Var<T>);                                        \
  template Var<T> mean_spatial(Var<T>);

ASMLP_INSTANTIATE_OPS(float)
ASMLP_INSTANTIATE_OPS(double)

}  // namespace asmlp
