#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "asmlp/tape.hpp"
#include "asmlp/tensor.hpp"

// Differentiable primitives over Var. Feature maps are channels-first
// [batch, C, h, w]; projection weights are [C_out, C_in].

namespace asmlp {

enum class PadMode { zero, reflect, replicate };

std::string_view to_string(PadMode mode);
PadMode parse_pad_mode(std::string_view name);

/// Per-position channel projection: out[b,:,i,j] = w * x[b,:,i,j] + bias.
/// `bias` may be an invalid Var for a bias-free projection. Charges b*h*w*C_out*C_in MACs.
template <std::floating_point T>
Var<T> matmul_channels(Var<T> x, Var<T> w, Var<T> bias = {});

/// out[..., i, ...] = x[..., (i - offset) mod len, ...] along `axis`.
template <std::floating_point T>
Var<T> roll(Var<T> x, std::size_t axis, std::int64_t offset);

/// Pads both spatial axes (2 and 3) of a 4-axis tensor by `amount` on each side.
template <std::floating_point T>
Var<T> pad_spatial(Var<T> x, std::size_t amount, PadMode mode);

/// Pads one axis by `amount` on each side.
template <std::floating_point T>
Var<T> pad_axis(Var<T> x, std::size_t axis, std::size_t amount, PadMode mode);

/// Removes `amount` from each side of both spatial axes.
template <std::floating_point T>
Var<T> crop_spatial(Var<T> x, std::size_t amount);

/// Keeps [begin, begin + length) along `axis`.
template <std::floating_point T>
Var<T> slice(Var<T> x, std::size_t axis, std::size_t begin, std::size_t length);

/// Splits the channel axis into groups of ceil(C/parts) channels; the trailing
/// group holds the remainder. Fewer than `parts` groups come back when the
/// ceil-sized groups exhaust C early (e.g. C=16, parts=7 gives six groups).
template <std::floating_point T>
std::vector<Var<T>> chunk_channels(Var<T> x, std::size_t parts);

template <std::floating_point T>
Var<T> concat_channels(const std::vector<Var<T>>& parts);

template <std::floating_point T>
Var<T> add(Var<T> a, Var<T> b);

template <std::floating_point T>
Var<T> sub(Var<T> a, Var<T> b);

template <std::floating_point T>
Var<T> mul(Var<T> a, Var<T> b);

template <std::floating_point T>
Var<T> scale(Var<T> x, T factor);

template <std::floating_point T>
Var<T> reshape(Var<T> x, Shape dims);

/// Sum of all elements, shape [1].
template <std::floating_point T>
Var<T> sum(Var<T> x);

/// Reductions along one axis; the axis is kept with length 1.
template <std::floating_point T>
Var<T> sum_axis(Var<T> x, std::size_t axis);

template <std::floating_point T>
Var<T> mean_axis(Var<T> x, std::size_t axis);

/// Population variance along one axis (divides by the axis length).
template <std::floating_point T>
Var<T> variance_axis(Var<T> x, std::size_t axis);

/// Mean over both spatial axes: [b,C,h,w] -> [b,C].
template <std::floating_point T>
Var<T> mean_spatial(Var<T> x);

/// Linear mixing along the last axis: out[n, p] = sum_q w[p, q] x[n, q] for
/// x viewed as [N, L] and w of shape [L, L]. Charges N*L*L MACs.
template <std::floating_point T>
Var<T> mix_last_axis(Var<T> x, Var<T> w);

/// Index map for gather: out[i] = src[i] < 0 ? 0 : x[src[i]].
using IndexMap = std::shared_ptr<const std::vector<std::int64_t>>;

/// Generic data movement. Backward scatter-adds, so repeated reads of one
/// source element (replicate/reflect padding) accumulate correctly.
template <std::floating_point T>
Var<T> gather(Var<T> x, Shape out_dims, IndexMap src);

}  // namespace asmlp
