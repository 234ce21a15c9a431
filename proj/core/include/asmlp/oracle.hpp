#pragma once

// Reference implementations written as plain loops over raw buffers. They
// share no code with the differentiable ops and exist only to check them.

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "asmlp/axial_shift.hpp"

namespace asmlp::oracle {

/// Index-map axial shift: output channel c at position j along `axis` reads
/// j - (floor(c / ceil(C/s)) - floor(s/2)) * d; out-of-range reads are 0
/// (zero), clamped (replicate), mirrored (reflect) or wrapped (circular).
Tensor<double> shift(const Tensor<double>& x, Axis axis, const ShiftConfig& cfg);

/// y[b,o,i,j] = sum_c w[o,c] x[b,c,i,j] + bias[o].
Tensor<double> matmul_channels(const Tensor<double>& x, const Tensor<double>& w,
                               const Tensor<double>& bias = {});

/// Normalizes over the channel axis of [b,C] or [b,C,h,w]; biased variance.
Tensor<double> layer_norm(const Tensor<double>& x, const Tensor<double>& gamma,
                          const Tensor<double>& beta, double eps);

Tensor<double> gelu(const Tensor<double>& x);

/// out[b,c,p] = sum_q W[p,q] x[b,c,q] over flattened h*w positions.
Tensor<double> global_mix(const Tensor<double>& x, const Tensor<double>& w);
/// Rows mixed by w_h[w,w], columns by w_v[h,h]; parallel sums, serial composes rows then columns.
Tensor<double> axial_mix(const Tensor<double>& x, const Tensor<double>& w_h,
                         const Tensor<double>& w_v, bool parallel);
/// Non-overlapping m x m windows, positions flattened row-major inside a window.
Tensor<double> window_mix(const Tensor<double>& x, const Tensor<double>& w, std::size_t m);

/// Mean over rows of -sum_k q_k log softmax(logits)_k.
double smoothed_cross_entropy(const Tensor<double>& logits, const std::vector<std::size_t>& targets,
                              double smoothing);

using Offsets = std::set<std::pair<int, int>>;

/// Cross of offsets (k*d, 0) and (0, k*d) for |k| <= floor(s/2) on each axis.
Offsets cross(const ShiftConfig& cfg);
Offsets minkowski_sum(const Offsets& a, const Offsets& b);

/// Central difference of `f` with respect to `entry`, which is restored afterwards.
double central_difference(const std::function<double()>& f, double& entry, double step);

}  // namespace asmlp::oracle
