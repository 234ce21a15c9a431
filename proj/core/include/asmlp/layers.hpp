#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "asmlp/context.hpp"
#include "asmlp/ops.hpp"

namespace asmlp {

/// Parameter roles. Table-style weight-only counts take `weight` entries only.
enum class ParamKind { weight, bias, norm };

template <std::floating_point T>
using ParamVisitor = std::function<void(const std::string& name, Tensor<T>& value, ParamKind kind)>;

template <std::floating_point T>
using ConstParamVisitor =
    std::function<void(const std::string& name, const Tensor<T>& value, ParamKind kind)>;

/// Channel projection weights [out, in] with an optional bias [out].
template <std::floating_point T>
struct Linear {
  Tensor<T> weight;
  Tensor<T> bias;  // empty when bias-free

  bool has_bias() const noexcept { return !bias.empty(); }
  std::size_t in_features() const { return weight.dim(1); }
  std::size_t out_features() const { return weight.dim(0); }
};

template <std::floating_point T>
struct LayerNormParams {
  Tensor<T> gamma;
  Tensor<T> beta;
  double epsilon = 1e-5;

  std::size_t channels() const { return gamma.dim(0); }
};

template <std::floating_point T>
struct MlpParams {
  Linear<T> fc1;  // [r*C, C]
  Linear<T> fc2;  // [C, r*C]
  std::size_t ratio = 4;
};

/// Truncated-normal(0.02) weights, zero bias. `meta` builds shape-only tensors.
template <std::floating_point T>
Linear<T> make_linear(std::size_t in, std::size_t out, bool bias, Rng& rng, bool meta = false);

template <std::floating_point T>
LayerNormParams<T> make_layer_norm(std::size_t channels, bool meta = false, double epsilon = 1e-5);

template <std::floating_point T>
MlpParams<T> make_mlp(std::size_t channels, std::size_t ratio, Rng& rng, bool meta = false);

template <std::floating_point T>
void visit_params(const std::string& prefix, Linear<T>& p, const ParamVisitor<T>& fn);
template <std::floating_point T>
void visit_params(const std::string& prefix, LayerNormParams<T>& p, const ParamVisitor<T>& fn);
template <std::floating_point T>
void visit_params(const std::string& prefix, MlpParams<T>& p, const ParamVisitor<T>& fn);

/// Projection of a [b, C_in, h, w] map through `p`.
template <std::floating_point T>
Var<T> linear(Context<T>& ctx, Var<T> x, const Linear<T>& p);

/// Normalizes over the channel axis (axis 1) of a [b,C,h,w] or [b,C] tensor,
/// independently at every batch element and spatial position.
template <std::floating_point T>
Var<T> layer_norm(Context<T>& ctx, Var<T> x, const LayerNormParams<T>& p);

/// 0.5 x (1 + erf(x / sqrt 2)).
template <std::floating_point T>
Var<T> gelu(Var<T> x);

/// fc1 -> gelu -> fc2.
template <std::floating_point T>
Var<T> mlp_forward(Context<T>& ctx, Var<T> x, const MlpParams<T>& p);

/// Stochastic depth: in training, each sample's branch is zeroed with
/// probability `rate` and survivors are scaled by 1/(1-rate). Identity otherwise.
template <std::floating_point T>
Var<T> drop_path(Var<T> x, double rate, bool training, Rng* rng);

}  // namespace asmlp
