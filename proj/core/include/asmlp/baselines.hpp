#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

#include "asmlp/axial_shift.hpp"

// Spatial-mixing baselines that replace the axial shift unit inside the same
// pre-norm / residual / MLP block skeleton.

namespace asmlp {

/// Raised when a resolution-bound mixer sees a feature map of another size.
class ResolutionMismatch : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

enum class BaselineKind { global_mlp, axial_mlp, window_mlp, shift_5_1, shift_1_5 };

std::string_view to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view name);

/// Token-mixing over all h*w positions: W is [hw, hw].
template <std::floating_point T>
struct GlobalMixParams {
  Tensor<T> mixer;
  std::size_t height = 0, width = 0;
};

/// Row mixing W_h [w, w] and column mixing W_v [h, h].
template <std::floating_point T>
struct AxialMixParams {
  Tensor<T> w_h;
  Tensor<T> w_v;
  std::size_t height = 0, width = 0;
  Connection connection = Connection::parallel;
};

/// One [M*M, M*M] matrix shared by every non-overlapping M x M window.
template <std::floating_point T>
struct WindowMixParams {
  Tensor<T> w_win;
  std::size_t window = 7;
};

template <std::floating_point T>
using TokenMixParams = std::variant<GlobalMixParams<T>, AxialMixParams<T>, WindowMixParams<T>>;

/// out[b,c,p] = sum_q W[p,q] x[b,c,q] over flattened positions p = i*w + j.
template <std::floating_point T>
Var<T> global_token_mix(Context<T>& ctx, Var<T> x, const GlobalMixParams<T>& p);

/// Sum (parallel) or composition (serial: rows then columns) of row and column mixing.
template <std::floating_point T>
Var<T> axial_token_mix(Context<T>& ctx, Var<T> x, const AxialMixParams<T>& p);

template <std::floating_point T>
Var<T> window_token_mix(Context<T>& ctx, Var<T> x, const WindowMixParams<T>& p);

template <std::floating_point T>
struct TokenMixBlockParams {
  BaselineKind kind = BaselineKind::global_mlp;
  LayerNormParams<T> norm1;
  TokenMixParams<T> mix;
  LayerNormParams<T> norm2;
  MlpParams<T> mlp;
  double drop_path = 0.0;
};

/// x + drop_path(mix(LN(x))), then x + drop_path(mlp(LN(x))).
template <std::floating_point T>
Var<T> token_mix_block(Context<T>& ctx, Var<T> x, const TokenMixBlockParams<T>& p);

template <std::floating_point T>
using BaselineBlock = std::variant<AsMlpBlockParams<T>, TokenMixBlockParams<T>>;

/// Builds the baseline block for a stage of `channels` at `height` x `width`.
/// Shift kinds reuse the axial shift unit with s=(5,1) or (1,5); the window
/// kind uses M = 7.
template <std::floating_point T>
BaselineBlock<T> make_baseline_block(BaselineKind kind, std::size_t height, std::size_t width,
                                     std::size_t channels, Rng& rng, bool meta = false,
                                     std::size_t mlp_ratio = 4, double drop_path = 0.0);

template <std::floating_point T>
void visit_params(const std::string& prefix, TokenMixBlockParams<T>& p, const ParamVisitor<T>& fn);

}  // namespace asmlp
