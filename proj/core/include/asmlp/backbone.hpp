#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asmlp/baselines.hpp"

namespace asmlp {

inline constexpr std::size_t kStages = 4;

struct VariantConfig {
  std::string name = "custom";
  std::size_t patch_size = 4;
  std::size_t channels = 96;
  std::array<std::size_t, kStages> depths{2, 2, 6, 2};
  std::size_t mlp_ratio = 4;
  ShiftConfig shift;
  Connection connection = Connection::parallel;
  std::size_t num_classes = 1000;
  double drop_path_max = 0.2;
  /// Replaces every AS-MLP block with a baseline block when set.
  std::optional<BaselineKind> baseline;
  /// Resolution the resolution-bound baselines are built for.
  std::size_t input_size = 224;

  std::size_t stage_channels(std::size_t stage) const { return channels << stage; }
  std::size_t stage_stride(std::size_t stage) const { return patch_size << stage; }
  std::size_t total_blocks() const { return depths[0] + depths[1] + depths[2] + depths[3]; }

  void validate() const;
  /// Checks that an H x W image fits: divisible by patch_size * 8.
  void validate_input(std::size_t height, std::size_t width) const;
};

/// tiny, small, base or mobile.
VariantConfig make_variant(std::string_view name);

template <std::floating_point T>
using Block = BaselineBlock<T>;

template <std::floating_point T>
struct PatchMergingParams {
  LayerNormParams<T> norm;  // over 4C
  Linear<T> reduction;      // 4C -> 2C, no bias
};

template <std::floating_point T>
struct Stage {
  std::optional<PatchMergingParams<T>> merge;
  std::vector<Block<T>> blocks;
};

template <std::floating_point T>
struct ModelParams {
  VariantConfig config;
  Linear<T> embed;  // 3p^2 -> C
  LayerNormParams<T> embed_norm;
  std::array<Stage<T>, kStages> stages;
  LayerNormParams<T> head_norm;
  Linear<T> head;  // C_final -> classes
};

/// Drop-path rate of block `index` (0-based over the whole network): linear
/// from 0 at the first block to drop_path_max at the last.
double drop_path_rate(const VariantConfig& cfg, std::size_t index);

template <std::floating_point T>
ModelParams<T> init_model(const VariantConfig& cfg, Rng& rng, bool meta = false);

template <std::floating_point T>
PatchMergingParams<T> make_patch_merging(std::size_t channels, Rng& rng, bool meta = false);

/// Visits every parameter with a stable dotted name, in a fixed order.
template <std::floating_point T>
void visit_params(ModelParams<T>& model, const ParamVisitor<T>& fn);
template <std::floating_point T>
void visit_params(const ModelParams<T>& model, const ConstParamVisitor<T>& fn);

/// [b,3,H,W] -> [b,3p^2,H/p,W/p]; channel index = (c*p + row)*p + col.
template <std::floating_point T>
Var<T> patch_partition(Var<T> image, std::size_t patch);

/// Inverse of patch_partition for `channels` image channels.
template <std::floating_point T>
Var<T> patch_unpartition(Var<T> tokens, std::size_t patch, std::size_t channels = 3);

/// Concatenates each 2x2 neighbourhood (top-left, top-right, bottom-left,
/// bottom-right) along channels, then LN and a bias-free 4C -> 2C projection.
template <std::floating_point T>
Var<T> patch_merging(Context<T>& ctx, Var<T> x, const PatchMergingParams<T>& p);

/// Just the 2x2 concatenation: [b,C,h,w] -> [b,4C,h/2,w/2].
template <std::floating_point T>
Var<T> merge_neighbourhoods(Var<T> x);

template <std::floating_point T>
Var<T> run_block(Context<T>& ctx, Var<T> x, const Block<T>& block);

template <std::floating_point T>
struct ForwardResult {
  Var<T> logits;                           // [b, classes]
  std::array<Var<T>, kStages> stage_outputs;  // per-stage feature maps
};

template <std::floating_point T>
ForwardResult<T> forward_features(Context<T>& ctx, Var<T> image, const ModelParams<T>& model);

/// image [b,3,H,W] -> logits [b, classes].
template <std::floating_point T>
Var<T> forward(Context<T>& ctx, Var<T> image, const ModelParams<T>& model);

}  // namespace asmlp
