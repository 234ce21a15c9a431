#include "asmlp/backbone.hpp"

#include <stdexcept>

namespace asmlp {

void VariantConfig::validate() const {
  if (patch_size == 0) throw std::invalid_argument("variant: patch size must be positive");
  if (channels == 0) throw std::invalid_argument("variant: channels must be positive");
  if (mlp_ratio == 0) throw std::invalid_argument("variant: mlp ratio must be positive");
  if (num_classes == 0) throw std::invalid_argument("variant: need at least one class");
  for (std::size_t d : depths) {
    if (d == 0) throw std::invalid_argument("variant: every stage needs at least one block");
  }
  if (!(drop_path_max >= 0.0 && drop_path_max < 1.0)) {
    throw std::invalid_argument("variant: drop_path_max outside [0, 1)");
  }
  if (!baseline) shift.validate(channels);
}

void VariantConfig::validate_input(std::size_t height, std::size_t width) const {
  const std::size_t step = patch_size * 8;
  if (height == 0 || width == 0 || height % step != 0 || width % step != 0) {
    throw ShapeError("input " + std::to_string(height) + "x" + std::to_string(width) +
                     " is not divisible by patch size x 8 = " + std::to_string(step));
  }
}

VariantConfig make_variant(std::string_view name) {
  VariantConfig v;
  v.name = std::string(name);
  if (name == "tiny") {
    v.channels = 96;
    v.depths = {2, 2, 6, 2};
    v.drop_path_max = 0.2;
  } else if (name == "small") {
    v.channels = 96;
    v.depths = {2, 2, 18, 2};
    v.drop_path_max = 0.3;
  } else if (name == "base") {
    v.channels = 128;
    v.depths = {2, 2, 18, 2};
    v.drop_path_max = 0.5;
  } else if (name == "mobile") {
    v.channels = 64;
    v.depths = {2, 2, 2, 2};
    v.drop_path_max = 0.1;
  } else {
    throw std::invalid_argument("unknown variant '" + std::string(name) +
                                "' (expected tiny, small, base or mobile)");
  }
  return v;
}

double drop_path_rate(const VariantConfig& cfg, std::size_t index) {
  const std::size_t n = cfg.total_blocks();
  if (n <= 1) return 0.0;
  return cfg.drop_path_max * static_cast<double>(index) / static_cast<double>(n - 1);
}

template <std::floating_point T>
PatchMergingParams<T> make_patch_merging(std::size_t channels, Rng& rng, bool meta) {
  PatchMergingParams<T> p;
  p.norm = make_layer_norm<T>(4 * channels, meta);
  p.reduction = make_linear<T>(4 * channels, 2 * channels, false, rng, meta);
  return p;
}

template <std::floating_point T>
ModelParams<T> init_model(const VariantConfig& cfg, Rng& rng, bool meta) {
  cfg.validate();
  ModelParams<T> m;
  m.config = cfg;
  const std::size_t p = cfg.patch_size;
  m.embed = make_linear<T>(3 * p * p, cfg.channels, true, rng, meta);
  m.embed_norm = make_layer_norm<T>(cfg.channels, meta);
  std::size_t index = 0;
  for (std::size_t s = 0; s < kStages; ++s) {
    const std::size_t c = cfg.stage_channels(s);
    if (s > 0) m.stages[s].merge = make_patch_merging<T>(cfg.stage_channels(s - 1), rng, meta);
    const std::size_t res = cfg.input_size / cfg.stage_stride(s);
    for (std::size_t b = 0; b < cfg.depths[s]; ++b, ++index) {
      const double rate = drop_path_rate(cfg, index);
      if (cfg.baseline) {
        m.stages[s].blocks.push_back(
            make_baseline_block<T>(*cfg.baseline, res, res, c, rng, meta, cfg.mlp_ratio, rate));
      } else {
        BlockConfig bc{c, cfg.shift, cfg.connection, cfg.mlp_ratio, rate};
        m.stages[s].blocks.push_back(make_as_mlp_block<T>(bc, rng, meta));
      }
    }
  }
  const std::size_t final_c = cfg.stage_channels(kStages - 1);
  m.head_norm = make_layer_norm<T>(final_c, meta);
  m.head = make_linear<T>(final_c, cfg.num_classes, true, rng, meta);
  return m;
}

template <std::floating_point T>
void visit_params(ModelParams<T>& model, const ParamVisitor<T>& fn) {
  visit_params(std::string("embed.proj"), model.embed, fn);
  visit_params(std::string("embed.norm"), model.embed_norm, fn);
  for (std::size_t s = 0; s < kStages; ++s) {
    const std::string stage = "stages." + std::to_string(s);
    auto& st = model.stages[s];
    if (st.merge) {
      visit_params(stage + ".merge.norm", st.merge->norm, fn);
      visit_params(stage + ".merge.reduction", st.merge->reduction, fn);
    }
    for (std::size_t b = 0; b < st.blocks.size(); ++b) {
      const std::string name = stage + ".blocks." + std::to_string(b);
      std::visit([&](auto& blk) { visit_params(name, blk, fn); }, st.blocks[b]);
    }
  }
  visit_params(std::string("head.norm"), model.head_norm, fn);
  visit_params(std::string("head.proj"), model.head, fn);
}

template <std::floating_point T>
void visit_params(const ModelParams<T>& model, const ConstParamVisitor<T>& fn) {
  // Visiting never mutates; the mutable walker is reused for the traversal order.
  visit_params(const_cast<ModelParams<T>&>(model),
               ParamVisitor<T>([&](const std::string& n, Tensor<T>& t, ParamKind k) { fn(n, t, k); }));
}

template <std::floating_point T>
Var<T> patch_partition(Var<T> image, std::size_t patch) {
  const Shape d = image.dims();
  if (d.size() != 4) throw ShapeError("patch_partition: expected [b,C,H,W], got " + shape_str(d));
  if (patch == 0 || d[2] % patch != 0 || d[3] % patch != 0) {
    throw ShapeError("patch_partition: " + shape_str(d) + " is not divisible into " +
                     std::to_string(patch) + "x" + std::to_string(patch) + " patches");
  }
  const std::size_t batch = d[0], ch = d[1], gh = d[2] / patch, gw = d[3] / patch;
  Shape out{batch, ch * patch * patch, gh, gw};
  auto map = std::make_shared<std::vector<std::int64_t>>(shape_numel(out));
  std::size_t k = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t r = 0; r < patch; ++r) {
        for (std::size_t q = 0; q < patch; ++q) {
          for (std::size_t i = 0; i < gh; ++i) {
            for (std::size_t j = 0; j < gw; ++j) {
              (*map)[k++] = static_cast<std::int64_t>(((b * ch + c) * d[2] + i * patch + r) * d[3] +
                                                      j * patch + q);
            }
          }
        }
      }
    }
  }
  return gather(image, std::move(out), std::move(map));
}

template <std::floating_point T>
Var<T> patch_unpartition(Var<T> tokens, std::size_t patch, std::size_t channels) {
  const Shape d = tokens.dims();
  if (d.size() != 4 || patch == 0 || d[1] != channels * patch * patch) {
    throw ShapeError("patch_unpartition: " + shape_str(d) + " does not hold " +
                     std::to_string(channels) + " channels of " + std::to_string(patch) + "x" +
                     std::to_string(patch) + " patches");
  }
  const std::size_t batch = d[0], gh = d[2], gw = d[3], H = gh * patch, W = gw * patch;
  Shape out{batch, channels, H, W};
  auto map = std::make_shared<std::vector<std::int64_t>>(shape_numel(out));
  std::size_t k = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
          const std::size_t tc = (c * patch + y % patch) * patch + x % patch;
          (*map)[k++] = static_cast<std::int64_t>(((b * d[1] + tc) * gh + y / patch) * gw + x / patch);
        }
      }
    }
  }
  return gather(tokens, std::move(out), std::move(map));
}

template <std::floating_point T>
Var<T> merge_neighbourhoods(Var<T> x) {
  const Shape d = x.dims();
  if (d.size() != 4 || d[2] % 2 != 0 || d[3] % 2 != 0) {
    throw ShapeError("patch_merging: needs even spatial dims, got " + shape_str(d));
  }
  const std::size_t batch = d[0], ch = d[1], h2 = d[2] / 2, w2 = d[3] / 2;
  Shape out{batch, 4 * ch, h2, w2};
  auto map = std::make_shared<std::vector<std::int64_t>>(shape_numel(out));
  constexpr std::size_t kOffsets[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::size_t k = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (const auto& off : kOffsets) {
      for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t i = 0; i < h2; ++i) {
          for (std::size_t j = 0; j < w2; ++j) {
            (*map)[k++] = static_cast<std::int64_t>(((b * ch + c) * d[2] + 2 * i + off[0]) * d[3] +
                                                    2 * j + off[1]);
          }
        }
      }
    }
  }
  return gather(x, std::move(out), std::move(map));
}

template <std::floating_point T>
Var<T> patch_merging(Context<T>& ctx, Var<T> x, const PatchMergingParams<T>& p) {
  return linear(ctx, layer_norm(ctx, merge_neighbourhoods(x), p.norm), p.reduction);
}

template <std::floating_point T>
Var<T> run_block(Context<T>& ctx, Var<T> x, const Block<T>& block) {
  return std::visit(
      [&](const auto& blk) -> Var<T> {
        using B = std::decay_t<decltype(blk)>;
        if constexpr (std::is_same_v<B, AsMlpBlockParams<T>>) {
          return as_mlp_block(ctx, x, blk);
        } else {
          return token_mix_block(ctx, x, blk);
        }
      },
      block);
}

template <std::floating_point T>
ForwardResult<T> forward_features(Context<T>& ctx, Var<T> image, const ModelParams<T>& model) {
  const auto& cfg = model.config;
  const Shape& d = image.dims();
  if (d.size() != 4 || d[1] != 3) {
    throw ShapeError("forward: expected an image batch [b,3,H,W], got " + shape_str(d));
  }
  cfg.validate_input(d[2], d[3]);
  if (model.head.out_features() != cfg.num_classes) {
    throw ShapeError("forward: head has " + std::to_string(model.head.out_features()) +
                     " outputs but the config declares " + std::to_string(cfg.num_classes) +
                     " classes");
  }
  ForwardResult<T> r;
  ctx.mark(0, "linear-embedding");
  Var<T> x = patch_partition(image, cfg.patch_size);
  x = layer_norm(ctx, linear(ctx, x, model.embed), model.embed_norm);
  for (std::size_t s = 0; s < kStages; ++s) {
    const auto& st = model.stages[s];
    if (st.merge) {
      ctx.mark(s, "patch-merging");
      x = patch_merging(ctx, x, *st.merge);
    }
    ctx.mark(s, "blocks");
    for (const auto& blk : st.blocks) x = run_block(ctx, x, blk);
    r.stage_outputs[s] = x;
  }
  ctx.mark(kStages - 1, "head");
  x = mean_spatial(layer_norm(ctx, x, model.head_norm));
  const std::size_t batch = x.dim(0), c = x.dim(1);
  x = linear(ctx, reshape(x, Shape{batch, c, 1, 1}), model.head);
  r.logits = reshape(x, Shape{batch, cfg.num_classes});
  ctx.mark(kStages - 1, "end");
  return r;
}

template <std::floating_point T>
Var<T> forward(Context<T>& ctx, Var<T> image, const ModelParams<T>& model) {
  return forward_features(ctx, image, model).logits;
}

#define ASMLP_INSTANTIATE_BACKBONE(T)                                                      \
  template PatchMergingParams<T> make_patch_merging(std::size_t, Rng&, bool);              \
  template ModelParams<T> init_model(const VariantConfig&, Rng&, bool);                    \
  template void visit_params(ModelParams<T>&, const ParamVisitor<T>&);                     \
  template void visit_params(const ModelParams<T>&, const ConstParamVisitor<T>&);          \
  template Var<T> patch_partition(Var<T>, std::size_t);                                    \
  template Var<T> patch_unpartition(Var<T>, std::size_t, std::size_t);                     \
  template Var<T> merge_neighbourhoods(Var<T>);                                            \
  template Var<T> patch_merging(Context<T>&, Var<T>, const PatchMergingParams<T>&);        \
  template Var<T> run_block(Context<T>&, Var<T>, const Block<T>&);                         \
  template ForwardResult<T> forward_features(Context<T>&, Var<T>, const ModelParams<T>&);  \
  template Var<T> forward(Context<T>&, Var<T>, const ModelParams<T>&);

ASMLP_INSTANTIATE_BACKBONE(float)
ASMLP_INSTANTIATE_BACKBONE(double)

}  // namespace asmlp
