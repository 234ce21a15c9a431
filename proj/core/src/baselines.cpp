#include "asmlp/baselines.hpp"

#include <stdexcept>

namespace asmlp {

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::global_mlp: return "global";
    case BaselineKind::axial_mlp: return "axial";
    case BaselineKind::window_mlp: return "window";
    case BaselineKind::shift_5_1: return "shift-5-1";
    case BaselineKind::shift_1_5: return "shift-1-5";
  }
  return "?";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "global") return BaselineKind::global_mlp;
  if (name == "axial") return BaselineKind::axial_mlp;
  if (name == "window") return BaselineKind::window_mlp;
  if (name == "shift-5-1") return BaselineKind::shift_5_1;
  if (name == "shift-1-5") return BaselineKind::shift_1_5;
  throw std::invalid_argument("unknown baseline kind '" + std::string(name) + "'");
}

namespace {

void require_map(const Shape& d, const char* op) {
  if (d.size() != 4) throw ShapeError(std::string(op) + ": expected [b,C,h,w], got " + shape_str(d));
}

// [b,C,h,w] -> [b,C,w,h]
template <std::floating_point T>
Var<T> swap_hw(Var<T> x) {
  const Shape& d = x.dims();
  const std::size_t planes = d[0] * d[1], h = d[2], w = d[3];
  auto map = std::make_shared<std::vector<std::int64_t>>(planes * h * w);
  std::size_t k = 0;
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t i = 0; i < h; ++i) (*map)[k++] = static_cast<std::int64_t>((p * h + i) * w + j);
    }
  }
  return gather(x, Shape{d[0], d[1], w, h}, std::move(map));
}

// [b,C,h,w] <-> [b,C,(h/M)*(w/M),M*M]; `to_windows` picks the direction.
template <std::floating_point T>
Var<T> window_layout(Var<T> x, const Shape& map_dims, std::size_t m, bool to_windows) {
  const std::size_t planes = map_dims[0] * map_dims[1], h = map_dims[2], w = map_dims[3];
  const std::size_t nh = h / m, nw = w / m;
  auto map = std::make_shared<std::vector<std::int64_t>>(planes * h * w);
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t wi = 0; wi < nh; ++wi) {
      for (std::size_t wj = 0; wj < nw; ++wj) {
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < m; ++c) {
            const std::size_t spatial = p * h * w + (wi * m + r) * w + (wj * m + c);
            const std::size_t windowed = ((p * nh + wi) * nw + wj) * m * m + r * m + c;
            if (to_windows) {
              (*map)[windowed] = static_cast<std::int64_t>(spatial);
            } else {
              (*map)[spatial] = static_cast<std::int64_t>(windowed);
            }
          }
        }
      }
    }
  }
  Shape out = to_windows ? Shape{map_dims[0], map_dims[1], nh * nw, m * m} : map_dims;
  return gather(x, std::move(out), std::move(map));
}

std::string res_str(std::size_t h, std::size_t w) {
  return std::to_string(h) + "x" + std::to_string(w);
}

}  // namespace

template <std::floating_point T>
Var<T> global_token_mix(Context<T>& ctx, Var<T> x, const GlobalMixParams<T>& p) {
  const Shape d = x.dims();
  require_map(d, "global_token_mix");
  if (d[2] != p.height || d[3] != p.width) {
    throw ResolutionMismatch("global_token_mix: mixer built for " + res_str(p.height, p.width) +
                             " cannot take a " + res_str(d[2], d[3]) + " feature map");
  }
  Var<T> flat = reshape(x, Shape{d[0], d[1], d[2] * d[3]});
  return reshape(mix_last_axis(flat, ctx.param(p.mixer)), d);
}

template <std::floating_point T>
Var<T> axial_token_mix(Context<T>& ctx, Var<T> x, const AxialMixParams<T>& p) {
  const Shape d = x.dims();
  require_map(d, "axial_token_mix");
  if (d[2] != p.height || d[3] != p.width) {
    throw ResolutionMismatch("axial_token_mix: mixer built for " + res_str(p.height, p.width) +
                             " cannot take a " + res_str(d[2], d[3]) + " feature map");
  }
  auto rows = [&](Var<T> v) { return mix_last_axis(v, ctx.param(p.w_h)); };
  auto cols = [&](Var<T> v) { return swap_hw(mix_last_axis(swap_hw(v), ctx.param(p.w_v))); };
  if (p.connection == Connection::parallel) return add(rows(x), cols(x));
  return cols(rows(x));
}

template <std::floating_point T>
Var<T> window_token_mix(Context<T>& ctx, Var<T> x, const WindowMixParams<T>& p) {
  const Shape d = x.dims();
  require_map(d, "window_token_mix");
  const std::size_t m = p.window;
  if (m == 0 || d[2] % m != 0 || d[3] % m != 0) {
    throw ResolutionMismatch("window_token_mix: " + res_str(d[2], d[3]) +
                             " is not divisible into " + res_str(m, m) + " windows");
  }
  Var<T> win = window_layout(x, d, m, true);
  Var<T> mixed = mix_last_axis(win, ctx.param(p.w_win));
  return window_layout(mixed, d, m, false);
}

template <std::floating_point T>
Var<T> token_mix_block(Context<T>& ctx, Var<T> x, const TokenMixBlockParams<T>& p) {
  Var<T> h = layer_norm(ctx, x, p.norm1);
  Var<T> mixed = std::visit(
      [&](const auto& mix) -> Var<T> {
        using M = std::decay_t<decltype(mix)>;
        if constexpr (std::is_same_v<M, GlobalMixParams<T>>) return global_token_mix(ctx, h, mix);
        if constexpr (std::is_same_v<M, AxialMixParams<T>>) return axial_token_mix(ctx, h, mix);
        if constexpr (std::is_same_v<M, WindowMixParams<T>>) return window_token_mix(ctx, h, mix);
      },
      p.mix);
  x = add(x, drop_path(mixed, p.drop_path, ctx.training(), ctx.rng()));
  Var<T> mlp = mlp_forward(ctx, layer_norm(ctx, x, p.norm2), p.mlp);
  return add(x, drop_path(mlp, p.drop_path, ctx.training(), ctx.rng()));
}

template <std::floating_point T>
BaselineBlock<T> make_baseline_block(BaselineKind kind, std::size_t height, std::size_t width,
                                     std::size_t channels, Rng& rng, bool meta,
                                     std::size_t mlp_ratio, double drop_path) {
  if (kind == BaselineKind::shift_5_1 || kind == BaselineKind::shift_1_5) {
    BlockConfig cfg;
    cfg.channels = channels;
    cfg.shift.shift_h = kind == BaselineKind::shift_5_1 ? 5 : 1;
    cfg.shift.shift_v = kind == BaselineKind::shift_5_1 ? 1 : 5;
    cfg.mlp_ratio = mlp_ratio;
    cfg.drop_path = drop_path;
    return make_as_mlp_block<T>(cfg, rng, meta);
  }
  auto square = [&](std::size_t n) {
    return meta ? Tensor<T>::meta({n, n}) : trunc_normal<T>({n, n}, rng);
  };
  TokenMixBlockParams<T> p;
  p.kind = kind;
  p.norm1 = make_layer_norm<T>(channels, meta);
  switch (kind) {
    case BaselineKind::global_mlp:
      p.mix = GlobalMixParams<T>{square(height * width), height, width};
      break;
    case BaselineKind::axial_mlp:
      p.mix = AxialMixParams<T>{square(width), square(height), height, width, Connection::parallel};
      break;
    case BaselineKind::window_mlp: {
      constexpr std::size_t kWindow = 7;
      if (height % kWindow != 0 || width % kWindow != 0) {
        throw ResolutionMismatch("window baseline: " + res_str(height, width) +
                                 " is not divisible into 7x7 windows");
      }
      p.mix = WindowMixParams<T>{square(kWindow * kWindow), kWindow};
      break;
    }
    default: break;
  }
  p.norm2 = make_layer_norm<T>(channels, meta);
  p.mlp = make_mlp<T>(channels, mlp_ratio, rng, meta);
  p.drop_path = drop_path;
  return p;
}

template <std::floating_point T>
void visit_params(const std::string& prefix, TokenMixBlockParams<T>& p, const ParamVisitor<T>& fn) {
  visit_params(prefix + ".norm1", p.norm1, fn);
  std::visit(
      [&](auto& mix) {
        using M = std::decay_t<decltype(mix)>;
        if constexpr (std::is_same_v<M, GlobalMixParams<T>>) {
          fn(prefix + ".mix.global", mix.mixer, ParamKind::weight);
        } else if constexpr (std::is_same_v<M, AxialMixParams<T>>) {
          fn(prefix + ".mix.w_h", mix.w_h, ParamKind::weight);
          fn(prefix + ".mix.w_v", mix.w_v, ParamKind::weight);
        } else {
          fn(prefix + ".mix.window", mix.w_win, ParamKind::weight);
        }
      },
      p.mix);
  visit_params(prefix + ".norm2", p.norm2, fn);
  visit_params(prefix + ".mlp", p.mlp, fn);
}

#define ASMLP_INSTANTIATE_BASELINES(T)                                                             \
  template Var<T> global_token_mix(Context<T>&, Var<T>, const GlobalMixParams<T>&);                \
  template Var<T> axial_token_mix(Context<T>&, Var<T>, const AxialMixParams<T>&);                  \
  template Var<T> window_token_mix(Context<T>&, Var<T>, const WindowMixParams<T>&);                \
  template Var<T> token_mix_block(Context<T>&, Var<T>, const TokenMixBlockParams<T>&);             \
  template BaselineBlock<T> make_baseline_block(BaselineKind, std::size_t, std::size_t,            \
                                                std::size_t, Rng&, bool, std::size_t, double);     \
  template void visit_params(const std::string&, TokenMixBlockParams<T>&, const ParamVisitor<T>&);

ASMLP_INSTANTIATE_BASELINES(float)
ASMLP_INSTANTIATE_BASELINES(double)

}  // namespace asmlp
