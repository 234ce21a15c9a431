#include "asmlp/axial_shift.hpp"

#include <sstream>
#include <stdexcept>

namespace asmlp {

std::string_view to_string(ShiftPadding p) {
  switch (p) {
    case ShiftPadding::zero: return "zero";
    case ShiftPadding::circular: return "circular";
    case ShiftPadding::reflect: return "reflect";
    case ShiftPadding::replicate: return "replicate";
  }
  return "?";
}

std::string_view to_string(Connection c) {
  return c == Connection::parallel ? "parallel" : "serial";
}

ShiftPadding parse_shift_padding(std::string_view name) {
  if (name == "zero") return ShiftPadding::zero;
  if (name == "circular" || name == "none") return ShiftPadding::circular;
  if (name == "reflect") return ShiftPadding::reflect;
  if (name == "replicate") return ShiftPadding::replicate;
  throw std::invalid_argument("unknown shift padding '" + std::string(name) + "'");
}

Connection parse_connection(std::string_view name) {
  if (name == "parallel") return Connection::parallel;
  if (name == "serial") return Connection::serial;
  throw std::invalid_argument("unknown connection '" + std::string(name) + "'");
}

void ShiftConfig::validate() const {
  for (std::size_t s : {shift_h, shift_v}) {
    if (s == 0 || s % 2 == 0) {
      throw std::invalid_argument("shift size must be odd and positive, got " + std::to_string(s));
    }
  }
  if (dilation == 0) throw std::invalid_argument("shift dilation must be >= 1");
}

void ShiftConfig::validate(std::size_t channels) const {
  validate();
  for (std::size_t s : {shift_h, shift_v}) {
    if (s > channels) {
      throw std::invalid_argument("shift size " + std::to_string(s) + " exceeds " +
                                  std::to_string(channels) + " channels");
    }
  }
}

std::string describe(const ShiftConfig& cfg) {
  std::ostringstream os;
  os << "s=(" << cfg.shift_h << "," << cfg.shift_v << ") d=" << cfg.dilation
     << " pad=" << to_string(cfg.padding);
  return os.str();
}

template <std::floating_point T>
Var<T> shift(Var<T> x, Axis axis, const ShiftConfig& cfg) {
  const Shape& dims = x.dims();
  if (dims.size() != 4) throw ShapeError("shift: expected [b,C,h,w], got " + shape_str(dims));
  const std::size_t s = cfg.size(axis);
  if (s == 0 || s % 2 == 0) {
    throw std::invalid_argument("shift size must be odd and positive, got " + std::to_string(s));
  }
  if (cfg.dilation == 0) throw std::invalid_argument("shift dilation must be >= 1");
  if (s > dims[1]) {
    throw std::invalid_argument("shift size " + std::to_string(s) + " exceeds " +
                                std::to_string(dims[1]) + " channels");
  }

  const std::size_t ax = axis == Axis::height ? 2 : 3;
  const std::size_t extent = dims[ax];
  const std::size_t pad = cfg.reach(axis);
  const auto half = static_cast<std::int64_t>(s / 2);
  const auto d = static_cast<std::int64_t>(cfg.dilation);

  Var<T> y = x;
  if (cfg.padding != ShiftPadding::circular) {
    const PadMode mode = cfg.padding == ShiftPadding::zero      ? PadMode::zero
                         : cfg.padding == ShiftPadding::reflect ? PadMode::reflect
                                                                : PadMode::replicate;
    if (mode == PadMode::reflect && pad >= extent) {
      throw ShapeError("shift: reflect padding needs floor(s/2)*d = " + std::to_string(pad) +
                       " < extent " + std::to_string(extent));
    }
    y = pad_axis(x, ax, pad, mode);
  }
  auto groups = chunk_channels(y, s);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::int64_t offset = (static_cast<std::int64_t>(g) - half) * d;
    groups[g] = roll(groups[g], ax, offset);
  }
  Var<T> z = concat_channels(groups);
  if (cfg.padding != ShiftPadding::circular) z = slice(z, ax, pad, extent);
  return z;
}

template <std::floating_point T>
AxialShiftUnitParams<T> make_axial_shift_unit(std::size_t channels, const ShiftConfig& cfg,
                                              Connection connection, Rng& rng, bool meta) {
  cfg.validate(channels);
  AxialShiftUnitParams<T> p;
  p.norm1 = make_layer_norm<T>(channels, meta);
  p.proj_in = make_linear<T>(channels, channels, true, rng, meta);
  p.norm_in = make_layer_norm<T>(channels, meta);
  p.proj_h = make_linear<T>(channels, channels, true, rng, meta);
  p.proj_v = make_linear<T>(channels, channels, true, rng, meta);
  p.norm_out = make_layer_norm<T>(channels, meta);
  p.proj_out = make_linear<T>(channels, channels, true, rng, meta);
  p.shift = cfg;
  p.connection = connection;
  return p;
}

template <std::floating_point T>
AsMlpBlockParams<T> make_as_mlp_block(const BlockConfig& cfg, Rng& rng, bool meta) {
  AsMlpBlockParams<T> p;
  p.unit = make_axial_shift_unit<T>(cfg.channels, cfg.shift, cfg.connection, rng, meta);
  p.norm2 = make_layer_norm<T>(cfg.channels, meta);
  p.mlp = make_mlp<T>(cfg.channels, cfg.mlp_ratio, rng, meta);
  if (!(cfg.drop_path >= 0.0 && cfg.drop_path < 1.0)) {
    throw std::invalid_argument("block: drop_path rate outside [0, 1)");
  }
  p.drop_path = cfg.drop_path;
  return p;
}

template <std::floating_point T>
void visit_params(const std::string& prefix, AxialShiftUnitParams<T>& p, const ParamVisitor<T>& fn) {
  visit_params(prefix + ".norm1", p.norm1, fn);
  visit_params(prefix + ".proj_in", p.proj_in, fn);
  visit_params(prefix + ".norm_in", p.norm_in, fn);
  visit_params(prefix + ".proj_h", p.proj_h, fn);
  visit_params(prefix + ".proj_v", p.proj_v, fn);
  visit_params(prefix + ".norm_out", p.norm_out, fn);
  visit_params(prefix + ".proj_out", p.proj_out, fn);
}

template <std::floating_point T>
void visit_params(const std::string& prefix, AsMlpBlockParams<T>& p, const ParamVisitor<T>& fn) {
  visit_params(prefix + ".unit", p.unit, fn);
  visit_params(prefix + ".norm2", p.norm2, fn);
  visit_params(prefix + ".mlp", p.mlp, fn);
}

template <std::floating_point T>
Var<T> axial_shift_branch(Context<T>& ctx, Var<T> x, const AxialShiftUnitParams<T>& p) {
  const Shape& dims = x.dims();
  if (dims.size() != 4 || dims[1] != p.channels()) {
    throw ShapeError("axial_shift_unit: input " + shape_str(dims) + " for a unit of " +
                     std::to_string(p.channels()) + " channels");
  }
  Var<T> h = layer_norm(ctx, x, p.norm1);
  h = gelu(layer_norm(ctx, linear(ctx, h, p.proj_in), p.norm_in));
  Var<T> y;
  if (p.connection == Connection::parallel) {
    Var<T> lr = gelu(linear(ctx, shift(h, Axis::width, p.shift), p.proj_h));
    Var<T> td = gelu(linear(ctx, shift(h, Axis::height, p.shift), p.proj_v));
    y = add(lr, td);
  } else {
    Var<T> lr = gelu(linear(ctx, shift(h, Axis::width, p.shift), p.proj_h));
    y = gelu(linear(ctx, shift(lr, Axis::height, p.shift), p.proj_v));
  }
  return linear(ctx, layer_norm(ctx, y, p.norm_out), p.proj_out);
}

template <std::floating_point T>
Var<T> axial_shift_unit(Context<T>& ctx, Var<T> x, const AxialShiftUnitParams<T>& p) {
  return add(axial_shift_branch(ctx, x, p), x);
}

template <std::floating_point T>
Var<T> as_mlp_block(Context<T>& ctx, Var<T> x, const AsMlpBlockParams<T>& p) {
  Var<T> branch = axial_shift_branch(ctx, x, p.unit);
  x = add(x, drop_path(branch, p.drop_path, ctx.training(), ctx.rng()));
  Var<T> mlp = mlp_forward(ctx, layer_norm(ctx, x, p.norm2), p.mlp);
  return add(x, drop_path(mlp, p.drop_path, ctx.training(), ctx.rng()));
}

std::set<std::pair<int, int>> sampling_locations(const ShiftConfig& cfg) {
  cfg.validate();
  std::set<std::pair<int, int>> out;
  const int d = static_cast<int>(cfg.dilation);
  const int arm_v = static_cast<int>(cfg.shift_v / 2);
  const int arm_h = static_cast<int>(cfg.shift_h / 2);
  for (int k = -arm_v; k <= arm_v; ++k) out.emplace(k * d, 0);
  for (int k = -arm_h; k <= arm_h; ++k) out.emplace(0, k * d);
  return out;
}

#define ASMLP_INSTANTIATE_SHIFT(T)                                                                 \
  template Var<T> shift(Var<T>, Axis, const ShiftConfig&);                                         \
  template AxialShiftUnitParams<T> make_axial_shift_unit(std::size_t, const ShiftConfig&,          \
                                                         Connection, Rng&, bool);                  \
  template AsMlpBlockParams<T> make_as_mlp_block(const BlockConfig&, Rng&, bool);                  \
  template void visit_params(const std::string&, AxialShiftUnitParams<T>&, const ParamVisitor<T>&); \
  template void visit_params(const std::string&, AsMlpBlockParams<T>&, const ParamVisitor<T>&);    \
  template Var<T> axial_shift_branch(Context<T>&, Var<T>, const AxialShiftUnitParams<T>&);         \
  template Var<T> axial_shift_unit(Context<T>&, Var<T>, const AxialShiftUnitParams<T>&);           \
  template Var<T> as_mlp_block(Context<T>&, Var<T>, const AsMlpBlockParams<T>&);

ASMLP_INSTANTIATE_SHIFT(float)
ASMLP_INSTANTIATE_SHIFT(double)

}  // namespace asmlp
