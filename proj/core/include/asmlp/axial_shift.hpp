#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "asmlp/layers.hpp"

namespace asmlp {

enum class Axis { height, width };

/// `circular` keeps wrapped values (no pad/crop); the others pad, roll and crop.
enum class ShiftPadding { zero, circular, reflect, replicate };

enum class Connection { parallel, serial };

std::string_view to_string(ShiftPadding p);
std::string_view to_string(Connection c);
ShiftPadding parse_shift_padding(std::string_view name);
Connection parse_connection(std::string_view name);

struct ShiftConfig {
  std::size_t shift_h = 5;  // groups along width
  std::size_t shift_v = 5;  // groups along height
  std::size_t dilation = 1;
  ShiftPadding padding = ShiftPadding::zero;

  std::size_t size(Axis axis) const noexcept { return axis == Axis::width ? shift_h : shift_v; }
  /// Farthest a group moves along `axis`: floor(s/2) * d.
  std::size_t reach(Axis axis) const noexcept { return size(axis) / 2 * dilation; }

  /// Odd sizes, positive dilation.
  void validate() const;
  /// Also checks s <= channels for both axes.
  void validate(std::size_t channels) const;

  friend bool operator==(const ShiftConfig&, const ShiftConfig&) = default;
};

std::string describe(const ShiftConfig& cfg);

/// Axial shift of a [b,C,h,w] map: split channels into s groups, move group g
/// by (g - floor(s/2)) * d along `axis` (torch.roll sign), fill vacated cells
/// according to the padding mode. Performs no arithmetic.
template <std::floating_point T>
Var<T> shift(Var<T> x, Axis axis, const ShiftConfig& cfg);

template <std::floating_point T>
struct AxialShiftUnitParams {
  LayerNormParams<T> norm1;
  Linear<T> proj_in;
  LayerNormParams<T> norm_in;
  Linear<T> proj_h;
  Linear<T> proj_v;
  LayerNormParams<T> norm_out;
  Linear<T> proj_out;
  ShiftConfig shift;
  Connection connection = Connection::parallel;

  std::size_t channels() const { return proj_in.in_features(); }
};

struct BlockConfig {
  std::size_t channels = 96;
  ShiftConfig shift;
  Connection connection = Connection::parallel;
  std::size_t mlp_ratio = 4;
  double drop_path = 0.0;
};

template <std::floating_point T>
struct AsMlpBlockParams {
  AxialShiftUnitParams<T> unit;
  LayerNormParams<T> norm2;
  MlpParams<T> mlp;
  double drop_path = 0.0;
};

template <std::floating_point T>
AxialShiftUnitParams<T> make_axial_shift_unit(std::size_t channels, const ShiftConfig& cfg,
                                              Connection connection, Rng& rng, bool meta = false);

template <std::floating_point T>
AsMlpBlockParams<T> make_as_mlp_block(const BlockConfig& cfg, Rng& rng, bool meta = false);

template <std::floating_point T>
void visit_params(const std::string& prefix, AxialShiftUnitParams<T>& p, const ParamVisitor<T>& fn);
template <std::floating_point T>
void visit_params(const std::string& prefix, AsMlpBlockParams<T>& p, const ParamVisitor<T>& fn);

/// Residual branch of the unit: LN -> proj_in -> LN -> gelu -> shifts/projections -> LN -> proj_out.
template <std::floating_point T>
Var<T> axial_shift_branch(Context<T>& ctx, Var<T> x, const AxialShiftUnitParams<T>& p);

/// Branch plus shortcut.
template <std::floating_point T>
Var<T> axial_shift_unit(Context<T>& ctx, Var<T> x, const AxialShiftUnitParams<T>& p);

/// x + drop_path(axial branch(x)), then x + drop_path(mlp(LN(x))).
template <std::floating_point T>
Var<T> as_mlp_block(Context<T>& ctx, Var<T> x, const AsMlpBlockParams<T>& p);

/// Offsets (di, dj) one unit reads relative to an output location: a cross with
/// vertical arm floor(s_v/2) and horizontal arm floor(s_h/2), spaced by d.
std::set<std::pair<int, int>> sampling_locations(const ShiftConfig& cfg);

}  // namespace asmlp
