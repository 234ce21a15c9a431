#include "asmlp/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "asmlp/mac_counter.hpp"

namespace asmlp {

std::string_view to_string(Component c) {
  switch (c) {
    case Component::linear_embedding: return "linear-embedding";
    case Component::patch_merging: return "patch-merging";
    case Component::blocks: return "blocks";
    case Component::head: return "head";
  }
  return "?";
}

std::uint64_t CostBreakdown::total_params() const {
  std::uint64_t t = 0;
  for (const auto& e : entries) t += e.params;
  return t;
}

std::uint64_t CostBreakdown::total_macs() const {
  std::uint64_t t = 0;
  for (const auto& e : entries) t += e.macs;
  return t;
}

std::uint64_t CostBreakdown::params_of(Component c) const {
  std::uint64_t t = 0;
  for (const auto& e : entries) {
    if (e.component == c) t += e.params;
  }
  return t;
}

std::uint64_t CostBreakdown::macs_of(Component c) const {
  std::uint64_t t = 0;
  for (const auto& e : entries) {
    if (e.component == c) t += e.macs;
  }
  return t;
}

const CostEntry* CostBreakdown::find(std::size_t stage, Component c) const {
  for (const auto& e : entries) {
    if (e.stage == stage && e.component == c) return &e;
  }
  return nullptr;
}

namespace {

using u64 = std::uint64_t;

// Weight-only parameters and MACs-per-position of one block at `c` channels
// and stage resolution hw.
struct BlockCost {
  u64 weights = 0;
  u64 aux = 0;
  u64 macs = 0;
};

BlockCost block_cost(const VariantConfig& v, u64 c, u64 h, u64 w) {
  const u64 r = v.mlp_ratio;
  BlockCost bc;
  const u64 mlp_weights = 2 * r * c * c;
  const u64 mlp_bias = r * c + c;
  if (!v.baseline || *v.baseline == BaselineKind::shift_5_1 ||
      *v.baseline == BaselineKind::shift_1_5) {
    bc.weights = 4 * c * c + mlp_weights;
    bc.aux = 4 * c + mlp_bias + 4 * 2 * c;
    bc.macs = bc.weights * h * w;
    return bc;
  }
  const u64 hw = h * w;
  bc.aux = mlp_bias + 2 * 2 * c;
  switch (*v.baseline) {
    case BaselineKind::global_mlp:
      bc.weights = hw * hw + mlp_weights;
      bc.macs = c * hw * hw + mlp_weights * hw;
      break;
    case BaselineKind::axial_mlp:
      bc.weights = w * w + h * h + mlp_weights;
      bc.macs = c * hw * (w + h) + mlp_weights * hw;
      break;
    case BaselineKind::window_mlp:
      bc.weights = 49 * 49 + mlp_weights;
      bc.macs = c * hw * 49 + mlp_weights * hw;
      break;
    default: break;
  }
  return bc;
}

CostBreakdown formula(const VariantConfig& v, u64 height, u64 width, bool include_aux) {
  v.validate();
  const u64 p = v.patch_size;
  const u64 c0 = v.channels;
  CostBreakdown bd;
  {
    CostEntry e{0, Component::linear_embedding, 3 * c0 * p * p, 0};
    if (include_aux) e.params += c0 + 2 * c0;
    e.macs = 3 * c0 * p * p * (height / p) * (width / p);
    bd.entries.push_back(e);
  }
  const u64 res_bound = v.input_size;
  for (std::size_t s = 0; s < kStages; ++s) {
    const u64 c = v.stage_channels(s);
    const u64 h = height / v.stage_stride(s);
    const u64 w = width / v.stage_stride(s);
    if (s > 0) {
      const u64 prev = v.stage_channels(s - 1);
      CostEntry e{s, Component::patch_merging, 8 * prev * prev, 8 * prev * prev * h * w};
      if (include_aux) e.params += 2 * 4 * prev;
      bd.entries.push_back(e);
    }
    // Resolution-bound baselines hold weights sized for the construction resolution.
    const u64 bh = res_bound / v.stage_stride(s);
    const BlockCost params = block_cost(v, c, bh, bh);
    const BlockCost macs = block_cost(v, c, h, w);
    CostEntry e{s, Component::blocks, params.weights * v.depths[s], macs.macs * v.depths[s]};
    if (include_aux) e.params += params.aux * v.depths[s];
    bd.entries.push_back(e);
  }
  const u64 cf = v.stage_channels(kStages - 1);
  CostEntry head{kStages - 1, Component::head, 0, cf * v.num_classes};
  if (include_aux) head.params = 2 * cf + cf * v.num_classes + v.num_classes;
  bd.entries.push_back(head);
  return bd;
}

}  // namespace

CostBreakdown formula_params(const VariantConfig& v, bool include_aux) {
  CostBreakdown bd = formula(v, v.input_size, v.input_size, include_aux);
  for (auto& e : bd.entries) e.macs = 0;
  if (!include_aux) std::erase_if(bd.entries, [](const CostEntry& e) { return e.component == Component::head; });
  return bd;
}

CostBreakdown formula_flops(const VariantConfig& v, std::size_t height, std::size_t width) {
  v.validate_input(height, width);
  CostBreakdown bd = formula(v, height, width, false);
  for (auto& e : bd.entries) e.params = 0;
  return bd;
}

CostBreakdown formula_costs(const VariantConfig& v, std::size_t height, std::size_t width,
                            bool include_aux) {
  v.validate_input(height, width);
  CostBreakdown bd = formula(v, height, width, include_aux);
  return bd;
}

ComplexityComparison complexity_compare(std::uint64_t h, std::uint64_t w, std::uint64_t channels,
                                        std::uint64_t window) {
  if (h == 0 || w == 0 || channels == 0 || window == 0) {
    throw std::invalid_argument("complexity_compare: arguments must be positive");
  }
  const u64 hw = h * w;
  const u64 proj = 4 * hw * channels * channels;
  return {proj + 2 * hw * hw * channels, proj + 2 * window * window * hw * channels, proj};
}

template <std::floating_point T>
CostBreakdown measure_model(const ModelParams<T>& model, std::size_t height, std::size_t width,
                            bool include_aux) {
  const auto& cfg = model.config;
  cfg.validate_input(height, width);
  CostBreakdown bd;
  auto entry = [&](std::size_t stage, Component c) -> CostEntry& {
    for (auto& e : bd.entries) {
      if (e.stage == stage && e.component == c) return e;
    }
    bd.entries.push_back(CostEntry{stage, c, 0, 0});
    return bd.entries.back();
  };

  // Parameters: classify by name.
  visit_params(model, ConstParamVisitor<T>([&](const std::string& name, const Tensor<T>& t,
                                               ParamKind kind) {
    if (!include_aux && kind != ParamKind::weight) return;
    std::size_t stage = 0;
    Component c = Component::linear_embedding;
    if (name.rfind("head.", 0) == 0) {
      if (!include_aux) return;
      stage = kStages - 1;
      c = Component::head;
    } else if (name.rfind("stages.", 0) == 0) {
      stage = static_cast<std::size_t>(name[7] - '0');
      c = name.find(".merge.") != std::string::npos ? Component::patch_merging : Component::blocks;
    }
    entry(stage, c).params += t.numel();
  }));

  // MACs: instrumented forward on shape-only tensors, attributed by section.
  Tape<T> tape;
  Context<T> ctx(tape, false, nullptr, false);
  MacCounter counter;
  std::uint64_t last = 0;
  std::size_t cur_stage = 0;
  Component cur = Component::linear_embedding;
  bool started = false;
  ctx.set_section_hook([&](std::size_t stage, std::string_view section) {
    const std::uint64_t now = counter.total();
    if (started) entry(cur_stage, cur).macs += now - last;
    last = now;
    started = true;
    cur_stage = stage;
    if (section == "linear-embedding") cur = Component::linear_embedding;
    else if (section == "patch-merging") cur = Component::patch_merging;
    else if (section == "blocks") cur = Component::blocks;
    else if (section == "head") cur = Component::head;
  });
  Var<T> image = tape.constant(Tensor<T>::meta({1, 3, height, width}));
  forward(ctx, image, model);
  if (counter.total() != bd.total_macs()) {
    throw std::logic_error("measure_model: section attribution lost MACs");
  }
  return bd;
}

std::uint64_t measure_unit_macs(std::size_t channels, std::size_t height, std::size_t width,
                                const ShiftConfig& cfg, Connection connection) {
  Rng rng = make_rng(0);
  auto unit = make_axial_shift_unit<float>(channels, cfg, connection, rng, true);
  Tape<float> tape;
  Context<float> ctx(tape, false, nullptr, false);
  MacCounter counter;
  axial_shift_unit(ctx, tape.constant(Tensor<float>::meta({1, channels, height, width})), unit);
  return counter.total();
}

bool matches_reported(double value, double reported, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  const double target = std::round(reported * scale);
  return std::floor(scaled) == target || std::floor(scaled + 0.5) == target ||
         std::ceil(scaled) == target;
}

void print_table(std::ostream& os, const CostBreakdown& bd) {
  os << std::left << std::setw(7) << "stage" << std::setw(18) << "component" << std::right
     << std::setw(16) << "params" << std::setw(18) << "macs" << '\n';
  for (const auto& e : bd.entries) {
    os << std::left << std::setw(7) << (e.stage + 1) << std::setw(18) << to_string(e.component)
       << std::right << std::setw(16) << e.params << std::setw(18) << e.macs << '\n';
  }
  std::ostringstream p, m;
  p << std::fixed << std::setprecision(2) << static_cast<double>(bd.total_params()) / 1e6 << "M";
  m << std::fixed << std::setprecision(2) << static_cast<double>(bd.total_macs()) / 1e9 << "G";
  os << std::left << std::setw(7) << "total" << std::setw(18) << "" << std::right << std::setw(16)
     << bd.total_params() << std::setw(18) << bd.total_macs() << "   (" << p.str() << " params, "
     << m.str() << " MACs)\n";
}

void print_csv(std::ostream& os, const CostBreakdown& bd) {
  os << "stage,component,params,macs\n";
  for (const auto& e : bd.entries) {
    os << (e.stage + 1) << ',' << to_string(e.component) << ',' << e.params << ',' << e.macs << '\n';
  }
  os << "total,all," << bd.total_params() << ',' << bd.total_macs() << '\n';
}

std::set<Position> receptive_field_probe(
    const std::function<Var<double>(Context<double>&, Var<double>)>& fn, std::size_t channels,
    std::size_t height, std::size_t width, Position position, std::uint64_t seed) {
  const auto [pi, pj] = position;
  if (pi < 0 || pj < 0 || static_cast<std::size_t>(pi) >= height ||
      static_cast<std::size_t>(pj) >= width) {
    throw std::out_of_range("receptive_field_probe: position outside the " + std::to_string(height) +
                            "x" + std::to_string(width) + " grid");
  }
  Rng rng = make_rng(seed, 0x5052);
  const Tensor<double> base = random_uniform<double>({1, channels, height, width}, rng);
  const Tensor<double> bump = random_uniform<double>({channels}, rng, 0.5, 1.5);
  auto response = [&](const Tensor<double>& input) {
    Tape<double> tape;
    Context<double> ctx(tape, false, nullptr, false);
    Var<double> y = fn(ctx, tape.constant(input));
    const auto& out = y.value();
    if (out.rank() != 4 || out.dim(2) != height || out.dim(3) != width) {
      throw ShapeError("receptive_field_probe: map must preserve the spatial grid");
    }
    std::vector<double> v(out.dim(1));
    for (std::size_t c = 0; c < v.size(); ++c) {
      v[c] = out.at({0, c, static_cast<std::size_t>(pi), static_cast<std::size_t>(pj)});
    }
    return v;
  };
  const auto ref = response(base);
  std::set<Position> field;
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      Tensor<double> x = base;
      for (std::size_t c = 0; c < channels; ++c) x.at({0, c, i, j}) += bump[c];
      if (response(x) != ref) field.emplace(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return field;
}

std::set<Position> probe_stacked_units(const ShiftConfig& cfg, std::size_t depth,
                                       std::size_t channels, std::size_t height, std::size_t width,
                                       Position position, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x554e);
  std::vector<AxialShiftUnitParams<double>> units;
  for (std::size_t k = 0; k < depth; ++k) {
    auto u = make_axial_shift_unit<double>(channels, cfg, Connection::parallel, rng);
    // Larger weights than the training init so every path visibly moves the output.
    for (Linear<double>* l : {&u.proj_in, &u.proj_h, &u.proj_v, &u.proj_out}) {
      l->weight = random_uniform<double>(l->weight.dims(), rng);
    }
    units.push_back(std::move(u));
  }
  return receptive_field_probe(
      [&](Context<double>& ctx, Var<double> x) {
        for (const auto& u : units) x = axial_shift_unit(ctx, x, u);
        return x;
      },
      channels, height, width, position, seed);
}

std::set<Position> to_offsets(const std::set<Position>& positions, Position origin) {
  std::set<Position> out;
  for (const auto& [i, j] : positions) out.emplace(i - origin.first, j - origin.second);
  return out;
}

template CostBreakdown measure_model(const ModelParams<float>&, std::size_t, std::size_t, bool);
template CostBreakdown measure_model(const ModelParams<double>&, std::size_t, std::size_t, bool);

}  // namespace asmlp
