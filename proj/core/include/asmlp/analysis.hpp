#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asmlp/backbone.hpp"

namespace asmlp {

enum class Component { linear_embedding, patch_merging, blocks, head };

std::string_view to_string(Component c);

struct CostEntry {
  std::size_t stage = 0;
  Component component = Component::blocks;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;

  friend bool operator==(const CostEntry&, const CostEntry&) = default;
};

struct CostBreakdown {
  std::vector<CostEntry> entries;

  std::uint64_t total_params() const;
  std::uint64_t total_macs() const;
  std::uint64_t params_of(Component c) const;
  std::uint64_t macs_of(Component c) const;
  const CostEntry* find(std::size_t stage, Component c) const;
};

/// Closed-form parameter counts per stage and component. Weight-only
/// (include_aux = false) counts only projection / mixing matrices of the
/// embedding, blocks and mergings: 3Cp^2, (4+2r)C_s^2 n_s, 8C_{s-1}^2. With
/// include_aux the biases, LayerNorm affine parameters and the classifier
/// head are added.
CostBreakdown formula_params(const VariantConfig& v, bool include_aux);

/// Closed-form MACs (1 MAC = 1 FLOP) for an H x W input: the weight-only
/// terms at each stage resolution plus the classifier projection.
CostBreakdown formula_flops(const VariantConfig& v, std::size_t height, std::size_t width);

/// formula_params and formula_flops side by side, one entry per component.
CostBreakdown formula_costs(const VariantConfig& v, std::size_t height, std::size_t width,
                            bool include_aux);

struct ComplexityComparison {
  std::uint64_t msa = 0;   // 4hwC^2 + 2(hw)^2 C
  std::uint64_t wmsa = 0;  // 4hwC^2 + 2M^2 hwC
  std::uint64_t as = 0;    // 4hwC^2
};

ComplexityComparison complexity_compare(std::uint64_t h, std::uint64_t w, std::uint64_t channels,
                                        std::uint64_t window);

/// Counts stored parameters of a constructed model (weight-only or with aux)
/// and the MACs of an instrumented forward pass at H x W. The forward runs on
/// shape-only tensors, so even the base variant is counted in milliseconds.
template <std::floating_point T>
CostBreakdown measure_model(const ModelParams<T>& model, std::size_t height, std::size_t width,
                            bool include_aux);

/// Counts MACs of one axial shift unit on a [1,C,h,w] shape-only input.
std::uint64_t measure_unit_macs(std::size_t channels, std::size_t height, std::size_t width,
                                const ShiftConfig& cfg, Connection connection = Connection::parallel);

/// True when `value` rounds to `reported` at `decimals` places under at least
/// one of floor, round-half-up or ceiling.
bool matches_reported(double value, double reported, int decimals);

/// Aligned plain-text table.
void print_table(std::ostream& os, const CostBreakdown& bd);
/// CSV records: stage,component,params,macs (with a header row and a total row).
void print_csv(std::ostream& os, const CostBreakdown& bd);

using Position = std::pair<int, int>;

/// Input positions whose perturbation changes the output at `position` of
/// `fn` applied to a [1, channels, h, w] input (eval mode, wide precision).
std::set<Position> receptive_field_probe(
    const std::function<Var<double>(Context<double>&, Var<double>)>& fn, std::size_t channels,
    std::size_t height, std::size_t width, Position position, std::uint64_t seed = 0);

/// Probe through `depth` stacked axial shift units with random weights.
std::set<Position> probe_stacked_units(const ShiftConfig& cfg, std::size_t depth,
                                       std::size_t channels, std::size_t height, std::size_t width,
                                       Position position, std::uint64_t seed = 0);

/// Positions relative to `origin`.
std::set<Position> to_offsets(const std::set<Position>& positions, Position origin);

}  // namespace asmlp
