#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "asmlp/context.hpp"

namespace asmlp {

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::string summary;
  std::vector<CheckLine> checks;

  bool pass() const;
  void add(std::string name, bool ok, std::string detail = {});
};

/// Summary line followed by one "[PASS]/[FAIL] name: detail" line per check.
void print_report(std::ostream& os, const SuiteReport& report);

// ---------------------------------------------------------------- gradcheck

struct GradTarget {
  std::string name;
  Tensor<double>* tensor = nullptr;
};

struct GradCheckOptions {
  double step = 1e-5;
  /// Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  /// Entries checked per target; 0 checks all of them.
  std::size_t max_entries = 0;
  bool training = false;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "<target>[<flat index>]"
};

/// Compares reverse-mode gradients of sum(fn(ctx) * R), R a fixed random
/// tensor, against central differences. `fn` must read every target through
/// ctx.param(*target.tensor). Each evaluation gets a fresh tape and an RNG
/// seeded identically, so stochastic layers see the same masks every time.
GradCheckResult gradcheck(const std::function<Var<double>(Context<double>&)>& fn,
                          const std::vector<GradTarget>& wrt, const GradCheckOptions& opts = {});

// ------------------------------------------------------------------- suites

/// Shift implementation vs the index-map oracle over s x d x padding x C, five
/// random inputs each, both axes, zero tolerance.
SuiteReport run_oracle_suite(std::uint64_t seed);
/// Per-layer gradients (< 1e-4) and the full toy model (< 1e-3).
SuiteReport run_gradcheck_suite(std::uint64_t seed);
/// Parameter and MAC reconciliation for the named variants, the unit
/// complexity law and the baseline formulas.
SuiteReport run_counts_suite(std::uint64_t seed);
/// Perturbation probes vs sampling locations and Minkowski sums.
SuiteReport run_rfield_suite(std::uint64_t seed);

}  // namespace asmlp
