#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "asmlp/analysis.hpp"

namespace asmlp::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

struct DescribeOptions {
  std::string variant = "tiny";
  std::size_t input_size = 224;
  bool include_aux = true;
  bool csv = false;
  std::string baseline;  // empty: AS-MLP blocks
};
int cmd_describe(const DescribeOptions& opts, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::string suite = "all";
  std::uint64_t seed = 0;
};
int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err);

struct TrainCommand {
  std::string config;
  std::string resume;
  std::vector<std::string> sets;  // key=value overrides
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> checkpoint;
  std::optional<std::string> metrics;
  std::optional<std::size_t> stop_after;
};
int cmd_train(const TrainCommand& opts, std::ostream& out, std::ostream& err);

enum class BenchOp { axial_shift, unit, block };
BenchOp parse_bench_op(const std::string& name);

struct BenchStats {
  double median_ms = 0.0;
  double min_ms = 0.0;
  std::uint64_t macs = 0;
};

/// Times `repeats` forward passes (narrow precision, evaluation mode).
BenchStats bench_op(BenchOp op, const Shape& shape, const ShiftConfig& cfg, std::size_t repeats);

struct SweepRow {
  std::size_t shift = 0;
  BenchStats stats;
};
/// Same measurement for s in {1,3,5,7,9}; returns rows and the coefficient of
/// variation of the medians.
std::pair<std::vector<SweepRow>, double> bench_sweep(BenchOp op, const Shape& shape,
                                                     std::size_t repeats);

struct BenchOptions {
  std::string op = "axial-shift";
  std::string shape = "1x96x56x56";
  std::size_t repeats = 20;
  std::size_t shift = 5;
  std::size_t dilation = 1;
  bool sweep = true;
};
int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

struct ProbeOptions {
  std::string checkpoint;
  bool random_init = false;
  std::optional<Position> position;
  std::size_t depth = 1;
  std::string shift = "5";
  std::size_t dilation = 1;
  std::string padding = "zero";
  std::size_t channels = 0;  // random-init only; 0 picks 2 * max(s)
  std::size_t size = 0;      // grid side; 0 fits the field
  std::string output = "rfield.txt";
  std::uint64_t seed = 0;
};
int cmd_probe(const ProbeOptions& opts, std::ostream& out, std::ostream& err);

/// '#' where the input influences the probed output, '.' elsewhere.
std::string render_grid(const std::set<Position>& field, std::size_t height, std::size_t width);

struct FixtureOptions {
  std::string dir = "fixtures";
  bool regenerate = false;
};
int cmd_fixtures(const FixtureOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace asmlp::cli
