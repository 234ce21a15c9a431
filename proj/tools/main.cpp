#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "run_config.hpp"

using namespace asmlp::cli;

namespace {

asmlp::Position parse_position(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("position: expected 'i,j', got '" + text + "'");
  return {static_cast<int>(parse_size("position", text.substr(0, comma))),
          static_cast<int>(parse_size("position", text.substr(comma + 1)))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AS-MLP backbone: cost accounting, verification suites, toy training"};
  app.require_subcommand(1);

  DescribeOptions describe;
  auto* d = app.add_subcommand("describe", "Per-stage parameter and MAC breakdown");
  d->add_option("--variant", describe.variant, "tiny, small, base, mobile or toy")->capture_default_str();
  d->add_option("--input-size", describe.input_size, "Square input resolution")->capture_default_str();
  d->add_option("--include-aux", describe.include_aux,
                "Count biases, LayerNorm and the classifier head too")
      ->capture_default_str();
  d->add_option("--baseline", describe.baseline,
                "Replace blocks with global, axial, window, shift-5-1 or shift-1-5");
  d->add_flag("--csv", describe.csv, "CSV output");

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "Run property suites");
  v->add_option("--suite", verify.suite, "oracle, gradcheck, counts, rfield or all")
      ->capture_default_str();
  v->add_option("--seed", verify.seed)->capture_default_str();

  TrainCommand train;
  auto* t = app.add_subcommand("train", "Train on the synthetic dataset");
  t->add_option("--config", train.config, "key = value config file")->check(CLI::ExistingFile);
  t->add_option("--set", train.sets, "Override a config key (key=value), repeatable");
  t->add_option("--resume", train.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  t->add_option("--epochs", train.epochs);
  t->add_option("--seed", train.seed);
  t->add_option("--checkpoint", train.checkpoint, "Checkpoint path");
  t->add_option("--metrics", train.metrics, "Metrics CSV path");
  t->add_option("--stop-after", train.stop_after, "Stop after this many completed epochs");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Time a shift, unit or block forward pass");
  b->add_option("--op", bench.op, "axial-shift, unit or block")->capture_default_str();
  b->add_option("--shape", bench.shape, "b x C x h x w")->capture_default_str();
  b->add_option("--repeats", bench.repeats)->capture_default_str();
  b->add_option("--shift", bench.shift)->capture_default_str();
  b->add_option("--dilation", bench.dilation)->capture_default_str();
  b->add_flag("!--no-sweep", bench.sweep, "Skip the s in {1,3,5,7,9} sweep");

  ProbeOptions probe;
  std::string position;
  auto* p = app.add_subcommand("probe", "Receptive-field map by input perturbation");
  p->add_option("--checkpoint", probe.checkpoint, "Probe the first-stage blocks of a checkpoint")
      ->check(CLI::ExistingFile);
  p->add_flag("--random-init", probe.random_init, "Probe stacked units with random weights");
  p->add_option("--position", position, "Output position i,j (default: grid centre)");
  p->add_option("--depth", probe.depth)->capture_default_str();
  p->add_option("--shift", probe.shift, "s or s_h,s_v (random-init)")->capture_default_str();
  p->add_option("--dilation", probe.dilation)->capture_default_str();
  p->add_option("--padding", probe.padding, "zero, circular, reflect or replicate")
      ->capture_default_str();
  p->add_option("--channels", probe.channels, "Channels (random-init; default 2*max(s))");
  p->add_option("--size", probe.size, "Grid side (default fits the field)");
  p->add_option("--seed", probe.seed)->capture_default_str();
  p->add_option("--output", probe.output)->capture_default_str();

  FixtureOptions fixtures;
  auto* f = app.add_subcommand("fixtures", "Check or rebuild the fixture corpus");
  f->add_option("--dir", fixtures.dir)->capture_default_str();
  f->add_flag("--regenerate", fixtures.regenerate, "Rewrite the files before checking");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*d) return cmd_describe(describe, std::cout, std::cerr);
    if (*v) return cmd_verify(verify, std::cout, std::cerr);
    if (*t) return cmd_train(train, std::cout, std::cerr);
    if (*b) return cmd_bench(bench, std::cout, std::cerr);
    if (*p) {
      if (!position.empty()) probe.position = parse_position(position);
      return cmd_probe(probe, std::cout, std::cerr);
    }
    if (*f) return cmd_fixtures(fixtures, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
