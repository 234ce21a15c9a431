// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fail.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "asmlp/analysis.hpp"
#include "asmlp/training.hpp"
#include "asmlp/verify.hpp"
#include "commands.hpp"
#include "run_config.hpp"

using namespace asmlp;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, const std::string& title, bool ok, const std::string& detail) {
  std::cout << "criterion " << n << " " << (ok ? "PASS" : "FAIL") << ": " << title << " (" << detail
            << ")" << std::endl;
  if (!ok) ++failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path workdir() {
  const auto p = fs::temp_directory_path() / "asmlp_acceptance";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Checkpoint fixture(const std::string& rel) { return load_checkpoint(fs::path(ASMLP_FIXTURE_DIR) / rel); }

CostBreakdown measured(const VariantConfig& v, bool aux) {
  Rng rng = make_rng(0);
  return measure_model(init_model<float>(v, rng, true), 224, 224, aux);
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

void suite(int n, const std::string& title, const SuiteReport& r) {
  std::string failed;
  for (const auto& c : r.checks) {
    if (!c.pass) failed += "; failed " + c.name + ": " + c.detail;
  }
  report(n, title, r.pass(), r.summary + failed);
}

void parameter_counts() {
  const auto table = fixture("reported/tiny-small-base/expected").get<double>("params_millions");
  const double mobile = fixture("reported/mobile/expected").get<double>("params_millions")[0];
  const char* names[] = {"tiny", "small", "base", "mobile"};
  const double reported[] = {table[0], table[1], table[2], mobile};
  bool ok = true;
  std::string detail;
  for (int k = 0; k < 4; ++k) {
    const auto v = make_variant(names[k]);
    const double m = measured(v, true).total_params() / 1e6;
    const bool round_ok = matches_reported(m, reported[k], k == 3 ? 1 : 0);
    const bool exact = measured(v, false).entries == formula_costs(v, 224, 224, false).entries;
    ok = ok && round_ok && exact;
    detail += std::string(k ? ", " : "") + names[k] + " " + fmt(m, 6) + "M vs " + fmt(reported[k]) + "M" +
              (exact ? "" : " weight-only mismatch");
  }
  report(2, "parameter counts", ok, detail);
}

void flops() {
  const auto table = fixture("reported/tiny-small-base/expected").get<double>("flops_giga");
  const char* names[] = {"tiny", "small", "base"};
  bool ok = true;
  std::string detail;
  for (int k = 0; k < 3; ++k) {
    const auto v = make_variant(names[k]);
    const auto m = measured(v, true);
    const bool exact = m.total_macs() == formula_flops(v, 224, 224).total_macs();
    const bool round_ok = matches_reported(m.total_macs() / 1e9, table[k], 1);
    ok = ok && exact && round_ok;
    detail += std::string(k ? ", " : "") + names[k] + " " + std::to_string(m.total_macs()) + " vs " +
              fmt(table[k]) + "G" + (exact ? "" : " formula mismatch");
  }
  report(3, "MAC counts at 224x224", ok, detail);
}

void unit_law() {
  Rng rng = make_rng(2024, 0x554c);
  std::uniform_int_distribution<std::size_t> hw(1, 24), ch(9, 40);
  bool ok = true;
  std::size_t checks = 0;
  std::string bad;
  for (int t = 0; t < 10; ++t) {
    const std::size_t h = hw(rng), w = hw(rng), c = ch(rng);
    const std::uint64_t want = 4ull * h * w * c * c;
    for (std::size_t s : {1, 3, 5, 7, 9}) {
      for (std::size_t d : {1, 2}) {
        const auto got = measure_unit_macs(c, h, w, ShiftConfig{s, s, d, ShiftPadding::zero});
        ++checks;
        if (got != want) {
          ok = false;
          bad = " first mismatch h=" + std::to_string(h) + " w=" + std::to_string(w) + " C=" +
                std::to_string(c) + " s=" + std::to_string(s) + " d=" + std::to_string(d);
        }
      }
    }
  }
  report(4, "unit MACs equal 4hwC^2", ok, std::to_string(checks) + " (h,w,C,s,d) cases" + bad);
}

struct ToyRun {
  TrainResult result;
  fs::path dir;
};

TrainConfig toy_config(const fs::path& dir, std::size_t s) {
  auto kv = cli::KeyValues::load(fs::path(ASMLP_SOURCE_DIR) / "configs/toy.cfg");
  kv.set("shift", std::to_string(s) + "," + std::to_string(s));
  auto cfg = cli::make_train_config(kv);
  fs::create_directories(dir);
  cfg.checkpoint_path = dir / "toy.ckpt";
  cfg.metrics_path = dir / "metrics.csv";
  return cfg;
}

ToyRun run_toy(const fs::path& dir, std::size_t s, const TrainOptions& opts = {}) {
  return {train(toy_config(dir, s), opts), dir};
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path root = workdir();

  suite(1, "shift equals index-map oracle", run_oracle_suite(0));
  parameter_counts();
  flops();
  unit_law();
  suite(5, "gradient checks", run_gradcheck_suite(0));
  suite(6, "receptive field probes", run_rfield_suite(0));

  // Toy training: main run, repeat, and the (1,1) ablation.
  const auto main_run = run_toy(root / "s5", 5);
  const auto repeat = run_toy(root / "s5_repeat", 5);
  const auto ablation = run_toy(root / "s1", 1);
  {
    const double a5 = main_run.result.final_accuracy, a1 = ablation.result.final_accuracy;
    const bool det = slurp(main_run.dir / "metrics.csv") == slurp(repeat.dir / "metrics.csv") &&
                     slurp(main_run.dir / "toy.ckpt") == slurp(repeat.dir / "toy.ckpt");
    report(7, "toy training", a5 > 0.95 && det && a1 < 0.6,
           "s=(5,5) accuracy " + fmt(a5) + (a5 > 0.95 ? " > 0.95" : " <= 0.95") + ", rerun " +
               (det ? "byte-identical" : "differs") + ", s=(1,1) accuracy " + fmt(a1) +
               (a1 < 0.6 ? " < 0.6" : " >= 0.6"));
  }

  // Transfer: the trained toy model at 64x64, the global baseline at 64x64.
  {
    const auto model = restore_model<float>(main_run.result.checkpoint);
    Rng rng = make_rng(3);
    const auto img = random_uniform<float>({2, 3, 64, 64}, rng, 0.0f, 1.0f);
    Tape<float> tape;
    Context<float> ctx(tape);
    const auto r = forward_features(ctx, tape.constant(img), model);
    const bool shapes = r.logits.dims() == Shape{2, 4} && r.stage_outputs[0].dims() == Shape{2, 16, 16, 16} &&
                        r.stage_outputs[3].dims() == Shape{2, 128, 2, 2};
    auto g = model.config;
    g.baseline = BaselineKind::global_mlp;
    g.input_size = 32;
    Rng grng = make_rng(0);
    const auto global = init_model<float>(g, grng);
    std::string rejected = "accepted";
    try {
      Tape<float> t2;
      Context<float> c2(t2);
      forward(c2, t2.constant(img), global);
    } catch (const ResolutionMismatch& e) {
      rejected = std::string("rejected: ") + e.what();
    } catch (const std::exception& e) {
      rejected = std::string("wrong error: ") + e.what();
    }
    report(8, "resolution transfer", shapes && rejected.rfind("rejected", 0) == 0,
           std::string("AS-MLP at 64x64 ") + (shapes ? "gives logits [2,4]" : "has wrong shapes") +
               "; global baseline " + rejected);
  }

  // Persistence: file round trip, then stop at epoch 10 and resume.
  {
    const auto file = main_run.dir / "toy.ckpt";
    const auto bytes = slurp(file);
    const auto loaded = load_checkpoint(file);
    const auto re = encode_checkpoint(loaded);
    const bool round_trip = std::string(re.begin(), re.end()) == bytes &&
                            encode_checkpoint(main_run.result.checkpoint) == re;
    TrainOptions stop;
    stop.stop_after = 10;
    const fs::path part = root / "s5_resume";
    run_toy(part, 5, stop);
    const Checkpoint mid = load_checkpoint(part / "toy.ckpt");
    TrainOptions resume;
    resume.resume = &mid;
    run_toy(part, 5, resume);
    const bool same = slurp(part / "toy.ckpt") == bytes &&
                      slurp(part / "metrics.csv") == slurp(main_run.dir / "metrics.csv");
    report(9, "checkpoint persistence", round_trip && same,
           std::string("round trip ") + (round_trip ? "bit-exact" : "differs") + ", resume at epoch 10 " +
               (same ? "equals uninterrupted run" : "differs from uninterrupted run"));
  }

  {
    const auto [rows, cv] = cli::bench_sweep(cli::BenchOp::axial_shift, {1, 96, 56, 56}, 20);
    bool zero = true;
    std::string times;
    for (const auto& r : rows) {
      zero = zero && r.stats.macs == 0;
      times += " s" + std::to_string(r.shift) + "=" + fmt(r.stats.median_ms, 3) + "ms";
    }
    report(10, "shift cost independent of s", zero && cv <= 0.25,
           std::string(zero ? "0 MACs for every s" : "nonzero MACs") + ", CV " + fmt(cv, 3) + " (limit 0.25);" +
               times);
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "acceptance: " << (10 - failures) << "/10 criteria pass in " << fmt(secs, 4) << " s" << std::endl;
  fs::remove_all(root);
  return failures == 0 ? 0 : 1;
}
