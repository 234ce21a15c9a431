#include "asmlp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "asmlp/analysis.hpp"
#include "asmlp/oracle.hpp"
#include "asmlp/training.hpp"

namespace asmlp {

bool SuiteReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

void SuiteReport::add(std::string name, bool ok, std::string detail) {
  checks.push_back(CheckLine{std::move(name), ok, std::move(detail)});
}

void print_report(std::ostream& os, const SuiteReport& report) {
  os << report.suite << ": " << report.summary << '\n';
  for (const auto& c : report.checks) {
    os << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << '\n';
  }
}

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

std::vector<std::size_t> pick_entries(std::size_t n, std::size_t max_entries, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (max_entries == 0 || max_entries >= n) return idx;
  for (std::size_t i = 0; i < max_entries; ++i) {
    std::swap(idx[i], idx[i + static_cast<std::size_t>(rng() % (n - i))]);
  }
  idx.resize(max_entries);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradCheckResult gradcheck(const std::function<Var<double>(Context<double>&)>& fn,
                          const std::vector<GradTarget>& wrt, const GradCheckOptions& opts) {
  Tensor<double> proj;
  auto objective = [&](Tape<double>& tape, Context<double>& ctx) {
    Var<double> y = fn(ctx);
    if (proj.empty()) {
      Rng r = make_rng(opts.seed, 0x9A0);
      proj = random_uniform<double>(y.dims(), r);
    }
    return sum(mul(y, tape.constant(proj)));
  };
  auto evaluate = [&]() {
    Tape<double> tape;
    Rng rng = make_rng(opts.seed, 0xD0);
    Context<double> ctx(tape, opts.training, &rng, false);
    return objective(tape, ctx).value()[0];
  };

  Tape<double> tape;
  Rng rng = make_rng(opts.seed, 0xD0);
  Context<double> ctx(tape, opts.training, &rng);
  Var<double> loss = objective(tape, ctx);
  tape.backward(loss);
  std::vector<Tensor<double>> analytic;
  for (const auto& t : wrt) {
    const Var<double> v = ctx.bound(*t.tensor);
    analytic.push_back(v.valid() ? tape.grad(v) : Tensor<double>(t.tensor->dims()));
  }

  GradCheckResult res;
  Rng pick = make_rng(opts.seed, 0x51C);
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    auto data = wrt[k].tensor->data();
    for (std::size_t i : pick_entries(data.size(), opts.max_entries, pick)) {
      const double numeric = oracle::central_difference(evaluate, data[i], opts.step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++res.checked;
      if (rel >= res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst = wrt[k].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return res;
}

// ------------------------------------------------------------------ oracle

SuiteReport run_oracle_suite(std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "oracle";
  std::size_t total = 0, exact = 0, compared = 0, rejected = 0;
  std::size_t config = 0;
  for (std::size_t s : {1, 3, 5, 7, 9}) {
    for (std::size_t d : {1, 2}) {
      for (ShiftPadding pad : {ShiftPadding::zero, ShiftPadding::circular, ShiftPadding::reflect,
                               ShiftPadding::replicate}) {
        for (std::size_t c : {3, 5, 8, 16}) {
          ++total;
          ShiftConfig cfg{s, s, d, pad};
          bool ok = true;
          std::string why;
          for (std::uint64_t trial = 0; trial < 5 && ok; ++trial) {
            Rng rng = make_rng(seed, config * 5 + trial);
            const std::size_t h = 9 + rng() % 6, w = 9 + rng() % 6;
            const Tensor<double> x = random_uniform<double>({2, c, h, w}, rng);
            for (Axis axis : {Axis::height, Axis::width}) {
              Tape<double> tape;
              if (s > c) {
                try {
                  shift(tape.constant(x), axis, cfg);
                  ok = false;
                  why = "accepted s > C";
                } catch (const std::invalid_argument&) {
                }
                continue;
              }
              const Tensor<double> got = shift(tape.constant(x), axis, cfg).value();
              if (!(got == oracle::shift(x, axis, cfg))) {
                ok = false;
                why = "mismatch at trial " + std::to_string(trial) + " axis " +
                      (axis == Axis::height ? "h" : "w");
              }
            }
          }
          (s > c ? rejected : compared) += 1;
          if (ok) {
            ++exact;
          } else {
            rep.add(describe(cfg) + " C=" + std::to_string(c), false, why);
          }
          ++config;
        }
      }
    }
  }
  rep.summary = std::to_string(exact) + "/" + std::to_string(total) + " configs exact";
  rep.add("index-map equality", exact == total,
          std::to_string(compared) + " configs compared bit-exactly, " + std::to_string(rejected) +
              " with s > C rejected as required, 5 inputs x 2 axes each");
  return rep;
}

// --------------------------------------------------------------- gradcheck

namespace {

template <class P>
std::vector<GradTarget> targets_of(P& params, const std::string& prefix) {
  std::vector<GradTarget> out;
  visit_params(prefix, params, ParamVisitor<double>([&](const std::string& n, Tensor<double>& t, ParamKind) {
                 out.push_back({n, &t});
               }));
  return out;
}

void jitter(const std::vector<GradTarget>& targets, Rng& rng, double scale) {
  for (const auto& t : targets) {
    for (double& v : t.tensor->data()) {
      v += scale * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    }
  }
}

}  // namespace

SuiteReport run_gradcheck_suite(std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "gradcheck";
  constexpr double kLayerTol = 1e-4, kModelTol = 1e-3;
  double worst_layer = 0.0;
  Rng rng = make_rng(seed, 0x6C);

  auto check = [&](const std::string& name, const std::function<Var<double>(Context<double>&)>& fn,
                   std::vector<GradTarget> wrt, GradCheckOptions opts, double tol) {
    opts.seed = seed;
    const GradCheckResult r = gradcheck(fn, wrt, opts);
    if (tol == kLayerTol) worst_layer = std::max(worst_layer, r.max_rel_error);
    rep.add(name, r.max_rel_error < tol,
            "max rel err " + sci(r.max_rel_error) + " over " + std::to_string(r.checked) +
                " entries (worst " + r.worst + ")");
  };

  {
    Tensor<double> x = random_uniform<double>({2, 5, 3, 4}, rng);
    auto lin = make_linear<double>(5, 6, true, rng);
    jitter(targets_of(lin, "linear"), rng, 0.5);
    auto wrt = targets_of(lin, "linear");
    wrt.push_back({"x", &x});
    check("linear", [&](Context<double>& ctx) { return linear(ctx, ctx.param(x), lin); }, wrt, {}, kLayerTol);
  }
  {
    Tensor<double> x = random_uniform<double>({2, 6, 3, 3}, rng);
    auto ln = make_layer_norm<double>(6);
    jitter(targets_of(ln, "ln"), rng, 0.5);
    auto wrt = targets_of(ln, "ln");
    wrt.push_back({"x", &x});
    check("layer_norm", [&](Context<double>& ctx) { return layer_norm(ctx, ctx.param(x), ln); }, wrt, {}, kLayerTol);
  }
  {
    Tensor<double> x = random_uniform<double>({2, 3, 4, 4}, rng, -3.0, 3.0);
    check("gelu", [&](Context<double>& ctx) { return gelu(ctx.param(x)); }, {{"x", &x}}, {}, kLayerTol);
  }
  {
    Tensor<double> x = random_uniform<double>({2, 4, 3, 3}, rng);
    auto mlp = make_mlp<double>(4, 4, rng);
    jitter(targets_of(mlp, "mlp"), rng, 0.3);
    auto wrt = targets_of(mlp, "mlp");
    wrt.push_back({"x", &x});
    check("mlp", [&](Context<double>& ctx) { return mlp_forward(ctx, ctx.param(x), mlp); }, wrt, {}, kLayerTol);
  }
  for (ShiftPadding pad : {ShiftPadding::zero, ShiftPadding::circular, ShiftPadding::reflect,
                           ShiftPadding::replicate}) {
    Tensor<double> x = random_uniform<double>({1, 6, 5, 6}, rng);
    const ShiftConfig cfg{3, 5, 1, pad};
    check("shift " + std::string(to_string(pad)),
          [&](Context<double>& ctx) {
            return shift(shift(ctx.param(x), Axis::width, cfg), Axis::height, cfg);
          },
          {{"x", &x}}, {}, kLayerTol);
  }
  for (Connection conn : {Connection::parallel, Connection::serial}) {
    Tensor<double> x = random_uniform<double>({1, 6, 5, 5}, rng);
    auto unit = make_axial_shift_unit<double>(6, ShiftConfig{3, 3, 2, ShiftPadding::zero}, conn, rng);
    jitter(targets_of(unit, "unit"), rng, 0.3);
    auto wrt = targets_of(unit, "unit");
    wrt.push_back({"x", &x});
    check("axial_shift_unit " + std::string(to_string(conn)),
          [&](Context<double>& ctx) { return axial_shift_unit(ctx, ctx.param(x), unit); }, wrt, {}, kLayerTol);
  }
  {
    Tensor<double> x = random_uniform<double>({3, 6, 4, 4}, rng);
    BlockConfig bc;
    bc.channels = 6;
    bc.shift = ShiftConfig{3, 3, 1, ShiftPadding::reflect};
    bc.mlp_ratio = 2;
    bc.drop_path = 0.5;
    auto blk = make_as_mlp_block<double>(bc, rng);
    jitter(targets_of(blk, "block"), rng, 0.3);
    auto wrt = targets_of(blk, "block");
    wrt.push_back({"x", &x});
    GradCheckOptions o;
    o.training = true;
    check("as_mlp_block (train, drop_path 0.5)",
          [&](Context<double>& ctx) { return as_mlp_block(ctx, ctx.param(x), blk); }, wrt, o, kLayerTol);
  }
  {
    Tensor<double> x = random_uniform<double>({2, 4, 4, 6}, rng);
    auto pm = make_patch_merging<double>(4, rng);
    std::vector<GradTarget> wrt{{"merge.norm.gamma", &pm.norm.gamma},
                                {"merge.norm.beta", &pm.norm.beta},
                                {"merge.reduction.weight", &pm.reduction.weight}};
    jitter(wrt, rng, 0.3);
    wrt.push_back({"x", &x});
    check("patch_merging", [&](Context<double>& ctx) { return patch_merging(ctx, ctx.param(x), pm); }, wrt, {},
          kLayerTol);
  }
  for (BaselineKind kind : {BaselineKind::global_mlp, BaselineKind::axial_mlp, BaselineKind::window_mlp}) {
    const std::size_t side = kind == BaselineKind::window_mlp ? 7 : 4;
    Tensor<double> x = random_uniform<double>({1, 3, side, side}, rng);
    auto blk = make_baseline_block<double>(kind, side, side, 3, rng, false, 2, 0.0);
    auto& p = std::get<TokenMixBlockParams<double>>(blk);
    jitter(targets_of(p, "block"), rng, 0.3);
    auto wrt = targets_of(p, "block");
    wrt.push_back({"x", &x});
    GradCheckOptions o;
    o.max_entries = 40;
    check(std::string(to_string(kind)) + " token-mix block",
          [&](Context<double>& ctx) { return token_mix_block(ctx, ctx.param(x), p); }, wrt, o, kLayerTol);
  }
  {
    Tensor<double> logits = random_uniform<double>({4, 5}, rng, -2.0, 2.0);
    const std::vector<std::size_t> targets{0, 3, 4, 1};
    check("smoothed_cross_entropy",
          [&](Context<double>& ctx) { return smoothed_cross_entropy(ctx.param(logits), targets, 0.1); },
          {{"logits", &logits}}, {}, 1e-6);
  }

  {
    VariantConfig v = TrainConfig::toy_variant();
    v.channels = 8;
    v.depths = {1, 1, 1, 1};
    Rng init = make_rng(seed, 0x70);
    ModelParams<double> model = init_model<double>(v, init);
    std::vector<GradTarget> wrt;
    visit_params(model, ParamVisitor<double>([&](const std::string& n, Tensor<double>& t, ParamKind) {
                   wrt.push_back({n, &t});
                 }));
    jitter(wrt, rng, 0.05);
    Tensor<double> image = random_uniform<double>({1, 3, 32, 32}, rng);
    wrt.push_back({"image", &image});
    GradCheckOptions o;
    o.max_entries = 3;
    check("full toy model (C=8, blocks 1-1-1-1, 32x32, 4 classes)",
          [&](Context<double>& ctx) { return forward(ctx, ctx.param(image), model); }, wrt, o, kModelTol);
  }

  rep.summary = "max per-layer rel err " + sci(worst_layer) + (rep.pass() ? "" : " (FAILED)");
  return rep;
}

// ------------------------------------------------------------------ counts

SuiteReport run_counts_suite(std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "counts";
  struct Reported {
    const char* name;
    double params_m;
    int params_decimals;
    double gflops;
  };
  const Reported table[] = {{"tiny", 28, 0, 4.4}, {"small", 50, 0, 8.5}, {"base", 88, 0, 15.2},
                            {"mobile", 9.6, 1, -1}};
  Rng meta_rng = make_rng(seed);
  for (const auto& row : table) {
    const VariantConfig v = make_variant(row.name);
    const auto model = init_model<float>(v, meta_rng, true);
    const auto weights = measure_model(model, 224, 224, false);
    const auto aux = measure_model(model, 224, 224, true);
    const auto f_weights = formula_params(v, false);
    const auto f_aux = formula_params(v, true);
    const auto f_flops = formula_flops(v, 224, 224);

    bool per_component = true;
    for (Component c : {Component::linear_embedding, Component::patch_merging, Component::blocks}) {
      per_component = per_component && weights.params_of(c) == f_weights.params_of(c) &&
                      weights.macs_of(c) == f_flops.macs_of(c);
    }
    rep.add(std::string(row.name) + " weight-only params == closed form",
            weights.total_params() == f_weights.total_params() && per_component,
            std::to_string(weights.total_params()) + " vs " + std::to_string(f_weights.total_params()));
    rep.add(std::string(row.name) + " params with aux == closed form",
            aux.total_params() == f_aux.total_params(),
            std::to_string(aux.total_params()) + " vs " + std::to_string(f_aux.total_params()));
    const double m = static_cast<double>(aux.total_params()) / 1e6;
    std::ostringstream pm;
    pm << std::fixed << std::setprecision(2) << m << "M, reported " << row.params_m << "M";
    rep.add(std::string(row.name) + " params match reported", matches_reported(m, row.params_m, row.params_decimals),
            pm.str());
    rep.add(std::string(row.name) + " MACs == formula_flops", weights.total_macs() == f_flops.total_macs(),
            std::to_string(weights.total_macs()) + " vs " + std::to_string(f_flops.total_macs()));
    if (row.gflops > 0) {
      const double g = static_cast<double>(weights.total_macs()) / 1e9;
      std::ostringstream gm;
      gm << std::fixed << std::setprecision(3) << g << "G, reported " << row.gflops << "G";
      rep.add(std::string(row.name) + " FLOPs match reported", matches_reported(g, row.gflops, 1), gm.str());
    }
  }

  // One unit costs 4hwC^2 whatever s, d and the connection are.
  Rng rng = make_rng(seed, 0xC0);
  std::size_t law_cases = 0, law_ok = 0;
  std::string law_fail;
  for (int k = 0; k < 10; ++k) {
    const std::size_t h = 9 + rng() % 24, w = 9 + rng() % 24, c = 9 + rng() % 56;
    const std::uint64_t expected = 4ull * h * w * c * c;
    for (std::size_t s : {1, 3, 5, 7, 9}) {
      for (std::size_t d : {1, 2}) {
        for (Connection conn : {Connection::parallel, Connection::serial}) {
          ++law_cases;
          const auto got = measure_unit_macs(c, h, w, ShiftConfig{s, s, d, ShiftPadding::zero}, conn);
          if (got == expected) {
            ++law_ok;
          } else if (law_fail.empty()) {
            law_fail = " first failure h=" + std::to_string(h) + " w=" + std::to_string(w) + " C=" +
                       std::to_string(c) + ": " + std::to_string(got) + " vs " + std::to_string(expected);
          }
        }
      }
    }
  }
  rep.add("unit MACs == 4hwC^2", law_ok == law_cases,
          std::to_string(law_ok) + "/" + std::to_string(law_cases) + " cases" + law_fail);

  // Baselines in tiny's stage layout at 224.
  for (BaselineKind kind : {BaselineKind::global_mlp, BaselineKind::axial_mlp, BaselineKind::window_mlp,
                            BaselineKind::shift_5_1, BaselineKind::shift_1_5}) {
    VariantConfig v = make_variant("tiny");
    v.baseline = kind;
    const auto model = init_model<float>(v, meta_rng, true);
    const auto got = measure_model(model, 224, 224, false);
    const auto want = formula_costs(v, 224, 224, false);
    rep.add("baseline " + std::string(to_string(kind)) + " == closed form",
            got.total_params() == want.total_params() && got.total_macs() == want.total_macs(),
            std::to_string(got.total_params()) + " params, " + std::to_string(got.total_macs()) + " MACs");
  }

  std::size_t passed = 0;
  for (const auto& c : rep.checks) passed += c.pass ? 1 : 0;
  rep.summary = std::to_string(passed) + "/" + std::to_string(rep.checks.size()) + " reconciliations exact";
  return rep;
}

// ------------------------------------------------------------------ rfield

namespace {

std::string offsets_str(const oracle::Offsets& o) {
  std::ostringstream os;
  os << o.size() << " cells";
  return os.str();
}

}  // namespace

SuiteReport run_rfield_suite(std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = "rfield";
  const std::pair<std::size_t, std::size_t> grid[] = {{3, 1}, {5, 1}, {7, 1}, {3, 2}, {5, 2}};
  for (const auto& [s, d] : grid) {
    const ShiftConfig cfg{s, s, d, ShiftPadding::zero};
    const int reach = static_cast<int>(cfg.reach(Axis::width));
    const std::size_t n = static_cast<std::size_t>(2 * reach + 5);
    const Position centre{static_cast<int>(n / 2), static_cast<int>(n / 2)};
    const auto field = to_offsets(probe_stacked_units(cfg, 1, 2 * s, n, n, centre, seed), centre);
    const auto want = oracle::cross(cfg);
    rep.add("one unit " + describe(cfg), field == want && field == sampling_locations(cfg),
            "probe " + offsets_str(field) + ", cross " + offsets_str(want));
  }
  for (const auto& [s, d, depth] : {std::tuple<std::size_t, std::size_t, std::size_t>{3, 1, 2},
                                    {5, 1, 2}, {3, 2, 3}, {5, 1, 3}}) {
    const ShiftConfig cfg{s, s, d, ShiftPadding::zero};
    const int reach = static_cast<int>(cfg.reach(Axis::width) * depth);
    const std::size_t n = static_cast<std::size_t>(2 * reach + 3);
    const Position centre{static_cast<int>(n / 2), static_cast<int>(n / 2)};
    const auto field = to_offsets(probe_stacked_units(cfg, depth, 2 * s, n, n, centre, seed), centre);
    oracle::Offsets want{{0, 0}};
    for (std::size_t k = 0; k < depth; ++k) want = oracle::minkowski_sum(want, oracle::cross(cfg));
    rep.add(std::to_string(depth) + " stacked units " + describe(cfg), field == want,
            "probe " + offsets_str(field) + ", Minkowski sum " + offsets_str(want));
  }
  {
    // Serial composition reads the full product of both arms.
    const ShiftConfig cfg{5, 3, 1, ShiftPadding::zero};
    const std::size_t n = 9;
    const Position centre{4, 4};
    Rng rng = make_rng(seed, 0x5E);
    auto unit = make_axial_shift_unit<double>(10, cfg, Connection::serial, rng);
    for (Linear<double>* l : {&unit.proj_in, &unit.proj_h, &unit.proj_v, &unit.proj_out}) {
      l->weight = random_uniform<double>(l->weight.dims(), rng);
    }
    const auto field = to_offsets(
        receptive_field_probe([&](Context<double>& ctx, Var<double> x) { return axial_shift_unit(ctx, x, unit); },
                              10, n, n, centre, seed),
        centre);
    oracle::Offsets rows, cols;
    for (int k = -2; k <= 2; ++k) rows.insert({0, k});
    for (int k = -1; k <= 1; ++k) cols.insert({k, 0});
    const auto want = oracle::minkowski_sum(rows, cols);
    rep.add("serial unit " + describe(cfg), field == want,
            "probe " + offsets_str(field) + ", row x column arms " + offsets_str(want));
  }
  std::size_t passed = 0;
  for (const auto& c : rep.checks) passed += c.pass ? 1 : 0;
  rep.summary = std::to_string(passed) + "/" + std::to_string(rep.checks.size()) + " fields match";
  return rep;
}

}  // namespace asmlp
