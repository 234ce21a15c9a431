#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "asmlp/checkpoint.hpp"
#include "asmlp/mac_counter.hpp"
#include "asmlp/training.hpp"
#include "asmlp/verify.hpp"
#include "run_config.hpp"

namespace asmlp::cli {

namespace {

VariantConfig named_variant(const std::string& name) {
  if (name == "toy") return TrainConfig::toy_variant();
  return make_variant(name);
}

}  // namespace

int cmd_describe(const DescribeOptions& opts, std::ostream& out, std::ostream& err) {
  VariantConfig v;
  try {
    v = named_variant(opts.variant);
    if (!opts.baseline.empty() && opts.baseline != "none") {
      v.baseline = parse_baseline_kind(opts.baseline);
    }
    v.input_size = opts.input_size;
    v.validate();
    v.validate_input(opts.input_size, opts.input_size);
  } catch (const std::exception& e) {
    err << "describe: " << e.what() << '\n';
    return kUsage;
  }

  Rng rng = make_rng(0);
  const auto model = init_model<float>(v, rng, true);
  const auto measured = measure_model(model, opts.input_size, opts.input_size, opts.include_aux);
  const auto closed = formula_costs(v, opts.input_size, opts.input_size, opts.include_aux);

  if (opts.csv) {
    print_csv(out, measured);
  } else {
    out << "variant " << v.name << ": C=" << v.channels << " depths " << v.depths[0] << '-'
        << v.depths[1] << '-' << v.depths[2] << '-' << v.depths[3] << ' ' << describe(v.shift)
        << ' ' << to_string(v.connection);
    if (v.baseline) out << " baseline=" << to_string(*v.baseline);
    out << ", input " << opts.input_size << 'x' << opts.input_size << ", "
        << (opts.include_aux ? "all parameters" : "weight matrices only") << '\n';
    print_table(out, measured);
    out << "blocks: " << measured.params_of(Component::blocks) << " params, "
        << measured.macs_of(Component::blocks) << " MACs\n";
  }
  const bool match = measured.entries == closed.entries;
  if (!opts.csv) {
    out << "closed form: " << closed.total_params() << " params, " << closed.total_macs()
        << " MACs (" << (match ? "match" : "MISMATCH") << ")\n";
  }
  if (!match) {
    err << "describe: measured costs differ from the closed form\n";
    return kFailure;
  }
  return kOk;
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> suites{"oracle", "gradcheck", "counts", "rfield"};
  std::vector<std::string> run;
  if (opts.suite == "all") {
    run = suites;
  } else if (std::find(suites.begin(), suites.end(), opts.suite) != suites.end()) {
    run = {opts.suite};
  } else {
    err << "verify: unknown suite '" << opts.suite << "' (oracle, gradcheck, counts, rfield, all)\n";
    return kUsage;
  }
  bool ok = true;
  for (const auto& name : run) {
    SuiteReport r;
    if (name == "oracle") r = run_oracle_suite(opts.seed);
    if (name == "gradcheck") r = run_gradcheck_suite(opts.seed);
    if (name == "counts") r = run_counts_suite(opts.seed);
    if (name == "rfield") r = run_rfield_suite(opts.seed);
    print_report(out, r);
    ok = ok && r.pass();
  }
  return ok ? kOk : kFailure;
}

int cmd_train(const TrainCommand& opts, std::ostream& out, std::ostream& err) {
  TrainConfig cfg;
  Checkpoint resume;
  try {
    KeyValues kv;
    if (!opts.config.empty()) kv = KeyValues::load(opts.config);
    for (const auto& s : opts.sets) kv.set(s);
    if (opts.epochs) kv.set("epochs", std::to_string(*opts.epochs));
    if (opts.seed) kv.set("seed", std::to_string(*opts.seed));
    if (opts.checkpoint) kv.set("checkpoint", *opts.checkpoint);
    if (opts.metrics) kv.set("metrics", *opts.metrics);
    cfg = make_train_config(kv);
    if (!opts.resume.empty()) resume = load_checkpoint(opts.resume);
  } catch (const std::exception& e) {
    err << "train: " << e.what() << '\n';
    return kUsage;
  }

  TrainOptions topts;
  if (!opts.resume.empty()) topts.resume = &resume;
  topts.stop_after = opts.stop_after;
  topts.on_epoch = [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << '/' << cfg.epochs << "  lr " << std::setprecision(6) << r.lr
        << "  loss " << std::fixed << std::setprecision(4) << r.train_loss << "  acc "
        << r.train_acc << std::defaultfloat << '\n'
        << std::flush;
  };
  TrainResult result;
  try {
    result = train(cfg, topts);
  } catch (const std::invalid_argument& e) {
    err << "train: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "train: " << e.what() << '\n';
    return kFailure;
  }
  out << "final train accuracy: " << std::fixed << std::setprecision(4) << result.final_accuracy
      << std::defaultfloat << '\n';
  if (!cfg.checkpoint_path.empty()) out << "checkpoint: " << cfg.checkpoint_path.string() << '\n';
  if (!cfg.metrics_path.empty()) out << "metrics: " << cfg.metrics_path.string() << '\n';
  return kOk;
}

// ------------------------------------------------------------------- bench

BenchOp parse_bench_op(const std::string& name) {
  if (name == "axial-shift") return BenchOp::axial_shift;
  if (name == "unit") return BenchOp::unit;
  if (name == "block") return BenchOp::block;
  throw std::invalid_argument("unknown bench op '" + name + "' (axial-shift, unit, block)");
}

BenchStats bench_op(BenchOp op, const Shape& shape, const ShiftConfig& cfg, std::size_t repeats) {
  if (shape.size() != 4) throw ShapeError("bench: expected a [b,C,h,w] shape");
  if (repeats == 0) throw std::invalid_argument("bench: repeats must be positive");
  const std::size_t channels = shape[1];
  cfg.validate(channels);

  Rng rng = make_rng(0, 0x42);
  const Tensor<float> input = random_uniform<float>(shape, rng);
  std::optional<AxialShiftUnitParams<float>> unit;
  std::optional<AsMlpBlockParams<float>> block;
  if (op == BenchOp::unit) unit = make_axial_shift_unit<float>(channels, cfg, Connection::parallel, rng);
  if (op == BenchOp::block) {
    BlockConfig bc;
    bc.channels = channels;
    bc.shift = cfg;
    block = make_as_mlp_block<float>(bc, rng);
  }

  auto run = [&]() {
    Tape<float> tape;
    Context<float> ctx(tape, false, nullptr, false);
    Var<float> x = tape.constant(input);
    switch (op) {
      case BenchOp::axial_shift:
        shift(x, Axis::width, cfg);
        shift(x, Axis::height, cfg);
        break;
      case BenchOp::unit:
        axial_shift_unit(ctx, x, *unit);
        break;
      case BenchOp::block:
        as_mlp_block(ctx, x, *block);
        break;
    }
  };

  BenchStats stats;
  {
    MacCounter counter;
    run();  // also warms caches
    stats.macs = counter.total();
  }
  std::vector<double> ms;
  ms.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  stats.min_ms = ms.front();
  stats.median_ms = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
  return stats;
}

std::pair<std::vector<SweepRow>, double> bench_sweep(BenchOp op, const Shape& shape,
                                                     std::size_t repeats) {
  std::vector<SweepRow> rows;
  for (std::size_t s : {1, 3, 5, 7, 9}) {
    ShiftConfig cfg;
    cfg.shift_h = cfg.shift_v = s;
    rows.push_back({s, bench_op(op, shape, cfg, repeats)});
  }
  double mean = 0.0;
  for (const auto& r : rows) mean += r.stats.median_ms;
  mean /= static_cast<double>(rows.size());
  double var = 0.0;
  for (const auto& r : rows) var += (r.stats.median_ms - mean) * (r.stats.median_ms - mean);
  var /= static_cast<double>(rows.size());
  return {rows, mean > 0.0 ? std::sqrt(var) / mean : 0.0};
}

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  BenchOp op;
  Shape shape;
  ShiftConfig cfg;
  try {
    op = parse_bench_op(opts.op);
    shape = parse_shape(opts.shape);
    cfg.shift_h = cfg.shift_v = opts.shift;
    cfg.dilation = opts.dilation;
    cfg.validate(shape[1]);
    if (opts.repeats == 0) throw std::invalid_argument("repeats must be positive");
    if (opts.sweep && shape[1] < 9) {
      throw std::invalid_argument("the s sweep needs at least 9 channels (use --no-sweep)");
    }
  } catch (const std::exception& e) {
    err << "bench: " << e.what() << '\n';
    return kUsage;
  }

  const auto stats = bench_op(op, shape, cfg, opts.repeats);
  out << "op " << opts.op << " shape " << opts.shape << ' ' << describe(cfg) << ", " << opts.repeats
      << " repeats\n";
  out << std::fixed << std::setprecision(3) << "median " << stats.median_ms << " ms  min "
      << stats.min_ms << " ms  MACs " << stats.macs << std::defaultfloat << '\n';
  if (opts.sweep) {
    const auto [rows, cv] = bench_sweep(op, shape, opts.repeats);
    out << "s,median_ms,min_ms,macs\n";
    for (const auto& r : rows) {
      out << r.shift << ',' << std::fixed << std::setprecision(4) << r.stats.median_ms << ','
          << r.stats.min_ms << ',' << r.stats.macs << std::defaultfloat << '\n';
    }
    out << "coefficient of variation of median time over s: " << std::fixed << std::setprecision(4)
        << cv << std::defaultfloat << '\n';
  }
  return kOk;
}

// ------------------------------------------------------------------- probe

std::string render_grid(const std::set<Position>& field, std::size_t height, std::size_t width) {
  std::string s;
  s.reserve(height * (width + 1));
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      s += field.count({static_cast<int>(i), static_cast<int>(j)}) ? '#' : '.';
    }
    s += '\n';
  }
  return s;
}

int cmd_probe(const ProbeOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.checkpoint.empty() == !opts.random_init) {
    err << "probe: give exactly one of --checkpoint or --random-init\n";
    return kUsage;
  }
  if (opts.depth == 0) {
    err << "probe: depth must be positive\n";
    return kUsage;
  }

  std::optional<ModelParams<double>> model;
  ShiftConfig cfg;
  std::size_t channels = 0;
  try {
    if (!opts.checkpoint.empty()) {
      model = restore_model<double>(load_checkpoint(opts.checkpoint));
      if (opts.depth > model->stages[0].blocks.size()) {
        throw std::invalid_argument("depth " + std::to_string(opts.depth) + " exceeds the " +
                                    std::to_string(model->stages[0].blocks.size()) +
                                    " first-stage blocks of the checkpoint");
      }
      cfg = model->config.shift;
      channels = model->config.channels;
    } else {
      const auto s = parse_size_list("shift", opts.shift);
      if (s.size() != 1 && s.size() != 2) throw ConfigError("shift: expected 's' or 's_h,s_v'");
      cfg.shift_h = s[0];
      cfg.shift_v = s.size() == 2 ? s[1] : s[0];
      cfg.dilation = opts.dilation;
      cfg.padding = parse_shift_padding(opts.padding);
      channels = opts.channels ? opts.channels : 2 * std::max(cfg.shift_h, cfg.shift_v);
      cfg.validate(channels);
    }
  } catch (const std::exception& e) {
    err << "probe: " << e.what() << '\n';
    return kUsage;
  }

  const std::size_t reach = std::max(cfg.reach(Axis::width), cfg.reach(Axis::height));
  const std::size_t size = opts.size ? opts.size : 2 * reach * opts.depth + 3;
  const int mid = static_cast<int>(size / 2);
  const Position pos = opts.position.value_or(Position{mid, mid});
  if (pos.first < 0 || pos.second < 0 || static_cast<std::size_t>(pos.first) >= size ||
      static_cast<std::size_t>(pos.second) >= size) {
    err << "probe: position (" << pos.first << "," << pos.second << ") outside the " << size << 'x'
        << size << " grid\n";
    return kUsage;
  }

  std::set<Position> field;
  try {
    if (model) {
      field = receptive_field_probe(
          [&](Context<double>& ctx, Var<double> x) {
            for (std::size_t k = 0; k < opts.depth; ++k) x = run_block(ctx, x, model->stages[0].blocks[k]);
            return x;
          },
          channels, size, size, pos, opts.seed);
    } else {
      field = probe_stacked_units(cfg, opts.depth, channels, size, size, pos, opts.seed);
    }
  } catch (const std::exception& e) {
    // Resolution-bound baselines only accept their build size.
    err << "probe: " << e.what() << '\n';
    return kUsage;
  }

  const std::string grid = render_grid(field, size, size);
  std::ofstream file(opts.output);
  if (!file) {
    err << "probe: cannot write " << opts.output << '\n';
    return kUsage;
  }
  file << "# probe " << describe(cfg) << " depth " << opts.depth << " position " << pos.first << ','
       << pos.second << " grid " << size << 'x' << size << " cells " << field.size() << '\n'
       << grid;
  out << describe(cfg) << " depth " << opts.depth << ": " << field.size()
      << " influencing positions around (" << pos.first << "," << pos.second << ")\n"
      << grid << "written to " << opts.output << '\n';
  return kOk;
}

}  // namespace asmlp::cli
