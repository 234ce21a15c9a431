#include "asmlp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace asmlp {

std::string_view to_string(Precision p) { return p == Precision::wide ? "wide" : "narrow"; }

Precision parse_precision(std::string_view name) {
  if (name == "narrow" || name == "f32" || name == "float") return Precision::narrow;
  if (name == "wide" || name == "f64" || name == "double") return Precision::wide;
  throw std::invalid_argument("unknown precision '" + std::string(name) + "' (expected narrow or wide)");
}

template <std::floating_point T>
void adamw_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads,
                const std::vector<bool>& decay, AdamWState<T>& state, double lr,
                double weight_decay, const AdamWHyper& hyper) {
  if (grads.size() != params.size() || decay.size() != params.size()) {
    throw ShapeError("adamw_step: " + std::to_string(params.size()) + " params, " +
                     std::to_string(grads.size()) + " grads, " + std::to_string(decay.size()) +
                     " decay flags");
  }
  if (state.m.empty() && state.step == 0) {
    for (const Tensor<T>* p : params) {
      state.m.emplace_back(p->dims());
      state.v.emplace_back(p->dims());
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adamw_step: optimizer state does not match the parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].dims() != params[i]->dims() || state.m[i].dims() != params[i]->dims()) {
      throw ShapeError("adamw_step: parameter " + std::to_string(i) + " is " +
                       shape_str(params[i]->dims()) + ", gradient " + shape_str(grads[i].dims()));
    }
    if (!grads[i].all_finite()) {
      throw NonFiniteError("adamw_step: non-finite gradient for parameter " + std::to_string(i));
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    const double shrink = decay[i] ? 1.0 - lr * weight_decay : 1.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      const double mk = hyper.beta1 * m[k] + (1.0 - hyper.beta1) * gk;
      const double vk = hyper.beta2 * v[k] + (1.0 - hyper.beta2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double update = (mk / c1) / (std::sqrt(vk / c2) + hyper.eps);
      p[k] = static_cast<T>(p[k] * shrink - lr * update);
    }
  }
}

double lr_schedule(std::uint64_t step, std::uint64_t total_steps, std::uint64_t warmup_steps,
                   double base_lr, double min_lr) {
  if (step > total_steps) {
    throw std::out_of_range("lr_schedule: step " + std::to_string(step) + " exceeds total " +
                            std::to_string(total_steps));
  }
  if (warmup_steps > total_steps) throw std::invalid_argument("lr_schedule: warmup exceeds total steps");
  if (step < warmup_steps) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  const std::uint64_t span = total_steps - warmup_steps;
  if (span == 0) return base_lr;
  const double progress = static_cast<double>(step - warmup_steps) / static_cast<double>(span);
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

template <std::floating_point T>
Var<T> smoothed_cross_entropy(Var<T> logits, std::span<const std::size_t> targets, double smoothing) {
  const Shape& d = logits.dims();
  if (d.size() != 2) throw ShapeError("smoothed_cross_entropy: expected [b,K] logits, got " + shape_str(d));
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw std::invalid_argument("smoothed_cross_entropy: smoothing must lie in [0,1)");
  }
  const std::size_t batch = d[0], classes = d[1];
  if (targets.size() != batch) {
    throw ShapeError("smoothed_cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(batch) + " rows");
  }
  for (std::size_t t : targets) {
    if (t >= classes) {
      throw std::out_of_range("smoothed_cross_entropy: target " + std::to_string(t) + " not in [0," +
                              std::to_string(classes) + ")");
    }
  }

  const auto x = logits.value().data();
  const double off = smoothing / static_cast<double>(classes);
  auto probs = std::make_shared<std::vector<double>>(batch * classes);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = x.data() + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t k = 0; k < classes; ++k) z += std::exp(row[k] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t k = 0; k < classes; ++k) {
      const double q = off + (k == targets[b] ? 1.0 - smoothing : 0.0);
      loss -= q * (row[k] - lse);
      (*probs)[b * classes + k] = std::exp(row[k] - lse);
    }
  }
  loss /= static_cast<double>(batch);

  std::vector<std::size_t> tg(targets.begin(), targets.end());
  return logits.tape()->record(
      Tensor<T>::scalar(static_cast<T>(loss)), {logits},
      [logits, probs, tg = std::move(tg), batch, classes, smoothing, off](Tape<T>& tape,
                                                                          const Tensor<T>& g) {
        Tensor<T> gx({batch, classes});
        const double scale = static_cast<double>(g[0]) / static_cast<double>(batch);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t k = 0; k < classes; ++k) {
            const double q = off + (k == tg[b] ? 1.0 - smoothing : 0.0);
            gx[b * classes + k] = static_cast<T>(((*probs)[b * classes + k] - q) * scale);
          }
        }
        tape.accumulate(logits, std::move(gx));
      });
}

// ------------------------------------------------------------------ dataset

namespace {

struct Blob {
  std::size_t row, col;  // patch coordinates
  std::size_t dy, dx;    // pixel offset inside the patch
};

std::size_t below(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

}  // namespace

template <std::floating_point T>
Dataset<T> synth_dataset(const DatasetSpec& spec, std::size_t patch) {
  if (spec.classes < 2 || spec.classes > 4) {
    throw std::invalid_argument("synth_dataset: classes must be between 2 and 4");
  }
  if (spec.samples == 0) throw std::invalid_argument("synth_dataset: samples must be positive");
  if (spec.image_size == 0 || spec.image_size % 32 != 0) {
    throw std::invalid_argument("synth_dataset: image size must be a positive multiple of 32");
  }
  if (patch == 0 || spec.image_size % patch != 0) {
    throw std::invalid_argument("synth_dataset: image size not divisible by the patch size");
  }
  const std::size_t n = spec.samples, s = spec.image_size, grid = s / patch;
  if (grid < 3) throw std::invalid_argument("synth_dataset: fewer than 3 patches per side");

  Dataset<T> ds;
  ds.images = Tensor<T>({n, 3, s, s});
  ds.labels.resize(n);
  auto img = ds.images.data();
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(spec.seed, i);
    const std::size_t label = i % spec.classes;
    ds.labels[i] = label;

    // One dot per patch. Every even-indexed patch copies the offset of its
    // left neighbour (label 0), upper neighbour (1), both (2) or neither (3).
    const bool along_rows = label == 0 || label == 2;
    const bool along_cols = label == 1 || label == 2;
    const std::size_t cells = patch * patch;
    std::vector<std::size_t> code(grid * grid);
    for (std::size_t r = 0; r < grid; ++r) {
      for (std::size_t c = 0; c < grid; ++c) {
        if (along_rows && c > 0 && c % 2 == 0) {
          code[r * grid + c] = code[r * grid + c - 1];
        } else if (along_cols && r > 0 && r % 2 == 0) {
          code[r * grid + c] = code[(r - 1) * grid + c];
        } else {
          code[r * grid + c] = below(rng, cells);
        }
      }
    }
    std::vector<Blob> blobs;
    for (std::size_t k = 0; k < grid * grid; ++k) {
      blobs.push_back({k / grid, k % grid, code[k] / patch, code[k] % patch});
    }

    std::normal_distribution<double> noise(0.0, spec.noise);
    T* base = img.data() + i * 3 * s * s;
    for (std::size_t k = 0; k < 3 * s * s; ++k) base[k] = static_cast<T>(noise(rng));
    for (const Blob& b : blobs) {
      const std::size_t y = b.row * patch + b.dy, x = b.col * patch + b.dx;
      for (std::size_t ch = 0; ch < 3; ++ch) base[(ch * s + y) * s + x] += T(1);
    }
  }
  return ds;
}

// ----------------------------------------------------------------- training

VariantConfig TrainConfig::toy_variant() {
  VariantConfig v;
  v.name = "toy";
  v.channels = 16;
  v.depths = {1, 1, 2, 1};
  v.mlp_ratio = 4;
  v.shift = ShiftConfig{5, 5, 1, ShiftPadding::zero};
  v.num_classes = 4;
  v.drop_path_max = 0.1;
  v.input_size = 32;
  return v;
}

void TrainConfig::validate() const {
  model.validate();
  model.validate_input(data.image_size, data.image_size);
  if (epochs == 0) throw std::invalid_argument("train: epochs must be positive");
  if (warmup_epochs >= epochs) throw std::invalid_argument("train: warmup epochs must be below epochs");
  if (batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw std::invalid_argument("train: smoothing must lie in [0,1)");
  if (!(lr > 0.0) || !(min_lr >= 0.0) || min_lr > lr) throw std::invalid_argument("train: need 0 <= min_lr <= lr, lr > 0");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("train: weight decay must be non-negative");
  if (model.num_classes != data.classes) {
    throw std::invalid_argument("train: model has " + std::to_string(model.num_classes) +
                                " classes, dataset " + std::to_string(data.classes));
  }
}

std::string format_metrics_header() { return "epoch,lr,train_loss,train_acc,wallclock_seconds"; }

std::string format_metrics_record(const EpochRecord& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.epoch << ',' << r.lr << ',' << r.train_loss << ',' << r.train_acc << ',';
  os.precision(4);
  os << std::fixed << r.wallclock_seconds;
  return os.str();
}

namespace {

// Config scalars stored alongside the weights so a checkpoint is self-describing.
void store_variant(Checkpoint& ckpt, const VariantConfig& v) {
  ckpt.put_scalar("config.patch_size", static_cast<double>(v.patch_size));
  ckpt.put_scalar("config.channels", static_cast<double>(v.channels));
  ckpt.put("config.depths", Tensor<double>({kStages}, {static_cast<double>(v.depths[0]),
                                                      static_cast<double>(v.depths[1]),
                                                      static_cast<double>(v.depths[2]),
                                                      static_cast<double>(v.depths[3])}));
  ckpt.put_scalar("config.mlp_ratio", static_cast<double>(v.mlp_ratio));
  ckpt.put("config.shift", Tensor<double>({2}, {static_cast<double>(v.shift.shift_h),
                                                static_cast<double>(v.shift.shift_v)}));
  ckpt.put_scalar("config.dilation", static_cast<double>(v.shift.dilation));
  ckpt.put_scalar("config.padding", static_cast<double>(v.shift.padding));
  ckpt.put_scalar("config.connection", static_cast<double>(v.connection));
  ckpt.put_scalar("config.num_classes", static_cast<double>(v.num_classes));
  ckpt.put_scalar("config.drop_path_max", v.drop_path_max);
  ckpt.put_scalar("config.baseline", v.baseline ? static_cast<double>(*v.baseline) : -1.0);
  ckpt.put_scalar("config.input_size", static_cast<double>(v.input_size));
}

std::size_t as_size(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) {
    throw CheckpointError(std::string("checkpoint: bad value for ") + what);
  }
  return static_cast<std::size_t>(v);
}

template <std::floating_point T>
struct ParamList {
  std::vector<std::string> names;
  std::vector<Tensor<T>*> ptrs;
  std::vector<bool> decay;
};

template <std::floating_point T>
ParamList<T> list_params(ModelParams<T>& model) {
  ParamList<T> out;
  visit_params(model, ParamVisitor<T>([&](const std::string& name, Tensor<T>& t, ParamKind kind) {
                 out.names.push_back(name);
                 out.ptrs.push_back(&t);
                 out.decay.push_back(kind == ParamKind::weight);
               }));
  return out;
}

template <std::floating_point T>
Tensor<T> make_batch(const Dataset<T>& data, std::span<const std::size_t> idx, Rng* flip_rng) {
  const Shape& d = data.images.dims();
  const std::size_t per = d[1] * d[2] * d[3], s = d[3];
  Tensor<T> batch({idx.size(), d[1], d[2], d[3]});
  auto dst = batch.data();
  const auto src = data.images.data();
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const T* from = src.data() + idx[b] * per;
    T* to = dst.data() + b * per;
    const bool flip = flip_rng && ((*flip_rng)() & 1u);
    if (!flip) {
      std::copy(from, from + per, to);
      continue;
    }
    for (std::size_t row = 0; row < per / s; ++row) {
      std::reverse_copy(from + row * s, from + (row + 1) * s, to + row * s);
    }
  }
  return batch;
}

template <std::floating_point T>
double global_norm(const std::vector<Tensor<T>>& grads) {
  double acc = 0.0;
  for (const auto& g : grads) {
    for (T v : g.data()) acc += static_cast<double>(v) * static_cast<double>(v);
  }
  return std::sqrt(acc);
}

template <std::floating_point T>
TrainResult train_impl(const TrainConfig& cfg, const TrainOptions& opts) {
  const Dataset<T> data = synth_dataset<T>(cfg.data, cfg.model.patch_size);
  Rng init_rng = make_rng(cfg.seed, 0);
  ModelParams<T> model = init_model<T>(cfg.model, init_rng);
  ParamList<T> plist = list_params(model);
  AdamWState<T> opt;
  std::size_t start_epoch = 0;

  if (opts.resume) {
    const Checkpoint& ck = *opts.resume;
    const auto seed_lo = static_cast<std::uint64_t>(ck.scalar("state.seed_lo"));
    const auto seed_hi = static_cast<std::uint64_t>(ck.scalar("state.seed_hi"));
    if ((seed_hi << 32 | seed_lo) != cfg.seed) {
      throw TrainingError("train: checkpoint was written with a different seed");
    }
    if (restore_variant(ck).total_blocks() != cfg.model.total_blocks() ||
        restore_variant(ck).channels != cfg.model.channels) {
      throw TrainingError("train: checkpoint model does not match the configured model");
    }
    start_epoch = as_size(ck.scalar("state.epoch"), "state.epoch");
    opt.step = static_cast<std::uint64_t>(as_size(ck.scalar("state.step"), "state.step"));
    for (std::size_t i = 0; i < plist.ptrs.size(); ++i) {
      Tensor<T> w = ck.get<T>("model." + plist.names[i]);
      if (w.dims() != plist.ptrs[i]->dims()) {
        throw TrainingError("train: checkpoint tensor '" + plist.names[i] + "' has shape " +
                            shape_str(w.dims()));
      }
      *plist.ptrs[i] = std::move(w);
      if (opt.step > 0) {
        opt.m.push_back(ck.get<T>("optim.m." + plist.names[i]));
        opt.v.push_back(ck.get<T>("optim.v." + plist.names[i]));
      }
    }
    if (start_epoch > cfg.epochs) throw TrainingError("train: checkpoint is past the configured epochs");
  }

  const std::size_t n = cfg.data.samples;
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::uint64_t total_steps = steps_per_epoch * cfg.epochs;
  const std::uint64_t warmup_steps = steps_per_epoch * cfg.warmup_epochs;
  const std::size_t end_epoch =
      opts.stop_after ? std::min(cfg.epochs, std::max(start_epoch, *opts.stop_after)) : cfg.epochs;

  auto snapshot = [&](std::size_t epochs_done) {
    Checkpoint ck;
    store_model(ck, model);
    if (opt.step > 0) {
      for (std::size_t i = 0; i < plist.names.size(); ++i) {
        ck.put("optim.m." + plist.names[i], opt.m[i]);
        ck.put("optim.v." + plist.names[i], opt.v[i]);
      }
    }
    ck.put_scalar("state.step", static_cast<double>(opt.step));
    ck.put_scalar("state.epoch", static_cast<double>(epochs_done));
    ck.put_scalar("state.seed_lo", static_cast<double>(cfg.seed & 0xFFFFFFFFu));
    ck.put_scalar("state.seed_hi", static_cast<double>(cfg.seed >> 32));
    return ck;
  };

  std::ofstream metrics;
  if (!cfg.metrics_path.empty()) {
    const bool append = opts.resume && start_epoch > 0;
    metrics.open(cfg.metrics_path, append ? std::ios::app : std::ios::trunc);
    if (!metrics) throw TrainingError("train: cannot open metrics file " + cfg.metrics_path.string());
    if (!append) metrics << format_metrics_header() << '\n';
  }

  TrainResult result;
  double last_lr = 0.0, last_grad_norm = 0.0;
  for (std::size_t epoch = start_epoch; epoch < end_epoch; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng = make_rng(cfg.seed, epoch + 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[below(rng, i + 1)]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - begin);
      const std::span<const std::size_t> idx(order.data() + begin, count);
      std::vector<std::size_t> labels(count);
      for (std::size_t b = 0; b < count; ++b) labels[b] = data.labels[idx[b]];

      Tape<T> tape;
      Context<T> ctx(tape, true, &rng);
      Var<T> image = tape.constant(make_batch(data, idx, cfg.hflip ? &rng : nullptr));
      Var<T> logits, loss;
      try {
        logits = forward(ctx, image, model);
        loss = smoothed_cross_entropy(logits, labels, cfg.smoothing);
      } catch (const NonFiniteError& e) {
        std::ostringstream msg;
        msg << "train: non-finite values at epoch " << epoch + 1 << " step " << opt.step
            << " (last lr " << last_lr << ", last grad norm " << last_grad_norm << "): " << e.what();
        throw TrainingError(msg.str());
      }
      tape.backward(loss);

      std::vector<Tensor<T>> grads;
      grads.reserve(plist.ptrs.size());
      for (Tensor<T>* p : plist.ptrs) {
        const Var<T> v = ctx.bound(*p);
        grads.push_back(v.valid() ? tape.grad(v) : Tensor<T>(p->dims()));
      }
      last_grad_norm = global_norm(grads);
      if (!std::isfinite(last_grad_norm)) {
        std::ostringstream msg;
        msg << "train: non-finite gradient at epoch " << epoch + 1 << " step " << opt.step
            << " (last lr " << last_lr << ")";
        throw TrainingError(msg.str());
      }
      last_lr = lr_schedule(std::min<std::uint64_t>(opt.step + 1, total_steps), total_steps,
                            warmup_steps, cfg.lr, cfg.min_lr);
      adamw_step<T>(plist.ptrs, grads, plist.decay, opt, last_lr, cfg.weight_decay, cfg.adam);

      loss_sum += static_cast<double>(loss.value()[0]) * static_cast<double>(count);
      const auto lv = logits.value().data();
      const std::size_t k = cfg.model.num_classes;
      for (std::size_t b = 0; b < count; ++b) {
        const T* row = lv.data() + b * k;
        if (static_cast<std::size_t>(std::max_element(row, row + k) - row) == labels[b]) ++correct;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = last_lr;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    if (cfg.log_wallclock) {
      rec.wallclock_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    result.log.push_back(rec);
    if (metrics.is_open()) metrics << format_metrics_record(rec) << '\n' << std::flush;
    if (opts.on_epoch) opts.on_epoch(rec);
    if (!cfg.checkpoint_path.empty()) save_checkpoint(snapshot(epoch + 1), cfg.checkpoint_path);
  }

  result.checkpoint = snapshot(end_epoch);
  result.final_accuracy = evaluate_accuracy(model, data);
  return result;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  return cfg.precision == Precision::wide ? train_impl<double>(cfg, opts) : train_impl<float>(cfg, opts);
}

template <std::floating_point T>
double evaluate_accuracy(const ModelParams<T>& model, const Dataset<T>& data, std::size_t batch_size) {
  const std::size_t n = data.labels.size();
  if (n == 0 || batch_size == 0) throw std::invalid_argument("evaluate_accuracy: empty data or batch");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::size_t correct = 0;
  const std::size_t k = model.config.num_classes;
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t count = std::min(batch_size, n - begin);
    Tape<T> tape;
    Context<T> ctx(tape, false, nullptr, false);
    const auto batch = make_batch(data, std::span<const std::size_t>(idx.data() + begin, count), nullptr);
    const auto lv = forward(ctx, tape.constant(batch), model).value().data();
    for (std::size_t b = 0; b < count; ++b) {
      const T* row = lv.data() + b * k;
      if (static_cast<std::size_t>(std::max_element(row, row + k) - row) == data.labels[begin + b]) {
        ++correct;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

template <std::floating_point T>
void store_model(Checkpoint& ckpt, const ModelParams<T>& model) {
  store_variant(ckpt, model.config);
  visit_params(model, ConstParamVisitor<T>([&](const std::string& name, const Tensor<T>& t, ParamKind) {
                 ckpt.put("model." + name, t);
               }));
}

VariantConfig restore_variant(const Checkpoint& ckpt) {
  VariantConfig v;
  v.name = "checkpoint";
  v.patch_size = as_size(ckpt.scalar("config.patch_size"), "patch_size");
  v.channels = as_size(ckpt.scalar("config.channels"), "channels");
  const Tensor<double> depths = ckpt.get<double>("config.depths");
  if (depths.numel() != kStages) throw CheckpointError("checkpoint: config.depths must hold 4 values");
  for (std::size_t s = 0; s < kStages; ++s) v.depths[s] = as_size(depths[s], "depths");
  v.mlp_ratio = as_size(ckpt.scalar("config.mlp_ratio"), "mlp_ratio");
  const Tensor<double> shift = ckpt.get<double>("config.shift");
  if (shift.numel() != 2) throw CheckpointError("checkpoint: config.shift must hold 2 values");
  v.shift.shift_h = as_size(shift[0], "shift");
  v.shift.shift_v = as_size(shift[1], "shift");
  v.shift.dilation = as_size(ckpt.scalar("config.dilation"), "dilation");
  const std::size_t pad = as_size(ckpt.scalar("config.padding"), "padding");
  if (pad > static_cast<std::size_t>(ShiftPadding::replicate)) throw CheckpointError("checkpoint: bad padding code");
  v.shift.padding = static_cast<ShiftPadding>(pad);
  const std::size_t conn = as_size(ckpt.scalar("config.connection"), "connection");
  if (conn > 1) throw CheckpointError("checkpoint: bad connection code");
  v.connection = static_cast<Connection>(conn);
  v.num_classes = as_size(ckpt.scalar("config.num_classes"), "num_classes");
  v.drop_path_max = ckpt.scalar("config.drop_path_max");
  const double baseline = ckpt.scalar("config.baseline");
  if (baseline >= 0.0) {
    const std::size_t b = as_size(baseline, "baseline");
    if (b > static_cast<std::size_t>(BaselineKind::shift_1_5)) throw CheckpointError("checkpoint: bad baseline code");
    v.baseline = static_cast<BaselineKind>(b);
  }
  v.input_size = as_size(ckpt.scalar("config.input_size"), "input_size");
  v.validate();
  return v;
}

template <std::floating_point T>
ModelParams<T> restore_model(const Checkpoint& ckpt) {
  Rng rng = make_rng(0);
  ModelParams<T> model = init_model<T>(restore_variant(ckpt), rng);
  visit_params(model, ParamVisitor<T>([&](const std::string& name, Tensor<T>& t, ParamKind) {
                 Tensor<T> w = ckpt.get<T>("model." + name);
                 if (w.dims() != t.dims()) {
                   throw CheckpointError("checkpoint: '" + name + "' has shape " + shape_str(w.dims()) +
                                         ", model expects " + shape_str(t.dims()));
                 }
                 t = std::move(w);
               }));
  return model;
}

#define ASMLP_INSTANTIATE_TRAINING(T)                                                             \
  template void adamw_step(std::span<Tensor<T>* const>, std::span<const Tensor<T>>,              \
                           const std::vector<bool>&, AdamWState<T>&, double, double,             \
                           const AdamWHyper&);                                                   \
  template Var<T> smoothed_cross_entropy(Var<T>, std::span<const std::size_t>, double);          \
  template Dataset<T> synth_dataset(const DatasetSpec&, std::size_t);                            \
  template double evaluate_accuracy(const ModelParams<T>&, const Dataset<T>&, std::size_t);      \
  template void store_model(Checkpoint&, const ModelParams<T>&);                                 \
  template ModelParams<T> restore_model(const Checkpoint&);

ASMLP_INSTANTIATE_TRAINING(float)
ASMLP_INSTANTIATE_TRAINING(double)

}  // namespace asmlp
