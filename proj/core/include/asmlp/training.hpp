#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asmlp/backbone.hpp"
#include "asmlp/checkpoint.hpp"

namespace asmlp {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Precision { narrow, wide };

std::string_view to_string(Precision p);
Precision parse_precision(std::string_view name);

// ---------------------------------------------------------------- optimizer

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <std::floating_point T>
struct AdamWState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::uint64_t step = 0;
};

/// One AdamW update with decoupled weight decay. `decay[i]` selects which
/// parameters are decayed (biases and LayerNorm parameters usually are not).
/// Empty moment vectors are initialized to zeros on the first call.
template <std::floating_point T>
void adamw_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads,
                const std::vector<bool>& decay, AdamWState<T>& state, double lr,
                double weight_decay, const AdamWHyper& hyper = {});

/// Linear warmup from 0 to base_lr, then half-cosine down to min_lr.
double lr_schedule(std::uint64_t step, std::uint64_t total_steps, std::uint64_t warmup_steps,
                   double base_lr, double min_lr = 0.0);

/// Mean over the batch of the cross-entropy between softmax(logits) and the
/// target distribution (1 - eps) one_hot + eps / K.
template <std::floating_point T>
Var<T> smoothed_cross_entropy(Var<T> logits, std::span<const std::size_t> targets, double smoothing);

// ------------------------------------------------------------------ dataset

struct DatasetSpec {
  std::size_t classes = 4;
  std::size_t samples = 512;
  std::size_t image_size = 32;
  std::uint64_t seed = 0;
  double noise = 0.05;
};

template <std::floating_point T>
struct Dataset {
  Tensor<T> images;  // [N, 3, S, S]
  std::vector<std::size_t> labels;
};

/// One dot per patch at a random in-patch offset. Patches at even column
/// indices repeat the offset of their left neighbour (class 0), patches at
/// even row indices repeat their upper neighbour (class 1), both (class 2) or
/// neither (class 3). Per-patch content has the same distribution in every
/// class; only relations between neighbouring patches carry the label.
template <std::floating_point T>
Dataset<T> synth_dataset(const DatasetSpec& spec, std::size_t patch = 4);

// ----------------------------------------------------------------- training

struct TrainConfig {
  VariantConfig model = toy_variant();
  std::size_t epochs = 30;
  std::size_t warmup_epochs = 2;
  double lr = 1e-3;
  double min_lr = 0.0;
  double weight_decay = 0.05;
  AdamWHyper adam;
  std::size_t batch_size = 32;
  double smoothing = 0.1;
  bool hflip = true;
  std::uint64_t seed = 0;
  Precision precision = Precision::narrow;
  DatasetSpec data;
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;
  bool log_wallclock = false;

  void validate() const;
  static VariantConfig toy_variant();
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;        // learning rate at the epoch's last step
  double train_loss = 0.0;
  double train_acc = 0.0;
  double wallclock_seconds = 0.0;
};

std::string format_metrics_header();
std::string format_metrics_record(const EpochRecord& r);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> log;
  /// Accuracy of the final weights on the training set in evaluation mode.
  double final_accuracy = 0.0;
};

struct TrainOptions {
  /// Continue from a checkpoint written by train().
  const Checkpoint* resume = nullptr;
  /// Stop after this many completed epochs (the checkpoint then resumes there).
  std::optional<std::size_t> stop_after;
  std::function<void(const EpochRecord&)> on_epoch;
};

TrainResult train(const TrainConfig& cfg, const TrainOptions& opts = {});

/// Classification accuracy of `model` on `data` in evaluation mode.
template <std::floating_point T>
double evaluate_accuracy(const ModelParams<T>& model, const Dataset<T>& data,
                         std::size_t batch_size = 64);

/// Model weights (f32 or f64 per precision) plus the model config.
template <std::floating_point T>
void store_model(Checkpoint& ckpt, const ModelParams<T>& model);
/// Rebuilds a model from a checkpoint written by store_model or train.
template <std::floating_point T>
ModelParams<T> restore_model(const Checkpoint& ckpt);
VariantConfig restore_variant(const Checkpoint& ckpt);

}  // namespace asmlp
