#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "asmlp/oracle.hpp"
#include "asmlp/training.hpp"
#include "support.hpp"

using namespace asmlp;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TrainConfig quick_config(const std::filesystem::path& dir) {
  TrainConfig cfg;
  cfg.model.channels = 8;
  cfg.model.depths = {1, 1, 1, 1};
  cfg.model.shift = ShiftConfig{3, 3, 1, ShiftPadding::zero};
  cfg.epochs = 4;
  cfg.warmup_epochs = 1;
  cfg.batch_size = 16;
  cfg.data.samples = 48;  // last batch is short
  cfg.checkpoint_path = dir / "run.ckpt";
  cfg.metrics_path = dir / "metrics.csv";
  return cfg;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  Checkpoint c;
  c.put("a", Tensor<float>({2, 3}, std::vector<float>{1.5f, -0.0f, 3e-38f, 7, 8, 9}));
  c.put("b", test::rand_d({4, 1, 2}, 3));
  c.put_scalar("s", 0.1);
  const auto bytes = encode_checkpoint(c);
  const auto back = decode_checkpoint(bytes);
  EXPECT_EQ(encode_checkpoint(back), bytes);
  EXPECT_EQ(back.get<double>("b"), c.get<double>("b"));
  EXPECT_EQ(back.scalar("s"), 0.1);
  EXPECT_TRUE(std::holds_alternative<Tensor<float>>(*back.find("a")));
  EXPECT_THROW(back.get<double>("missing"), CheckpointError);
}

TEST(Checkpoint, PutReplacesByName) {
  Checkpoint c;
  c.put_scalar("x", 1.0);
  c.put_scalar("x", 2.0);
  EXPECT_EQ(c.tensors.size(), 1u);
  EXPECT_EQ(c.scalar("x"), 2.0);
}

TEST(Checkpoint, DetectsCorruptionAndTruncation) {
  Checkpoint c;
  c.put("w", test::rand_d({8}, 1));
  auto bytes = encode_checkpoint(c);
  auto flipped = bytes;
  flipped[20] ^= 0x01;
  EXPECT_THROW(decode_checkpoint(flipped), CheckpointError);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_checkpoint(bytes), CheckpointError);
  std::vector<std::uint8_t> junk(40, 0x41);
  EXPECT_THROW(decode_checkpoint(junk), CheckpointError);
}

TEST(Checkpoint, Crc64XzCheckValue) {
  const std::string s = "123456789";
  EXPECT_EQ(crc64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}),
            0x995DC9BBDF1939FAull);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = test::scratch("ckpt");
  Checkpoint c;
  c.put("x", test::rand_d({3, 3}, 2));
  save_checkpoint(c, dir / "a.ckpt");
  EXPECT_EQ(encode_checkpoint(load_checkpoint(dir / "a.ckpt")), encode_checkpoint(c));
  EXPECT_THROW(load_checkpoint(dir / "nope.ckpt"), CheckpointError);
}

TEST(AdamW, FirstStepByHand) {
  Tensor<double> p({2}, std::vector<double>{1.0, -2.0});
  const std::vector<Tensor<double>> g{Tensor<double>({2}, std::vector<double>{0.5, -0.25})};
  Tensor<double>* ptrs[] = {&p};
  AdamWState<double> st;
  adamw_step<double>(ptrs, g, {true}, st, 0.1, 0.01);
  // Bias-corrected first step moves each entry by lr * g / (|g| + eps).
  const double eps = 1e-8;
  EXPECT_NEAR(p[0], 1.0 * (1 - 0.001) - 0.1 * 0.5 / (0.5 + eps), 1e-15);
  EXPECT_NEAR(p[1], -2.0 * (1 - 0.001) + 0.1 * 0.25 / (0.25 + eps), 1e-15);
  EXPECT_EQ(st.step, 1u);
}

TEST(AdamW, DecayOnlyWhereSelected) {
  Tensor<double> a({1}, 1.0), b({1}, 1.0);
  const std::vector<Tensor<double>> g{Tensor<double>({1}, 0.0), Tensor<double>({1}, 0.0)};
  Tensor<double>* ptrs[] = {&a, &b};
  AdamWState<double> st;
  adamw_step<double>(ptrs, g, {true, false}, st, 0.5, 0.1);
  EXPECT_DOUBLE_EQ(a[0], 0.95);
  EXPECT_EQ(b[0], 1.0);
}

TEST(AdamW, RejectsBadInput) {
  Tensor<double> a({2});
  Tensor<double>* ptrs[] = {&a};
  AdamWState<double> st;
  EXPECT_THROW(adamw_step<double>(ptrs, std::vector<Tensor<double>>{Tensor<double>({3})}, {true}, st, 0.1, 0),
               ShapeError);
  EXPECT_THROW(adamw_step<double>(ptrs, std::vector<Tensor<double>>{Tensor<double>({2}, NAN)}, {true}, st,
                                  0.1, 0),
               NonFiniteError);
}

TEST(LrSchedule, WarmupThenCosine) {
  EXPECT_EQ(lr_schedule(0, 100, 10, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(lr_schedule(5, 100, 10, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(lr_schedule(10, 100, 10, 1.0), 1.0);
  EXPECT_NEAR(lr_schedule(55, 100, 10, 1.0, 0.2), 0.6, 1e-15);
  EXPECT_NEAR(lr_schedule(100, 100, 10, 1.0, 0.2), 0.2, 1e-15);
  EXPECT_THROW(lr_schedule(101, 100, 10, 1.0), std::out_of_range);
}

TEST(SmoothedCrossEntropy, ValueAndGradient) {
  const auto logits = test::rand_d({3, 4}, 5, -2.0, 2.0);
  const std::vector<std::size_t> targets{0, 3, 1};
  Tape<double> tape;
  auto x = tape.leaf(logits);
  auto loss = smoothed_cross_entropy(x, std::span<const std::size_t>(targets), 0.1);
  EXPECT_NEAR(loss.value()[0], oracle::smoothed_cross_entropy(logits, targets, 0.1), 1e-14);
  tape.backward(loss);
  Tensor<double> probe = logits;
  for (std::size_t i = 0; i < probe.numel(); ++i) {
    const double n = oracle::central_difference(
        [&] { return oracle::smoothed_cross_entropy(probe, targets, 0.1); }, probe[i], 1e-5);
    EXPECT_NEAR(tape.grad(x)[i], n, 1e-9);
  }
}

TEST(SmoothedCrossEntropy, Errors) {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>({2, 3}));
  const std::vector<std::size_t> bad{0, 3};
  EXPECT_THROW(smoothed_cross_entropy(x, std::span<const std::size_t>(bad), 0.1), std::out_of_range);
  const std::vector<std::size_t> ok{0, 2};
  EXPECT_THROW(smoothed_cross_entropy(x, std::span<const std::size_t>(ok), 1.0), std::invalid_argument);
}

TEST(Dataset, DeterministicAndBalanced) {
  DatasetSpec spec;
  spec.samples = 64;
  const auto a = synth_dataset<float>(spec);
  const auto b = synth_dataset<float>(spec);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.images.dims(), (Shape{64, 3, 32, 32}));
  std::vector<std::size_t> counts(4);
  for (auto l : a.labels) ++counts[l];
  EXPECT_EQ(counts, (std::vector<std::size_t>{16, 16, 16, 16}));
  spec.seed = 1;
  EXPECT_NE(synth_dataset<float>(spec).images, a.images);
}

TEST(Dataset, EachPatchHoldsOneDot) {
  DatasetSpec spec;
  spec.samples = 4;
  spec.noise = 0.0;
  const auto d = synth_dataset<double>(spec);
  for (std::size_t i = 0; i < 4; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < 32 * 32; ++k) total += d.images[i * 3 * 1024 + k];
    EXPECT_EQ(total, 64.0);  // 8x8 patches
  }
}

TEST(Train, DeterministicMetricsFile) {
  const auto d1 = test::scratch("train_a"), d2 = test::scratch("train_b");
  const auto r1 = train(quick_config(d1));
  const auto r2 = train(quick_config(d2));
  EXPECT_EQ(slurp(d1 / "metrics.csv"), slurp(d2 / "metrics.csv"));
  EXPECT_EQ(slurp(d1 / "run.ckpt"), slurp(d2 / "run.ckpt"));
  EXPECT_EQ(r1.log.size(), 4u);
  EXPECT_EQ(slurp(d1 / "metrics.csv").rfind(format_metrics_header() + "\n", 0), 0u);
}

TEST(Train, ResumeEqualsUninterrupted) {
  const auto full = test::scratch("train_full"), part = test::scratch("train_part");
  train(quick_config(full));
  TrainOptions stop;
  stop.stop_after = 2;
  train(quick_config(part), stop);
  const Checkpoint mid = load_checkpoint(part / "run.ckpt");
  EXPECT_EQ(mid.scalar("state.epoch"), 2.0);
  TrainOptions resume;
  resume.resume = &mid;
  const auto r = train(quick_config(part), resume);
  EXPECT_EQ(r.log.size(), 2u);
  EXPECT_EQ(slurp(full / "metrics.csv"), slurp(part / "metrics.csv"));
  EXPECT_EQ(slurp(full / "run.ckpt"), slurp(part / "run.ckpt"));
}

TEST(Train, WidePrecisionCheckpointsRestore) {
  const auto dir = test::scratch("train_wide");
  auto cfg = quick_config(dir);
  cfg.precision = Precision::wide;
  cfg.epochs = 2;
  const auto r = train(cfg);
  const auto model = restore_model<double>(r.checkpoint);
  EXPECT_EQ(model.config.channels, 8u);
  const auto data = synth_dataset<double>(cfg.data);
  EXPECT_DOUBLE_EQ(evaluate_accuracy(model, data), r.final_accuracy);
}

TEST(Train, RejectsInvalidConfig) {
  TrainConfig cfg;
  cfg.warmup_epochs = cfg.epochs;
  EXPECT_THROW(train(cfg), std::invalid_argument);
  TrainConfig mismatch;
  mismatch.data.classes = 3;
  EXPECT_THROW(mismatch.validate(), std::invalid_argument);
}
