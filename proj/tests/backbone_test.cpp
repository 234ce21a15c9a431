#include <gtest/gtest.h>

#include <set>

#include "asmlp/backbone.hpp"
#include "support.hpp"

using namespace asmlp;

namespace {

VariantConfig small_toy() {
  VariantConfig v;
  v.name = "unit-test";
  v.channels = 8;
  v.depths = {1, 1, 1, 1};
  v.shift = ShiftConfig{3, 3, 1, ShiftPadding::zero};
  v.num_classes = 4;
  v.drop_path_max = 0.1;
  v.input_size = 32;
  return v;
}

}  // namespace

TEST(Variants, NamedConfigurations) {
  const auto tiny = make_variant("tiny");
  EXPECT_EQ(tiny.channels, 96u);
  EXPECT_EQ(tiny.depths, (std::array<std::size_t, 4>{2, 2, 6, 2}));
  EXPECT_EQ(make_variant("small").depths[2], 18u);
  EXPECT_EQ(make_variant("base").channels, 128u);
  EXPECT_EQ(make_variant("mobile").channels, 64u);
  EXPECT_THROW(make_variant("huge"), std::invalid_argument);
  EXPECT_EQ(tiny.stage_channels(3), 768u);
  EXPECT_EQ(tiny.stage_stride(3), 32u);
}

TEST(Variants, DropPathRisesLinearly) {
  const auto tiny = make_variant("tiny");
  EXPECT_EQ(drop_path_rate(tiny, 0), 0.0);
  EXPECT_DOUBLE_EQ(drop_path_rate(tiny, 11), 0.2);
  EXPECT_DOUBLE_EQ(drop_path_rate(tiny, 5), 0.2 * 5 / 11);  // 12 blocks
}

TEST(Variants, InputMustDivideByThirtyTwo) {
  const auto v = small_toy();
  EXPECT_NO_THROW(v.validate_input(64, 96));
  EXPECT_THROW(v.validate_input(48, 32), ShapeError);
}

TEST(PatchPartition, RoundTripsAndOrdersChannels) {
  const auto img = test::rand_d({2, 3, 8, 8}, 1);
  Tape<double> tape;
  auto tokens = patch_partition(tape.constant(img), 4);
  EXPECT_EQ(tokens.dims(), (Shape{2, 48, 2, 2}));
  // channel (c*p + row)*p + col of token (i, j) is pixel (c, 4i+row, 4j+col)
  EXPECT_EQ(tokens.value().at({1, (2 * 4 + 1) * 4 + 3, 1, 0}), img.at({1, 2, 5, 3}));
  EXPECT_EQ(patch_unpartition(tokens, 4).value(), img);
}

TEST(PatchMerging, NeighbourhoodOrder) {
  Tensor<double> x({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  Tape<double> tape;
  const auto m = merge_neighbourhoods(tape.constant(x)).value();
  EXPECT_EQ(m.dims(), (Shape{1, 4, 1, 1}));
  EXPECT_EQ(std::vector<double>(m.data().begin(), m.data().end()), (std::vector<double>{1, 2, 3, 4}));
}

TEST(PatchMerging, HalvesResolutionDoublesChannels) {
  Rng rng = make_rng(2);
  const auto p = make_patch_merging<double>(6, rng);
  EXPECT_EQ(p.reduction.weight.dims(), (Shape{12, 24}));
  EXPECT_FALSE(p.reduction.has_bias());
  Tape<double> tape;
  Context<double> ctx(tape);
  auto y = patch_merging(ctx, tape.constant(test::rand_d({2, 6, 4, 6}, 3)), p);
  EXPECT_EQ(y.dims(), (Shape{2, 12, 2, 3}));
}

TEST(Model, StageShapesAndLogits) {
  Rng rng = make_rng(0);
  const auto model = init_model<double>(small_toy(), rng);
  Tape<double> tape;
  Context<double> ctx(tape);
  const auto r = forward_features(ctx, tape.constant(test::rand_d({2, 3, 32, 32}, 4)), model);
  EXPECT_EQ(r.logits.dims(), (Shape{2, 4}));
  EXPECT_EQ(r.stage_outputs[0].dims(), (Shape{2, 8, 8, 8}));
  EXPECT_EQ(r.stage_outputs[3].dims(), (Shape{2, 64, 1, 1}));
}

TEST(Model, AcceptsOtherResolutions) {
  Rng rng = make_rng(0);
  const auto model = init_model<double>(small_toy(), rng);
  Tape<double> tape;
  Context<double> ctx(tape);
  const auto r = forward_features(ctx, tape.constant(test::rand_d({1, 3, 64, 64}, 5)), model);
  EXPECT_EQ(r.logits.dims(), (Shape{1, 4}));
  EXPECT_EQ(r.stage_outputs[3].dims(), (Shape{1, 64, 2, 2}));
  EXPECT_THROW(forward(ctx, tape.constant(Tensor<double>({1, 3, 40, 40})), model), ShapeError);
}

TEST(Model, ParameterNamesAreUnique) {
  Rng rng = make_rng(0);
  auto model = init_model<float>(small_toy(), rng);
  std::set<std::string> names;
  std::size_t count = 0;
  visit_params(model, ParamVisitor<float>([&](const std::string& name, Tensor<float>&, ParamKind) {
                 names.insert(name);
                 ++count;
               }));
  EXPECT_EQ(names.size(), count);
  EXPECT_TRUE(names.count("head.proj.weight"));
}

TEST(Model, InitIsDeterministicPerSeed) {
  Rng a = make_rng(9), b = make_rng(9);
  auto ma = init_model<float>(small_toy(), a);
  auto mb = init_model<float>(small_toy(), b);
  EXPECT_EQ(ma.head.weight, mb.head.weight);
  EXPECT_EQ(ma.embed.weight, mb.embed.weight);
}

TEST(Model, TrainingModeUsesDropPath) {
  auto v = small_toy();
  v.drop_path_max = 0.5;
  Rng rng = make_rng(0);
  const auto model = init_model<double>(v, rng);
  const auto img = test::rand_d({8, 3, 32, 32}, 6);
  auto run = [&](bool training, std::uint64_t seed) {
    Tape<double> tape;
    Rng r = make_rng(seed);
    Context<double> ctx(tape, training, &r);
    return forward(ctx, tape.constant(img), model).value();
  };
  EXPECT_EQ(run(false, 1), run(false, 2));
  EXPECT_EQ(run(true, 1), run(true, 1));
  EXPECT_NE(run(true, 1), run(false, 1));
}
