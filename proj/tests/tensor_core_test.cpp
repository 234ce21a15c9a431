#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "asmlp/mac_counter.hpp"
#include "asmlp/ops.hpp"
#include "asmlp/oracle.hpp"
#include "support.hpp"

using namespace asmlp;

TEST(Tensor, ShapeAndIndexing) {
  Tensor<float> t({2, 3, 4});
  EXPECT_EQ(t.numel(), 24u);
  EXPECT_EQ(t.rank(), 3u);
  t.at({1, 2, 3}) = 5.0f;
  EXPECT_EQ(t[23], 5.0f);
  EXPECT_THROW(t.at({2, 0, 0}), std::out_of_range);
  EXPECT_THROW(t.at({0, 0}), ShapeError);
}

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor<float>({2, 0}), ShapeError);
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor<float>({2, 3}).reshaped({4, 2}), ShapeError);
}

TEST(Tensor, MetaCarriesShapeOnly) {
  auto m = Tensor<double>::meta({1, 96, 56, 56});
  EXPECT_TRUE(m.is_meta());
  EXPECT_EQ(m.numel(), 96u * 56 * 56);
  EXPECT_TRUE(m.data().empty());
}

TEST(Tensor, CastRoundTrip) {
  Tensor<double> d({3}, std::vector<double>{0.5, -1.25, 3.0});
  EXPECT_EQ(d.cast<float>().cast<double>(), d);
}

TEST(Tape, ChainRuleThroughMulAndSum) {
  Tape<double> tape;
  auto a = tape.leaf(Tensor<double>({3}, std::vector<double>{1, 2, 3}));
  auto b = tape.leaf(Tensor<double>({3}, std::vector<double>{4, 5, 6}));
  auto loss = sum(mul(add(a, b), a));  // sum((a+b)*a)
  tape.backward(loss);
  EXPECT_EQ(tape.grad(a), Tensor<double>({3}, std::vector<double>{6, 9, 12}));  // 2a + b
  EXPECT_EQ(tape.grad(b), Tensor<double>({3}, std::vector<double>{1, 2, 3}));
}

TEST(Tape, ConstantsGetNoGradient) {
  Tape<double> tape;
  auto a = tape.leaf(Tensor<double>({2}, 1.0));
  auto c = tape.constant(Tensor<double>({2}, 2.0));
  tape.backward(sum(mul(a, c)));
  EXPECT_FALSE(tape.has_grad(c));
  EXPECT_EQ(tape.grad(a), Tensor<double>({2}, 2.0));
}

TEST(Tape, BackwardNeedsScalarLoss) {
  Tape<double> tape;
  auto a = tape.leaf(Tensor<double>({2}, 1.0));
  EXPECT_THROW(tape.backward(scale(a, 2.0)), ShapeError);
}

TEST(Tape, NonFiniteValuesAreRejected) {
  Tape<double> tape;
  auto a = tape.leaf(Tensor<double>({1}, std::numeric_limits<double>::max()));
  EXPECT_THROW(scale(a, 10.0), NonFiniteError);
}

TEST(Tape, MixingTapesIsAnError) {
  Tape<double> t1, t2;
  auto a = t1.leaf(Tensor<double>({1}, 1.0));
  auto b = t2.leaf(Tensor<double>({1}, 1.0));
  EXPECT_THROW(add(a, b), std::logic_error);
}

TEST(MacCounter, NestedScopesAllSeeCharges) {
  MacCounter outer;
  {
    MacCounter inner;
    MacCounter::charge(10);
    EXPECT_EQ(inner.total(), 10u);
  }
  MacCounter::charge(5);
  EXPECT_EQ(outer.total(), 15u);
}

TEST(Ops, MatmulChargesAndMatchesLoopOracle) {
  const auto x = test::rand_d({2, 5, 3, 4}, 1);
  const auto w = test::rand_d({7, 5}, 2);
  const auto b = test::rand_d({7}, 3);
  Tape<double> tape;
  MacCounter mc;
  auto y = matmul_channels(tape.constant(x), tape.constant(w), tape.constant(b));
  EXPECT_EQ(mc.total(), 2u * 12 * 7 * 5);
  EXPECT_LT(max_abs_diff(y.value(), oracle::matmul_channels(x, w, b)), 1e-12);
}

TEST(Ops, MatmulFixtures) {
  for (int k = 0; k < 3; ++k) {
    const std::string dir = "matmul/case" + std::to_string(k) + "/";
    const auto in = test::fixture(dir + "inputs");
    const auto want = test::fixture(dir + "expected").get<double>("y");
    Tape<double> tape;
    auto y = matmul_channels(tape.constant(in.get<double>("x")), tape.constant(in.get<double>("weight")),
                             tape.constant(in.get<double>("bias")));
    EXPECT_LT(max_abs_diff(y.value(), want), 1e-12) << dir;
  }
}

TEST(Ops, MatmulShapeErrors) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>({1, 4, 2, 2}));
  EXPECT_THROW(matmul_channels(x, tape.constant(Tensor<double>({3, 5}))), ShapeError);
  EXPECT_THROW(matmul_channels(x, tape.constant(Tensor<double>({3, 4})),
                               tape.constant(Tensor<double>({4}))),
               ShapeError);
}

TEST(Ops, MatmulOnMetaTensorsOnlyCounts) {
  Tape<float> tape;
  MacCounter mc;
  auto y = matmul_channels(tape.constant(Tensor<float>::meta({1, 96, 56, 56})),
                           tape.constant(Tensor<float>::meta({96, 96})));
  EXPECT_TRUE(y.value().is_meta());
  EXPECT_EQ(mc.total(), 56u * 56 * 96 * 96);
}

TEST(Ops, RollFollowsTorchSign) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>({1, 1, 1, 5}, std::vector<double>{0, 1, 2, 3, 4}));
  EXPECT_EQ(roll(x, 3, 1).value().data()[0], 4.0);
  EXPECT_EQ(roll(x, 3, -1).value().data()[0], 1.0);
  EXPECT_EQ(roll(x, 3, 5).value(), x.value());
}

TEST(Ops, PadModes) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>({1, 1, 1, 4}, std::vector<double>{1, 2, 3, 4}));
  auto z = pad_axis(x, 3, 2, PadMode::zero).value();
  auto r = pad_axis(x, 3, 2, PadMode::reflect).value();
  auto p = pad_axis(x, 3, 2, PadMode::replicate).value();
  EXPECT_EQ(std::vector<double>(z.data().begin(), z.data().end()),
            (std::vector<double>{0, 0, 1, 2, 3, 4, 0, 0}));
  EXPECT_EQ(std::vector<double>(r.data().begin(), r.data().end()),
            (std::vector<double>{3, 2, 1, 2, 3, 4, 3, 2}));
  EXPECT_EQ(std::vector<double>(p.data().begin(), p.data().end()),
            (std::vector<double>{1, 1, 1, 2, 3, 4, 4, 4}));
  EXPECT_THROW(pad_axis(x, 3, 4, PadMode::reflect), ShapeError);
}

TEST(Ops, ChunkUsesCeilGroups) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>({1, 16, 2, 2}));
  auto g = chunk_channels(x, 7);
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(g.front().dim(1), 3u);
  EXPECT_EQ(g.back().dim(1), 1u);
  EXPECT_EQ(concat_channels(g).value(), x.value());
  EXPECT_THROW(chunk_channels(x, 17), ShapeError);
}

TEST(Ops, GatherBackwardScatterAdds) {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>({1, 1, 1, 3}, std::vector<double>{1, 2, 3}));
  auto y = pad_axis(x, 3, 2, PadMode::replicate);  // 1 1 1 2 3 3 3
  tape.backward(sum(y));
  EXPECT_EQ(tape.grad(x), Tensor<double>({1, 1, 1, 3}, std::vector<double>{3, 1, 3}));
}

TEST(Ops, ReductionsKeepAxis) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(mean_axis(x, 1).value(), Tensor<double>({2, 1}, std::vector<double>{2, 5}));
  EXPECT_EQ(sum_axis(x, 0).value(), Tensor<double>({1, 3}, std::vector<double>{5, 7, 9}));
  const auto v = variance_axis(x, 1).value();
  EXPECT_NEAR(v[0], 2.0 / 3.0, 1e-15);
}
