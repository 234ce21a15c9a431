#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "asmlp/layers.hpp"
#include "asmlp/oracle.hpp"
#include "support.hpp"

using namespace asmlp;

namespace {

// Same relative measure the gradcheck suite uses.
double rel_error(const Tensor<double>& a, const Tensor<double>& n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(n[i]), 1e-6});
    worst = std::max(worst, std::abs(a[i] - n[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST(Linear, MatchesOracleWithAndWithoutBias) {
  Rng rng = make_rng(3);
  const auto with_bias = make_linear<double>(6, 4, true, rng);
  const auto no_bias = make_linear<double>(6, 4, false, rng);
  EXPECT_TRUE(with_bias.has_bias());
  EXPECT_FALSE(no_bias.has_bias());
  const auto x = test::rand_d({2, 6, 3, 3}, 4);
  Tape<double> tape;
  Context<double> ctx(tape);
  auto y = linear(ctx, tape.constant(x), with_bias);
  EXPECT_LT(max_abs_diff(y.value(), oracle::matmul_channels(x, with_bias.weight, with_bias.bias)), 1e-14);
  auto z = linear(ctx, tape.constant(x), no_bias);
  EXPECT_LT(max_abs_diff(z.value(), oracle::matmul_channels(x, no_bias.weight)), 1e-14);
}

TEST(Linear, InitIsTruncatedNormal) {
  Rng rng = make_rng(5);
  const auto l = make_linear<double>(64, 64, true, rng);
  for (double v : l.weight.data()) EXPECT_LE(std::abs(v), 0.04);
  for (double v : l.bias.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, MatchesOracleOverChannels) {
  auto p = make_layer_norm<double>(5);
  p.gamma = test::rand_d({5}, 1, 0.5, 1.5);
  p.beta = test::rand_d({5}, 2);
  const auto x = test::rand_d({2, 5, 3, 4}, 3, -4.0, 4.0);
  Tape<double> tape;
  Context<double> ctx(tape);
  auto y = layer_norm(ctx, tape.constant(x), p);
  EXPECT_LT(max_abs_diff(y.value(), oracle::layer_norm(x, p.gamma, p.beta, p.epsilon)), 1e-12);

  const auto flat = test::rand_d({3, 5}, 4);
  auto yf = layer_norm(ctx, tape.constant(flat), p);
  EXPECT_LT(max_abs_diff(yf.value(), oracle::layer_norm(flat, p.gamma, p.beta, p.epsilon)), 1e-12);
}

TEST(Gelu, MatchesOracle) {
  const auto x = test::rand_d({1, 3, 4, 4}, 9, -5.0, 5.0);
  Tape<double> tape;
  EXPECT_LT(max_abs_diff(gelu(tape.constant(x)).value(), oracle::gelu(x)), 1e-14);
}

TEST(Gradients, LayerNormAgainstStoredFiniteDifferences) {
  const auto in = test::fixture("gradients/layer-norm/inputs");
  const auto want = test::fixture("gradients/layer-norm/expected").get<double>("grad.x");
  LayerNormParams<double> p{in.get<double>("gamma"), in.get<double>("beta"), in.scalar("eps")};
  Tape<double> tape;
  Context<double> ctx(tape);
  auto x = tape.leaf(in.get<double>("x"));
  tape.backward(sum(mul(layer_norm(ctx, x, p), tape.constant(in.get<double>("r")))));
  EXPECT_LT(rel_error(tape.grad(x), want), 1e-4);
}

TEST(Gradients, GeluAgainstStoredFiniteDifferences) {
  const auto in = test::fixture("gradients/gelu/inputs");
  const auto want = test::fixture("gradients/gelu/expected").get<double>("grad.x");
  Tape<double> tape;
  auto x = tape.leaf(in.get<double>("x"));
  tape.backward(sum(mul(gelu(x), tape.constant(in.get<double>("r")))));
  EXPECT_LT(rel_error(tape.grad(x), want), 1e-4);
}

TEST(Gradients, ProjectionAgainstStoredFiniteDifferences) {
  const auto in = test::fixture("gradients/channel-projection/inputs");
  const auto want = test::fixture("gradients/channel-projection/expected");
  Tape<double> tape;
  auto x = tape.leaf(in.get<double>("x"));
  auto w = tape.leaf(in.get<double>("weight"));
  tape.backward(sum(mul(matmul_channels(x, w), tape.constant(in.get<double>("r")))));
  EXPECT_LT(rel_error(tape.grad(w), want.get<double>("grad.weight")), 1e-4);
  EXPECT_LT(rel_error(tape.grad(x), want.get<double>("grad.x")), 1e-4);
}

TEST(Mlp, ShapesAndRatio) {
  Rng rng = make_rng(1);
  const auto m = make_mlp<double>(8, 4, rng);
  EXPECT_EQ(m.fc1.weight.dims(), (Shape{32, 8}));
  EXPECT_EQ(m.fc2.weight.dims(), (Shape{8, 32}));
  Tape<double> tape;
  Context<double> ctx(tape);
  auto y = mlp_forward(ctx, tape.constant(test::rand_d({2, 8, 3, 3}, 2)), m);
  EXPECT_EQ(y.dims(), (Shape{2, 8, 3, 3}));
}

TEST(DropPath, IdentityInEvaluation) {
  const auto x = test::rand_d({4, 3, 2, 2}, 1);
  Tape<double> tape;
  Rng rng = make_rng(0);
  EXPECT_EQ(drop_path(tape.constant(x), 0.5, false, &rng).value(), x);
  EXPECT_EQ(drop_path(tape.constant(x), 0.0, true, &rng).value(), x);
}

TEST(DropPath, ZeroesOrRescalesWholeSamples) {
  const auto x = test::rand_d({64, 2, 2, 2}, 1);
  Tape<double> tape;
  Rng rng = make_rng(0);
  const auto y = drop_path(tape.constant(x), 0.25, true, &rng).value();
  std::size_t dropped = 0;
  for (std::size_t b = 0; b < 64; ++b) {
    const double ratio = y[b * 8] / x[b * 8];
    if (ratio == 0.0) ++dropped;
    for (std::size_t k = 0; k < 8; ++k) {
      EXPECT_NEAR(y[b * 8 + k], ratio == 0.0 ? 0.0 : x[b * 8 + k] / 0.75, 1e-12);
    }
  }
  EXPECT_GT(dropped, 4u);
  EXPECT_LT(dropped, 32u);
}

TEST(DropPath, TrainingNeedsRng) {
  Tape<double> tape;
  EXPECT_THROW(drop_path(tape.constant(test::rand_d({2, 1, 1, 1}, 0)), 0.5, true, nullptr),
               std::logic_error);
}
