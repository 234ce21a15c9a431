#include <gtest/gtest.h>

#include "asmlp/analysis.hpp"
#include "asmlp/backbone.hpp"
#include "asmlp/oracle.hpp"
#include "support.hpp"

using namespace asmlp;

TEST(GlobalMix, MatchesOracle) {
  GlobalMixParams<double> p{test::rand_d({12, 12}, 1), 3, 4};
  const auto x = test::rand_d({2, 5, 3, 4}, 2);
  Tape<double> tape;
  Context<double> ctx(tape);
  auto y = global_token_mix(ctx, tape.constant(x), p);
  EXPECT_LT(max_abs_diff(y.value(), oracle::global_mix(x, p.mixer)), 1e-13);
}

TEST(GlobalMix, RejectsOtherResolutions) {
  GlobalMixParams<double> p{test::rand_d({12, 12}, 1), 3, 4};
  Tape<double> tape;
  Context<double> ctx(tape);
  EXPECT_THROW(global_token_mix(ctx, tape.constant(test::rand_d({1, 5, 4, 3}, 2)), p),
               ResolutionMismatch);
}

TEST(AxialMix, ParallelAndSerialMatchOracle) {
  const auto x = test::rand_d({2, 3, 4, 5}, 3);
  for (auto conn : {Connection::parallel, Connection::serial}) {
    AxialMixParams<double> p{test::rand_d({5, 5}, 4), test::rand_d({4, 4}, 5), 4, 5, conn};
    Tape<double> tape;
    Context<double> ctx(tape);
    auto y = axial_token_mix(ctx, tape.constant(x), p);
    EXPECT_LT(max_abs_diff(y.value(), oracle::axial_mix(x, p.w_h, p.w_v, conn == Connection::parallel)),
              1e-13);
  }
}

TEST(WindowMix, MatchesOracleAndNeedsWholeWindows) {
  WindowMixParams<double> p{test::rand_d({9, 9}, 6), 3};
  const auto x = test::rand_d({1, 2, 6, 9}, 7);
  Tape<double> tape;
  Context<double> ctx(tape);
  auto y = window_token_mix(ctx, tape.constant(x), p);
  EXPECT_LT(max_abs_diff(y.value(), oracle::window_mix(x, p.w_win, 3)), 1e-13);
  // Any multiple of the window works; anything else does not.
  EXPECT_NO_THROW(window_token_mix(ctx, tape.constant(test::rand_d({1, 2, 12, 3}, 8)), p));
  EXPECT_THROW(window_token_mix(ctx, tape.constant(test::rand_d({1, 2, 4, 6}, 8)), p),
               ResolutionMismatch);
}

TEST(BaselineBlocks, KindsAndShapes) {
  Rng rng = make_rng(0);
  for (auto kind : {BaselineKind::global_mlp, BaselineKind::axial_mlp, BaselineKind::window_mlp,
                    BaselineKind::shift_5_1, BaselineKind::shift_1_5}) {
    const auto block = make_baseline_block<double>(kind, 7, 7, 8, rng);
    Tape<double> tape;
    Context<double> ctx(tape);
    auto y = run_block(ctx, tape.constant(test::rand_d({1, 8, 7, 7}, 1)), block);
    EXPECT_EQ(y.dims(), (Shape{1, 8, 7, 7})) << to_string(kind);
  }
  const auto s51 = make_baseline_block<double>(BaselineKind::shift_5_1, 7, 7, 8, rng);
  const auto& unit = std::get<AsMlpBlockParams<double>>(s51).unit;
  EXPECT_EQ(unit.shift.shift_h, 5u);
  EXPECT_EQ(unit.shift.shift_v, 1u);
  EXPECT_THROW(make_baseline_block<double>(BaselineKind::window_mlp, 8, 8, 8, rng), ResolutionMismatch);
}

TEST(BaselineBlocks, GlobalModelIsResolutionBound) {
  VariantConfig v;
  v.channels = 8;
  v.depths = {1, 1, 1, 1};
  v.num_classes = 3;
  v.baseline = BaselineKind::global_mlp;
  v.input_size = 32;
  Rng rng = make_rng(0);
  const auto model = init_model<double>(v, rng);
  Tape<double> tape;
  Context<double> ctx(tape);
  EXPECT_EQ(forward(ctx, tape.constant(test::rand_d({1, 3, 32, 32}, 1)), model).dims(), (Shape{1, 3}));
  EXPECT_THROW(forward(ctx, tape.constant(test::rand_d({1, 3, 64, 64}, 1)), model), ResolutionMismatch);
}

TEST(BaselineBlocks, CostsMatchClosedForm) {
  for (auto kind : {BaselineKind::global_mlp, BaselineKind::axial_mlp, BaselineKind::window_mlp,
                    BaselineKind::shift_5_1}) {
    auto v = make_variant("tiny");
    v.baseline = kind;
    Rng rng = make_rng(0);
    const auto model = init_model<float>(v, rng, true);
    for (bool aux : {false, true}) {
      EXPECT_EQ(measure_model(model, 224, 224, aux).entries, formula_costs(v, 224, 224, aux).entries)
          << to_string(kind);
    }
  }
}

TEST(BaselineKinds, Names) {
  EXPECT_EQ(parse_baseline_kind("global"), BaselineKind::global_mlp);
  EXPECT_EQ(to_string(BaselineKind::shift_1_5), "shift-1-5");
  EXPECT_THROW(parse_baseline_kind("conv"), std::invalid_argument);
}
