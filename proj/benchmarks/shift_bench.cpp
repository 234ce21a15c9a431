#include <benchmark/benchmark.h>

#include "asmlp/axial_shift.hpp"

using namespace asmlp;

namespace {

ShiftConfig config(const benchmark::State& state) {
  return ShiftConfig{static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0)), 1,
                     ShiftPadding::zero};
}

Tensor<float> input(std::size_t c) {
  Rng rng = make_rng(0, 0x42);
  return random_uniform<float>({1, c, 56, 56}, rng);
}

void BM_AxialShift(benchmark::State& state) {
  const auto cfg = config(state);
  const auto x = input(96);
  for (auto _ : state) {
    Tape<float> tape;
    auto v = tape.constant(x);
    auto w = shift(v, Axis::width, cfg);
    auto h = shift(v, Axis::height, cfg);
    benchmark::DoNotOptimize(w.value().data().data());
    benchmark::DoNotOptimize(h.value().data().data());
  }
}
BENCHMARK(BM_AxialShift)->Arg(1)->Arg(3)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_Unit(benchmark::State& state) {
  const auto cfg = config(state);
  const auto x = input(96);
  Rng rng = make_rng(1);
  const auto unit = make_axial_shift_unit<float>(96, cfg, Connection::parallel, rng);
  for (auto _ : state) {
    Tape<float> tape;
    Context<float> ctx(tape, false, nullptr, false);
    auto y = axial_shift_unit(ctx, tape.constant(x), unit);
    benchmark::DoNotOptimize(y.value().data().data());
  }
}
BENCHMARK(BM_Unit)->Arg(1)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_Block(benchmark::State& state) {
  BlockConfig bc;
  bc.channels = 96;
  bc.shift = config(state);
  Rng rng = make_rng(2);
  const auto block = make_as_mlp_block<float>(bc, rng);
  const auto x = input(96);
  for (auto _ : state) {
    Tape<float> tape;
    Context<float> ctx(tape, false, nullptr, false);
    auto y = as_mlp_block(ctx, tape.constant(x), block);
    benchmark::DoNotOptimize(y.value().data().data());
  }
}
BENCHMARK(BM_Block)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
