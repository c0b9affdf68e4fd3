#include <benchmark/benchmark.h>

#include "odebc/bcsearch.hpp"
#include "odebc/metrics.hpp"
#include "odebc/presets.hpp"
#include "odebc/rng.hpp"
#include "odebc/sampler.hpp"
#include "odebc/worldgen.hpp"

namespace {

using namespace odebc;

Tensor noise(const Shape& shape, std::uint64_t index) {
  Tensor t(shape);
  rng::Generator(1, rng::Stream::kVerify, index).fill_normal(t.values());
  return t;
}

void BM_EpsConditional(benchmark::State& state, const char* preset) {
  const auto s = default_schedule();
  const auto world = make_preset_world(preset);
  const GmmDenoiser model(world, s);
  const auto pair = sample_pairs(world, 1, 3).front();
  const auto field = model.bind(Condition::observed(pair.y));
  const Tensor x = noise(world.hr_shape(), 0);
  Tensor out(world.hr_shape());
  double t = 0.0;
  for (auto _ : state) {
    field->eps(x.values(), t, out.values());
    benchmark::DoNotOptimize(out.data());
    t = t >= 0.99 ? 0.0 : t + 0.01;
  }
}
BENCHMARK_CAPTURE(BM_EpsConditional, toy8, "toy8");
BENCHMARK_CAPTURE(BM_EpsConditional, sr8, "sr8");
BENCHMARK_CAPTURE(BM_EpsConditional, sr16, "sr16");

void BM_Bind(benchmark::State& state) {
  const auto s = default_schedule();
  const auto world = make_preset_world("sr8");
  const GmmDenoiser model(world, s);
  const auto pair = sample_pairs(world, 1, 3).front();
  for (auto _ : state) benchmark::DoNotOptimize(model.bind(Condition::observed(pair.y)));
}
BENCHMARK(BM_Bind);

void BM_Projection(benchmark::State& state, SolverKind kind) {
  const auto s = default_schedule();
  const auto world = make_preset_world("sr8");
  const GmmDenoiser model(world, s);
  const auto pair = sample_pairs(world, 1, 3).front();
  const auto field = model.bind(Condition::observed(pair.y));
  const int steps = static_cast<int>(state.range(0));
  const SolverConfig cfg = kind == SolverKind::kDdim ? SolverConfig::ddim(s, steps) : SolverConfig::dpm_solver2(s, steps);
  const Tensor x = noise(world.hr_shape(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(project(*field, s, cfg, x));
  state.SetLabel(cfg.label());
}
BENCHMARK_CAPTURE(BM_Projection, ddim, SolverKind::kDdim)->Arg(20)->Arg(50)->Arg(100);
BENCHMARK_CAPTURE(BM_Projection, dpm2, SolverKind::kDpmSolver2)->Arg(20);

void BM_Search(benchmark::State& state) {
  const auto s = default_schedule();
  const auto world = make_preset_world("sr8");
  const GmmDenoiser model(world, s);
  ReferenceSet refs;
  refs.pairs = sample_pairs(world, 8, 5);
  const CandidateSet cands(7, static_cast<std::size_t>(state.range(0)), world.hr_shape());
  const auto cfg = SolverConfig::ddim(s, 50);
  for (auto _ : state)
    benchmark::DoNotOptimize(search_optimal_bc(cands, refs, s, cfg, model, l2_metric(), 1).best_index);
  state.SetItemsProcessed(state.iterations() * state.range(0) * 8);
}
BENCHMARK(BM_Search)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EnergyDistance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> xs(2 * n), ys(2 * n);
  rng::Generator g(2, rng::Stream::kVerify, 0);
  for (double& v : xs) v = g.normal();
  for (double& v : ys) v = g.normal();
  for (auto _ : state) benchmark::DoNotOptimize(energy_distance(xs, ys, 2));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * (2 * n - 1) / 2));
}
BENCHMARK(BM_EnergyDistance)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
