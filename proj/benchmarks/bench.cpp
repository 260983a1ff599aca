#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "qgnls/discretization.hpp"
#include "qgnls/flow.hpp"
#include "qgnls/functional.hpp"
#include "qgnls/gradient.hpp"
#include "qgnls/graph.hpp"
#include "qgnls/spectrum.hpp"

using namespace qgnls;

namespace {

void BM_Assemble(benchmark::State& st) {
  const auto g = tadpole_graph(2.0 * std::numbers::pi, 1.0);
  const int cells = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(assemble_uniform(g, cells));
  st.SetComplexityN(cells);
}
BENCHMARK(BM_Assemble)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_Eigenpairs(benchmark::State& st) {
  const auto d = assemble_uniform(interval_graph(std::numbers::pi), static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(eigenpairs(d, 6));
}
BENCHMARK(BM_Eigenpairs)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& st) {
  const auto d = assemble_uniform(star_graph(3, 1.0), static_cast<int>(st.range(0)));
  const double mu = 0.1;
  Vec u = random_field(d, 1, 0);
  u *= std::sqrt(mu / d.mass(u));
  for (auto _ : st) benchmark::DoNotOptimize(constrained_gradient(d, u, 7.0, mu));
}
BENCHMARK(BM_Gradient)->Arg(64)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_Descend(benchmark::State& st) {
  const auto d = assemble_uniform(interval_graph(std::numbers::pi), 128);
  const auto s = eigenpairs(d, 2);
  const double mu = 1e-3;
  FlowParams f;
  f.p = 7.0;
  f.mu = mu;
  f.deflation = s.leading(2);
  const Vec u0 = std::sqrt(mu) * (s.phi(2) + 0.05 * random_field(d, 2, 0) / random_field(d, 2, 0).norm());
  for (auto _ : st) benchmark::DoNotOptimize(descend(d, u0, f));
}
BENCHMARK(BM_Descend)->Unit(benchmark::kMillisecond);

void BM_EstimateK(benchmark::State& st) {
  const auto d = assemble_uniform(interval_graph(std::numbers::pi), 128);
  for (auto _ : st) benchmark::DoNotOptimize(estimate_K(d, 7.0, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_EstimateK)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
