#include <benchmark/benchmark.h>

#include <vector>

#include "fspde/fastslow.hpp"
#include "fspde/fbm.hpp"
#include "fspde/fracint.hpp"
#include "fspde/mollify.hpp"
#include "fspde/spde.hpp"

using namespace fspde;

static void BM_FbmCirculant(benchmark::State& state) {
  const auto grid = uniform_grid(1.0, static_cast<std::size_t>(state.range(0)));
  const FbmSampler sampler(0.7, grid);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(++seed));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FbmCirculant)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

static void BM_FbmCholesky(benchmark::State& state) {
  const auto grid = uniform_grid(1.0, static_cast<std::size_t>(state.range(0)));
  const FbmSampler sampler(0.7, grid, FbmMethod::Cholesky);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(++seed));
}
BENCHMARK(BM_FbmCholesky)->Arg(129)->Arg(513);

static void BM_LambdaNorm(benchmark::State& state) {
  const auto grid = uniform_grid(1.0, static_cast<std::size_t>(state.range(0)));
  const Path p = sample_fbm_1d(0.7, grid, 1).path;
  for (auto _ : state) benchmark::DoNotOptimize(lambda_alpha_norm(p, 0.4, 0.0, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LambdaNorm)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

static void BM_StieltjesIntegral(benchmark::State& state) {
  const auto grid = uniform_grid(1.0, static_cast<std::size_t>(state.range(0)));
  const Path h = sample_fbm_1d(0.7, grid, 1).path;
  const Path l = sample_fbm_1d(0.7, grid, 2).path;
  for (auto _ : state) benchmark::DoNotOptimize(stieltjes_integral(h, l, 0.4, 0.0, 1.0));
}
BENCHMARK(BM_StieltjesIntegral)->Arg(257)->Arg(1025);

static void BM_Mollify(benchmark::State& state) {
  const auto grid = uniform_grid(1.0, 2049);
  const Path p = sample_fbm_1d(0.8, grid, 3).path;
  for (auto _ : state) benchmark::DoNotOptimize(mollify_path(p, static_cast<double>(state.range(0))));
}
BENCHMARK(BM_Mollify)->Arg(8)->Arg(128);

static void BM_MildSolve(benchmark::State& state) {
  MildSolveConfig cfg;
  cfg.dt = 1.0 / static_cast<double>(state.range(0));
  cfg.u0 = {1, 0.5, 0.25, 0.125};
  CoefficientSet cs;
  cs.sigma = [](std::span<const double>, std::span<double> o) {
    for (double& v : o) v = 0.5;
  };
  cs.g = cs.sigma;
  const NoiseSample noise = sample_noise(cfg, 4);
  for (auto _ : state) benchmark::DoNotOptimize(solve_mild(cfg, cs, noise));
}
BENCHMARK(BM_MildSolve)->Arg(256)->Arg(1024);

static void BM_FastSlowReplicate(benchmark::State& state) {
  const LinearTestSystem sys = linear_test_system(4);
  FastSlowConfig cfg = sys.config;
  cfg.eps = 1.0 / static_cast<double>(state.range(0));
  const ReplicateNoise noise = replicate_noise(cfg, 5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_fastslow(cfg, sys.coeffs, noise));
}
BENCHMARK(BM_FastSlowReplicate)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
