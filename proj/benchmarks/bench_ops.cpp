#include <benchmark/benchmark.h>

#include <random>

#include "cglab/ops.hpp"

using namespace cglab;

namespace {

std::shared_ptr<const LatticeDomain> box(int d, int N) {
  const std::vector<double> lo(static_cast<std::size_t>(d), 0.0), hi(static_cast<std::size_t>(d), 1.0);
  return LatticeDomain::build(MacroDomain::box(lo, hi), N);
}

HeightField noise(std::shared_ptr<const LatticeDomain> ld) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  HeightField f(ld);
  for (double& v : f.values()) v = u(rng);
  return f;
}

}  // namespace

static void BM_LaplacianDirichlet(benchmark::State& st) {
  const auto ld = box(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  const HeightField f = noise(ld);
  for (auto _ : st) benchmark::DoNotOptimize(laplacian_dirichlet(f));
  st.SetItemsProcessed(st.iterations() * ld->dn_size());
}
BENCHMARK(BM_LaplacianDirichlet)->Args({1, 256})->Args({2, 64})->Args({2, 128});

static void BM_GradDiv(benchmark::State& st) {
  const auto ld = box(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  const HeightField f = noise(ld);
  for (auto _ : st) benchmark::DoNotOptimize(div_n(grad_forward(f)));
  st.SetItemsProcessed(st.iterations() * ld->dn_size());
}
BENCHMARK(BM_GradDiv)->Args({1, 256})->Args({2, 64});

static void BM_PoissonSolve(benchmark::State& st) {
  const auto ld = box(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  const MeanZeroField rhs = MeanZeroField::project(noise(ld));
  for (auto _ : st) benchmark::DoNotOptimize(poisson_solve(rhs));
}
BENCHMARK(BM_PoissonSolve)->Args({1, 64})->Args({1, 256})->Args({2, 32})->Args({2, 64});

static void BM_HminusOneNorm(benchmark::State& st) {
  const auto ld = box(2, static_cast<int>(st.range(0)));
  const HeightField f = noise(ld);
  for (auto _ : st) benchmark::DoNotOptimize(h_minus_one_norm(f));
}
BENCHMARK(BM_HminusOneNorm)->Arg(16)->Arg(32);
