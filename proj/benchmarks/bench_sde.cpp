#include <benchmark/benchmark.h>

#include <cmath>

#include "cglab/sde.hpp"

using namespace cglab;

namespace {

std::shared_ptr<const LatticeDomain> box(int d, int N) {
  const std::vector<double> lo(static_cast<std::size_t>(d), 0.0), hi(static_cast<std::size_t>(d), 1.0);
  return LatticeDomain::build(MacroDomain::box(lo, hi), N);
}

Potential potential(int k) { return k == 0 ? Potential::quadratic() : Potential::bounded_anharmonic(); }

}  // namespace

// args: dimension, N, potential (0 quadratic, 1 anharmonic)
static void BM_EulerMaruyamaStep(benchmark::State& st) {
  const auto ld = box(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  const Potential V = potential(static_cast<int>(st.range(2)));
  SdeState s{HeightField(ld), 0.0, 0};
  Rng rng = make_stream(1, 0);
  for (auto _ : st) step_euler_maruyama(s, V, 0.01, std::sqrt(2.0), rng);
  st.SetItemsProcessed(st.iterations() * ld->dn_size());
}
BENCHMARK(BM_EulerMaruyamaStep)
    ->Args({1, 32, 0})
    ->Args({1, 32, 1})
    ->Args({2, 32, 0})
    ->Args({2, 32, 1});

static void BM_Drift(benchmark::State& st) {
  const auto ld = box(2, static_cast<int>(st.range(0)));
  HeightField phi(ld);
  for (int i = 0; i < phi.size(); ++i) phi[i] = std::sin(0.1 * i);
  const Potential V = Potential::bounded_anharmonic();
  for (auto _ : st) benchmark::DoNotOptimize(drift(phi, V));
  st.SetItemsProcessed(st.iterations() * ld->dn_size());
}
BENCHMARK(BM_Drift)->Arg(32)->Arg(64);
