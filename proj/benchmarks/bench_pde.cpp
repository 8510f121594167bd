#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "cglab/pde.hpp"
#include "cglab/surface_tension.hpp"

using namespace cglab;

namespace {

std::shared_ptr<const LatticeDomain> box(int d, int N) {
  const std::vector<double> lo(static_cast<std::size_t>(d), 0.0), hi(static_cast<std::size_t>(d), 1.0);
  return LatticeDomain::build(MacroDomain::box(lo, hi), N);
}

HeightField profile(std::shared_ptr<const LatticeDomain> ld) {
  return project_initial([](const Point& p) { return std::sin(std::numbers::pi * p[0]) * std::sin(std::numbers::pi * p[1]); }, ld);
}

}  // namespace

static void BM_ExplicitStep(benchmark::State& st) {
  const int d = static_cast<int>(st.range(0));
  const auto ld = box(d, static_cast<int>(st.range(1)));
  PdeConfig c;
  c.ld = ld;
  c.model = st.range(2) ? mollify(make_quadratic_model(d), 0.2) : make_quadratic_model(d);
  PdeState s = make_pde_state(profile(ld));
  for (auto _ : st) step(s, c);
  st.SetItemsProcessed(st.iterations() * ld->dn_size());
}
BENCHMARK(BM_ExplicitStep)->Args({1, 64, 0})->Args({2, 32, 0})->Args({2, 32, 1});

static void BM_SemiImplicitStep(benchmark::State& st) {
  const auto ld = box(2, static_cast<int>(st.range(0)));
  PdeConfig c;
  c.ld = ld;
  c.model = make_quadratic_model(2);
  c.integrator = Integrator::SemiImplicit;
  c.dt = 20.0 * PdeConfig::stability_bound(*ld, *c.model);
  PdeState s = make_pde_state(profile(ld));
  for (auto _ : st) step(s, c);
}
BENCHMARK(BM_SemiImplicitStep)->Arg(16)->Arg(24);

static void BM_ChemicalPotential(benchmark::State& st) {
  const auto ld = box(2, static_cast<int>(st.range(0)));
  const ModelPtr m = make_quadratic_model(2);
  const HeightField h = profile(ld);
  for (auto _ : st) benchmark::DoNotOptimize(chemical_potential(h, *m));
}
BENCHMARK(BM_ChemicalPotential)->Arg(32)->Arg(64);
