#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "cglab/errors.hpp"
#include "cglab/ops.hpp"
#include "cglab/pde.hpp"
#include "cglab/sigma_table.hpp"
#include "oracles.hpp"

using namespace cglab;

namespace {

std::shared_ptr<const LatticeDomain> interval(int N, double lo = -1.0, double hi = 1.0) {
  const double a[] = {lo}, b[] = {hi};
  return LatticeDomain::build(MacroDomain::box(a, b), N);
}

double bump(double r) { return r * r < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0; }

// amp * bump centred at c with half-width w, sampled through the cell projection
HeightField bump_profile(std::shared_ptr<const LatticeDomain> ld, double amp, double c = 0.0,
                         double w = 0.6) {
  return project_initial([=](const Point& p) { return amp * bump((p[0] - c) / w); }, ld);
}

const ModelPtr& anharmonic_model() {
  static const ModelPtr m = [] {
    TiltAxis ax;
    ax.lo = -2.5;
    ax.hi = 2.5;
    ax.nodes = 51;
    return make_tabulated_model(
        tabulate_grad_sigma({ax}, Potential::bounded_anharmonic(), SamplerConfig{}, 21));
  }();
  return m;
}

PdeConfig config(std::shared_ptr<const LatticeDomain> ld, ModelPtr model, double T) {
  PdeConfig c;
  c.ld = std::move(ld);
  c.model = std::move(model);
  c.T = T;
  return c;
}

// dh/dt = kappa N^4 Delta_{D_N} (2d - A) h for the quadratic model
Eigen::MatrixXd quadratic_generator(const LatticeDomain& ld, double kappa) {
  const double N2 = double(ld.N()) * ld.N();
  return kappa * N2 * N2 * oracle::dirichlet_laplacian(ld) * oracle::full_stencil(ld);
}

}  // namespace

TEST(ProjectInitial, ZeroAndConstant) {
  const auto ld = interval(16);
  EXPECT_EQ(project_initial([](const Point&) { return 0.0; }, ld).max_abs(), 0.0);
  const HeightField c = project_initial([](const Point&) { return 0.7; }, LatticeDomain::build(
      MacroDomain::box(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}), 16));
  for (double v : c.values()) EXPECT_NEAR(v, 0.7, 1e-14);
}

TEST(ProjectInitial, SineMatchesClosedFormCellIntegrals) {
  const auto ld = oracle::unit_box(1, 16);
  const HeightField h = project_initial([](const Point& p) { return std::sin(M_PI * p[0]); }, ld);
  const double N = 16.0;
  double mass = 0.0, exact_mass = 0.0;
  for (int id = 0; id < ld->dn_size(); ++id) {
    const double x = ld->site(id)[0];
    const double want = N * (std::cos(M_PI * (x - 0.5) / N) - std::cos(M_PI * (x + 0.5) / N)) / M_PI;
    EXPECT_NEAR(h[id], want, 1e-6);
    mass += h[id] / N;
    exact_mass += want / N;
  }
  EXPECT_NEAR(mass, exact_mass, 1e-9);
}

TEST(ChemicalPotential, ZeroProfileGivesZero) {
  const auto ld = oracle::unit_box(2, 16);
  EXPECT_EQ(chemical_potential(HeightField(ld), *make_quadratic_model(2)).max_abs(), 0.0);
  EXPECT_EQ(chemical_potential(HeightField(interval(16)), *anharmonic_model()).max_abs(), 0.0);
}

TEST(ChemicalPotential, QuadraticMatchesDenseOperator) {
  std::mt19937_64 rng(1);
  for (int d : {1, 2}) {
    const auto ld = oracle::unit_box(d, 16);
    const Eigen::MatrixXd K = oracle::full_stencil(*ld);
    const HeightField h = oracle::random_field(ld, rng);
    const Eigen::VectorXd got = oracle::to_vec(chemical_potential(h, *make_quadratic_model(d, 1.5)));
    const Eigen::VectorXd want = -1.5 * 256.0 * (K * oracle::to_vec(h));
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-10 * want.cwiseAbs().maxCoeff());
  }
}

TEST(ChemicalPotential, LinearProfileVanishesInside) {
  const auto ld = interval(32);
  HeightField h(ld);
  for (int id = 0; id < ld->dn_size(); ++id) h[id] = 0.4 * ld->position(ld->site(id))[0];
  const HeightField k = chemical_potential(h, *make_quadratic_model(1));
  for (int id = 0; id < ld->dn_size(); ++id) {
    if (ld->dn_degree(id) == 2 && ld->in_dn(ld->neighbor(id, 0)) && ld->dn_degree(ld->neighbor(id, 0)) == 2 &&
        ld->dn_degree(ld->neighbor(id, 1)) == 2) {
      EXPECT_NEAR(k[id], 0.0, 1e-9);
    }
  }
}

TEST(ExtendK, ConstantsPreserved) {
  for (int d : {1, 2}) {
    const auto ld = oracle::unit_box(d, 16);
    HeightField k(ld);
    for (double& v : k.values()) v = -2.25;
    const HeightField e = extend_k(k);
    ASSERT_EQ(e.size(), ld->double_closure_size());
    for (double v : e.values()) EXPECT_DOUBLE_EQ(v, -2.25);
  }
}

TEST(ExtendK, OneDimensionalCopiesNeighbour) {
  std::mt19937_64 rng(2);
  const auto ld = oracle::unit_box(1, 16);
  const HeightField k = oracle::random_field(ld, rng);
  const HeightField e = extend_k(k);
  for (int layer = 1; layer <= 2; ++layer) {
    const auto [b, end] = ld->layer_range(layer);
    EXPECT_EQ(end - b, 2);
    for (int id = b; id < end; ++id) {
      // the single neighbour one layer in
      const Site x = ld->site(id);
      for (int s : {-1, 1}) {
        const int nb = ld->index_of(Site{x[0] + s, 0, 0});
        if (nb >= 0 && ld->layer_of(nb) == layer - 1) EXPECT_EQ(e[id], e[nb]);
      }
    }
  }
}

TEST(ExtendK, TwoDimensionalCornersAverage) {
  std::mt19937_64 rng(3);
  // L-shaped domain: its re-entrant corner gives layer-1 sites with two D_N neighbours
  std::vector<std::uint8_t> flags = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0};
  const auto ld = LatticeDomain::build(
      MacroDomain::indicator_grid(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0},
                                  std::vector<int>{4, 4}, flags),
      32);
  const HeightField k = oracle::random_field(ld, rng);
  const HeightField e = extend_k(k);
  int two_dn = 0, two_inner = 0;
  for (int layer = 1; layer <= 2; ++layer) {
    const auto [b, end] = ld->layer_range(layer);
    for (int id = b; id < end; ++id) {
      const Site x = ld->site(id);
      double s = 0.0;
      int n = 0;
      for (int i = 0; i < 2; ++i) {
        for (int sg : {-1, 1}) {
          Site y = x;
          y[i] += sg;
          const int nb = ld->index_of(y);
          if (nb < 0) continue;
          // graph distance of y from D_N, by brute force over D_N
          int best = 1 << 20;
          for (int j = 0; j < ld->dn_size(); ++j) {
            best = std::min(best, std::abs(ld->site(j)[0] - y[0]) + std::abs(ld->site(j)[1] - y[1]));
          }
          if (best == layer - 1) {
            s += e[nb];
            ++n;
          }
        }
      }
      ASSERT_GT(n, 0);
      EXPECT_NEAR(e[id], s / n, 1e-15);
      if (n == 2 && layer == 1) ++two_dn;
      if (n == 2 && layer == 2) ++two_inner;
    }
  }
  EXPECT_GT(two_dn, 0);
  EXPECT_GT(two_inner, 0);
}

TEST(PdeStep, SteadyStateUnchanged) {
  const auto ld = interval(16);
  PdeState s = make_pde_state(HeightField(ld));
  const PdeConfig c = config(ld, make_quadratic_model(1), 0.0);
  for (int k = 0; k < 10; ++k) step(s, c);
  EXPECT_EQ(s.hbar.max_abs(), 0.0);
  EXPECT_EQ(s.steps, 10);
}

TEST(PdeStep, MassConservedOverThousandSteps) {
  std::mt19937_64 rng(4);
  for (int d : {1, 2}) {
    const auto ld = oracle::unit_box(d, 16);
    HeightField h = oracle::random_field(ld, rng);
    for (double& v : h.values()) v += 0.5;
    PdeState s = make_pde_state(h);
    const PdeConfig c = config(ld, make_quadratic_model(d), 0.0);
    const double m0 = h.sum_dn();
    for (int k = 0; k < 1000; ++k) step(s, c);
    EXPECT_LE(std::abs(s.hbar.sum_dn() - m0), 1e-10 * std::max(1.0, std::abs(m0)));
  }
}

TEST(PdeStep, DtBoundEnforced) {
  const auto ld = interval(16);
  PdeConfig c = config(ld, make_quadratic_model(1), 0.01);
  c.dt = 2.0 * PdeConfig::stability_bound(*ld, *c.model);
  EXPECT_THROW(c.validate(), PreconditionError);
  c.integrator = Integrator::SemiImplicit;
  EXPECT_NO_THROW(c.validate());
}

TEST(PdeRun, QuadraticMatchesMatrixExponential) {
  const auto ld = oracle::unit_box(1, 16);
  std::mt19937_64 rng(5);
  const HeightField h0 = project_initial([](const Point& p) { return std::sin(M_PI * p[0]); }, ld);
  const PdeConfig c = config(ld, make_quadratic_model(1), 0.01);
  const PdeResult r = run(c, make_pde_state(h0));
  EXPECT_NEAR(r.final_state.t, 0.01, 1e-12);
  const Eigen::VectorXd want = oracle::expm(0.01 * quadratic_generator(*ld, 1.0)) * oracle::to_vec(h0);
  EXPECT_LE((oracle::to_vec(r.final_state.hbar) - want).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(PdeRun, EnergyNonIncreasingAndMassConserved) {
  const auto ld = interval(16);
  for (const ModelPtr& m : {make_quadratic_model(1), mollify(anharmonic_model(), 0.2)}) {
    PdeConfig c = config(ld, m, 0.02);
    c.cadence = 0.001;
    const HeightField h0 = bump_profile(ld, 0.25);
    const PdeResult r = run(c, make_pde_state(h0));
    EXPECT_LE(r.max_energy_increase, 1e-12);
    const auto energy = r.trajectory.series("energy");
    for (std::size_t i = 1; i < energy.size(); ++i) EXPECT_LE(energy[i], energy[i - 1] * (1.0 + 1e-12));
    EXPECT_LT(energy.back(), energy.front());
    const double m0 = h0.sum_dn();
    for (double mass : r.trajectory.series("mass")) EXPECT_LE(std::abs(mass - m0), 1e-10 * std::max(1.0, std::abs(m0)));
  }
}

namespace {

struct Bounds {
  double mean_k = 0.0;
  double increment = 0.0;  // sup ||h(t1) - h(t2)||^2 / |t1 - t2|
};

Bounds observed_bounds(int N) {
  const auto ld = interval(N);
  PdeConfig c = config(ld, make_quadratic_model(1), 0.1);
  c.cadence = 0.005;
  c.keep_snapshots = true;
  c.check_energy = false;
  const PdeResult r = run(c, make_pde_state(bump_profile(ld, 0.5)));
  Bounds b;
  for (double k : r.trajectory.series("mean_k")) b.mean_k = std::max(b.mean_k, std::abs(k));
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    for (std::size_t j = i + 1; j < r.snapshots.size(); ++j) {
      const double d2 = h_minus_one_norm_macro_sq(r.snapshots[j] - r.snapshots[i]);
      b.increment = std::max(b.increment, d2 / (r.times[j] - r.times[i]));
    }
  }
  return b;
}

}  // namespace

TEST(PdeRun, MeanKAndTimeIncrementBoundsCarryOver) {
  const Bounds coarse = observed_bounds(8);
  const Bounds fine = observed_bounds(16);
  EXPECT_GT(coarse.mean_k, 0.0);
  EXPECT_LE(fine.mean_k, 2.0 * coarse.mean_k);
  EXPECT_LE(fine.increment, 2.0 * coarse.increment);
}

TEST(PdeRun, SteadyStateDetectorStops) {
  const auto ld = interval(8);
  PdeConfig c = config(ld, make_quadratic_model(1), 10.0);
  c.cadence = 0.01;
  c.stop_at_steady_state = true;
  const PdeResult r = run(c, make_pde_state(bump_profile(ld, 0.3)));
  EXPECT_TRUE(r.reached_steady_state);
  EXPECT_LT(r.final_state.t, 10.0);
  const auto dh = r.trajectory.series("dhdt_norm");
  for (std::size_t i = dh.size() - 10; i < dh.size(); ++i) EXPECT_LT(dh[i], c.steady_tol);
}

TEST(PdeRun, ContractionBetweenEqualMassSolutions) {
  std::mt19937_64 rng(6);
  const auto ld = interval(16);
  const HeightField a = bump_profile(ld, 0.3, -0.2, 0.5);
  HeightField b = bump_profile(ld, 0.2, 0.3, 0.4);
  b *= a.sum_dn() / b.sum_dn();
  for (const ModelPtr& m : {make_quadratic_model(1), mollify(anharmonic_model(), 0.2)}) {
    PdeConfig c = config(ld, m, 0.01);
    c.cadence = 0.0002;
    c.keep_snapshots = true;
    const PdeResult ra = run(c, make_pde_state(a));
    const PdeResult rb = run(c, make_pde_state(b));
    ASSERT_EQ(ra.snapshots.size(), rb.snapshots.size());
    double prev = h_minus_one_norm_macro_sq(a - b);
    for (std::size_t i = 1; i < ra.snapshots.size(); ++i) {
      const double cur = h_minus_one_norm_macro_sq(ra.snapshots[i] - rb.snapshots[i]);
      EXPECT_LE(cur, prev + 1e-8);
      prev = cur;
    }
  }
}

TEST(PdeRun, MollificationWidthRobustness) {
  const auto ld = interval(16);
  const HeightField h0 = bump_profile(ld, 0.3);
  auto final_for = [&](ModelPtr m) {
    PdeConfig c = config(ld, std::move(m), 0.005);
    return run(c, make_pde_state(h0)).final_state.hbar;
  };
  const ModelPtr q = make_quadratic_model(1);
  const HeightField q1 = final_for(mollify(q, 0.2)), q2 = final_for(mollify(q, 0.05));
  EXPECT_LE((q1 - q2).max_abs(), 1e-8);

  const ModelPtr a = anharmonic_model();
  const HeightField h4 = final_for(mollify(a, 0.4)), h2 = final_for(mollify(a, 0.2));
  const HeightField h1 = final_for(mollify(a, 0.1)), h05 = final_for(mollify(a, 0.05));
  const double d1 = h_minus_one_norm_macro(h4 - h2);
  const double d2 = h_minus_one_norm_macro(h2 - h1);
  const double d3 = h_minus_one_norm_macro(h1 - h05);
  EXPECT_GT(d1, d2);
  EXPECT_GT(d2, d3);
}

TEST(PdeRun, SemiImplicitTracksExplicit) {
  const auto ld = interval(16);
  const HeightField h0 = bump_profile(ld, 0.3);
  for (const ModelPtr& m : {make_quadratic_model(1), mollify(anharmonic_model(), 0.2)}) {
    PdeConfig ex = config(ld, m, 0.01);
    const PdeResult re = run(ex, make_pde_state(h0));
    PdeConfig si = ex;
    si.integrator = Integrator::SemiImplicit;
    si.dt = 20.0 * PdeConfig::stability_bound(*ld, *m);
    const PdeResult rs = run(si, make_pde_state(h0));
    EXPECT_LT(rs.steps * 10, re.steps);
    EXPECT_LE(std::abs(rs.final_state.hbar.sum_dn() - h0.sum_dn()), 1e-10 * std::abs(h0.sum_dn()));
    EXPECT_LE((rs.final_state.hbar - re.final_state.hbar).max_abs(), 1e-2 * h0.max_abs());
  }
}

TEST(Elliptic, ConstantChemicalPotentialGivesZeroH1) {
  // hbar with k constant: the quadratic Wulff-type profile
  const auto ld = interval(16);
  const Eigen::MatrixXd K = 256.0 * oracle::full_stencil(*ld);
  const Eigen::VectorXd h = K.ldlt().solve(Eigen::VectorXd::Ones(ld->dn_size()));
  const HeightField hbar = oracle::from_vec(ld, h);
  const EllipticSplit s = elliptic_split(hbar, *make_quadratic_model(1));
  for (double v : s.k.values()) EXPECT_NEAR(v, -1.0, 1e-10);
  EXPECT_LE(s.h1.max_abs(), 1e-10 * hbar.max_abs());
  EXPECT_LE((s.h2 - hbar).max_abs(), 1e-10 * hbar.max_abs());
}

TEST(Elliptic, QuadraticMatchesDenseSolve) {
  std::mt19937_64 rng(7);
  for (int d : {1, 2}) {
    const auto ld = oracle::unit_box(d, 16);
    const double kappa = 1.5;
    const Eigen::MatrixXd K = kappa * 256.0 * oracle::full_stencil(*ld);
    const HeightField hbar = oracle::random_field(ld, rng);
    const EllipticSplit s = elliptic_split(hbar, *make_quadratic_model(d, kappa));
    const Eigen::VectorXd kv = oracle::to_vec(s.k);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(kv.size());
    EXPECT_NEAR(s.site_mean_k, kv.mean(), 1e-12 * kv.cwiseAbs().maxCoeff());
    EXPECT_NEAR(s.mean_k, kv.sum() * std::pow(16.0, -d), 1e-12 * kv.cwiseAbs().maxCoeff());
    const Eigen::VectorXd h1 = -K.ldlt().solve(kv - s.site_mean_k * ones);
    const Eigen::VectorXd h2 = -K.ldlt().solve(s.site_mean_k * ones);
    EXPECT_LE((oracle::to_vec(s.h1) - h1).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((oracle::to_vec(s.h2) - h2).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((s.h1 + s.h2 - hbar).max_abs(), 1e-8);
  }
}

TEST(Elliptic, RecombinationWithAnharmonicModel) {
  const auto ld = interval(16);
  const HeightField hbar = bump_profile(ld, 0.3);
  const EllipticSplit s = elliptic_split(hbar, *mollify(anharmonic_model(), 0.2));
  EXPECT_LE((s.h1 + s.h2 - hbar).max_abs(), 1e-8 * hbar.max_abs());
}

TEST(Elliptic, MeanKScalingConstantStableAcrossN) {
  auto ratio = [](int N, double amp, double c) {
    const auto ld = interval(N);
    const EllipticSplit s = elliptic_split(bump_profile(ld, amp, c, 0.5), *mollify(anharmonic_model(), 0.2));
    const double g2 = std::pow(double(N), -1) * grad_forward(s.h2).squared_norm();
    return s.mean_k * s.mean_k / g2;
  };
  double C = 0.0;
  for (double amp : {0.1, 0.3}) {
    for (double c : {-0.2, 0.0, 0.25}) C = std::max(C, ratio(8, amp, c));
  }
  for (double amp : {0.1, 0.3}) {
    for (double c : {-0.2, 0.0, 0.25}) EXPECT_LE(ratio(16, amp, c), 2.0 * C);
  }
}

TEST(Elliptic, CoefficientSizeChecked) {
  const auto ld = interval(16);
  EXPECT_THROW(solve_elliptic(std::vector<double>(3, 1.0), HeightField(ld)), PreconditionError);
}
