#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "cglab/errors.hpp"
#include "cglab/pde.hpp"
#include "cglab/potential.hpp"

namespace cglab {

/// N^{-d} sum over closure sites of sigma(grad^N hbar).
double total_energy(const HeightField& hbar, const SurfaceTensionModel& model);
/// Value of total_energy at hbar = 0.
double energy_offset(const LatticeDomain& ld, const SurfaceTensionModel& model);

/// Trapezoidal time integral of the integrand over a snapshot sequence.
double oscillation_sum(const std::vector<double>& times, const std::vector<HeightField>& snapshots,
                       int axis);
/// Same from the osc_<axis> column recorded by a PDE run.
double oscillation_sum(const TrajectoryRecord& trajectory, int axis);

/// Multilinear blend of node values hbar(x) at x / N; zero beyond the numbered sites.
class PolilinearInterpolant {
 public:
  explicit PolilinearInterpolant(HeightField hbar) : h_(std::move(hbar)) {}
  double operator()(const Point& theta) const;

 private:
  HeightField h_;
};

PolilinearInterpolant polilinear_interpolate(const HeightField& hbar);

struct WulffProblem {
  std::shared_ptr<const LatticeDomain> ld;
  ModelPtr model;
  double volume = 0.0;  // prescribed integral N^{-d} sum hbar
  double tol = 1e-9;    // projected-gradient Euclidean norm
  double armijo = 1e-4;
  double initial_step = 1.0;
  long long max_iter = 500000;
};

struct WulffSolution {
  HeightField h;
  double objective = 0.0;
  double initial_objective = 0.0;
  double grad_norm = 0.0;
  long long iterations = 0;
  bool monotone = true;  // objective non-increasing at every accepted iterate, up to its rounding level
};

class WulffNotConverged : public ConvergenceError {
 public:
  WulffNotConverged(WulffSolution last)
      : ConvergenceError("wulff minimization did not converge", static_cast<int>(last.iterations),
                         last.grad_norm),
        last_(std::move(last)) {}
  const WulffSolution& last_iterate() const noexcept { return last_; }

 private:
  WulffSolution last_;
};

/// Fields zero outside D_N with N^{-d} sum = volume; projected steepest descent
/// with Armijo backtracking.
WulffSolution solve_wulff(const WulffProblem& problem);

/// Projection onto the constraint set: subtract the D_N mean, then add N^d v / |D_N|.
HeightField project_volume(const HeightField& h, double volume);

struct WulffReport {
  double hm1_gap = 0.0;
  double energy_gap = 0.0;
  bool pass = false;
};

WulffReport wulff_relaxation_check(const HeightField& pde_final, const WulffSolution& wulff,
                                   const SurfaceTensionModel& model, double hm1_threshold = 1e-4,
                                   double energy_threshold = 1e-6);

/// Exact cell-overlap average of a step function onto the cells of another lattice.
HeightField cell_average(const HeightField& fine, std::shared_ptr<const LatticeDomain> coarse);

struct ConvergenceStudy {
  std::shared_ptr<const MacroDomain> domain;
  std::vector<int> Ns;
  std::function<double(const Point&)> h0;
  Potential potential = Potential::quadratic(1.0);
  int replicas = 100;
  std::vector<double> times;
  std::uint64_t seed = 1;
  double dtau = 0.0;  // 0 selects the SDE default
  double amplitude = 1.4142135623730951;
  int N_ref = 0;  // 0 selects 2 max(Ns)
  int workers = 1;
  bool deterministic_column = true;  // also run the amplitude-0 dynamics
};

struct ConvergenceRow {
  int N = 0;
  double t = 0.0;
  double err_sq = 0.0;   // E ||h^N(t) - h_ref(t)||^2_{-1,N}
  double err_sq_se = 0.0;
  double det_err_sq = 0.0;  // amplitude-0 trajectory against the reference
};

std::vector<ConvergenceRow> hydrodynamic_convergence(const ConvergenceStudy& study);

}  // namespace cglab
