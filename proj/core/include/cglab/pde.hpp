#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "cglab/field.hpp"
#include "cglab/surface_tension.hpp"
#include "cglab/trajectory.hpp"

namespace cglab {

enum class Integrator { Explicit, SemiImplicit };

struct PdeConfig {
  std::shared_ptr<const LatticeDomain> ld;
  ModelPtr model;
  double dt = 0.0;  // macroscopic step; 0 selects half the explicit bound
  double T = 0.0;
  Integrator integrator = Integrator::Explicit;
  double cadence = 0.0;  // time between records; 0 records start and end only
  double energy_rel_tol = 1e-12;
  bool check_energy = true;    // per-step monotonicity check, aborts on violation
  bool keep_snapshots = false;
  bool stop_at_steady_state = false;
  double steady_tol = 1e-9;
  int steady_records = 10;

  /// 0.9 / (c_+ (4d)^2 N^4) with c_+ the model stiffness.
  static double stability_bound(const LatticeDomain& ld, const SurfaceTensionModel& model);

  double effective_dt() const;
  void validate() const;
};

struct PdeState {
  HeightField hbar;  // step function values on D_N cells
  double t = 0.0;
  long long steps = 0;
};

/// Cell averages N^d int_{B(x/N,1/N)} h0 for x in D_N, by a 4^d-point
/// product Gauss-Legendre rule per cell.
HeightField project_initial(const std::function<double(const Point&)>& h0,
                            std::shared_ptr<const LatticeDomain> ld);
PdeState make_pde_state(HeightField hbar);

/// Sum over closure sites of sigma(grad^N hbar).
double energy_sum(const HeightField& hbar, const SurfaceTensionModel& model);

/// k = div_N (grad sigma)(grad^N hbar) on D_N.
HeightField chemical_potential(const HeightField& hbar, const SurfaceTensionModel& model);

/// Extends k from D_N to the double closure by neighbour averages, layer by layer.
HeightField extend_k(const HeightField& k);

/// dh/dt = -Delta_N k on D_N.
HeightField pde_rhs(const HeightField& hbar, const SurfaceTensionModel& model);

/// Squared H^-1 norm of dh/dt: N^{-d} sum k (-Delta_N k).
double dhdt_norm_sq(const HeightField& k);

/// N^{-d} sum over closure sites of |grad^N hbar(x + e_axis) - grad^N hbar(x)|^2.
double oscillation_integrand(const HeightField& hbar, int axis);

/// Advances the solution by cfg.effective_dt().
void step(PdeState& state, const PdeConfig& cfg);

struct PdeResult {
  /// Columns: mass, energy, hm1_norm, mean_k, k_l2, grad_k_l2, dhdt_norm, dhdt_fd, osc_0..osc_{d-1}.
  TrajectoryRecord trajectory;
  PdeState final_state;
  std::vector<double> times;
  std::vector<HeightField> snapshots;  // filled when keep_snapshots
  bool reached_steady_state = false;
  long long steps = 0;
  double dt = 0.0;
  double max_energy_increase = 0.0;  // largest relative per-step increase observed
};

PdeResult run(const PdeConfig& cfg, PdeState state);

/// The constant split off k is its per-site mean over D_N, so a constant k
/// leaves h1 = 0 whatever the volume of D_N.
struct EllipticSplit {
  HeightField h1;            // div(A grad h1) = k - site_mean_k - div a, zero outside D_N
  HeightField h2;            // div(A grad h2) = site_mean_k
  HeightField k;
  double mean_k = 0.0;       // N^{-d} sum over D_N of k
  double site_mean_k = 0.0;  // |D_N|^{-1} sum over D_N of k
};

/// Decomposes hbar with A = A(grad^N hbar), a = a(grad^N hbar) from the model.
EllipticSplit elliptic_split(const HeightField& hbar, const SurfaceTensionModel& model,
                             double tol = 1e-12);

/// Solves div_N(A grad^N h) = rhs on D_N with zero exterior values, A diagonal
/// per closure site (d entries each), by conjugate gradients.
HeightField solve_elliptic(const std::vector<double>& A_diag, const HeightField& rhs,
                           double tol = 1e-12);

}  // namespace cglab
