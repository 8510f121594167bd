#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "cglab/field.hpp"
#include "cglab/potential.hpp"
#include "cglab/rng.hpp"
#include "cglab/trajectory.hpp"

namespace cglab {

struct SdeConfig {
  std::shared_ptr<const LatticeDomain> ld;
  Potential potential;
  double dtau = 0.0;  // microscopic step; 0 selects default_dtau
  double T = 0.0;     // macroscopic horizon, microscopic horizon N^4 T
  double amplitude = std::sqrt(2.0);
  std::uint64_t seed = 1;
  int replicas = 1;
  double cadence = 0.0;  // macroscopic time between records; 0 records start and end only
  int workers = 1;
  bool per_replica_rows = false;  // also emit one trajectory row per replica
  bool record_norms = true;       // H^-1 norms need a Poisson solve per record

  /// Explicit limit 0.9 / (c_+ * 4d * 2d).
  static double stability_bound(int dim, const Potential& V);
  /// 0.05 / (c_+ (4d)^2).
  static double default_dtau(int dim, const Potential& V);

  double effective_dtau() const;
  /// Throws PreconditionError naming the violated bound.
  void validate() const;
};

struct SdeState {
  HeightField phi;  // microscopic heights on D_N
  double tau = 0.0;
  long long steps = 0;
};

/// Delta_{D_N} U(phi) with U_x = sum over all lattice neighbours y of V'(phi(x) - phi(y)).
HeightField drift(const HeightField& phi, const Potential& V);

/// One Euler-Maruyama step of size dtau driven by per-bond N(0, dtau) increments
/// drawn from rng in positive_bonds_dn order.
void step_euler_maruyama(SdeState& state, const Potential& V, double dtau, double amplitude,
                         Rng& rng);
SdeState step_euler_maruyama(const SdeState& state, const SdeConfig& cfg, Rng& rng);

struct SdeResult {
  TrajectoryRecord trajectory;  // columns mass, grad_energy, hm1_norm, hm1_norm_sq
  std::vector<double> times;
  std::vector<HeightField> mean_snapshots;  // ensemble mean of phi per record
  std::vector<std::vector<double>> hm1_sq;       // [record][replica]
  std::vector<std::vector<double>> grad_energy;  // [record][replica]
  std::vector<HeightField> finals;
  long long steps = 0;
  double dtau = 0.0;
};

SdeResult run(const SdeConfig& cfg, const HeightField& phi0);

/// Step function h^N = phi / N.
HeightField macroscopic_height(const HeightField& phi);

struct CoupledResult {
  TrajectoryRecord trajectory;  // columns dist_sq, dist_sq_se
  std::vector<double> times;
  std::vector<std::vector<double>> dist_sq;  // [record][replica]
  std::vector<HeightField> finals_a;
  std::vector<HeightField> finals_b;
};

/// Two replicas per stream driven by identical bond noise; records
/// ||h^N - h~^N||^2_{-1,N} per replica.
CoupledResult coupled_pair_run(const SdeConfig& cfg, const HeightField& phi0,
                               const HeightField& phi0_tilde);

}  // namespace cglab
