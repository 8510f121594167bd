#pragma once

#include <cstdint>
#include <vector>

#include "cglab/potential.hpp"

namespace cglab {

struct SamplerConfig {
  int L = 16;                 // torus side
  double step = 1e-3;         // Langevin step size
  long long burn_in = 10000;  // sweeps discarded
  long long samples = 10000;  // recorded samples
  int stride = 10;            // sweeps between samples
  int batches = 20;           // batch means for standard errors
  bool spatial_average = true;  // average observables over all bonds of the torus
  double divergence_bound = 1e6;
};

/// Tilted gradient field eta = grad phi_per + u on the periodic box of side L.
struct TiltedGibbsSampler {
  Potential potential;
  std::vector<double> tilt;  // length d
  SamplerConfig config;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
};

struct GradSigmaEstimate {
  std::vector<double> mean;
  std::vector<double> se;
};

struct DecompositionEstimate {
  GradSigmaEstimate grad;    // E V'(eta(e_i))
  GradSigmaEstimate A_diag;  // E int_0^1 V''(eta(e_i) - lambda u_i) dlambda
  GradSigmaEstimate a;       // E V'(eta(e_i) - u_i)
  /// Standard error of the per-sample closure residual A_ii u_i + a_i - V'(eta(e_i)).
  std::vector<double> closure_se;
};

GradSigmaEstimate estimate_grad_sigma_mcmc(const TiltedGibbsSampler& s);
DecompositionEstimate estimate_A_a(const TiltedGibbsSampler& s);

/// Batch-means standard error of the mean of a series.
double batch_means_se(const std::vector<double>& series, int batches);

}  // namespace cglab
