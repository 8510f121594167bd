#pragma once

#include "cglab/field.hpp"

namespace cglab {

/// Forward difference N (f(x + e_axis) - f(x)) on closure sites.
HeightField grad_forward(const HeightField& f, int axis);
/// All components of the forward difference on closure sites.
GradientField grad_forward(const HeightField& f);

/// sum_i N (g_i(x) - g_i(x - e_i)) on D_N.
HeightField div_n(const GradientField& g);

/// Graph Laplacian of D_N: only neighbours inside D_N contribute. Output on D_N.
HeightField laplacian_dirichlet(const HeightField& f);

/// Cell-region Laplacian with zero-flux indicators, N^2 scaled. Output on D_N.
HeightField laplacian_neumann(const HeightField& f);

struct PoissonOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-11;
  int max_iter_factor = 10;
};

struct PoissonStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Solves (-Delta_{D_N}) u = rhs on the mean-zero subspace by conjugate gradients.
MeanZeroField poisson_solve(const MeanZeroField& rhs, const PoissonOptions& opt = {},
                            PoissonStats* stats = nullptr);

/// Squared discrete H^-1 norm of the step function with microscopic profile psi:
/// N^{-d-4} <psi - m, G (psi - m)> + N^{-2d-2} (sum psi)^2, m the per-site mean.
double h_minus_one_norm_sq(const HeightField& psi);
double h_minus_one_norm(const HeightField& psi);

/// Same norm for a macroscopic step function h-bar (psi = N h-bar).
double h_minus_one_norm_macro_sq(const HeightField& hbar);
double h_minus_one_norm_macro(const HeightField& hbar);

/// Dual H^1(D) norm of the step function h-bar over the span of tensor Legendre
/// polynomials of degree <= 3 per axis on the bounding box of D.
double h1star_norm_estimate(const HeightField& hbar);

}  // namespace cglab
