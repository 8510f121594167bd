#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>

#include "cglab/domain.hpp"
#include "cglab/field.hpp"

namespace cglab::oracle {

/// Dense Delta_{D_N}, assembled from site coordinates alone.
Eigen::MatrixXd dirichlet_laplacian(const LatticeDomain& ld);
/// Dense 2d I - (D_N adjacency): the unscaled full-stencil Dirichlet operator.
Eigen::MatrixXd full_stencil(const LatticeDomain& ld);

/// Moore-Penrose inverse of a symmetric matrix via eigendecomposition.
Eigen::MatrixXd pinv_symmetric(const Eigen::MatrixXd& m, double cutoff = 1e-10);
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

Eigen::VectorXd to_vec(const HeightField& f);
HeightField from_vec(std::shared_ptr<const LatticeDomain> ld, const Eigen::VectorXd& v);

/// N^{-d-4} (psi - m)^T G (psi - m) + N^{-2d-2} (sum psi)^2 with G the pseudo-inverse.
double hm1_sq(const LatticeDomain& ld, const Eigen::VectorXd& psi);

/// Uniform(-1, 1) values on the chosen support.
HeightField random_field(std::shared_ptr<const LatticeDomain> ld, std::mt19937_64& rng,
                         Support s = Support::DN);

std::shared_ptr<const LatticeDomain> unit_box(int d, int N);

}  // namespace cglab::oracle
