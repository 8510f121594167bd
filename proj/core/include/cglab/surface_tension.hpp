#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cglab/sigma_table.hpp"

namespace cglab {

enum class SigmaBackend { ExactQuadratic, McmcTable, Mollified };

/// Evaluator for sigma, grad sigma and the decomposition grad sigma(u) = A(u) u + a(u)
/// with diagonal A. Implementations are immutable and thread-safe.
class SurfaceTensionModel {
 public:
  virtual ~SurfaceTensionModel() = default;

  virtual int dim() const = 0;
  virtual SigmaBackend backend() const = 0;
  virtual double sigma(std::span<const double> u) const = 0;
  virtual void grad_sigma(std::span<const double> u, std::span<double> out) const = 0;
  virtual void decomposition(std::span<const double> u, std::span<double> A_diag,
                             std::span<double> a) const = 0;
  virtual double c_minus() const = 0;
  virtual double c_plus() const = 0;
  /// Upper bound on the Lipschitz constant of grad sigma used for time-step limits.
  virtual double stiffness() const { return c_plus(); }
  virtual double delta() const { return 0.0; }

  std::vector<double> grad_sigma(std::span<const double> u) const;
};

using ModelPtr = std::shared_ptr<const SurfaceTensionModel>;

/// sigma(u) = kappa |u|^2 / 2 for the Gaussian model.
class QuadraticModel final : public SurfaceTensionModel {
 public:
  QuadraticModel(int dim, double kappa);

  int dim() const override { return dim_; }
  SigmaBackend backend() const override { return SigmaBackend::ExactQuadratic; }
  double sigma(std::span<const double> u) const override;
  void grad_sigma(std::span<const double> u, std::span<double> out) const override;
  void decomposition(std::span<const double> u, std::span<double> A_diag,
                     std::span<double> a) const override;
  double c_minus() const override { return kappa_; }
  double c_plus() const override { return kappa_; }
  double kappa() const noexcept { return kappa_; }

  using SurfaceTensionModel::grad_sigma;

 private:
  int dim_;
  double kappa_;
};

/// Multilinear interpolation of a Monte Carlo table.
///
/// a(u) is defined as grad sigma(u) - A(u) u from the interpolants so the
/// decomposition closes exactly; sigma(u) is the line integral of the
/// interpolated gradient from the origin. Evaluation outside the grid throws.
class TabulatedModel final : public SurfaceTensionModel {
 public:
  explicit TabulatedModel(SigmaTable table);

  int dim() const override { return table_.dim(); }
  SigmaBackend backend() const override { return SigmaBackend::McmcTable; }
  double sigma(std::span<const double> u) const override;
  void grad_sigma(std::span<const double> u, std::span<double> out) const override;
  void decomposition(std::span<const double> u, std::span<double> A_diag,
                     std::span<double> a) const override;
  double c_minus() const override { return table_.potential.c_minus(); }
  double c_plus() const override { return table_.potential.c_plus(); }
  double stiffness() const override { return std::max(c_plus(), max_slope_); }

  /// Interpolated standard errors of grad sigma.
  void grad_sigma_se(std::span<const double> u, std::span<double> out) const;
  const SigmaTable& table() const noexcept { return table_; }
  /// Largest difference quotient of the table along each axis.
  double max_slope() const noexcept { return max_slope_; }
  bool in_range(std::span<const double> u) const;

  using SurfaceTensionModel::grad_sigma;

 private:
  void interpolate(const std::vector<double>& data, std::span<const double> u,
                   std::span<double> out) const;

  SigmaTable table_;
  double max_slope_ = 0.0;
};

/// Convolution with the rescaled bump rho_delta, evaluated by a tensor
/// 9-point Gauss-Legendre rule on [-delta, delta]^d with normalized weights.
class MollifiedModel final : public SurfaceTensionModel {
 public:
  static constexpr int kNodesPerAxis = 9;

  MollifiedModel(ModelPtr base, double delta);

  int dim() const override { return base_->dim(); }
  SigmaBackend backend() const override { return SigmaBackend::Mollified; }
  double sigma(std::span<const double> u) const override;
  void grad_sigma(std::span<const double> u, std::span<double> out) const override;
  void decomposition(std::span<const double> u, std::span<double> A_diag,
                     std::span<double> a) const override;
  double c_minus() const override { return base_->c_minus(); }
  double c_plus() const override { return base_->c_plus(); }
  double stiffness() const override { return base_->stiffness(); }
  double delta() const override { return delta_; }
  const ModelPtr& base() const noexcept { return base_; }

  using SurfaceTensionModel::grad_sigma;

 private:
  ModelPtr base_;
  double delta_;
  std::vector<double> offsets_;  // node offsets, d per node
  std::vector<double> weights_;
};

ModelPtr make_quadratic_model(int dim, double kappa = 1.0);
ModelPtr make_tabulated_model(SigmaTable table);
/// Throws ModelError unless delta lies in (0, 1].
ModelPtr mollify(ModelPtr base, double delta);

/// kappa u; throws ModelError for any other backend.
std::vector<double> grad_sigma_exact_quadratic(const SurfaceTensionModel& model,
                                               std::span<const double> u);

}  // namespace cglab
