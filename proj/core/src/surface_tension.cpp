#include "cglab/surface_tension.hpp"

#include <algorithm>
#include <cmath>

#include "cglab/domain.hpp"
#include "cglab/errors.hpp"
#include "cglab/quadrature.hpp"

namespace cglab {

std::vector<double> SurfaceTensionModel::grad_sigma(std::span<const double> u) const {
  std::vector<double> out(static_cast<std::size_t>(dim()));
  grad_sigma(u, out);
  return out;
}

// ---------------------------------------------------------------------------

QuadraticModel::QuadraticModel(int dim, double kappa) : dim_(dim), kappa_(kappa) {
  if (dim < 1 || dim > 3) throw ModelError("model dimension must be between 1 and 3");
  if (!(kappa > 0.0)) throw ModelError("quadratic model needs kappa > 0");
}

double QuadraticModel::sigma(std::span<const double> u) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
  return 0.5 * kappa_ * s;
}

void QuadraticModel::grad_sigma(std::span<const double> u, std::span<double> out) const {
  for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] = kappa_ * u[static_cast<std::size_t>(i)];
}

void QuadraticModel::decomposition(std::span<const double>, std::span<double> A_diag,
                                   std::span<double> a) const {
  for (int i = 0; i < dim_; ++i) {
    A_diag[static_cast<std::size_t>(i)] = kappa_;
    a[static_cast<std::size_t>(i)] = 0.0;
  }
}

// ---------------------------------------------------------------------------

TabulatedModel::TabulatedModel(SigmaTable table) : table_(std::move(table)) {
  const int d = table_.dim();
  if (d < 1 || d > 3) throw ModelError("table dimension must be between 1 and 3");
  const auto expected = static_cast<std::size_t>(table_.node_count()) * d;
  for (const auto* v : {&table_.grad, &table_.grad_se, &table_.A_diag, &table_.a}) {
    if (v->size() != expected) throw ModelError("table data size does not match its grid");
  }
  for (int i = 0; i < d; ++i) {
    const TiltAxis& ax = table_.axes[static_cast<std::size_t>(i)];
    if (!(ax.lo <= 0.0 && 0.0 <= ax.hi)) throw ModelError("table grid must contain the zero tilt");
  }
  // largest difference quotient along grid lines
  int stride = 1;
  for (int i = 0; i < d; ++i) {
    const TiltAxis& ax = table_.axes[static_cast<std::size_t>(i)];
    const double h = (ax.hi - ax.lo) / (ax.nodes - 1);
    for (int node = 0; node < table_.node_count(); ++node) {
      if ((node / stride) % ax.nodes == ax.nodes - 1) continue;
      for (int j = 0; j < d; ++j) {
        const double g0 = table_.grad[static_cast<std::size_t>(node) * d + j];
        const double g1 = table_.grad[static_cast<std::size_t>(node + stride) * d + j];
        max_slope_ = std::max(max_slope_, std::abs(g1 - g0) / h);
      }
    }
    stride *= ax.nodes;
  }
}

bool TabulatedModel::in_range(std::span<const double> u) const {
  for (int i = 0; i < dim(); ++i) {
    const TiltAxis& ax = table_.axes[static_cast<std::size_t>(i)];
    const double tol = 1e-12 * (ax.hi - ax.lo);
    const double ui = u[static_cast<std::size_t>(i)];
    if (!(ui >= ax.lo - tol && ui <= ax.hi + tol)) return false;
  }
  return true;
}

void TabulatedModel::interpolate(const std::vector<double>& data, std::span<const double> u,
                                 std::span<double> out) const {
  const int d = dim();
  if (!in_range(u)) throw ModelError("tilt outside the tabulated range");
  int base = 0;
  int stride = 1;
  double frac[kMaxDim] = {0, 0, 0};
  int strides[kMaxDim] = {0, 0, 0};
  for (int i = 0; i < d; ++i) {
    const TiltAxis& ax = table_.axes[static_cast<std::size_t>(i)];
    const double h = (ax.hi - ax.lo) / (ax.nodes - 1);
    const double t = (u[static_cast<std::size_t>(i)] - ax.lo) / h;
    const int k = std::clamp(static_cast<int>(std::floor(t)), 0, ax.nodes - 2);
    frac[i] = std::clamp(t - k, 0.0, 1.0);
    base += k * stride;
    strides[i] = stride;
    stride *= ax.nodes;
  }
  for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    int node = base;
    for (int i = 0; i < d; ++i) {
      if (corner >> i & 1) {
        w *= frac[i];
        node += strides[i];
      } else {
        w *= 1.0 - frac[i];
      }
    }
    if (w == 0.0) continue;
    for (int j = 0; j < d; ++j) {
      out[static_cast<std::size_t>(j)] += w * data[static_cast<std::size_t>(node) * d + j];
    }
  }
}

void TabulatedModel::grad_sigma(std::span<const double> u, std::span<double> out) const {
  interpolate(table_.grad, u, out);
}

void TabulatedModel::grad_sigma_se(std::span<const double> u, std::span<double> out) const {
  interpolate(table_.grad_se, u, out);
}

void TabulatedModel::decomposition(std::span<const double> u, std::span<double> A_diag,
                                   std::span<double> a) const {
  double g[kMaxDim];
  interpolate(table_.grad, u, {g, static_cast<std::size_t>(dim())});
  interpolate(table_.A_diag, u, A_diag);
  for (int i = 0; i < dim(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    a[ui] = g[i] - A_diag[ui] * u[ui];
  }
}

double TabulatedModel::sigma(std::span<const double> u) const {
  const int d = dim();
  if (!in_range(u)) throw ModelError("tilt outside the tabulated range");
  // breakpoints of the piecewise polynomial integrand along s -> s u
  std::vector<double> cuts{0.0, 1.0};
  for (int i = 0; i < d; ++i) {
    const TiltAxis& ax = table_.axes[static_cast<std::size_t>(i)];
    const double ui = u[static_cast<std::size_t>(i)];
    if (ui == 0.0) continue;
    for (int k = 0; k < ax.nodes; ++k) {
      const double s = ax.node(k) / ui;
      if (s > 0.0 && s < 1.0) cuts.push_back(s);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  const QuadratureRule ref = gauss_legendre(3, 0.0, 1.0);
  double total = 0.0;
  double p[kMaxDim];
  double g[kMaxDim];
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    if (b - a <= 0.0) continue;
    for (std::size_t q = 0; q < ref.nodes.size(); ++q) {
      const double s = a + (b - a) * ref.nodes[q];
      for (int i = 0; i < d; ++i) p[i] = s * u[static_cast<std::size_t>(i)];
      interpolate(table_.grad, {p, static_cast<std::size_t>(d)}, {g, static_cast<std::size_t>(d)});
      double dot = 0.0;
      for (int i = 0; i < d; ++i) dot += g[i] * u[static_cast<std::size_t>(i)];
      total += (b - a) * ref.weights[q] * dot;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------

MollifiedModel::MollifiedModel(ModelPtr base, double delta) : base_(std::move(base)), delta_(delta) {
  if (!base_) throw ModelError("mollifier needs a base model");
  if (!(delta > 0.0 && delta <= 1.0)) throw ModelError("mollification width must lie in (0, 1]");
  const int d = base_->dim();
  const QuadratureRule rule = gauss_legendre(kNodesPerAxis, -delta, delta);
  int idx[kMaxDim] = {0, 0, 0};
  double total = 0.0;
  while (true) {
    double r2 = 0.0;
    double w = 1.0;
    double v[kMaxDim] = {0, 0, 0};
    for (int i = 0; i < d; ++i) {
      v[i] = rule.nodes[static_cast<std::size_t>(idx[i])];
      w *= rule.weights[static_cast<std::size_t>(idx[i])];
      r2 += (v[i] / delta) * (v[i] / delta);
    }
    if (r2 < 1.0) {
      const double rho = std::exp(-1.0 / (1.0 - r2));
      for (int i = 0; i < d; ++i) offsets_.push_back(v[i]);
      weights_.push_back(w * rho);
      total += w * rho;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++idx[i] < kNodesPerAxis) break;
      idx[i] = 0;
    }
    if (i == d) break;
  }
  for (double& w : weights_) w /= total;
}

double MollifiedModel::sigma(std::span<const double> u) const {
  const int d = dim();
  double p[kMaxDim];
  double s = 0.0;
  for (std::size_t q = 0; q < weights_.size(); ++q) {
    for (int i = 0; i < d; ++i) p[i] = u[static_cast<std::size_t>(i)] - offsets_[q * d + i];
    s += weights_[q] * base_->sigma({p, static_cast<std::size_t>(d)});
  }
  return s;
}

void MollifiedModel::grad_sigma(std::span<const double> u, std::span<double> out) const {
  const int d = dim();
  double p[kMaxDim];
  double g[kMaxDim];
  for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = 0.0;
  for (std::size_t q = 0; q < weights_.size(); ++q) {
    for (int i = 0; i < d; ++i) p[i] = u[static_cast<std::size_t>(i)] - offsets_[q * d + i];
    base_->grad_sigma({p, static_cast<std::size_t>(d)}, {g, static_cast<std::size_t>(d)});
    for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] += weights_[q] * g[i];
  }
}

void MollifiedModel::decomposition(std::span<const double> u, std::span<double> A_diag,
                                   std::span<double> a) const {
  // A^delta = A * rho,  a^delta = a * rho - int A(u - v) v rho(v) dv
  const int d = dim();
  double p[kMaxDim];
  double Aq[kMaxDim];
  double aq[kMaxDim];
  for (int i = 0; i < d; ++i) {
    A_diag[static_cast<std::size_t>(i)] = 0.0;
    a[static_cast<std::size_t>(i)] = 0.0;
  }
  for (std::size_t q = 0; q < weights_.size(); ++q) {
    for (int i = 0; i < d; ++i) p[i] = u[static_cast<std::size_t>(i)] - offsets_[q * d + i];
    base_->decomposition({p, static_cast<std::size_t>(d)}, {Aq, static_cast<std::size_t>(d)},
                         {aq, static_cast<std::size_t>(d)});
    for (int i = 0; i < d; ++i) {
      A_diag[static_cast<std::size_t>(i)] += weights_[q] * Aq[i];
      a[static_cast<std::size_t>(i)] += weights_[q] * (aq[i] - Aq[i] * offsets_[q * d + i]);
    }
  }
}

// ---------------------------------------------------------------------------

ModelPtr make_quadratic_model(int dim, double kappa) {
  return std::make_shared<QuadraticModel>(dim, kappa);
}

ModelPtr make_tabulated_model(SigmaTable table) {
  return std::make_shared<TabulatedModel>(std::move(table));
}

ModelPtr mollify(ModelPtr base, double delta) {
  return std::make_shared<MollifiedModel>(std::move(base), delta);
}

std::vector<double> grad_sigma_exact_quadratic(const SurfaceTensionModel& model,
                                               std::span<const double> u) {
  const auto* q = dynamic_cast<const QuadraticModel*>(&model);
  if (!q) throw ModelError("grad_sigma_exact_quadratic needs the exact quadratic backend");
  if (static_cast<int>(u.size()) != q->dim()) throw ModelError("tilt dimension mismatch");
  return q->grad_sigma(u);
}

}  // namespace cglab
