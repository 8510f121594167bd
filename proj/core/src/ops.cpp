#include "cglab/ops.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "cglab/errors.hpp"
#include "cglab/quadrature.hpp"

namespace cglab {

HeightField grad_forward(const HeightField& f, int axis) {
  const LatticeDomain& ld = f.domain();
  if (axis < 0 || axis >= ld.dim()) throw PreconditionError("gradient axis out of range");
  HeightField out(f.domain_ptr(), Support::Closure);
  const double N = ld.N();
  for (int id = 0; id < ld.closure_size(); ++id) {
    out[id] = N * (f.at(ld.neighbor(id, 2 * axis)) - f.at(id));
  }
  return out;
}

GradientField grad_forward(const HeightField& f) {
  const LatticeDomain& ld = f.domain();
  GradientField g(f.domain_ptr());
  const double N = ld.N();
  const int d = ld.dim();
  for (int id = 0; id < ld.closure_size(); ++id) {
    const double fx = f.at(id);
    for (int i = 0; i < d; ++i) g(id, i) = N * (f.at(ld.neighbor(id, 2 * i)) - fx);
  }
  return g;
}

HeightField div_n(const GradientField& g) {
  const LatticeDomain& ld = g.domain();
  HeightField out(g.domain_ptr(), Support::DN);
  const double N = ld.N();
  const int d = ld.dim();
  for (int id = 0; id < ld.dn_size(); ++id) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += g(id, i) - g.at(ld.neighbor(id, 2 * i + 1), i);
    out[id] = N * s;
  }
  return out;
}

HeightField laplacian_dirichlet(const HeightField& f) {
  const LatticeDomain& ld = f.domain();
  HeightField out(f.domain_ptr(), Support::DN);
  const int dirs = ld.directions();
  for (int id = 0; id < ld.dn_size(); ++id) {
    const double fx = f.at(id);
    double s = 0.0;
    for (int dir = 0; dir < dirs; ++dir) {
      const int nb = ld.neighbor(id, dir);
      if (ld.in_dn(nb)) s += f.at(nb) - fx;
    }
    out[id] = s;
  }
  return out;
}

HeightField laplacian_neumann(const HeightField& f) {
  const LatticeDomain& ld = f.domain();
  HeightField out(f.domain_ptr(), Support::DN);
  const double N = ld.N();
  const int d = ld.dim();
  for (int id = 0; id < ld.dn_size(); ++id) {
    const double fx = f.at(id);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const int fwd = ld.neighbor(id, 2 * i);
      const int bwd = ld.neighbor(id, 2 * i + 1);
      if (ld.in_dn(fwd)) s += N * (f.at(fwd) - fx);
      if (ld.in_dn(bwd)) s -= N * (fx - f.at(bwd));
    }
    out[id] = N * s;
  }
  return out;
}

namespace {

void project_mean_zero(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y = (-Delta_{D_N}) x on D_N
void apply_neg_laplacian(const LatticeDomain& ld, const std::vector<double>& x,
                         std::vector<double>& y) {
  const int dirs = ld.directions();
  for (int id = 0; id < ld.dn_size(); ++id) {
    const double xi = x[static_cast<std::size_t>(id)];
    double s = 0.0;
    for (int dir = 0; dir < dirs; ++dir) {
      const int nb = ld.neighbor(id, dir);
      if (ld.in_dn(nb)) s += xi - x[static_cast<std::size_t>(nb)];
    }
    y[static_cast<std::size_t>(id)] = s;
  }
}

}  // namespace

MeanZeroField poisson_solve(const MeanZeroField& rhs, const PoissonOptions& opt,
                            PoissonStats* stats) {
  const LatticeDomain& ld = rhs.field().domain();
  const std::size_t n = static_cast<std::size_t>(ld.dn_size());
  std::vector<double> b(rhs.field().values().begin(), rhs.field().values().end());
  project_mean_zero(b);
  const double bnorm = std::sqrt(dot(b, b));
  const double tol = std::min(opt.abs_tol, opt.rel_tol * bnorm);

  std::vector<double> x(n, 0.0);
  std::vector<double> r = b;
  std::vector<double> p = r;
  std::vector<double> ap(n, 0.0);
  double rr = dot(r, r);
  const int max_iter = std::max(1, opt.max_iter_factor * static_cast<int>(n));
  int it = 0;
  while (std::sqrt(rr) > tol && bnorm > 0.0) {
    if (it >= max_iter) {
      throw ConvergenceError("poisson_solve did not converge", it, std::sqrt(rr));
    }
    apply_neg_laplacian(ld, p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      throw ConvergenceError("poisson_solve met a non-positive curvature direction", it,
                             std::sqrt(rr));
    }
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    project_mean_zero(r);
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    project_mean_zero(p);
    rr = rr_new;
    ++it;
  }
  project_mean_zero(x);
  // report the true residual
  apply_neg_laplacian(ld, x, ap);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) res += (ap[i] - b[i]) * (ap[i] - b[i]);
  if (stats) {
    stats->iterations = it;
    stats->residual = std::sqrt(res);
  }
  return MeanZeroField::project(HeightField(rhs.field().domain_ptr(), Support::DN, std::move(x)));
}

double h_minus_one_norm_sq(const HeightField& psi) {
  const LatticeDomain& ld = psi.domain();
  const double N = ld.N();
  const int d = ld.dim();
  const double total = psi.sum_dn();
  HeightField centered = psi.with_support(Support::DN);
  const double m = total / ld.dn_size();
  for (double& v : centered.values()) v -= m;
  double quad = 0.0;
  if (centered.max_abs() > 0.0) {
    const MeanZeroField rhs = MeanZeroField::project(centered);
    const MeanZeroField u = poisson_solve(rhs);
    quad = dot_dn(rhs.field(), u.field());
  }
  return std::pow(N, -d - 4) * quad + std::pow(N, -2 * d - 2) * total * total;
}

double h_minus_one_norm(const HeightField& psi) { return std::sqrt(std::max(0.0, h_minus_one_norm_sq(psi))); }

double h_minus_one_norm_macro_sq(const HeightField& hbar) {
  HeightField psi = hbar.with_support(Support::DN);
  psi *= hbar.domain().N();
  return h_minus_one_norm_sq(psi);
}

double h_minus_one_norm_macro(const HeightField& hbar) {
  return std::sqrt(std::max(0.0, h_minus_one_norm_macro_sq(hbar)));
}

namespace {

constexpr int kLegendreDegree = 3;

void legendre(double xi, double* p, double* dp) {
  p[0] = 1.0;
  p[1] = xi;
  p[2] = 0.5 * (3.0 * xi * xi - 1.0);
  p[3] = 0.5 * (5.0 * xi * xi * xi - 3.0 * xi);
  dp[0] = 0.0;
  dp[1] = 1.0;
  dp[2] = 3.0 * xi;
  dp[3] = 0.5 * (15.0 * xi * xi - 3.0);
}

struct Basis {
  int d = 1;
  int count = 1;
  Point lo{};
  Point hi{};

  // values and gradients of every basis function at p
  void eval(const Point& p, Eigen::VectorXd& v, Eigen::MatrixXd& g) const {
    constexpr int k = kLegendreDegree + 1;
    double pv[kMaxDim][k];
    double pd[kMaxDim][k];
    for (int i = 0; i < d; ++i) {
      const double scale = 2.0 / (hi[i] - lo[i]);
      legendre(scale * (p[i] - lo[i]) - 1.0, pv[i], pd[i]);
      for (int a = 0; a < k; ++a) pd[i][a] *= scale;
    }
    for (int b = 0; b < count; ++b) {
      int rest = b;
      int idx[kMaxDim] = {0, 0, 0};
      for (int i = 0; i < d; ++i) {
        idx[i] = rest % k;
        rest /= k;
      }
      double val = 1.0;
      for (int i = 0; i < d; ++i) val *= pv[i][idx[i]];
      v[b] = val;
      for (int j = 0; j < d; ++j) {
        double gj = 1.0;
        for (int i = 0; i < d; ++i) gj *= i == j ? pd[i][idx[i]] : pv[i][idx[i]];
        g(b, j) = gj;
      }
    }
  }
};

template <class F>
void for_each_tensor_point(int d, const Point& lo, const Point& hi, int n, F&& f) {
  QuadratureRule rules[kMaxDim];
  for (int i = 0; i < d; ++i) rules[i] = gauss_legendre(n, lo[i], hi[i]);
  int idx[kMaxDim] = {0, 0, 0};
  while (true) {
    Point p{};
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      p[i] = rules[i].nodes[static_cast<std::size_t>(idx[i])];
      w *= rules[i].weights[static_cast<std::size_t>(idx[i])];
    }
    f(p, w);
    int i = 0;
    for (; i < d; ++i) {
      if (++idx[i] < n) break;
      idx[i] = 0;
    }
    if (i == d) return;
  }
}

}  // namespace

double h1star_norm_estimate(const HeightField& hbar) {
  const LatticeDomain& ld = hbar.domain();
  const MacroDomain& macro = ld.macro();
  const int d = ld.dim();
  if (hbar.max_abs() == 0.0) return 0.0;

  Basis basis;
  basis.d = d;
  basis.count = 1;
  for (int i = 0; i < d; ++i) basis.count *= kLegendreDegree + 1;
  std::tie(basis.lo, basis.hi) = macro.bounding_box();

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.count, basis.count);
  Eigen::VectorXd v(basis.count);
  Eigen::MatrixXd g(basis.count, d);
  auto accumulate = [&](const Point& p, double w) {
    basis.eval(p, v, g);
    gram.noalias() += w * (v * v.transpose() + g * g.transpose());
  };
  if (std::holds_alternative<BoxShape>(macro.shape())) {
    for_each_tensor_point(d, basis.lo, basis.hi, kLegendreDegree + 2, accumulate);
  } else {
    // masked composite rule on a sub-grid of the bounding box
    const int sub = d == 1 ? 256 : (d == 2 ? 48 : 16);
    std::array<int, kMaxDim> c{};
    while (true) {
      Point a{};
      Point b{};
      for (int i = 0; i < d; ++i) {
        const double h = (basis.hi[i] - basis.lo[i]) / sub;
        a[i] = basis.lo[i] + c[i] * h;
        b[i] = a[i] + h;
      }
      for_each_tensor_point(d, a, b, 4, [&](const Point& p, double w) {
        if (macro.contains(p)) accumulate(p, w);
      });
      int i = 0;
      for (; i < d; ++i) {
        if (++c[i] < sub) break;
        c[i] = 0;
      }
      if (i == d) break;
    }
  }

  Eigen::VectorXd pairing = Eigen::VectorXd::Zero(basis.count);
  const double half = 0.5 / ld.N();
  for (int id = 0; id < ld.dn_size(); ++id) {
    const double value = hbar.at(id);
    if (value == 0.0) continue;
    const Point center = ld.position(ld.site(id));
    Point a{};
    Point b{};
    for (int i = 0; i < d; ++i) {
      a[i] = center[i] - half;
      b[i] = center[i] + half;
    }
    for_each_tensor_point(d, a, b, kLegendreDegree + 1, [&](const Point& p, double w) {
      basis.eval(p, v, g);
      pairing += (w * value) * v;
    });
  }
  const Eigen::VectorXd coef = gram.ldlt().solve(pairing);
  return std::sqrt(std::max(0.0, pairing.dot(coef)));
}

}  // namespace cglab
