#include "cglab/pde.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "cglab/errors.hpp"
#include "cglab/ops.hpp"
#include "cglab/quadrature.hpp"

namespace cglab {

double PdeConfig::stability_bound(const LatticeDomain& ld, const SurfaceTensionModel& model) {
  const double d = ld.dim();
  const double N = ld.N();
  return 0.9 / (model.stiffness() * 16.0 * d * d * N * N * N * N);
}

double PdeConfig::effective_dt() const {
  double base = dt > 0.0 ? dt : 0.5 * stability_bound(*ld, *model);
  // land records exactly on multiples of the cadence
  if (cadence > 0.0) base = cadence / std::ceil(cadence / base * (1.0 - 1e-12));
  if (T <= 0.0) return base;
  const double n = std::ceil(T / base * (1.0 - 1e-12));
  return T / std::max(1.0, n);
}

void PdeConfig::validate() const {
  if (!ld) throw PreconditionError("pde config has no lattice domain");
  if (!model) throw PreconditionError("pde config has no surface tension model");
  if (model->dim() != ld->dim()) throw PreconditionError("model and lattice dimensions differ");
  if (dt < 0.0 || T < 0.0 || cadence < 0.0) {
    throw PreconditionError("dt, T and cadence must be non-negative");
  }
  if (integrator == Integrator::Explicit) {
    const double bound = stability_bound(*ld, *model);
    if (dt > bound) {
      std::ostringstream os;
      os << "dt=" << dt << " exceeds the explicit stability bound 0.9/(c_+ (4d)^2 N^4)=" << bound;
      throw PreconditionError(os.str());
    }
  }
  if (steady_records < 1) throw PreconditionError("steady_records must be positive");
}

HeightField project_initial(const std::function<double(const Point&)>& h0,
                            std::shared_ptr<const LatticeDomain> ld) {
  HeightField out(ld, Support::DN);
  const int d = ld->dim();
  const double half = 0.5 / ld->N();
  const QuadratureRule ref = gauss_legendre(4, -half, half);
  const double volume = std::pow(2.0 * half, d);
  for (int id = 0; id < ld->dn_size(); ++id) {
    const Point c = ld->position(ld->site(id));
    int idx[kMaxDim] = {0, 0, 0};
    double s = 0.0;
    while (true) {
      Point p = c;
      double w = 1.0;
      for (int i = 0; i < d; ++i) {
        p[i] += ref.nodes[static_cast<std::size_t>(idx[i])];
        w *= ref.weights[static_cast<std::size_t>(idx[i])];
      }
      s += w * h0(p);
      int i = 0;
      for (; i < d; ++i) {
        if (++idx[i] < 4) break;
        idx[i] = 0;
      }
      if (i == d) break;
    }
    out[id] = s / volume;
  }
  return out;
}

PdeState make_pde_state(HeightField hbar) {
  PdeState s;
  s.hbar = hbar.with_support(Support::DN);
  return s;
}

double energy_sum(const HeightField& hbar, const SurfaceTensionModel& model) {
  const GradientField g = grad_forward(hbar);
  double s = 0.0;
  for (int id = 0; id < g.sites(); ++id) s += model.sigma(g.component_block(id));
  return s;
}

HeightField chemical_potential(const HeightField& hbar, const SurfaceTensionModel& model) {
  GradientField g = grad_forward(hbar);
  GradientField flux(hbar.domain_ptr());
  const int d = g.dim();
  for (int id = 0; id < g.sites(); ++id) {
    model.grad_sigma(g.component_block(id),
                     {flux.data().data() + static_cast<std::size_t>(id) * d, static_cast<std::size_t>(d)});
  }
  return div_n(flux);
}

HeightField extend_k(const HeightField& k) {
  const LatticeDomain& ld = k.domain();
  HeightField out(k.domain_ptr(), Support::DoubleClosure);
  for (int id = 0; id < ld.dn_size(); ++id) out[id] = k.at(id);
  for (int layer = 1; layer <= ld.layer_depth(); ++layer) {
    const auto [b, e] = ld.layer_range(layer);
    for (int id = b; id < e; ++id) {
      double s = 0.0;
      int n = 0;
      for (int dir = 0; dir < ld.directions(); ++dir) {
        const int nb = ld.neighbor(id, dir);
        if (nb >= 0 && ld.layer_of(nb) == layer - 1) {
          s += out[nb];
          ++n;
        }
      }
      out[id] = n > 0 ? s / n : 0.0;
    }
  }
  return out;
}

HeightField pde_rhs(const HeightField& hbar, const SurfaceTensionModel& model) {
  HeightField r = laplacian_neumann(chemical_potential(hbar, model));
  r *= -1.0;
  return r;
}

double dhdt_norm_sq(const HeightField& k) {
  const LatticeDomain& ld = k.domain();
  const HeightField lk = laplacian_neumann(k);
  double s = 0.0;
  for (int id = 0; id < ld.dn_size(); ++id) s -= k.at(id) * lk[id];
  return std::pow(static_cast<double>(ld.N()), -ld.dim()) * s;
}

namespace {

// Dense (I + dt c S K) with S = -Delta_N and K = -div_N grad^N on D_N, LU-factored.
class SemiImplicitSolver {
 public:
  SemiImplicitSolver(const LatticeDomain& ld, double dt, double c) {
    const int n = ld.dn_size();
    const double N2 = static_cast<double>(ld.N()) * ld.N();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) {
      K(x, x) = N2 * ld.directions();
      for (int dir = 0; dir < ld.directions(); ++dir) {
        const int y = ld.neighbor(x, dir);
        if (!ld.in_dn(y)) continue;
        S(x, x) += N2;
        S(x, y) -= N2;
        K(x, y) -= N2;
      }
    }
    S_ = S;
    lu_.compute(Eigen::MatrixXd::Identity(n, n) + dt * c * S * K);
  }

  // increment for one step given k
  Eigen::VectorXd increment(const HeightField& k, double dt) const {
    Eigen::VectorXd kv(k.domain().dn_size());
    for (int i = 0; i < kv.size(); ++i) kv[i] = k.at(i);
    return lu_.solve(dt * (S_ * kv));
  }

 private:
  Eigen::MatrixXd S_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

std::shared_ptr<const SemiImplicitSolver> semi_implicit_solver(
    const std::shared_ptr<const LatticeDomain>& ld, double dt, double c) {
  using Key = std::tuple<const LatticeDomain*, double, double>;
  struct Entry {
    std::weak_ptr<const LatticeDomain> owner;
    std::shared_ptr<const SemiImplicitSolver> solver;
  };
  static std::mutex mu;
  static std::map<Key, Entry> cache;
  std::lock_guard lock(mu);
  for (auto it = cache.begin(); it != cache.end();) {
    it = it->second.owner.expired() ? cache.erase(it) : std::next(it);
  }
  const Key key{ld.get(), dt, c};
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, Entry{ld, std::make_shared<SemiImplicitSolver>(*ld, dt, c)}).first;
  }
  return it->second.solver;
}

void advance(PdeState& state, const PdeConfig& cfg, double dt) {
  if (cfg.integrator == Integrator::Explicit) {
    const HeightField rhs = pde_rhs(state.hbar, *cfg.model);
    for (int i = 0; i < rhs.size(); ++i) state.hbar[i] += dt * rhs[i];
  } else {
    const auto solver = semi_implicit_solver(cfg.ld, dt, cfg.model->stiffness());
    const HeightField k = chemical_potential(state.hbar, *cfg.model);
    const Eigen::VectorXd delta = solver->increment(k, dt);
    for (int i = 0; i < state.hbar.size(); ++i) state.hbar[i] += delta[i];
  }
  state.t += dt;
  ++state.steps;
  if (!state.hbar.all_finite()) throw InstabilityError("pde step produced a non-finite value", state.steps);
}

}  // namespace

double oscillation_integrand(const HeightField& hbar, int axis) {
  const LatticeDomain& ld = hbar.domain();
  const double N = ld.N();
  const int d = ld.dim();
  auto grad = [&](int id, int i) {
    if (id < 0) return 0.0;
    return N * (hbar.at(ld.neighbor(id, 2 * i)) - hbar.at(id));
  };
  double s = 0.0;
  for (int id = 0; id < ld.closure_size(); ++id) {
    const int shifted = ld.neighbor(id, 2 * axis);
    for (int i = 0; i < d; ++i) {
      const double diff = grad(shifted, i) - grad(id, i);
      s += diff * diff;
    }
  }
  return std::pow(N, -d) * s;
}

void step(PdeState& state, const PdeConfig& cfg) {
  cfg.validate();
  advance(state, cfg, cfg.dt > 0.0 ? cfg.dt : 0.5 * PdeConfig::stability_bound(*cfg.ld, *cfg.model));
}

PdeResult run(const PdeConfig& cfg, PdeState state) {
  cfg.validate();
  if (state.hbar.domain_ptr() != cfg.ld) throw PreconditionError("initial state lives on another lattice");
  state.hbar = state.hbar.with_support(Support::DN);
  const LatticeDomain& ld = *cfg.ld;
  const int d = ld.dim();
  const double Nd = std::pow(static_cast<double>(ld.N()), -d);

  PdeResult res;
  res.dt = cfg.effective_dt();
  const long long nsteps = cfg.T > 0.0 ? std::llround(cfg.T / res.dt) : 0;
  const long long every =
      cfg.cadence > 0.0 ? std::max(1LL, static_cast<long long>(std::llround(cfg.cadence / res.dt))) : 0;

  std::vector<std::string> cols{"mass",     "energy",    "hm1_norm",  "mean_k",
                                "k_l2",     "grad_k_l2", "dhdt_norm", "dhdt_fd"};
  for (int i = 0; i < d; ++i) cols.push_back("osc_" + std::to_string(i));
  res.trajectory = TrajectoryRecord(cols);

  HeightField prev;
  double prev_t = 0.0;
  int quiet = 0;
  auto record = [&] {
    const HeightField k = chemical_potential(state.hbar, *cfg.model);
    const HeightField kx = extend_k(k);
    double k2 = 0.0;
    for (int id = 0; id < ld.dn_size(); ++id) k2 += k[id] * k[id];
    const GradientField gk = grad_forward(kx);
    const double dh = std::sqrt(std::max(0.0, dhdt_norm_sq(k)));
    double fd = 0.0;
    if (prev.size() > 0 && state.t > prev_t) {
      fd = h_minus_one_norm_macro(state.hbar - prev) / (state.t - prev_t);
    }
    std::vector<double> row{state.hbar.sum_dn(),
                            Nd * energy_sum(state.hbar, *cfg.model),
                            h_minus_one_norm_macro(state.hbar),
                            Nd * k.sum_dn(),
                            std::sqrt(Nd * k2),
                            std::sqrt(Nd * gk.squared_norm()),
                            dh,
                            fd};
    for (int i = 0; i < d; ++i) row.push_back(oscillation_integrand(state.hbar, i));
    res.trajectory.add(state.t, "mean", std::move(row));
    res.times.push_back(state.t);
    if (cfg.keep_snapshots) res.snapshots.push_back(state.hbar);
    prev = state.hbar;
    prev_t = state.t;
    quiet = dh < cfg.steady_tol ? quiet + 1 : 0;
  };

  record();
  double energy = cfg.check_energy ? energy_sum(state.hbar, *cfg.model) : 0.0;
  for (long long s = 1; s <= nsteps; ++s) {
    advance(state, cfg, res.dt);
    if (cfg.check_energy) {
      const double e = energy_sum(state.hbar, *cfg.model);
      const double scale = std::abs(energy);
      if (scale > 0.0) res.max_energy_increase = std::max(res.max_energy_increase, (e - energy) / scale);
      if (e > energy + cfg.energy_rel_tol * scale) {
        std::ostringstream os;
        os << "energy increased from " << energy << " to " << e;
        throw InstabilityError(os.str(), state.steps);
      }
      energy = e;
    }
    if ((every > 0 && s % every == 0) || s == nsteps) {
      record();
      if (cfg.stop_at_steady_state && quiet >= cfg.steady_records) {
        res.reached_steady_state = true;
        break;
      }
    }
  }
  res.steps = state.steps;
  res.final_state = std::move(state);
  return res;
}

HeightField solve_elliptic(const std::vector<double>& A_diag, const HeightField& rhs, double tol) {
  const LatticeDomain& ld = rhs.domain();
  const int n = ld.dn_size();
  const int d = ld.dim();
  const double N2 = static_cast<double>(ld.N()) * ld.N();
  if (A_diag.size() != static_cast<std::size_t>(ld.closure_size()) * d) {
    throw PreconditionError("coefficient field must have d entries per closure site");
  }
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    // y = -div_N(A grad^N x)
    auto at = [&](int id) { return ld.in_dn(id) ? x[static_cast<std::size_t>(id)] : 0.0; };
    for (int id = 0; id < n; ++id) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const int f = ld.neighbor(id, 2 * i);
        const int b = ld.neighbor(id, 2 * i + 1);
        s += A_diag[static_cast<std::size_t>(id) * d + i] * (at(f) - at(id));
        s -= A_diag[static_cast<std::size_t>(b) * d + i] * (at(id) - at(b));
      }
      y[static_cast<std::size_t>(id)] = -N2 * s;
    }
  };
  std::vector<double> bvec(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) bvec[static_cast<std::size_t>(i)] = -rhs.at(i);
  double bb = 0.0;
  for (double v : bvec) bb += v * v;
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<double> r = bvec;
  std::vector<double> p = r;
  std::vector<double> ap(static_cast<std::size_t>(n));
  double rr = bb;
  const double stop = tol * tol * std::max(bb, 1e-300);
  int it = 0;
  const int max_iter = 10 * n + 10;
  while (rr > stop && bb > 0.0) {
    if (it++ >= max_iter) throw ConvergenceError("elliptic solve did not converge", it, std::sqrt(rr));
    apply(p, ap);
    double pap = 0.0;
    for (int i = 0; i < n; ++i) pap += p[static_cast<std::size_t>(i)] * ap[static_cast<std::size_t>(i)];
    if (!(pap > 0.0)) throw ConvergenceError("elliptic operator is not positive", it, std::sqrt(rr));
    const double alpha = rr / pap;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_new += r[i] * r[i];
    }
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
  }
  return HeightField(rhs.domain_ptr(), Support::DN, std::move(x));
}

EllipticSplit elliptic_split(const HeightField& hbar, const SurfaceTensionModel& model, double tol) {
  const LatticeDomain& ld = hbar.domain();
  const int d = ld.dim();
  const GradientField g = grad_forward(hbar);
  std::vector<double> A(static_cast<std::size_t>(ld.closure_size()) * d);
  GradientField a(hbar.domain_ptr());
  GradientField flux(hbar.domain_ptr());
  for (int id = 0; id < ld.closure_size(); ++id) {
    const std::size_t off = static_cast<std::size_t>(id) * d;
    model.decomposition(g.component_block(id), {A.data() + off, static_cast<std::size_t>(d)},
                        {a.data().data() + off, static_cast<std::size_t>(d)});
    model.grad_sigma(g.component_block(id), {flux.data().data() + off, static_cast<std::size_t>(d)});
  }
  EllipticSplit out;
  out.k = div_n(flux);
  out.mean_k = std::pow(static_cast<double>(ld.N()), -d) * out.k.sum_dn();
  out.site_mean_k = out.k.sum_dn() / ld.dn_size();
  const HeightField div_a = div_n(a);
  HeightField rhs1 = out.k - div_a;
  for (double& v : rhs1.values()) v -= out.site_mean_k;
  HeightField rhs2(hbar.domain_ptr(), Support::DN);
  for (double& v : rhs2.values()) v = out.site_mean_k;
  out.h1 = solve_elliptic(A, rhs1, tol);
  out.h2 = solve_elliptic(A, rhs2, tol);
  return out;
}

}  // namespace cglab
