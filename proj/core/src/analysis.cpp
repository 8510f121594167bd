#include "cglab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cglab/ops.hpp"
#include "cglab/parallel.hpp"
#include "cglab/sde.hpp"

namespace cglab {

double total_energy(const HeightField& hbar, const SurfaceTensionModel& model) {
  const LatticeDomain& ld = hbar.domain();
  return std::pow(static_cast<double>(ld.N()), -ld.dim()) * energy_sum(hbar, model);
}

double energy_offset(const LatticeDomain& ld, const SurfaceTensionModel& model) {
  const double zero[kMaxDim] = {0, 0, 0};
  return std::pow(static_cast<double>(ld.N()), -ld.dim()) * ld.closure_size() *
         model.sigma({zero, static_cast<std::size_t>(ld.dim())});
}

double oscillation_sum(const std::vector<double>& times, const std::vector<HeightField>& snapshots,
                       int axis) {
  if (times.size() != snapshots.size()) throw PreconditionError("times and snapshots differ in length");
  double s = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double v = oscillation_integrand(snapshots[i], axis);
    if (i > 0) s += 0.5 * (v + prev) * (times[i] - times[i - 1]);
    prev = v;
  }
  return s;
}

double oscillation_sum(const TrajectoryRecord& trajectory, int axis) {
  const std::vector<double> t = trajectory.times();
  const std::vector<double> v = trajectory.series("osc_" + std::to_string(axis));
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
  return s;
}

double PolilinearInterpolant::operator()(const Point& theta) const {
  const LatticeDomain& ld = h_.domain();
  const int d = ld.dim();
  const double N = ld.N();
  Site base{};
  double frac[kMaxDim] = {0, 0, 0};
  for (int i = 0; i < d; ++i) {
    const double s = N * theta[i];
    const double fl = std::floor(s);
    base[i] = static_cast<int>(fl);
    frac[i] = s - fl;
  }
  double v = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    Site x = base;
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      if (corner >> i & 1) {
        x[i] += 1;
        w *= frac[i];
      } else {
        w *= 1.0 - frac[i];
      }
    }
    if (w != 0.0) v += w * h_.at(ld.index_of(x));
  }
  return v;
}

PolilinearInterpolant polilinear_interpolate(const HeightField& hbar) {
  return PolilinearInterpolant(hbar);
}

HeightField project_volume(const HeightField& h, double volume) {
  const LatticeDomain& ld = h.domain();
  HeightField out = h.with_support(Support::DN);
  const double n = ld.dn_size();
  const double target = std::pow(static_cast<double>(ld.N()), ld.dim()) * volume / n;
  const double m = out.sum_dn() / n;
  for (double& v : out.values()) v = v - m + target;
  return out;
}

WulffSolution solve_wulff(const WulffProblem& p) {
  if (!p.ld || !p.model) throw PreconditionError("wulff problem needs a lattice and a model");
  const LatticeDomain& ld = *p.ld;
  const double Nd = std::pow(static_cast<double>(ld.N()), -ld.dim());
  const int n = ld.dn_size();

  WulffSolution sol;
  sol.h = project_volume(HeightField(p.ld, Support::DN), p.volume);
  sol.objective = total_energy(sol.h, *p.model);
  sol.initial_objective = sol.objective;

  auto projected_gradient = [&](const HeightField& h) {
    HeightField g = chemical_potential(h, *p.model);
    g *= -Nd;
    const double m = g.sum_dn() / n;
    for (double& v : g.values()) v -= m;
    return g;
  };

  HeightField g = projected_gradient(sol.h);
  double gg = dot_dn(g, g);
  sol.grad_norm = std::sqrt(gg);
  while (sol.grad_norm >= p.tol) {
    if (sol.iterations >= p.max_iter) throw WulffNotConverged(sol);
    double alpha = p.initial_step;
    HeightField trial = sol.h;
    double f_trial = 0.0;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(sol.objective));
    while (true) {
      for (int i = 0; i < n; ++i) trial[i] = sol.h[i] - alpha * g[i];
      f_trial = total_energy(trial, *p.model);
      if (alpha * gg > noise) {
        if (f_trial <= sol.objective - p.armijo * alpha * gg) break;
      } else if (f_trial <= sol.objective + noise &&
                 dot_dn(projected_gradient(trial), g) >= -(1.0 - 2.0 * p.armijo) * gg) {
        // decrease below the rounding level of the objective: slope test along -g
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-30) {
        // no descent possible at working precision
        sol.grad_norm = std::sqrt(gg);
        throw WulffNotConverged(sol);
      }
    }
    if (f_trial > sol.objective + noise) sol.monotone = false;
    // re-project to remove drift of the mass from rounding
    sol.h = project_volume(trial, p.volume);
    sol.objective = total_energy(sol.h, *p.model);
    ++sol.iterations;
    g = projected_gradient(sol.h);
    gg = dot_dn(g, g);
    sol.grad_norm = std::sqrt(gg);
  }
  return sol;
}

WulffReport wulff_relaxation_check(const HeightField& pde_final, const WulffSolution& wulff,
                                   const SurfaceTensionModel& model, double hm1_threshold,
                                   double energy_threshold) {
  if (pde_final.domain_ptr() != wulff.h.domain_ptr()) {
    throw PreconditionError("pde state and wulff solution live on different lattices");
  }
  const double ma = pde_final.sum_dn();
  const double mb = wulff.h.sum_dn();
  if (std::abs(ma - mb) > 1e-8 * std::max({1.0, std::abs(ma), std::abs(mb)})) {
    throw PreconditionError("pde state and wulff solution carry different mass");
  }
  WulffReport r;
  r.hm1_gap = h_minus_one_norm_macro(pde_final.with_support(Support::DN) - wulff.h);
  r.energy_gap = total_energy(pde_final, model) - wulff.objective;
  r.pass = r.hm1_gap <= hm1_threshold && std::abs(r.energy_gap) <= energy_threshold;
  return r;
}

HeightField cell_average(const HeightField& fine, std::shared_ptr<const LatticeDomain> coarse) {
  const LatticeDomain& lf = fine.domain();
  const int d = coarse->dim();
  if (lf.dim() != d) throw PreconditionError("cell_average needs equal dimensions");
  HeightField out(coarse, Support::DN);
  const double Nc = coarse->N();
  const double Nf = lf.N();
  for (int id = 0; id < coarse->dn_size(); ++id) {
    const Site& x = coarse->site(id);
    Site lo{};
    Site hi{};
    double a[kMaxDim];
    double b[kMaxDim];
    for (int i = 0; i < d; ++i) {
      a[i] = (x[i] - 0.5) / Nc;
      b[i] = (x[i] + 0.5) / Nc;
      lo[i] = static_cast<int>(std::floor(a[i] * Nf + 0.5)) - 1;
      hi[i] = static_cast<int>(std::ceil(b[i] * Nf - 0.5)) + 1;
    }
    Site y = lo;
    double s = 0.0;
    while (true) {
      double w = 1.0;
      for (int i = 0; i < d && w > 0.0; ++i) {
        const double fa = (y[i] - 0.5) / Nf;
        const double fb = (y[i] + 0.5) / Nf;
        w *= std::max(0.0, std::min(b[i], fb) - std::max(a[i], fa));
      }
      if (w > 0.0) s += w * fine.at(lf.index_of(y));
      int i = 0;
      for (; i < d; ++i) {
        if (++y[i] <= hi[i]) break;
        y[i] = lo[i];
      }
      if (i == d) break;
    }
    out[id] = s * std::pow(Nc, d);
  }
  return out;
}

std::vector<ConvergenceRow> hydrodynamic_convergence(const ConvergenceStudy& st) {
  if (!st.domain || st.Ns.empty() || st.times.empty() || !st.h0) {
    throw PreconditionError("convergence study needs a domain, N values, times and h0");
  }
  if (st.potential.kind != PotentialKind::Quadratic) {
    throw PreconditionError("convergence study needs the quadratic potential");
  }
  if (st.replicas < 100) throw PreconditionError("convergence study needs at least 100 replicas");
  std::vector<double> times = st.times;
  std::sort(times.begin(), times.end());
  const int d = st.domain->dim();
  const int n_ref = st.N_ref > 0 ? st.N_ref : 2 * *std::max_element(st.Ns.begin(), st.Ns.end());

  // fine reference
  const auto ref_ld = LatticeDomain::build(*st.domain, n_ref);
  const ModelPtr model = make_quadratic_model(d, st.potential.kappa);
  std::vector<HeightField> refs;
  {
    PdeState s = make_pde_state(project_initial(st.h0, ref_ld));
    double t_prev = 0.0;
    for (double t : times) {
      if (t > t_prev) {
        PdeConfig cfg;
        cfg.ld = ref_ld;
        cfg.model = model;
        cfg.T = t - t_prev;
        cfg.check_energy = false;
        s = run(cfg, s).final_state;
      }
      refs.push_back(s.hbar);
      t_prev = t;
    }
  }

  std::vector<ConvergenceRow> rows;
  for (int N : st.Ns) {
    const auto ld = LatticeDomain::build(*st.domain, N);
    HeightField phi0 = project_initial(st.h0, ld);
    phi0 *= N;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const HeightField target = cell_average(refs[k], ld);
      SdeConfig cfg;
      cfg.ld = ld;
      cfg.potential = st.potential;
      cfg.dtau = st.dtau;
      cfg.T = times[k];
      cfg.amplitude = st.amplitude;
      cfg.seed = st.seed;
      cfg.replicas = st.replicas;
      cfg.workers = st.workers;
      cfg.record_norms = false;
      const SdeResult res = run(cfg, phi0);
      std::vector<double> err(res.finals.size());
      parallel_for(static_cast<int>(err.size()), st.workers, [&](int r) {
        err[static_cast<std::size_t>(r)] =
            h_minus_one_norm_macro_sq(macroscopic_height(res.finals[static_cast<std::size_t>(r)]) - target);
      });
      const MeanSe e = mean_se(err);
      ConvergenceRow row;
      row.N = N;
      row.t = times[k];
      row.err_sq = e.mean;
      row.err_sq_se = e.se;
      if (st.deterministic_column) {
        SdeConfig det = cfg;
        det.amplitude = 0.0;
        det.replicas = 1;
        const SdeResult r0 = run(det, phi0);
        row.det_err_sq = h_minus_one_norm_macro_sq(macroscopic_height(r0.finals[0]) - target);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace cglab
