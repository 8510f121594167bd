#include "cglab/sde.hpp"

#include <cmath>
#include <sstream>

#include "cglab/errors.hpp"
#include "cglab/ops.hpp"
#include "cglab/parallel.hpp"

namespace cglab {

double SdeConfig::stability_bound(int dim, const Potential& V) {
  return 0.9 / (V.c_plus() * (4.0 * dim) * (2.0 * dim));
}

double SdeConfig::default_dtau(int dim, const Potential& V) {
  return 0.05 / (V.c_plus() * (4.0 * dim) * (4.0 * dim));
}

double SdeConfig::effective_dtau() const {
  const double base = dtau > 0.0 ? dtau : default_dtau(ld->dim(), potential);
  const double horizon = T * std::pow(static_cast<double>(ld->N()), 4);
  if (horizon <= 0.0) return base;
  const double n = std::ceil(horizon / base * (1.0 - 1e-12));
  return horizon / std::max(1.0, n);
}

void SdeConfig::validate() const {
  if (!ld) throw PreconditionError("sde config has no lattice domain");
  potential.validate();
  if (dtau < 0.0) throw PreconditionError("dtau must be positive");
  const double bound = stability_bound(ld->dim(), potential);
  if (dtau > bound) {
    std::ostringstream os;
    os << "dtau=" << dtau << " exceeds the stability bound 0.9/(c_+ 8 d^2)=" << bound;
    throw PreconditionError(os.str());
  }
  if (T < 0.0) throw PreconditionError("horizon T must be non-negative");
  if (replicas < 1) throw PreconditionError("replica count must be at least 1");
  if (cadence < 0.0) throw PreconditionError("cadence must be non-negative");
  if (!(amplitude >= 0.0)) throw PreconditionError("noise amplitude must be non-negative");
}

namespace {

void potential_force(const LatticeDomain& ld, const std::vector<double>& phi, const Potential& V,
                     std::vector<double>& U) {
  const int dirs = ld.directions();
  const int n = ld.dn_size();
  for (int id = 0; id < n; ++id) {
    const double px = phi[static_cast<std::size_t>(id)];
    double s = 0.0;
    for (int dir = 0; dir < dirs; ++dir) {
      const int nb = ld.neighbor(id, dir);
      const double py = ld.in_dn(nb) ? phi[static_cast<std::size_t>(nb)] : 0.0;
      s += V.dV(px - py);
    }
    U[static_cast<std::size_t>(id)] = s;
  }
}

// Reusable buffers for one replica.
struct Stepper {
  const LatticeDomain& ld;
  const Potential& V;
  double dtau;
  double amplitude;
  std::vector<double> U;
  std::vector<double> xi;

  Stepper(const LatticeDomain& l, const Potential& v, double dt, double amp)
      : ld(l), V(v), dtau(dt), amplitude(amp) {
    U.resize(static_cast<std::size_t>(ld.dn_size()));
    xi.resize(ld.positive_bonds_dn().size());
  }

  void draw(Rng& rng) {
    if (amplitude != 0.0) fill_normals(rng, xi);
  }

  // phase 1: U from phi; phase 2: bond fluxes applied to both ends
  void apply(std::vector<double>& phi) {
    potential_force(ld, phi, V, U);
    const auto bonds = ld.positive_bonds_dn();
    const double noise = amplitude * std::sqrt(dtau);
    for (std::size_t b = 0; b < bonds.size(); ++b) {
      const auto x = static_cast<std::size_t>(bonds[b].from);
      const auto y = static_cast<std::size_t>(bonds[b].to);
      double flux = dtau * (U[y] - U[x]);
      if (amplitude != 0.0) flux += noise * xi[b];
      phi[x] += flux;
      phi[y] -= flux;
    }
  }
};

double gradient_energy(const LatticeDomain& ld, const HeightField& phi) {
  double s = 0.0;
  for (const Bond& b : ld.positive_bonds_closure()) {
    const double g = phi.at(b.to) - phi.at(b.from);
    s += g * g;
  }
  return s;
}

bool finite_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return std::isfinite(s);
}

struct Schedule {
  long long steps = 0;
  long long every = 0;
  double dtau = 0.0;
  double n4 = 1.0;

  std::vector<long long> record_steps() const {
    std::vector<long long> out{0};
    if (steps == 0) return out;
    if (every > 0) {
      for (long long k = every; k < steps; k += every) out.push_back(k);
    }
    out.push_back(steps);
    return out;
  }
};

Schedule make_schedule(const SdeConfig& cfg) {
  Schedule s;
  s.n4 = std::pow(static_cast<double>(cfg.ld->N()), 4);
  s.dtau = cfg.effective_dtau();
  const double horizon = cfg.T * s.n4;
  s.steps = horizon > 0.0 ? static_cast<long long>(std::llround(horizon / s.dtau)) : 0;
  if (cfg.cadence > 0.0 && s.steps > 0) {
    s.every = std::max(1LL, static_cast<long long>(std::llround(cfg.cadence * s.n4 / s.dtau)));
  }
  return s;
}

void require_phi(const SdeConfig& cfg, const HeightField& phi0) {
  if (phi0.domain_ptr() != cfg.ld) throw PreconditionError("initial field lives on another lattice");
  if (!phi0.all_finite()) throw PreconditionError("initial field is not finite");
}

}  // namespace

HeightField drift(const HeightField& phi, const Potential& V) {
  const LatticeDomain& ld = phi.domain();
  std::vector<double> p(static_cast<std::size_t>(ld.dn_size()));
  for (int i = 0; i < ld.dn_size(); ++i) p[static_cast<std::size_t>(i)] = phi.at(i);
  std::vector<double> U(p.size());
  potential_force(ld, p, V, U);
  return laplacian_dirichlet(HeightField(phi.domain_ptr(), Support::DN, std::move(U)));
}

void step_euler_maruyama(SdeState& state, const Potential& V, double dtau, double amplitude,
                         Rng& rng) {
  const LatticeDomain& ld = state.phi.domain();
  if (state.phi.support() != Support::DN) state.phi = state.phi.with_support(Support::DN);
  Stepper st(ld, V, dtau, amplitude);
  st.draw(rng);
  st.apply(state.phi.data());
  state.tau += dtau;
  ++state.steps;
  if (!finite_sum(state.phi.data())) {
    throw InstabilityError("Euler-Maruyama step produced a non-finite height", state.steps);
  }
}

SdeState step_euler_maruyama(const SdeState& state, const SdeConfig& cfg, Rng& rng) {
  SdeState next = state;
  const double dt = cfg.dtau > 0.0 ? cfg.dtau : SdeConfig::default_dtau(cfg.ld->dim(), cfg.potential);
  step_euler_maruyama(next, cfg.potential, dt, cfg.amplitude, rng);
  return next;
}

HeightField macroscopic_height(const HeightField& phi) {
  HeightField h = phi;
  h *= 1.0 / phi.domain().N();
  return h;
}

SdeResult run(const SdeConfig& cfg, const HeightField& phi0_in) {
  cfg.validate();
  require_phi(cfg, phi0_in);
  const LatticeDomain& ld = *cfg.ld;
  const HeightField phi0 = phi0_in.with_support(Support::DN);
  const Schedule sched = make_schedule(cfg);
  const std::vector<long long> marks = sched.record_steps();
  const auto R = marks.size();
  const auto M = static_cast<std::size_t>(cfg.replicas);

  // [replica][record]
  std::vector<std::vector<HeightField>> snaps(M);
  std::vector<HeightField> finals(M);

  parallel_for(cfg.replicas, cfg.workers, [&](int r) {
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(r));
    Stepper st(ld, cfg.potential, sched.dtau, cfg.amplitude);
    HeightField phi = phi0;
    auto& mine = snaps[static_cast<std::size_t>(r)];
    mine.reserve(R);
    mine.push_back(phi);
    long long k = 0;
    for (std::size_t m = 1; m < R; ++m) {
      for (; k < marks[m]; ++k) {
        st.draw(rng);
        st.apply(phi.data());
        if ((k & 255) == 255 && !finite_sum(phi.data())) {
          throw InstabilityError("Euler-Maruyama produced a non-finite height", k + 1);
        }
      }
      if (!phi.all_finite()) throw InstabilityError("Euler-Maruyama produced a non-finite height", k);
      mine.push_back(phi);
    }
    finals[static_cast<std::size_t>(r)] = phi;
  });

  SdeResult res;
  res.trajectory = TrajectoryRecord({"mass", "grad_energy", "hm1_norm", "hm1_norm_sq"});
  res.steps = sched.steps;
  res.dtau = sched.dtau;
  res.hm1_sq.assign(R, std::vector<double>(M, 0.0));
  res.grad_energy.assign(R, std::vector<double>(M, 0.0));
  std::vector<std::vector<double>> mass(R, std::vector<double>(M, 0.0));
  std::vector<std::vector<double>> norm(R, std::vector<double>(M, 0.0));

  parallel_for(static_cast<int>(R * M), cfg.workers, [&](int job) {
    const auto m = static_cast<std::size_t>(job) / M;
    const auto r = static_cast<std::size_t>(job) % M;
    const HeightField& phi = snaps[r][m];
    mass[m][r] = phi.sum_dn();
    res.grad_energy[m][r] = gradient_energy(ld, phi);
    if (cfg.record_norms) {
      res.hm1_sq[m][r] = h_minus_one_norm_sq(phi);
      norm[m][r] = std::sqrt(std::max(0.0, res.hm1_sq[m][r]));
    }
  });

  for (std::size_t m = 0; m < R; ++m) {
    const double t = static_cast<double>(marks[m]) * sched.dtau / sched.n4;
    res.times.push_back(t);
    HeightField mean(cfg.ld, Support::DN);
    for (std::size_t r = 0; r < M; ++r) mean += snaps[r][m];
    mean *= 1.0 / static_cast<double>(M);
    res.mean_snapshots.push_back(std::move(mean));
    if (cfg.per_replica_rows) {
      for (std::size_t r = 0; r < M; ++r) {
        res.trajectory.add(t, std::to_string(r),
                           {mass[m][r], res.grad_energy[m][r], norm[m][r], res.hm1_sq[m][r]});
      }
    }
    const MeanSe a = mean_se(mass[m]);
    const MeanSe b = mean_se(res.grad_energy[m]);
    const MeanSe c = mean_se(norm[m]);
    const MeanSe e = mean_se(res.hm1_sq[m]);
    res.trajectory.add(t, "mean", {a.mean, b.mean, c.mean, e.mean});
    if (M > 1) res.trajectory.add(t, "se", {a.se, b.se, c.se, e.se});
  }
  res.finals = std::move(finals);
  return res;
}

CoupledResult coupled_pair_run(const SdeConfig& cfg, const HeightField& phi0_in,
                               const HeightField& phi0_tilde_in) {
  cfg.validate();
  require_phi(cfg, phi0_in);
  require_phi(cfg, phi0_tilde_in);
  const LatticeDomain& ld = *cfg.ld;
  const HeightField phi0 = phi0_in.with_support(Support::DN);
  const HeightField phi1 = phi0_tilde_in.with_support(Support::DN);
  const Schedule sched = make_schedule(cfg);
  const std::vector<long long> marks = sched.record_steps();
  const auto R = marks.size();
  const auto M = static_cast<std::size_t>(cfg.replicas);

  CoupledResult res;
  res.dist_sq.assign(R, std::vector<double>(M, 0.0));
  res.finals_a.resize(M);
  res.finals_b.resize(M);

  parallel_for(cfg.replicas, cfg.workers, [&](int r) {
    const auto ri = static_cast<std::size_t>(r);
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(r));
    Stepper st(ld, cfg.potential, sched.dtau, cfg.amplitude);
    HeightField a = phi0;
    HeightField b = phi1;
    res.dist_sq[0][ri] = h_minus_one_norm_sq(a - b);
    long long k = 0;
    for (std::size_t m = 1; m < R; ++m) {
      for (; k < marks[m]; ++k) {
        st.draw(rng);
        st.apply(a.data());
        st.apply(b.data());
      }
      if (!a.all_finite() || !b.all_finite()) {
        throw InstabilityError("coupled run produced a non-finite height", k);
      }
      res.dist_sq[m][ri] = h_minus_one_norm_sq(a - b);
    }
    res.finals_a[ri] = std::move(a);
    res.finals_b[ri] = std::move(b);
  });

  res.trajectory = TrajectoryRecord({"dist_sq", "dist_sq_se"});
  for (std::size_t m = 0; m < R; ++m) {
    const double t = static_cast<double>(marks[m]) * sched.dtau / sched.n4;
    res.times.push_back(t);
    const MeanSe s = mean_se(res.dist_sq[m]);
    res.trajectory.add(t, "mean", {s.mean, s.se});
  }
  return res;
}

}  // namespace cglab
