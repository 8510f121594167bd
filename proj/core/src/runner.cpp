#include "cglab/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>

#include "cglab/analysis.hpp"
#include "cglab/csv.hpp"
#include "cglab/errors.hpp"
#include "cglab/ops.hpp"
#include "cglab/parallel.hpp"
#include "cglab/sde.hpp"
#include "cglab/sigma_table.hpp"
#include "json.hpp"

#ifndef CGLAB_VERSION
#define CGLAB_VERSION "unknown"
#endif

namespace cglab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Output directory bookkeeping for one run.
class Run {
 public:
  explicit Run(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.out) { fs::create_directories(dir_); }

  fs::path path(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }
  void criterion(const std::string& name, bool pass) { criteria_.emplace_back(name, pass); }
  json& metrics() { return metrics_; }

  RunManifest finish(RunManifest m) {
    json summary;
    summary["experiment"] = experiment_name(cfg_.experiment);
    summary["seed"] = cfg_.seed;
    json crit = json::object();
    for (const auto& [k, v] : criteria_) crit[k] = v;
    summary["criteria"] = crit;
    summary["metrics"] = metrics_;
    write_file_atomic(path("summary.json"), summary.dump(2) + "\n");

    m.criteria = criteria_;
    for (const auto& f : files_) {
      ArtifactEntry e;
      e.file = f;
      e.bytes = fs::file_size(dir_ / f);
      e.sha256 = sha256_file(dir_ / f);
      m.outputs.push_back(std::move(e));
    }
    m.finished = utc_now();
    write_file_atomic(dir_ / "manifest.json", m.to_json() + "\n");
    return m;
  }

 private:
  const RunConfig& cfg_;
  fs::path dir_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, bool>> criteria_;
  json metrics_ = json::object();
};

std::vector<std::string> coord_header(int d) {
  std::vector<std::string> h;
  for (int i = 0; i < d; ++i) h.push_back("x" + std::to_string(i));
  return h;
}

void append_coords(std::vector<std::string>& row, const Site& x, int d) {
  for (int i = 0; i < d; ++i) row.push_back(std::to_string(x[i]));
}

// One row per D_N site: lattice coordinates followed by the named fields.
void write_site_fields(const fs::path& p, const LatticeDomain& ld,
                       const std::vector<std::pair<std::string, const HeightField*>>& fields) {
  CsvTable t;
  t.header = coord_header(ld.dim());
  for (const auto& f : fields) t.header.push_back(f.first);
  for (int id = 0; id < ld.dn_size(); ++id) {
    std::vector<std::string> row;
    append_coords(row, ld.site(id), ld.dim());
    for (const auto& f : fields) row.push_back(format_double(f.second->at(id)));
    t.add_row(std::move(row));
  }
  write_csv(p, t);
}

bool mass_conserved(double m0, double m1, double scale) {
  return std::abs(m1 - m0) <= 1e-10 * std::max(1.0, scale);
}

double abs_sum(const HeightField& f) {
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) s += std::abs(f[i]);
  return s;
}

PdeConfig pde_config(const RunConfig& cfg, std::shared_ptr<const LatticeDomain> ld, ModelPtr model) {
  PdeConfig p;
  p.ld = std::move(ld);
  p.model = std::move(model);
  p.dt = cfg.dt;
  p.T = cfg.T;
  p.integrator = cfg.integrator;
  p.cadence = cfg.cadence;
  p.keep_snapshots = cfg.snapshots;
  return p;
}

void run_dump_domain(const RunConfig& cfg, Run& art, RunManifest&) {
  const auto ld = LatticeDomain::build(cfg.domain.build(), cfg.N);
  const int d = ld->dim();
  CsvTable sites;
  sites.header = {"id"};
  for (const auto& h : coord_header(d)) sites.header.push_back(h);
  for (const char* h : {"layer", "in_dn", "in_closure", "in_double_closure", "in_tilde"}) {
    sites.header.push_back(h);
  }
  auto add = [&](int id, const Site& x, int layer) {
    std::vector<std::string> row{std::to_string(id)};
    append_coords(row, x, d);
    row.push_back(std::to_string(layer));
    row.push_back(layer == 0 ? "1" : "0");
    row.push_back(layer >= 0 && layer <= 1 ? "1" : "0");
    row.push_back(layer >= 0 && layer <= 2 ? "1" : "0");
    row.push_back(ld->tilde_index_of(x) >= 0 ? "1" : "0");
    sites.add_row(std::move(row));
  };
  for (int id = 0; id < ld->double_closure_size(); ++id) add(id, ld->site(id), ld->layer_of(id));
  for (const Site& x : ld->tilde_sites()) {
    if (ld->index_of(x) < 0) add(-1, x, -1);
  }
  write_csv(art.path("sites.csv"), sites);

  CsvTable bonds;
  bonds.header = {"from", "to", "axis", "sign", "in_dn"};
  for (const Bond& b : ld->bonds_closure()) {
    bonds.add_row({std::to_string(b.from), std::to_string(b.to), std::to_string(b.axis),
                   std::to_string(b.sign), ld->in_dn(b.from) && ld->in_dn(b.to) ? "1" : "0"});
  }
  write_csv(art.path("bonds.csv"), bonds);

  const AssumptionReport rep = check_assumption_domain(*ld, cfg.assumption_bound);
  art.metrics()["dn_size"] = ld->dn_size();
  art.metrics()["closure_size"] = ld->closure_size();
  art.metrics()["double_closure_size"] = ld->double_closure_size();
  art.metrics()["tilde_size"] = ld->tilde_sites().size();
  art.metrics()["assumption_max_distance"] = rep.max_distance;
  art.criterion("domain_assumption", rep.satisfied);
}

void run_sde(const RunConfig& cfg, Run& art, RunManifest& m) {
  const auto ld = LatticeDomain::build(cfg.domain.build(), cfg.N);
  HeightField phi0 = project_initial(cfg.initial.profile(ld->macro()), ld);
  phi0 *= cfg.N;

  SdeConfig s;
  s.ld = ld;
  s.potential = cfg.potential;
  s.dtau = cfg.dtau;
  s.T = cfg.T;
  s.amplitude = cfg.noise_amplitude;
  s.seed = cfg.seed;
  s.replicas = cfg.replicas;
  s.cadence = cfg.cadence;
  s.workers = default_workers();
  s.per_replica_rows = cfg.per_replica_rows;
  const SdeResult res = run(s, phi0);

  res.trajectory.write_csv(art.path("trajectory.csv"));
  if (cfg.snapshots) {
    for (std::size_t k = 0; k < res.mean_snapshots.size(); ++k) {
      const HeightField h = macroscopic_height(res.mean_snapshots[k]);
      write_site_fields(art.path("snapshot_" + std::to_string(k) + ".csv"), *ld,
                        {{"phi_mean", &res.mean_snapshots[k]}, {"h_mean", &h}});
    }
  }
  bool conserved = true;
  const double m0 = phi0.sum_dn();
  for (const auto& f : res.finals) conserved = conserved && mass_conserved(m0, f.sum_dn(), abs_sum(phi0));
  m.steps = res.steps;
  art.metrics()["steps"] = res.steps;
  art.metrics()["dtau"] = res.dtau;
  art.metrics()["initial_mass"] = m0;
  art.criterion("mass_conservation", conserved);
}

void run_pde(const RunConfig& cfg, Run& art, RunManifest& m) {
  const auto ld = LatticeDomain::build(cfg.domain.build(), cfg.N);
  const ModelPtr model = cfg.make_model();
  PdeConfig p = pde_config(cfg, ld, model);
  PdeState s0 = make_pde_state(project_initial(cfg.initial.profile(ld->macro()), ld));
  const double m0 = s0.hbar.sum_dn();
  const double scale = abs_sum(s0.hbar);
  const PdeResult res = run(p, std::move(s0));

  res.trajectory.write_csv(art.path("trajectory.csv"));
  const HeightField kf = chemical_potential(res.final_state.hbar, *model);
  write_site_fields(art.path("final.csv"), *ld, {{"hbar", &res.final_state.hbar}, {"k", &kf}});
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    const HeightField k = chemical_potential(res.snapshots[i], *model);
    write_site_fields(art.path("snapshot_" + std::to_string(i) + ".csv"), *ld,
                      {{"hbar", &res.snapshots[i]}, {"k", &k}});
  }
  m.steps = res.steps;
  art.metrics()["steps"] = res.steps;
  art.metrics()["dt"] = res.dt;
  art.metrics()["max_energy_increase"] = res.max_energy_increase;
  art.metrics()["final_energy"] = total_energy(res.final_state.hbar, *model);
  art.criterion("mass_conservation", mass_conserved(m0, res.final_state.hbar.sum_dn(), scale));
  art.criterion("energy_monotone", res.max_energy_increase <= p.energy_rel_tol);
}

void run_estimate_sigma(const RunConfig& cfg, Run& art, RunManifest&) {
  const SigmaTable t =
      tabulate_grad_sigma(cfg.tilts, cfg.potential, cfg.sampler, cfg.seed, default_workers());
  save_sigma_table(t, art.path("sigma_table.txt"));
  export_sigma_table_csv(t, art.path("sigma_table.csv"));
  const int d = t.dim();
  double worst = 0.0;
  for (int k = 0; k < t.node_count(); ++k) {
    const std::vector<double> u = t.node_tilt(k);
    for (int i = 0; i < d; ++i) {
      const std::size_t j = static_cast<std::size_t>(k * d + i);
      const double resid = t.A_diag[j] * u[static_cast<std::size_t>(i)] + t.a[j] - t.grad[j];
      const double se = std::hypot(t.A_se[j] * u[static_cast<std::size_t>(i)], t.a_se[j], t.grad_se[j]);
      if (se > 0.0) worst = std::max(worst, std::abs(resid) / se);
    }
  }
  art.metrics()["nodes"] = t.node_count();
  art.metrics()["max_closure_z"] = worst;
}

void run_wulff(const RunConfig& cfg, Run& art, RunManifest& m) {
  const auto ld = LatticeDomain::build(cfg.domain.build(), cfg.N);
  const ModelPtr model = cfg.make_model();
  const int d = ld->dim();
  const double Nd = std::pow(static_cast<double>(cfg.N), d);

  WulffProblem wp;
  wp.ld = ld;
  wp.model = model;
  wp.volume = cfg.volume;
  const WulffSolution w = solve_wulff(wp);

  HeightField h0 = project_initial(cfg.initial.profile(ld->macro()), ld);
  const double mass = h0.sum_dn() / Nd;
  if (std::abs(mass) > 1e-14) {
    h0 *= cfg.volume / mass;
  } else {
    h0 = project_volume(h0, cfg.volume);
  }
  PdeConfig p = pde_config(cfg, ld, model);
  p.stop_at_steady_state = true;
  const PdeResult res = run(p, make_pde_state(h0));
  const WulffReport rep =
      wulff_relaxation_check(res.final_state.hbar, w, *model, cfg.hm1_threshold, cfg.energy_threshold);

  write_site_fields(art.path("wulff.csv"), *ld, {{"h_wulff", &w.h}, {"h_pde", &res.final_state.hbar}});
  res.trajectory.write_csv(art.path("trajectory.csv"));

  m.steps = res.steps;
  art.metrics()["wulff_iterations"] = w.iterations;
  art.metrics()["wulff_objective"] = w.objective;
  art.metrics()["wulff_grad_norm"] = w.grad_norm;
  art.metrics()["pde_steps"] = res.steps;
  art.metrics()["pde_final_time"] = res.final_state.t;
  art.metrics()["hm1_gap"] = rep.hm1_gap;
  art.metrics()["energy_gap"] = rep.energy_gap;
  art.criterion("wulff_monotone", w.monotone);
  art.criterion("pde_steady_state", res.reached_steady_state);
  art.criterion("wulff_relaxation", rep.pass);

  const auto* box = std::get_if<BoxShape>(&ld->macro().shape());
  if (d == 1 && box && model->backend() == SigmaBackend::ExactQuadratic) {
    const double a = box->lo[0], b = box->hi[0], len = b - a;
    double gap = 0.0;
    for (int id = 0; id < ld->dn_size(); ++id) {
      const double th = ld->position(ld->site(id))[0];
      const double ref = 6.0 * cfg.volume * (th - a) * (b - th) / (len * len * len);
      gap = std::max(gap, std::abs(w.h[id] - ref));
    }
    art.metrics()["parabola_sup_gap"] = gap;
    art.criterion("wulff_parabola_sup", gap <= 0.1);
  }
}

void run_convergence(const RunConfig& cfg, Run& art, RunManifest&) {
  ConvergenceStudy st;
  st.domain = std::make_shared<const MacroDomain>(cfg.domain.build());
  st.Ns = cfg.N_list;
  std::sort(st.Ns.begin(), st.Ns.end());
  st.h0 = cfg.initial.profile(*st.domain);
  st.potential = cfg.potential;
  st.replicas = cfg.replicas;
  st.times = cfg.times;
  st.seed = cfg.seed;
  st.dtau = cfg.dtau;
  st.amplitude = cfg.noise_amplitude;
  st.N_ref = cfg.N_ref;
  st.workers = default_workers();
  const std::vector<ConvergenceRow> rows = hydrodynamic_convergence(st);

  CsvTable t;
  t.header = {"N", "t", "err_sq", "err_sq_se", "det_err_sq"};
  std::map<double, std::vector<ConvergenceRow>> by_t;
  for (const auto& r : rows) {
    t.add_row({std::to_string(r.N), format_double(r.t), format_double(r.err_sq),
               format_double(r.err_sq_se), format_double(r.det_err_sq)});
    by_t[r.t].push_back(r);
  }
  write_csv(art.path("convergence.csv"), t);

  bool strict = true, within = true;
  for (auto& [time, rs] : by_t) {
    std::sort(rs.begin(), rs.end(), [](const auto& x, const auto& y) { return x.N < y.N; });
    for (std::size_t i = 1; i < rs.size(); ++i) {
      strict = strict && rs[i].err_sq < rs[i - 1].err_sq;
      const double se = std::hypot(rs[i].err_sq_se, rs[i - 1].err_sq_se);
      within = within && rs[i].err_sq <= rs[i - 1].err_sq + 2.0 * se;
    }
  }
  art.criterion("strictly_decreasing", strict);
  art.criterion("non_increasing_2se", within);
}

void run_oscillation(const RunConfig& cfg, Run& art, RunManifest& m) {
  const MacroDomain dom = cfg.domain.build();
  std::vector<int> ns = cfg.N_list;
  std::sort(ns.begin(), ns.end());
  const ModelPtr model = cfg.make_model();
  CsvTable t;
  t.header = {"N", "axis", "oscillation_sum", "steps"};
  std::vector<double> vals;
  for (int N : ns) {
    const auto ld = LatticeDomain::build(dom, N);
    PdeConfig p = pde_config(cfg, ld, model);
    p.keep_snapshots = false;
    const PdeResult res = run(p, make_pde_state(project_initial(cfg.initial.profile(dom), ld)));
    const double v = oscillation_sum(res.trajectory, cfg.direction);
    vals.push_back(v);
    m.steps += res.steps;
    t.add_row({std::to_string(N), std::to_string(cfg.direction), format_double(v),
               std::to_string(res.steps)});
  }
  write_csv(art.path("oscillation.csv"), t);
  bool dec = true;
  for (std::size_t i = 1; i < vals.size(); ++i) dec = dec && vals[i] < vals[i - 1];
  art.criterion("decreasing_in_N", dec);
}

}  // namespace

bool RunManifest::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.second; });
}

std::string RunManifest::to_json() const {
  json j;
  j["config"] = json::parse(config_echo);
  j["version"] = version;
  j["seed"] = seed;
  j["started"] = started;
  j["finished"] = finished;
  j["steps"] = steps;
  json crit = json::object();
  for (const auto& [k, v] : criteria) crit[k] = v;
  j["criteria"] = crit;
  j["all_pass"] = all_pass();
  json outs = json::array();
  for (const auto& o : outputs) outs.push_back({{"file", o.file}, {"bytes", o.bytes}, {"sha256", o.sha256}});
  j["outputs"] = outs;
  return j.dump(2);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 initialisation failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

RunManifest dispatch(const RunConfig& cfg) {
  RunManifest m;
  m.config_echo = config_to_json(cfg);
  m.version = CGLAB_VERSION;
  m.seed = cfg.seed;
  m.started = utc_now();
  Run art(cfg);
  switch (cfg.experiment) {
    case Experiment::DumpDomain: run_dump_domain(cfg, art, m); break;
    case Experiment::SimulateSde: run_sde(cfg, art, m); break;
    case Experiment::SolvePde: run_pde(cfg, art, m); break;
    case Experiment::EstimateSigma: run_estimate_sigma(cfg, art, m); break;
    case Experiment::Wulff: run_wulff(cfg, art, m); break;
    case Experiment::ConvergenceStudy: run_convergence(cfg, art, m); break;
    case Experiment::Oscillation: run_oscillation(cfg, art, m); break;
  }
  return art.finish(std::move(m));
}

std::string error_report(const std::exception& e) {
  std::string type = "error";
  if (dynamic_cast<const ConfigError*>(&e)) type = "config";
  else if (dynamic_cast<const DomainError*>(&e)) type = "domain";
  else if (dynamic_cast<const PreconditionError*>(&e)) type = "precondition";
  else if (dynamic_cast<const ModelError*>(&e)) type = "model";
  else if (dynamic_cast<const ConvergenceError*>(&e)) type = "convergence";
  else if (dynamic_cast<const InstabilityError*>(&e)) type = "instability";
  json j;
  j["error"] = {{"type", type}, {"message", e.what()}};
  return j.dump();
}

}  // namespace cglab
