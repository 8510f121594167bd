#include "cglab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cglab/errors.hpp"
#include "cglab/sde.hpp"
#include "cglab/surface_tension.hpp"
#include "json.hpp"

namespace cglab {

using nlohmann::json;

namespace {

struct Names {
  Experiment e;
  const char* name;
};

constexpr Names kExperiments[] = {
    {Experiment::DumpDomain, "dump-domain"},     {Experiment::SimulateSde, "simulate-sde"},
    {Experiment::SolvePde, "solve-pde"},         {Experiment::EstimateSigma, "estimate-sigma"},
    {Experiment::Wulff, "wulff"},                {Experiment::ConvergenceStudy, "convergence-study"},
    {Experiment::Oscillation, "oscillation"},
};

// Collects problems instead of stopping at the first one.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void allow(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!ok.count(it.key())) errors_.push_back("unknown key '" + where + it.key() + "'");
    }
  }

  template <class T>
  void get(const json& obj, const char* key, T& out, const std::string& where = "") {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      errors_.push_back("key '" + where + key + "' has the wrong type");
    }
  }

  void fail(std::string msg) { errors_.push_back(std::move(msg)); }

 private:
  std::vector<std::string>& errors_;
};

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& n : kExperiments) {
    if (n.e == e) return n.name;
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (const auto& n : kExperiments) {
    if (name == n.name) return n.e;
  }
  return std::nullopt;
}

MacroDomain DomainSpec::build() const {
  if (type == "box") return MacroDomain::box(lo, hi);
  if (type == "ball") return MacroDomain::ball(center, radius);
  if (type == "grid") {
    std::vector<std::uint8_t> f(flags.begin(), flags.end());
    return MacroDomain::indicator_grid(lo, hi, cells, std::move(f));
  }
  throw ConfigError("unknown domain type '" + type + "'");
}

std::function<double(const Point&)> InitialSpec::profile(const MacroDomain& domain) const {
  const int d = domain.dim();
  const auto [blo, bhi] = domain.bounding_box();
  const double amp = amplitude;
  if (kind == "zero") return [](const Point&) { return 0.0; };
  if (kind == "constant") return [amp](const Point&) { return amp; };
  if (kind == "sine") {
    return [=](const Point& p) {
      double v = amp;
      for (int i = 0; i < d; ++i) v *= std::sin(M_PI * (p[i] - blo[i]) / (bhi[i] - blo[i]));
      return v;
    };
  }
  if (kind == "bump") {
    Point c{};
    for (int i = 0; i < d; ++i) {
      c[i] = center.empty() ? 0.5 * (blo[i] + bhi[i]) : center[static_cast<std::size_t>(i)];
    }
    const double w = width;
    return [=](const Point& p) {
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) r2 += (p[i] - c[i]) * (p[i] - c[i]);
      r2 /= w * w;
      if (r2 >= 1.0) return 0.0;
      return amp * std::exp(1.0 - 1.0 / (1.0 - r2));
    };
  }
  throw ConfigError("unknown initial kind '" + kind + "'");
}

ModelPtr RunConfig::make_model() const {
  ModelPtr m;
  if (sigma.backend == "quadratic") {
    if (potential.kind != PotentialKind::Quadratic) {
      throw ConfigError("sigma backend 'quadratic' needs the quadratic potential");
    }
    m = make_quadratic_model(dim(), potential.kappa);
  } else if (sigma.backend == "table") {
    SigmaTable t = load_sigma_table(sigma.table);
    if (t.dim() != dim()) throw ConfigError("sigma table dimension differs from the domain");
    m = make_tabulated_model(std::move(t));
  } else {
    throw ConfigError("unknown sigma backend '" + sigma.backend + "'");
  }
  if (sigma.delta > 0.0) m = mollify(m, sigma.delta);
  return m;
}

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError("syntax error at " + line_col(text, at) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");

  std::vector<std::string> errors;
  Reader r(errors);
  RunConfig c;

  r.allow(j, "", {"experiment", "domain", "assumption_bound", "N", "N_list", "potential", "sigma",
                  "initial", "integrator", "dt", "dtau", "T", "cadence", "replicas", "seed",
                  "noise_amplitude", "per_replica_rows", "snapshots", "sampler", "tilts", "times",
                  "volume", "direction", "N_ref", "thresholds", "out"});

  std::string exp;
  r.get(j, "experiment", exp);
  if (auto e = parse_experiment(exp)) {
    c.experiment = *e;
  } else {
    r.fail("missing or unknown experiment '" + exp + "'");
  }

  if (auto it = j.find("domain"); it != j.end() && it->is_object()) {
    const json& d = *it;
    r.allow(d, "domain.", {"type", "lo", "hi", "center", "radius", "cells", "flags"});
    r.get(d, "type", c.domain.type, "domain.");
    r.get(d, "lo", c.domain.lo, "domain.");
    r.get(d, "hi", c.domain.hi, "domain.");
    r.get(d, "center", c.domain.center, "domain.");
    r.get(d, "radius", c.domain.radius, "domain.");
    r.get(d, "cells", c.domain.cells, "domain.");
    r.get(d, "flags", c.domain.flags, "domain.");
  } else {
    r.fail("missing object 'domain'");
  }

  r.get(j, "assumption_bound", c.assumption_bound);
  r.get(j, "N", c.N);
  r.get(j, "N_list", c.N_list);

  if (auto it = j.find("potential"); it != j.end()) {
    if (it->is_object()) {
      r.allow(*it, "potential.", {"kind", "kappa", "b"});
      std::string kind = "quadratic";
      r.get(*it, "kind", kind, "potential.");
      if (kind == "quadratic") {
        c.potential = Potential::quadratic();
      } else if (kind == "anharmonic") {
        c.potential = Potential::bounded_anharmonic();
      } else {
        r.fail("unknown potential kind '" + kind + "'");
      }
      r.get(*it, "kappa", c.potential.kappa, "potential.");
      r.get(*it, "b", c.potential.b, "potential.");
    } else {
      r.fail("key 'potential' must be an object");
    }
  }

  if (auto it = j.find("sigma"); it != j.end() && it->is_object()) {
    r.allow(*it, "sigma.", {"backend", "table", "delta"});
    r.get(*it, "backend", c.sigma.backend, "sigma.");
    r.get(*it, "table", c.sigma.table, "sigma.");
    r.get(*it, "delta", c.sigma.delta, "sigma.");
  }

  if (auto it = j.find("initial"); it != j.end() && it->is_object()) {
    r.allow(*it, "initial.", {"kind", "amplitude", "center", "width"});
    r.get(*it, "kind", c.initial.kind, "initial.");
    r.get(*it, "amplitude", c.initial.amplitude, "initial.");
    r.get(*it, "center", c.initial.center, "initial.");
    r.get(*it, "width", c.initial.width, "initial.");
  }

  std::string integ = "explicit";
  r.get(j, "integrator", integ);
  if (integ == "explicit") {
    c.integrator = Integrator::Explicit;
  } else if (integ == "semi-implicit") {
    c.integrator = Integrator::SemiImplicit;
  } else {
    r.fail("unknown integrator '" + integ + "'");
  }

  r.get(j, "dt", c.dt);
  r.get(j, "dtau", c.dtau);
  r.get(j, "T", c.T);
  r.get(j, "cadence", c.cadence);
  r.get(j, "replicas", c.replicas);
  r.get(j, "seed", c.seed);
  r.get(j, "noise_amplitude", c.noise_amplitude);
  r.get(j, "per_replica_rows", c.per_replica_rows);
  r.get(j, "snapshots", c.snapshots);
  r.get(j, "times", c.times);
  r.get(j, "volume", c.volume);
  r.get(j, "direction", c.direction);
  r.get(j, "N_ref", c.N_ref);
  r.get(j, "out", c.out);

  if (auto it = j.find("sampler"); it != j.end() && it->is_object()) {
    const std::string w = "sampler.";
    r.allow(*it, w, {"L", "step", "burn_in", "samples", "stride", "batches", "spatial_average",
                     "divergence_bound"});
    r.get(*it, "L", c.sampler.L, w);
    r.get(*it, "step", c.sampler.step, w);
    r.get(*it, "burn_in", c.sampler.burn_in, w);
    r.get(*it, "samples", c.sampler.samples, w);
    r.get(*it, "stride", c.sampler.stride, w);
    r.get(*it, "batches", c.sampler.batches, w);
    r.get(*it, "spatial_average", c.sampler.spatial_average, w);
    r.get(*it, "divergence_bound", c.sampler.divergence_bound, w);
  }

  if (auto it = j.find("tilts"); it != j.end()) {
    if (it->is_array()) {
      for (const json& a : *it) {
        TiltAxis ax;
        if (!a.is_object()) {
          r.fail("entries of 'tilts' must be objects");
          continue;
        }
        r.allow(a, "tilts[].", {"lo", "hi", "nodes"});
        r.get(a, "lo", ax.lo, "tilts[].");
        r.get(a, "hi", ax.hi, "tilts[].");
        r.get(a, "nodes", ax.nodes, "tilts[].");
        c.tilts.push_back(ax);
      }
    } else {
      r.fail("key 'tilts' must be an array");
    }
  }

  if (auto it = j.find("thresholds"); it != j.end() && it->is_object()) {
    r.allow(*it, "thresholds.", {"hm1", "energy"});
    r.get(*it, "hm1", c.hm1_threshold, "thresholds.");
    r.get(*it, "energy", c.energy_threshold, "thresholds.");
  }

  // semantic checks
  const int d = c.dim();
  if (d < 1 || d > kMaxDim) r.fail("domain dimension must be 1, 2 or 3");
  if (c.domain.type == "box" || c.domain.type == "grid") {
    if (c.domain.lo.size() != c.domain.hi.size()) r.fail("domain.lo and domain.hi differ in length");
  }
  if (errors.empty()) {
    try {
      (void)c.domain.build();
    } catch (const Error& e) {
      r.fail(std::string("invalid domain: ") + e.what());
    }
    try {
      c.potential.validate();
    } catch (const Error& e) {
      r.fail(std::string("invalid potential: ") + e.what());
    }
    try {
      (void)c.initial.profile(c.domain.build());
    } catch (const Error& e) {
      r.fail(e.what());
    }
  }
  if (c.N < 1) r.fail("N must be positive");
  for (int n : c.N_list) {
    if (n < 1) r.fail("entries of N_list must be positive");
  }
  if (c.T < 0.0) r.fail("T must be non-negative");
  if (c.cadence < 0.0) r.fail("cadence must be non-negative");
  if (c.replicas < 1) r.fail("replicas must be at least 1");
  if (c.noise_amplitude < 0.0) r.fail("noise_amplitude must be non-negative");
  if (c.initial.width <= 0.0) r.fail("initial.width must be positive");
  if (c.sigma.backend != "quadratic" && c.sigma.backend != "table") {
    r.fail("unknown sigma backend '" + c.sigma.backend + "'");
  }
  if (c.sigma.backend == "table" && c.sigma.table.empty()) r.fail("sigma.table path is required");
  const bool uses_model = c.experiment == Experiment::SolvePde || c.experiment == Experiment::Wulff ||
                          c.experiment == Experiment::Oscillation;
  if (uses_model && c.sigma.backend == "quadratic" && c.potential.kind != PotentialKind::Quadratic) {
    r.fail("sigma backend 'quadratic' needs the quadratic potential");
  }
  if (c.sigma.delta < 0.0 || c.sigma.delta > 1.0) r.fail("sigma.delta must lie in [0, 1]");
  if (d >= 1 && c.direction >= d) r.fail("direction must be below the dimension");

  if (d >= 1 && d <= kMaxDim && c.dtau > 0.0) {
    const double bound = SdeConfig::stability_bound(d, c.potential);
    if (c.dtau > bound) {
      r.fail("dtau = " + fmt(c.dtau) + " exceeds the stability bound 0.9/(c+ * 4d * 2d) = " +
             fmt(bound));
    }
  }
  if (d >= 1 && d <= kMaxDim && c.dt > 0.0 && c.integrator == Integrator::Explicit &&
      c.sigma.backend == "quadratic") {
    std::vector<int> ns = c.N_list;
    ns.push_back(c.N);
    for (int n : ns) {
      const double bound = 0.9 / (c.potential.c_plus() * 16.0 * d * d * std::pow(n, 4));
      if (c.dt > bound) {
        r.fail("dt = " + fmt(c.dt) + " exceeds the explicit stability bound " +
               "0.9/(c+ (4d)^2 N^4) = " + fmt(bound) + " at N = " + std::to_string(n));
        break;
      }
    }
  }

  switch (c.experiment) {
    case Experiment::EstimateSigma:
      if (static_cast<int>(c.tilts.size()) != d) r.fail("tilts needs one axis per dimension");
      for (const auto& ax : c.tilts) {
        if (ax.nodes < 2 || !(ax.lo < ax.hi)) r.fail("each tilt axis needs lo < hi and nodes >= 2");
      }
      if (c.sampler.L < 8) r.fail("sampler.L must be at least 8");
      if (c.sampler.burn_in < 1000) r.fail("sampler.burn_in must be at least 1000");
      break;
    case Experiment::ConvergenceStudy:
      if (c.N_list.empty()) r.fail("convergence-study needs N_list");
      if (c.times.empty()) r.fail("convergence-study needs times");
      if (c.replicas < 100) r.fail("convergence-study needs replicas >= 100");
      if (c.potential.kind != PotentialKind::Quadratic) {
        r.fail("convergence-study needs the quadratic potential");
      }
      break;
    case Experiment::Oscillation:
      if (c.N_list.empty()) r.fail("oscillation needs N_list");
      if (c.cadence <= 0.0) r.fail("oscillation needs a positive cadence");
      break;
    case Experiment::Wulff:
      if (c.cadence <= 0.0) r.fail("wulff needs a positive cadence for the steady-state detector");
      if (c.T <= 0.0) r.fail("wulff needs a positive horizon T");
      break;
    default:
      break;
  }

  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["experiment"] = experiment_name(c.experiment);
  json d;
  d["type"] = c.domain.type;
  if (c.domain.type == "ball") {
    d["center"] = c.domain.center;
    d["radius"] = c.domain.radius;
  } else {
    d["lo"] = c.domain.lo;
    d["hi"] = c.domain.hi;
  }
  if (c.domain.type == "grid") {
    d["cells"] = c.domain.cells;
    d["flags"] = c.domain.flags;
  }
  j["domain"] = d;
  j["assumption_bound"] = c.assumption_bound;
  j["N"] = c.N;
  j["N_list"] = c.N_list;
  j["potential"] = {{"kind", c.potential.id()}, {"kappa", c.potential.kappa}, {"b", c.potential.b}};
  j["sigma"] = {{"backend", c.sigma.backend}, {"table", c.sigma.table}, {"delta", c.sigma.delta}};
  j["initial"] = {{"kind", c.initial.kind},
                  {"amplitude", c.initial.amplitude},
                  {"center", c.initial.center},
                  {"width", c.initial.width}};
  j["integrator"] = c.integrator == Integrator::Explicit ? "explicit" : "semi-implicit";
  j["dt"] = c.dt;
  j["dtau"] = c.dtau;
  j["T"] = c.T;
  j["cadence"] = c.cadence;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["noise_amplitude"] = c.noise_amplitude;
  j["per_replica_rows"] = c.per_replica_rows;
  j["snapshots"] = c.snapshots;
  j["sampler"] = {{"L", c.sampler.L},
                  {"step", c.sampler.step},
                  {"burn_in", c.sampler.burn_in},
                  {"samples", c.sampler.samples},
                  {"stride", c.sampler.stride},
                  {"batches", c.sampler.batches},
                  {"spatial_average", c.sampler.spatial_average},
                  {"divergence_bound", c.sampler.divergence_bound}};
  json tilts = json::array();
  for (const auto& ax : c.tilts) tilts.push_back({{"lo", ax.lo}, {"hi", ax.hi}, {"nodes", ax.nodes}});
  j["tilts"] = tilts;
  j["times"] = c.times;
  j["volume"] = c.volume;
  j["direction"] = c.direction;
  j["N_ref"] = c.N_ref;
  j["thresholds"] = {{"hm1", c.hm1_threshold}, {"energy", c.energy_threshold}};
  j["out"] = c.out;
  return j.dump(2);
}

}  // namespace cglab
