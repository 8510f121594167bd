#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cglab/domain.hpp"
#include "cglab/gibbs_sampler.hpp"
#include "cglab/pde.hpp"
#include "cglab/potential.hpp"
#include "cglab/sigma_table.hpp"

namespace cglab {

enum class Experiment {
  DumpDomain,
  SimulateSde,
  SolvePde,
  EstimateSigma,
  Wulff,
  ConvergenceStudy,
  Oscillation,
};

std::string experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

struct DomainSpec {
  std::string type = "box";  // box | ball | grid
  std::vector<double> lo, hi;
  std::vector<double> center;
  double radius = 0.0;
  std::vector<int> cells;
  std::vector<int> flags;

  MacroDomain build() const;
};

struct SigmaSpec {
  std::string backend = "quadratic";  // quadratic | table
  std::string table;                  // path of a saved table
  double delta = 0.0;                 // mollification width, 0 disables
};

/// Macroscopic initial profile h0 on D.
struct InitialSpec {
  std::string kind = "zero";  // zero | constant | bump | sine
  double amplitude = 1.0;
  std::vector<double> center;  // bump centre, defaults to the bounding-box centre
  double width = 0.25;         // bump half-width

  std::function<double(const Point&)> profile(const MacroDomain& domain) const;
};

struct RunConfig {
  Experiment experiment = Experiment::SimulateSde;
  DomainSpec domain;
  int assumption_bound = 8;
  int N = 16;
  std::vector<int> N_list;
  Potential potential;
  SigmaSpec sigma;
  InitialSpec initial;
  Integrator integrator = Integrator::Explicit;
  double dt = 0.0;
  double dtau = 0.0;
  double T = 0.0;
  double cadence = 0.0;
  int replicas = 1;
  std::uint64_t seed = 1;
  double noise_amplitude = 1.4142135623730951;
  bool per_replica_rows = false;
  bool snapshots = false;
  SamplerConfig sampler;
  std::vector<TiltAxis> tilts;
  std::vector<double> times;
  double volume = 0.0;
  int direction = 0;
  int N_ref = 0;
  double hm1_threshold = 1e-4;
  double energy_threshold = 1e-6;
  std::string out = "out";

  int dim() const { return static_cast<int>(domain.lo.empty() ? domain.center.size() : domain.lo.size()); }
  /// The surface tension model named by sigma/potential; loads tables from disk.
  ModelPtr make_model() const;
};

/// Parses and validates a JSON run configuration. Throws ConfigError listing
/// every problem found; syntax errors carry line and column.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical JSON echo with every default filled in.
std::string config_to_json(const RunConfig& cfg);

}  // namespace cglab
