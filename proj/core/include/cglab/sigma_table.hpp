#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cglab/gibbs_sampler.hpp"

namespace cglab {

struct TiltAxis {
  double lo = -1.0;
  double hi = 1.0;
  int nodes = 2;

  double node(int k) const { return lo + (hi - lo) * k / (nodes - 1); }
};

/// Monte Carlo estimates of grad sigma, A and a on a rectangular tilt grid.
/// Nodes are stored with axis 0 varying fastest; per node d values each.
struct SigmaTable {
  static constexpr int kFormatVersion = 1;

  std::vector<TiltAxis> axes;
  Potential potential;
  SamplerConfig sampler;
  std::uint64_t seed = 1;

  std::vector<double> grad, grad_se;
  std::vector<double> A_diag, A_se;
  std::vector<double> a, a_se;

  int dim() const noexcept { return static_cast<int>(axes.size()); }
  int node_count() const;
  std::vector<double> node_tilt(int node) const;
};

/// Runs one sampler per grid node; node k uses RNG stream k of the base seed.
SigmaTable tabulate_grad_sigma(const std::vector<TiltAxis>& axes, const Potential& potential,
                               const SamplerConfig& sampler, std::uint64_t seed,
                               int workers = 1);

void save_sigma_table(const SigmaTable& table, const std::filesystem::path& path);
SigmaTable load_sigma_table(const std::filesystem::path& path);
/// One row per node: tilt components, then grad, grad_se, A, A_se, a, a_se per axis.
void export_sigma_table_csv(const SigmaTable& table, const std::filesystem::path& path);

}  // namespace cglab
