#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cglab/config.hpp"
#include "cglab/errors.hpp"
#include "cglab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lattice interface dynamics: simulate, solve, estimate and compare."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool have_seed = false;

  const char* commands[][2] = {
      {"dump-domain", "emit the site and bond lists of a lattice domain"},
      {"simulate-sde", "run the conserved Langevin dynamics"},
      {"solve-pde", "integrate the fourth-order gradient flow"},
      {"estimate-sigma", "tabulate the surface tension gradient by Monte Carlo"},
      {"wulff", "compare the PDE steady state with the constrained minimizer"},
      {"convergence-study", "SDE ensemble error against a fine PDE reference"},
      {"oscillation", "oscillation sums over a list of resolutions"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory, overrides the config");
    sub->add_option("--seed", seed, "random seed, overrides the config")->each([&](const std::string&) {
      have_seed = true;
    });
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    cglab::RunConfig cfg = cglab::load_config(config_path);
    if (cglab::experiment_name(cfg.experiment) != command) {
      throw cglab::ConfigError("config experiment '" + cglab::experiment_name(cfg.experiment) +
                               "' does not match subcommand '" + command + "'");
    }
    if (!out_dir.empty()) cfg.out = out_dir;
    if (have_seed) cfg.seed = seed;
    const cglab::RunManifest m = cglab::dispatch(cfg);
    for (const auto& [name, pass] : m.criteria) {
      std::cout << (pass ? "PASS " : "FAIL ") << name << "\n";
    }
    std::cout << "wrote " << m.outputs.size() << " files to " << cfg.out << "\n";
    return m.all_pass() ? EXIT_SUCCESS : EXIT_FAILURE;
  } catch (const std::exception& e) {
    std::cerr << cglab::error_report(e) << "\n";
    return 2;
  }
}
