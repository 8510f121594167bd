#include "cglab/sigma_table.hpp"

#include <fstream>
#include <sstream>

#include "cglab/csv.hpp"
#include "cglab/errors.hpp"
#include "cglab/parallel.hpp"

namespace cglab {

int SigmaTable::node_count() const {
  int n = 1;
  for (const auto& ax : axes) n *= ax.nodes;
  return n;
}

std::vector<double> SigmaTable::node_tilt(int node) const {
  std::vector<double> u(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    u[i] = axes[i].node(node % axes[i].nodes);
    node /= axes[i].nodes;
  }
  return u;
}

SigmaTable tabulate_grad_sigma(const std::vector<TiltAxis>& axes, const Potential& potential,
                               const SamplerConfig& sampler, std::uint64_t seed, int workers) {
  if (axes.empty() || axes.size() > 3) throw PreconditionError("tilt grid needs 1 to 3 axes");
  for (const auto& ax : axes) {
    if (ax.nodes < 2 || !(ax.lo < ax.hi)) throw PreconditionError("invalid tilt axis");
  }
  SigmaTable t;
  t.axes = axes;
  t.potential = potential;
  t.sampler = sampler;
  t.seed = seed;
  const int d = t.dim();
  const auto total = static_cast<std::size_t>(t.node_count()) * d;
  for (auto* v : {&t.grad, &t.grad_se, &t.A_diag, &t.A_se, &t.a, &t.a_se}) v->assign(total, 0.0);

  parallel_for(t.node_count(), workers, [&](int node) {
    TiltedGibbsSampler s{potential, t.node_tilt(node), sampler, seed,
                         static_cast<std::uint64_t>(node)};
    const DecompositionEstimate e = estimate_A_a(s);
    for (int i = 0; i < d; ++i) {
      const std::size_t k = static_cast<std::size_t>(node) * d + i;
      const auto ui = static_cast<std::size_t>(i);
      t.grad[k] = e.grad.mean[ui];
      t.grad_se[k] = e.grad.se[ui];
      t.A_diag[k] = e.A_diag.mean[ui];
      t.A_se[k] = e.A_diag.se[ui];
      t.a[k] = e.a.mean[ui];
      t.a_se[k] = e.a.se[ui];
    }
  });
  return t;
}

void save_sigma_table(const SigmaTable& t, const std::filesystem::path& path) {
  std::ostringstream os;
  const int d = t.dim();
  os << "cglab-sigma-table " << SigmaTable::kFormatVersion << '\n';
  os << "dim " << d << '\n';
  for (const auto& ax : t.axes) {
    os << "axis " << format_double(ax.lo) << ' ' << format_double(ax.hi) << ' ' << ax.nodes << '\n';
  }
  os << "potential " << t.potential.id() << ' ' << format_double(t.potential.kappa) << ' '
     << format_double(t.potential.b) << '\n';
  const SamplerConfig& c = t.sampler;
  os << "sampler " << c.L << ' ' << format_double(c.step) << ' ' << c.burn_in << ' ' << c.samples
     << ' ' << c.stride << ' ' << c.batches << ' ' << (c.spatial_average ? 1 : 0) << ' '
     << format_double(c.divergence_bound) << '\n';
  os << "seed " << t.seed << '\n';
  os << "columns grad grad_se A A_se a a_se\n";
  os << "nodes " << t.node_count() << '\n';
  for (int node = 0; node < t.node_count(); ++node) {
    bool first = true;
    for (const auto* v : {&t.grad, &t.grad_se, &t.A_diag, &t.A_se, &t.a, &t.a_se}) {
      for (int i = 0; i < d; ++i) {
        if (!first) os << ' ';
        first = false;
        os << format_double((*v)[static_cast<std::size_t>(node) * d + i]);
      }
    }
    os << '\n';
  }
  write_file_atomic(path, os.str());
}

namespace {

std::string expect_word(std::istream& in, const std::string& word) {
  std::string w;
  if (!(in >> w) || w != word) throw Error("sigma table: expected '" + word + "', got '" + w + "'");
  return w;
}

double read_double(std::istream& in) {
  std::string w;
  if (!(in >> w)) throw Error("sigma table: unexpected end of file");
  return parse_double(w);
}

}  // namespace

SigmaTable load_sigma_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sigma table " + path.string());
  SigmaTable t;
  expect_word(in, "cglab-sigma-table");
  int version = 0;
  in >> version;
  if (version != SigmaTable::kFormatVersion) {
    throw Error("unsupported sigma table version " + std::to_string(version));
  }
  int d = 0;
  expect_word(in, "dim");
  in >> d;
  if (d < 1 || d > 3) throw Error("sigma table: bad dimension");
  for (int i = 0; i < d; ++i) {
    expect_word(in, "axis");
    TiltAxis ax;
    ax.lo = read_double(in);
    ax.hi = read_double(in);
    in >> ax.nodes;
    t.axes.push_back(ax);
  }
  expect_word(in, "potential");
  std::string id;
  in >> id;
  t.potential.kind = id == "quadratic" ? PotentialKind::Quadratic : PotentialKind::BoundedAnharmonic;
  if (id != "quadratic" && id != "anharmonic") throw Error("sigma table: unknown potential " + id);
  t.potential.kappa = read_double(in);
  t.potential.b = read_double(in);
  expect_word(in, "sampler");
  SamplerConfig& c = t.sampler;
  int avg = 1;
  in >> c.L;
  c.step = read_double(in);
  in >> c.burn_in >> c.samples >> c.stride >> c.batches >> avg;
  c.spatial_average = avg != 0;
  c.divergence_bound = read_double(in);
  expect_word(in, "seed");
  in >> t.seed;
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  if (line != "columns grad grad_se A A_se a a_se") throw Error("sigma table: bad column line");
  expect_word(in, "nodes");
  int nodes = 0;
  in >> nodes;
  if (!in || nodes != t.node_count()) throw Error("sigma table: node count mismatch");
  const auto total = static_cast<std::size_t>(nodes) * d;
  for (auto* v : {&t.grad, &t.grad_se, &t.A_diag, &t.A_se, &t.a, &t.a_se}) v->assign(total, 0.0);
  for (int node = 0; node < nodes; ++node) {
    for (auto* v : {&t.grad, &t.grad_se, &t.A_diag, &t.A_se, &t.a, &t.a_se}) {
      for (int i = 0; i < d; ++i) (*v)[static_cast<std::size_t>(node) * d + i] = read_double(in);
    }
  }
  return t;
}

void export_sigma_table_csv(const SigmaTable& t, const std::filesystem::path& path) {
  CsvTable csv;
  const int d = t.dim();
  for (int i = 0; i < d; ++i) csv.header.push_back("u" + std::to_string(i));
  for (const char* name : {"grad", "grad_se", "A", "A_se", "a", "a_se"}) {
    for (int i = 0; i < d; ++i) csv.header.push_back(std::string(name) + std::to_string(i));
  }
  for (int node = 0; node < t.node_count(); ++node) {
    std::vector<std::string> row;
    for (double u : t.node_tilt(node)) row.push_back(format_double(u));
    for (const auto* v : {&t.grad, &t.grad_se, &t.A_diag, &t.A_se, &t.a, &t.a_se}) {
      for (int i = 0; i < d; ++i) {
        row.push_back(format_double((*v)[static_cast<std::size_t>(node) * d + i]));
      }
    }
    csv.add_row(std::move(row));
  }
  write_csv(path, csv);
}

}  // namespace cglab
