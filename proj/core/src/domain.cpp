#include "cglab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cglab/errors.hpp"

namespace cglab {

namespace {

constexpr double kEdgeTol = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Point to_point(std::span<const double> v) {
  if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
    throw DomainError("domain dimension must be between 1 and 3");
  }
  Point p{};
  std::copy(v.begin(), v.end(), p.begin());
  return p;
}

bool near_integer(double t, long long& k) {
  const double r = std::round(t);
  if (std::abs(t - r) < kEdgeTol) {
    k = static_cast<long long>(r);
    return true;
  }
  return false;
}

// Cell index range of an indicator grid touched by the half-open interval [a, b) (a == b: the point a).
bool grid_axis_range(const IndicatorGridShape& g, int axis, double a, double b, int& jlo,
                     int& jhi) {
  const double h = g.cell_width(axis);
  const double ta = (a - g.lo[axis]) / h;
  const double tb = (b - g.lo[axis]) / h;
  long long k = 0;
  if (near_integer(ta, k)) {
    jlo = static_cast<int>(k - 1);
  } else {
    jlo = static_cast<int>(std::floor(ta));
  }
  if (b == a) {
    jhi = near_integer(ta, k) ? static_cast<int>(k) : static_cast<int>(std::floor(ta));
  } else if (near_integer(tb, k)) {
    jhi = static_cast<int>(k - 1);
  } else {
    jhi = static_cast<int>(std::ceil(tb)) - 1;
  }
  return jlo >= 0 && jhi < g.cells[axis] && jlo <= jhi;
}

bool grid_all_flagged(const IndicatorGridShape& g, int dim, const std::array<int, kMaxDim>& lo,
                      const std::array<int, kMaxDim>& hi) {
  std::array<int, kMaxDim> j = lo;
  while (true) {
    std::size_t lin = 0;
    std::size_t stride = 1;
    for (int i = 0; i < dim; ++i) {
      lin += static_cast<std::size_t>(j[i]) * stride;
      stride *= static_cast<std::size_t>(g.cells[i]);
    }
    if (!g.flags[lin]) return false;
    int i = 0;
    for (; i < dim; ++i) {
      if (++j[i] <= hi[i]) break;
      j[i] = lo[i];
    }
    if (i == dim) return true;
  }
}

bool grid_contains_box(const IndicatorGridShape& g, int dim, const Point& a, const Point& b) {
  std::array<int, kMaxDim> lo{};
  std::array<int, kMaxDim> hi{};
  for (int i = 0; i < dim; ++i) {
    if (!grid_axis_range(g, i, a[i], b[i], lo[i], hi[i])) return false;
  }
  return grid_all_flagged(g, dim, lo, hi);
}

}  // namespace

// ---------------------------------------------------------------------------
// MacroDomain

MacroDomain::MacroDomain(int dim, ShapeDescriptor shape) : dim_(dim), shape_(std::move(shape)) {
  validate();
}

MacroDomain MacroDomain::box(std::span<const double> lo, std::span<const double> hi) {
  if (lo.size() != hi.size()) throw DomainError("box bounds have mismatched dimensions");
  return MacroDomain(static_cast<int>(lo.size()), BoxShape{to_point(lo), to_point(hi)});
}

MacroDomain MacroDomain::ball(std::span<const double> center, double radius) {
  return MacroDomain(static_cast<int>(center.size()), BallShape{to_point(center), radius});
}

MacroDomain MacroDomain::indicator_grid(std::span<const double> lo, std::span<const double> hi,
                                        std::span<const int> cells,
                                        std::vector<std::uint8_t> flags) {
  if (lo.size() != hi.size() || lo.size() != cells.size()) {
    throw DomainError("indicator grid bounds and cell counts have mismatched dimensions");
  }
  IndicatorGridShape g;
  g.lo = to_point(lo);
  g.hi = to_point(hi);
  std::copy(cells.begin(), cells.end(), g.cells.begin());
  g.flags = std::move(flags);
  return MacroDomain(static_cast<int>(lo.size()), std::move(g));
}

void MacroDomain::validate() const {
  if (dim_ < 1 || dim_ > kMaxDim) throw DomainError("domain dimension must be between 1 and 3");
  std::visit(
      Overloaded{
          [&](const BoxShape& b) {
            for (int i = 0; i < dim_; ++i) {
              if (!(b.lo[i] < b.hi[i])) throw DomainError("box must satisfy lo < hi on every axis");
              if (b.lo[i] > 0.0 || b.hi[i] < 0.0) {
                throw DomainError("box closure must contain the origin");
              }
            }
          },
          [&](const BallShape& b) {
            if (!(b.radius > 0.0)) throw DomainError("ball radius must be positive");
            double r2 = 0.0;
            for (int i = 0; i < dim_; ++i) r2 += b.center[i] * b.center[i];
            if (std::sqrt(r2) > b.radius) throw DomainError("ball closure must contain the origin");
          },
          [&](const IndicatorGridShape& g) {
            std::size_t total = 1;
            for (int i = 0; i < dim_; ++i) {
              if (g.cells[i] < 1) throw DomainError("indicator grid needs at least one cell per axis");
              if (!(g.lo[i] < g.hi[i])) throw DomainError("indicator grid must satisfy lo < hi");
              total *= static_cast<std::size_t>(g.cells[i]);
            }
            if (g.flags.size() != total) {
              throw DomainError("indicator grid flag count does not match cell counts");
            }
            // connectivity of flagged cells through shared faces
            std::vector<char> seen(total, 0);
            std::size_t start = total;
            std::size_t flagged = 0;
            for (std::size_t c = 0; c < total; ++c) {
              if (g.flags[c]) {
                ++flagged;
                if (start == total) start = c;
              }
            }
            if (flagged == 0) throw DomainError("indicator grid has no flagged cells");
            std::deque<std::size_t> queue{start};
            seen[start] = 1;
            std::size_t reached = 1;
            while (!queue.empty()) {
              const std::size_t c = queue.front();
              queue.pop_front();
              std::size_t stride = 1;
              std::size_t rest = c;
              for (int i = 0; i < dim_; ++i) {
                const auto n = static_cast<std::size_t>(g.cells[i]);
                const std::size_t ci = rest % n;
                rest /= n;
                for (int s : {-1, +1}) {
                  if ((s < 0 && ci == 0) || (s > 0 && ci + 1 == n)) continue;
                  const std::size_t nb = s < 0 ? c - stride : c + stride;
                  if (g.flags[nb] && !seen[nb]) {
                    seen[nb] = 1;
                    ++reached;
                    queue.push_back(nb);
                  }
                }
                stride *= n;
              }
            }
            if (reached != flagged) throw DomainError("indicator grid domain is not connected");
            Point origin{};
            std::array<int, kMaxDim> lo{};
            std::array<int, kMaxDim> hi{};
            bool touches = true;
            for (int i = 0; i < dim_; ++i) {
              const double h = g.cell_width(i);
              const double t = (origin[i] - g.lo[i]) / h;
              long long k = 0;
              if (near_integer(t, k)) {
                lo[i] = static_cast<int>(std::max<long long>(k - 1, 0));
                hi[i] = static_cast<int>(std::min<long long>(k, g.cells[i] - 1));
              } else {
                lo[i] = hi[i] = static_cast<int>(std::floor(t));
              }
              if (t < -kEdgeTol || t > g.cells[i] + kEdgeTol) touches = false;
            }
            bool any = false;
            if (touches) {
              std::array<int, kMaxDim> j = lo;
              while (true) {
                std::size_t lin = 0;
                std::size_t stride = 1;
                for (int i = 0; i < dim_; ++i) {
                  lin += static_cast<std::size_t>(j[i]) * stride;
                  stride *= static_cast<std::size_t>(g.cells[i]);
                }
                any = any || g.flags[lin];
                int i = 0;
                for (; i < dim_; ++i) {
                  if (++j[i] <= hi[i]) break;
                  j[i] = lo[i];
                }
                if (i == dim_) break;
              }
            }
            if (!any) throw DomainError("indicator grid closure must contain the origin");
          }},
      shape_);
}

bool MacroDomain::contains(const Point& p) const {
  return std::visit(Overloaded{[&](const BoxShape& b) {
                                 for (int i = 0; i < dim_; ++i) {
                                   if (!(b.lo[i] < p[i] && p[i] < b.hi[i])) return false;
                                 }
                                 return true;
                               },
                               [&](const BallShape& b) {
                                 double r2 = 0.0;
                                 for (int i = 0; i < dim_; ++i) {
                                   const double dx = p[i] - b.center[i];
                                   r2 += dx * dx;
                                 }
                                 return r2 < b.radius * b.radius;
                               },
                               [&](const IndicatorGridShape& g) {
                                 return grid_contains_box(g, dim_, p, p);
                               }},
                    shape_);
}

bool MacroDomain::contains_cube(const Point& center, double side) const {
  Point a{};
  Point b{};
  for (int i = 0; i < dim_; ++i) {
    a[i] = center[i] - 0.5 * side;
    b[i] = center[i] + 0.5 * side;
  }
  return std::visit(Overloaded{[&](const BoxShape& box) {
                                 for (int i = 0; i < dim_; ++i) {
                                   if (!(box.lo[i] < a[i] && b[i] <= box.hi[i])) return false;
                                 }
                                 return true;
                               },
                               [&](const BallShape& ball) {
                                 // every corner of the closed cube strictly inside
                                 for (int mask = 0; mask < (1 << dim_); ++mask) {
                                   double r2 = 0.0;
                                   for (int i = 0; i < dim_; ++i) {
                                     const double c = (mask >> i & 1) ? b[i] : a[i];
                                     const double dx = c - ball.center[i];
                                     r2 += dx * dx;
                                   }
                                   if (!(r2 < ball.radius * ball.radius)) return false;
                                 }
                                 return true;
                               },
                               [&](const IndicatorGridShape& g) {
                                 return grid_contains_box(g, dim_, a, b);
                               }},
                    shape_);
}

std::pair<Point, Point> MacroDomain::bounding_box() const {
  return std::visit(Overloaded{[&](const BoxShape& b) { return std::make_pair(b.lo, b.hi); },
                               [&](const BallShape& b) {
                                 Point lo{};
                                 Point hi{};
                                 for (int i = 0; i < dim_; ++i) {
                                   lo[i] = b.center[i] - b.radius;
                                   hi[i] = b.center[i] + b.radius;
                                 }
                                 return std::make_pair(lo, hi);
                               },
                               [&](const IndicatorGridShape& g) {
                                 return std::make_pair(g.lo, g.hi);
                               }},
                    shape_);
}

double MacroDomain::volume() const {
  return std::visit(Overloaded{[&](const BoxShape& b) {
                                 double v = 1.0;
                                 for (int i = 0; i < dim_; ++i) v *= b.hi[i] - b.lo[i];
                                 return v;
                               },
                               [&](const BallShape& b) {
                                 constexpr double kPi = 3.14159265358979323846;
                                 switch (dim_) {
                                   case 1: return 2.0 * b.radius;
                                   case 2: return kPi * b.radius * b.radius;
                                   default: return 4.0 / 3.0 * kPi * std::pow(b.radius, 3);
                                 }
                               },
                               [&](const IndicatorGridShape& g) {
                                 double cell = 1.0;
                                 for (int i = 0; i < dim_; ++i) cell *= g.cell_width(i);
                                 const auto n = std::count(g.flags.begin(), g.flags.end(),
                                                           std::uint8_t{1});
                                 return cell * static_cast<double>(n);
                               }},
                    shape_);
}

std::string MacroDomain::describe() const {
  std::ostringstream os;
  os << "d=" << dim_ << " ";
  std::visit(Overloaded{[&](const BoxShape& b) {
                          os << "box";
                          for (int i = 0; i < dim_; ++i) os << " [" << b.lo[i] << "," << b.hi[i] << "]";
                        },
                        [&](const BallShape& b) {
                          os << "ball center(";
                          for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << b.center[i];
                          os << ") r=" << b.radius;
                        },
                        [&](const IndicatorGridShape& g) {
                          os << "grid";
                          for (int i = 0; i < dim_; ++i) os << " " << g.cells[i];
                        }},
             shape_);
  return os.str();
}

// ---------------------------------------------------------------------------
// LatticeDomain

LatticeDomain::LatticeDomain(MacroDomain macro, int N) : macro_(std::move(macro)), N_(N) {}

std::int64_t LatticeDomain::grid_linear(const Site& x) const {
  std::int64_t lin = 0;
  std::int64_t stride = 1;
  for (int i = 0; i < dim(); ++i) {
    const int c = x[i] - grid_origin_[i];
    if (c < 0 || c >= grid_extent_[i]) return -1;
    lin += c * stride;
    stride *= grid_extent_[i];
  }
  return lin;
}

int LatticeDomain::index_of(const Site& x) const {
  const auto lin = grid_linear(x);
  return lin < 0 ? -1 : grid_id_[static_cast<std::size_t>(lin)];
}

int LatticeDomain::tilde_index_of(const Site& x) const {
  const auto lin = grid_linear(x);
  return lin < 0 ? -1 : grid_tilde_id_[static_cast<std::size_t>(lin)];
}

std::pair<int, int> LatticeDomain::layer_range(int i) const {
  if (i < 0 || i + 1 >= static_cast<int>(layer_offsets_.size())) {
    throw PreconditionError("boundary layer index out of range");
  }
  return {layer_offsets_[i], layer_offsets_[i + 1]};
}

int LatticeDomain::layer_of(int id) const {
  for (std::size_t i = 0; i + 1 < layer_offsets_.size(); ++i) {
    if (id >= layer_offsets_[i] && id < layer_offsets_[i + 1]) return static_cast<int>(i);
  }
  return -1;
}

int LatticeDomain::dn_degree(int id) const {
  int deg = 0;
  for (int dir = 0; dir < directions(); ++dir) deg += in_dn(neighbor(id, dir)) ? 1 : 0;
  return deg;
}

Point LatticeDomain::position(const Site& x) const {
  Point p{};
  for (int i = 0; i < dim(); ++i) p[i] = static_cast<double>(x[i]) / N_;
  return p;
}

std::shared_ptr<const LatticeDomain> LatticeDomain::build(MacroDomain macro, int N,
                                                          int layer_depth) {
  if (N < 1) throw DomainError("resolution N must be positive");
  if (layer_depth < 1) throw DomainError("boundary layer depth must be at least 1");
  std::shared_ptr<LatticeDomain> ld(new LatticeDomain(std::move(macro), N));
  const int d = ld->dim();
  const auto [blo, bhi] = ld->macro_.bounding_box();
  const int pad = std::max(layer_depth, 2) + 1;

  for (int i = 0; i < d; ++i) {
    const int lo = static_cast<int>(std::floor(blo[i] * N)) - pad;
    const int hi = static_cast<int>(std::ceil(bhi[i] * N)) + pad;
    ld->grid_origin_[i] = lo;
    ld->grid_extent_[i] = hi - lo + 1;
  }
  std::size_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= static_cast<std::size_t>(ld->grid_extent_[i]);
  ld->grid_id_.assign(cells, -1);
  ld->grid_tilde_id_.assign(cells, -1);

  auto site_of = [&](std::size_t lin) {
    Site x{};
    for (int i = 0; i < d; ++i) {
      const auto n = static_cast<std::size_t>(ld->grid_extent_[i]);
      x[i] = ld->grid_origin_[i] + static_cast<int>(lin % n);
      lin /= n;
    }
    return x;
  };

  const double margin = static_cast<double>(kCubeMargin) / N;
  std::vector<Site> dn;
  for (std::size_t lin = 0; lin < cells; ++lin) {
    const Site x = site_of(lin);
    const Point p = ld->position(x);
    if (!ld->macro_.contains(p)) continue;
    ld->grid_tilde_id_[lin] = static_cast<int>(ld->tilde_sites_.size());
    ld->tilde_sites_.push_back(x);
    if (ld->macro_.contains_cube(p, margin)) dn.push_back(x);
  }
  if (dn.empty()) {
    throw DomainError("D_N is empty for N=" + std::to_string(N) + " on " +
                      ld->macro_.describe());
  }

  // multi-source BFS on Z^d for boundary layers
  std::vector<int> dist(cells, -1);
  std::deque<std::size_t> queue;
  for (const Site& x : dn) {
    const auto lin = static_cast<std::size_t>(ld->grid_linear(x));
    dist[lin] = 0;
    queue.push_back(lin);
  }
  std::vector<std::vector<Site>> layers(static_cast<std::size_t>(layer_depth) + 1);
  while (!queue.empty()) {
    const std::size_t lin = queue.front();
    queue.pop_front();
    if (dist[lin] == layer_depth) continue;
    const Site x = site_of(lin);
    for (int i = 0; i < d; ++i) {
      for (int s : {+1, -1}) {
        Site y = x;
        y[i] += s;
        const auto ylin = ld->grid_linear(y);
        if (ylin < 0) throw DomainError("internal: boundary layer left the padded grid");
        if (dist[static_cast<std::size_t>(ylin)] >= 0) continue;
        dist[static_cast<std::size_t>(ylin)] = dist[lin] + 1;
        queue.push_back(static_cast<std::size_t>(ylin));
      }
    }
  }
  for (std::size_t lin = 0; lin < cells; ++lin) {
    if (dist[lin] > 0) layers[static_cast<std::size_t>(dist[lin])].push_back(site_of(lin));
  }
  layers[0] = std::move(dn);

  ld->layer_offsets_.push_back(0);
  for (auto& layer : layers) {
    // lattice order == grid linear order
    std::sort(layer.begin(), layer.end(), [&](const Site& a, const Site& b) {
      return ld->grid_linear(a) < ld->grid_linear(b);
    });
    for (const Site& x : layer) {
      ld->grid_id_[static_cast<std::size_t>(ld->grid_linear(x))] =
          static_cast<int>(ld->sites_.size());
      ld->sites_.push_back(x);
    }
    ld->layer_offsets_.push_back(static_cast<int>(ld->sites_.size()));
  }
  ld->n_dn_ = ld->layer_offsets_[1];
  ld->n_closure_ = ld->layer_offsets_[2];

  const int dirs = ld->directions();
  ld->neighbors_.assign(ld->sites_.size() * static_cast<std::size_t>(dirs), -1);
  for (std::size_t id = 0; id < ld->sites_.size(); ++id) {
    for (int i = 0; i < d; ++i) {
      for (int s = 0; s < 2; ++s) {
        Site y = ld->sites_[id];
        y[i] += s == 0 ? 1 : -1;
        ld->neighbors_[id * dirs + 2 * i + s] = ld->index_of(y);
      }
    }
  }

  for (int id = 0; id < ld->n_dn_; ++id) {
    for (int i = 0; i < d; ++i) {
      for (int s = 0; s < 2; ++s) {
        const int nb = ld->neighbor(id, 2 * i + s);
        const int sign = s == 0 ? +1 : -1;
        const Bond out{id, nb, i, sign};
        const Bond in{nb, id, i, -sign};
        ld->bonds_closure_.push_back(out);
        if (ld->in_dn(nb)) {
          ld->bonds_dn_.push_back(out);
          if (sign > 0) ld->positive_bonds_dn_.push_back(out);
        } else {
          ld->bonds_closure_.push_back(in);
        }
        if (sign > 0) {
          ld->positive_bonds_closure_.push_back(out);
        } else if (!ld->in_dn(nb)) {
          ld->positive_bonds_closure_.push_back(Bond{nb, id, i, +1});
        }
      }
    }
  }
  return ld;
}

// ---------------------------------------------------------------------------
// graph distances and the boundary regularity check

namespace {

// BFS distances inside N D cap Z^d from one source, truncated at max_depth (-1 = unbounded).
std::unordered_map<int, int> bfs_tilde(const LatticeDomain& ld, int source, int max_depth) {
  std::unordered_map<int, int> dist;
  dist[source] = 0;
  std::deque<int> queue{source};
  const auto tilde = ld.tilde_sites();
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    const int dt = dist[t];
    if (max_depth >= 0 && dt >= max_depth) continue;
    const Site& x = tilde[static_cast<std::size_t>(t)];
    for (int i = 0; i < ld.dim(); ++i) {
      for (int s : {+1, -1}) {
        Site y = x;
        y[i] += s;
        const int ty = ld.tilde_index_of(y);
        if (ty < 0 || dist.contains(ty)) continue;
        dist[ty] = dt + 1;
        queue.push_back(ty);
      }
    }
  }
  return dist;
}

}  // namespace

int graph_distance(const LatticeDomain& ld, const Site& x, const Site& y) {
  const int tx = ld.tilde_index_of(x);
  const int ty = ld.tilde_index_of(y);
  if (tx < 0 || ty < 0) throw PreconditionError("graph_distance: site outside N D");
  if (tx == ty) return 0;
  const auto dist = bfs_tilde(ld, tx, -1);
  const auto it = dist.find(ty);
  return it == dist.end() ? kUnreachable : it->second;
}

AssumptionReport check_assumption_domain(const LatticeDomain& ld, int bound) {
  AssumptionReport report;
  report.bound = bound;
  const int d = ld.dim();

  // offsets o with |o| <= 2
  std::vector<Site> offsets;
  {
    Site o{};
    std::array<int, kMaxDim> lo{};
    std::array<int, kMaxDim> hi{};
    for (int i = 0; i < d; ++i) {
      lo[i] = -2;
      hi[i] = 2;
    }
    o = lo;
    while (true) {
      int r2 = 0;
      for (int i = 0; i < d; ++i) r2 += o[i] * o[i];
      if (r2 <= 4) offsets.push_back(o);
      int i = 0;
      for (; i < d; ++i) {
        if (++o[i] <= hi[i]) break;
        o[i] = lo[i];
      }
      if (i == d) break;
    }
  }

  // exterior sites z adjacent (within 2) to N D cap Z^d
  std::vector<Site> exterior;
  {
    std::vector<Site> seen;
    for (const Site& x : ld.tilde_sites()) {
      for (const Site& o : offsets) {
        Site z{};
        for (int i = 0; i < d; ++i) z[i] = x[i] + o[i];
        if (ld.tilde_index_of(z) < 0) seen.push_back(z);
      }
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    exterior = std::move(seen);
  }

  std::unordered_map<int, std::unordered_map<int, int>> cache;
  for (const Site& z : exterior) {
    std::vector<int> near;
    for (const Site& o : offsets) {
      Site x{};
      for (int i = 0; i < d; ++i) x[i] = z[i] + o[i];
      const int t = ld.tilde_index_of(x);
      if (t >= 0) near.push_back(t);
    }
    for (std::size_t a = 0; a < near.size(); ++a) {
      auto it = cache.find(near[a]);
      if (it == cache.end()) it = cache.emplace(near[a], bfs_tilde(ld, near[a], bound + 1)).first;
      for (std::size_t b = a + 1; b < near.size(); ++b) {
        const auto jt = it->second.find(near[b]);
        const int dist = jt == it->second.end() ? bound + 1 : jt->second;
        if (dist > bound) {
          if (report.satisfied) {
            report.satisfied = false;
            report.witness = AssumptionWitness{ld.tilde_sites()[static_cast<std::size_t>(near[a])],
                                               ld.tilde_sites()[static_cast<std::size_t>(near[b])],
                                               z, dist};
          }
        } else {
          report.max_distance = std::max(report.max_distance, dist);
        }
      }
    }
  }
  return report;
}

}  // namespace cglab
