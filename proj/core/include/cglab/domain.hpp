#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cglab {

inline constexpr int kMaxDim = 3;

/// Lattice site in Z^d; coordinates beyond the active dimension are zero.
using Site = std::array<int, kMaxDim>;
/// Point in R^d; coordinates beyond the active dimension are zero.
using Point = std::array<double, kMaxDim>;

struct BoxShape {
  Point lo{};
  Point hi{};
};

struct BallShape {
  Point center{};
  double radius = 0.0;
};

/// Union of closed cells of a uniform grid over [lo, hi]; the domain is its interior.
/// Flags are stored with axis 0 varying fastest.
struct IndicatorGridShape {
  Point lo{};
  Point hi{};
  std::array<int, kMaxDim> cells{1, 1, 1};
  std::vector<std::uint8_t> flags;

  double cell_width(int axis) const { return (hi[axis] - lo[axis]) / cells[axis]; }
};

using ShapeDescriptor = std::variant<BoxShape, BallShape, IndicatorGridShape>;

/// Bounded, connected open set D in R^d whose closure contains the origin.
class MacroDomain {
 public:
  static MacroDomain box(std::span<const double> lo, std::span<const double> hi);
  static MacroDomain ball(std::span<const double> center, double radius);
  static MacroDomain indicator_grid(std::span<const double> lo, std::span<const double> hi,
                                    std::span<const int> cells,
                                    std::vector<std::uint8_t> flags);

  int dim() const noexcept { return dim_; }
  const ShapeDescriptor& shape() const noexcept { return shape_; }

  /// Membership of p in the open set D.
  bool contains(const Point& p) const;
  /// True iff the half-open cube prod [c_i - side/2, c_i + side/2) lies inside D.
  bool contains_cube(const Point& center, double side) const;

  std::pair<Point, Point> bounding_box() const;
  double volume() const;
  std::string describe() const;

 private:
  MacroDomain(int dim, ShapeDescriptor shape);
  void validate() const;

  int dim_;
  ShapeDescriptor shape_;
};

/// Directed nearest-neighbour bond between two numbered sites.
struct Bond {
  int from = -1;
  int to = -1;
  int axis = 0;
  int sign = +1;  // to = from + sign * e_axis
};

/// All lattice geometry derived from a MacroDomain at resolution N.
///
/// Sites of D_N and its first boundary layers share one numbering: indices
/// [0, |D_N|) are D_N, followed by layer 1 and layer 2 in lattice order. A
/// field with support D_N is therefore a prefix of a field on the closure.
/// Immutable after construction.
class LatticeDomain {
 public:
  static constexpr int kCubeMargin = 5;

  static std::shared_ptr<const LatticeDomain> build(MacroDomain macro, int N,
                                                    int layer_depth = 2);

  const MacroDomain& macro() const noexcept { return macro_; }
  int dim() const noexcept { return macro_.dim(); }
  int N() const noexcept { return N_; }
  int directions() const noexcept { return 2 * dim(); }

  int dn_size() const noexcept { return n_dn_; }
  int closure_size() const noexcept { return n_closure_; }
  int double_closure_size() const noexcept { return static_cast<int>(sites_.size()); }
  int layer_depth() const noexcept { return static_cast<int>(layer_offsets_.size()) - 2; }

  /// Numbered sites: D_N, then boundary layers 1..layer_depth.
  std::span<const Site> sites() const noexcept { return sites_; }
  const Site& site(int id) const { return sites_.at(static_cast<std::size_t>(id)); }
  /// Range [begin, end) of ids in boundary layer i (i >= 1), or D_N for i = 0.
  std::pair<int, int> layer_range(int i) const;
  /// Graph distance from D_N in Z^d (0 for D_N sites).
  int layer_of(int id) const;

  /// Id of a site in the numbered region, or -1.
  int index_of(const Site& x) const;
  /// Neighbour of a numbered site in direction dir (2*axis forward, 2*axis+1 backward), or -1.
  int neighbor(int id, int dir) const noexcept {
    return neighbors_[static_cast<std::size_t>(id) * directions() + dir];
  }
  bool in_dn(int id) const noexcept { return id >= 0 && id < n_dn_; }

  /// The set N D intersected with Z^d.
  std::span<const Site> tilde_sites() const noexcept { return tilde_sites_; }
  int tilde_index_of(const Site& x) const;

  /// Directed bonds with both ends in D_N (both orientations).
  std::span<const Bond> bonds_dn() const noexcept { return bonds_dn_; }
  /// Each undirected bond of D_N once, oriented along +e_axis.
  std::span<const Bond> positive_bonds_dn() const noexcept { return positive_bonds_dn_; }
  /// Directed bonds with at least one end in D_N.
  std::span<const Bond> bonds_closure() const noexcept { return bonds_closure_; }
  /// Undirected bonds touching D_N, oriented along +e_axis.
  std::span<const Bond> positive_bonds_closure() const noexcept {
    return positive_bonds_closure_;
  }

  /// Number of D_N neighbours of a numbered site.
  int dn_degree(int id) const;

  /// Macroscopic position x/N of a site.
  Point position(const Site& x) const;

 private:
  LatticeDomain(MacroDomain macro, int N);

  std::int64_t grid_linear(const Site& x) const;  // -1 outside the padded grid

  MacroDomain macro_;
  int N_;
  int n_dn_ = 0;
  int n_closure_ = 0;
  std::vector<Site> sites_;
  std::vector<int> layer_offsets_;
  std::vector<int> neighbors_;

  Site grid_origin_{};
  std::array<int, kMaxDim> grid_extent_{1, 1, 1};
  std::vector<int> grid_id_;
  std::vector<int> grid_tilde_id_;
  std::vector<Site> tilde_sites_;

  std::vector<Bond> bonds_dn_;
  std::vector<Bond> positive_bonds_dn_;
  std::vector<Bond> bonds_closure_;
  std::vector<Bond> positive_bonds_closure_;
};

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Breadth-first-search distance inside N D cap Z^d; kUnreachable if disconnected.
int graph_distance(const LatticeDomain& ld, const Site& x, const Site& y);

struct AssumptionWitness {
  Site x{};
  Site y{};
  Site z{};
  int distance = 0;
};

struct AssumptionReport {
  bool satisfied = true;
  int bound = 8;
  int max_distance = 0;
  std::optional<AssumptionWitness> witness;
};

/// Checks that sites of N D near any exterior site z stay within graph distance `bound`.
AssumptionReport check_assumption_domain(const LatticeDomain& ld, int bound = 8);

}  // namespace cglab
