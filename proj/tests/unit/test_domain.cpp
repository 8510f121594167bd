#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cglab/domain.hpp"
#include "cglab/errors.hpp"
#include "oracles.hpp"

using namespace cglab;

namespace {

std::set<int> coords_1d(std::span<const Site> sites) {
  std::set<int> s;
  for (const Site& x : sites) s.insert(x[0]);
  return s;
}

std::set<int> range_set(int a, int b) {
  std::set<int> s;
  for (int i = a; i <= b; ++i) s.insert(i);
  return s;
}

// U-shaped grid: a wall two cells wide splits [0,1]^2 except along the top rows.
MacroDomain notched_square() {
  const int n = 16;
  std::vector<std::uint8_t> flags(n * n, 1);
  for (int row = 0; row < 14; ++row) flags[static_cast<std::size_t>(row * n + 8)] = 0;
  const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
  const int cells[] = {n, n};
  return MacroDomain::indicator_grid(lo, hi, cells, flags);
}

}  // namespace

TEST(LatticeDomain, UnitIntervalN16) {
  const auto ld = oracle::unit_box(1, 16);
  EXPECT_EQ(coords_1d(ld->tilde_sites()), range_set(1, 15));
  std::set<int> dn;
  for (int id = 0; id < ld->dn_size(); ++id) dn.insert(ld->site(id)[0]);
  EXPECT_EQ(dn, range_set(3, 13));
  // brute force: [x - 2.5, x + 2.5] inside (0, 16)
  std::set<int> brute;
  for (int x = -5; x <= 30; ++x) {
    if (x - 2.5 >= 0.0 && x + 2.5 <= 16.0 && x > 0 && x < 16) brute.insert(x);
  }
  EXPECT_EQ(dn, brute);
}

TEST(LatticeDomain, UnitSquareN8BondCount) {
  const auto ld = oracle::unit_box(2, 8);
  std::set<std::pair<int, int>> dn;
  for (int id = 0; id < ld->dn_size(); ++id) dn.insert({ld->site(id)[0], ld->site(id)[1]});
  // centred sub-square
  int lo = 100, hi = -100;
  for (const auto& p : dn) {
    lo = std::min({lo, p.first, p.second});
    hi = std::max({hi, p.first, p.second});
  }
  EXPECT_EQ(static_cast<int>(dn.size()), (hi - lo + 1) * (hi - lo + 1));
  EXPECT_EQ(lo + hi, 8);
  int adj = 0;
  for (const auto& p : dn) {
    for (const auto& q : dn) {
      if (std::abs(p.first - q.first) + std::abs(p.second - q.second) == 1) ++adj;
    }
  }
  EXPECT_EQ(static_cast<int>(ld->bonds_dn().size()), adj);
  EXPECT_EQ(2 * static_cast<int>(ld->positive_bonds_dn().size()), adj);
}

TEST(LatticeDomain, EmptyDnIsAnError) {
  const double lo[] = {0.0}, hi[] = {1.0};
  EXPECT_THROW(LatticeDomain::build(MacroDomain::box(lo, hi), 4), DomainError);
}

TEST(MacroDomain, ClosureMustContainOrigin) {
  const double lo[] = {1.0}, hi[] = {2.0};
  EXPECT_THROW(MacroDomain::box(lo, hi), DomainError);
  const double c[] = {3.0, 3.0};
  EXPECT_THROW(MacroDomain::ball(c, 1.0), DomainError);
}

TEST(MacroDomain, BallAndGridBuild) {
  const double c[] = {0.0, 0.0};
  const auto ld = LatticeDomain::build(MacroDomain::ball(c, 1.0), 16);
  EXPECT_GT(ld->dn_size(), 0);
  for (int id = 0; id < ld->dn_size(); ++id) {
    const Point p = ld->position(ld->site(id));
    EXPECT_LT(std::hypot(p[0], p[1]), 1.0);
  }
  const auto lg = LatticeDomain::build(notched_square(), 32);
  EXPECT_GT(lg->dn_size(), 0);
}

TEST(LatticeDomain, LayersAreDisjointAndAtExactDistance) {
  for (int d : {1, 2}) {
    const auto ld = oracle::unit_box(d, 16);
    for (int layer = 1; layer <= ld->layer_depth(); ++layer) {
      const auto [b, e] = ld->layer_range(layer);
      for (int id = b; id < e; ++id) {
        EXPECT_EQ(ld->layer_of(id), layer);
        int best = 1 << 20;
        for (int j = 0; j < ld->dn_size(); ++j) {
          int l1 = 0;
          for (int i = 0; i < d; ++i) l1 += std::abs(ld->site(id)[i] - ld->site(j)[i]);
          best = std::min(best, l1);
        }
        EXPECT_EQ(best, layer);
      }
    }
  }
}

TEST(LatticeDomain, BondInvariants) {
  const auto ld = oracle::unit_box(2, 16);
  for (const Bond& b : ld->bonds_dn()) {
    EXPECT_TRUE(ld->in_dn(b.from) && ld->in_dn(b.to));
  }
  for (const Bond& b : ld->bonds_closure()) {
    EXPECT_TRUE(ld->in_dn(b.from) || ld->in_dn(b.to));
    int l1 = 0;
    for (int i = 0; i < 2; ++i) l1 += std::abs(ld->site(b.from)[i] - ld->site(b.to)[i]);
    EXPECT_EQ(l1, 1);
  }
  EXPECT_LE(ld->bonds_dn().size(), ld->bonds_closure().size());
}

TEST(LatticeDomain, MonotoneInN) {
  for (int d : {1, 2}) {
    int prev = 0;
    for (int N : {8, 16, 32}) {
      const int n = oracle::unit_box(d, N)->dn_size();
      EXPECT_GE(n, prev);
      prev = n;
    }
  }
}

// The 5/N margin removes a shell of relative width about 5/(N side) per axis.
TEST(LatticeDomain, VolumeScaling) {
  for (int d : {1, 2}) {
    const double side = d == 1 ? 2.0 : 4.0;
    const std::vector<double> lo(static_cast<std::size_t>(d), -side / 2), hi(static_cast<std::size_t>(d), side / 2);
    const double vol = std::pow(side, d);
    double prev = 1e300;
    for (int N : {32, 64}) {
      const auto ld = LatticeDomain::build(MacroDomain::box(lo, hi), N);
      const double err = std::abs(ld->dn_size() / std::pow(N, d) - vol);
      if (N == 32) EXPECT_LE(err, 0.1 * vol);
      EXPECT_LT(err, prev);
      prev = err;
    }
  }
}

TEST(Assumption, ConvexBoxesPass) {
  for (int d : {1, 2}) {
    for (int N : {8, 16, 32}) {
      const AssumptionReport r = check_assumption_domain(*oracle::unit_box(d, N));
      EXPECT_TRUE(r.satisfied);
    }
  }
  const AssumptionReport r = check_assumption_domain(*oracle::unit_box(1, 16));
  EXPECT_LE(r.max_distance, 2);
}

TEST(Assumption, NotchProducesWitness) {
  const auto ld = LatticeDomain::build(notched_square(), 32);
  const AssumptionReport r = check_assumption_domain(*ld, 8);
  ASSERT_FALSE(r.satisfied);
  ASSERT_TRUE(r.witness.has_value());
  const AssumptionWitness& w = *r.witness;
  EXPECT_GT(w.distance, 8);
  EXPECT_GE(ld->tilde_index_of(w.x), 0);
  EXPECT_GE(ld->tilde_index_of(w.y), 0);
  EXPECT_LT(ld->tilde_index_of(w.z), 0);
  EXPECT_GT(graph_distance(*ld, w.x, w.y), 8);
}

TEST(GraphDistance, Basics) {
  const auto ld = oracle::unit_box(2, 16);
  const Site a{5, 5, 0}, b{6, 5, 0};
  EXPECT_EQ(graph_distance(*ld, a, a), 0);
  EXPECT_EQ(graph_distance(*ld, a, b), 1);
  EXPECT_EQ(graph_distance(*ld, b, a), 1);
  for (int k : {1, 3, 6}) {
    EXPECT_EQ(graph_distance(*ld, a, Site{5 + k, 5 + k, 0}), 2 * k);
  }
}

TEST(MacroDomain, CornerTouchingGridIsRejected) {
  // two cells touching only at a corner
  std::vector<std::uint8_t> flags = {1, 0, 0, 1};
  const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
  const int cells[] = {2, 2};
  EXPECT_THROW(MacroDomain::indicator_grid(lo, hi, cells, flags), DomainError);
}
