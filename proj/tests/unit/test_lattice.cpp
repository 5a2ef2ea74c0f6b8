#include <algorithm>
#include <sstream>

#include "bdcp/lattice.hpp"
#include "bdcp/rng.hpp"
#include "doctest.h"

using namespace bdcp;

namespace {

bool contains(std::span<const SiteIndex> list, SiteIndex s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

Configuration random_config(const Geometry& g, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  Configuration c(g);
  for (SiteIndex s = 0; s < c.size(); ++s) c.set(s, static_cast<State>(rng.below(4)));
  return c;
}

}  // namespace

TEST_CASE("encode matches the (xi, omega) table and decode inverts it") {
  CHECK(encode(0, 0) == 0);
  CHECK(encode(1, 0) == 1);
  CHECK(encode(0, 1) == 2);
  CHECK(encode(1, 1) == 3);
  for (unsigned xi = 0; xi < 2; ++xi)
    for (unsigned om = 0; om < 2; ++om) {
      const State s = encode(xi, om);
      CHECK(xi_of(s) == xi);
      CHECK(omega_of(s) == om);
    }
  for (State s = 0; s < 4; ++s) {
    CHECK(encode(xi_of(s), omega_of(s)) == s);
    int sum = 0;
    for (int i = 0; i < 4; ++i) sum += indicator(s, i);
    CHECK(sum == 1);
    // eta0 = (1-xi)(1-omega), eta3 = xi*omega
    CHECK(indicator(s, 0) == int((1 - xi_of(s)) * (1 - omega_of(s))));
    CHECK(indicator(s, 3) == int(xi_of(s) * omega_of(s)));
  }
}

TEST_CASE("strip geometry: site count, boundary set, edge truncation") {
  Geometry g(1, 2);
  CHECK(g.site_count() == 5);
  CHECK(g.bonds().size() == 4);
  auto right = g.neighbors(g.index(2));
  REQUIRE(right.size() == 1);
  CHECK(right[0] == g.index(1));
  auto mid = g.neighbors(g.index(0));
  REQUIRE(mid.size() == 2);
  CHECK(mid[0] == g.index(-1));
  CHECK(mid[1] == g.index(1));
  for (SiteIndex s = 0; s < g.site_count(); ++s)
    CHECK(g.is_boundary(s) == (std::abs(g.coords(s).x1) == 2));

  Geometry g2(2, 3, 4);
  CHECK(g2.site_count() == 7 * 4);
  CHECK(g2.boundary_sites().size() == 2 * 4);
}

TEST_CASE("transverse direction wraps") {
  Geometry g(2, 1, 4);
  CHECK(contains(g.neighbors(g.index(0, 3)), g.index(0, 0)));
  CHECK(contains(g.neighbors(g.index(0, 0)), g.index(0, 3)));
  CHECK(g.neighbors(g.index(0, 0)).size() == 4);
  CHECK(g.neighbors(g.index(1, 0)).size() == 3);
}

TEST_CASE("torus mode has no boundary and wraps e1") {
  Geometry g(1, 2, 1, BoundaryMode::torus);
  CHECK(g.boundary_sites().empty());
  CHECK(g.bonds().size() == 5);
  CHECK(contains(g.neighbors(g.index(2)), g.index(-2)));
}

TEST_CASE("tiny lattices: neighbour lists are deduplicated") {
  Geometry two(2, 0, 2);
  CHECK(two.site_count() == 2);
  CHECK(two.bonds().size() == 1);
  CHECK(two.neighbors(0).size() == 1);
  CHECK(two.boundary_sites().size() == 2);
  Geometry one(1, 0, 1, BoundaryMode::torus);
  CHECK(one.neighbors(0).empty());
  CHECK(one.bonds().empty());
}

TEST_CASE("neighbour relation is symmetric and matches incident bonds") {
  for (const Geometry& g : {Geometry(1, 4), Geometry(1, 3, 1, BoundaryMode::torus),
                            Geometry(2, 2, 5), Geometry(2, 1, 2), Geometry(2, 2, 3, BoundaryMode::torus)}) {
    for (SiteIndex x = 0; x < g.site_count(); ++x) {
      for (SiteIndex y : g.neighbors(x)) CHECK(contains(g.neighbors(y), x));
      CHECK(g.incident_bonds(x).size() == g.neighbors(x).size());
    }
  }
}

TEST_CASE("occupancy counts partition the lattice") {
  Geometry g(1, 2);
  CHECK(occupancy_counts(Configuration(g)) == Counts{5, 0, 0, 0});
  CHECK(occupancy_counts(Configuration(g, 3)) == Counts{0, 0, 0, 5});
  for (std::uint64_t seed = 1; seed < 20; ++seed) {
    Geometry g2(2, 3, 5);
    const auto c = occupancy_counts(random_config(g2, seed));
    CHECK(c[0] + c[1] + c[2] + c[3] == g2.site_count());
  }
}

TEST_CASE("packed storage: set/get/swap and code round trip") {
  Geometry g(2, 10, 7);  // 147 sites spans several words
  Configuration c = random_config(g, 42);
  const auto states = c.states();
  CHECK(Configuration::from_states(g, states) == c);
  c.swap_sites(0, 146);
  CHECK(c[0] == states[146]);
  CHECK(c[146] == states[0]);

  Geometry tiny(1, 1);
  for (std::uint64_t code = 0; code < 64; ++code)
    CHECK(Configuration::from_code(tiny, code).code() == code);
}

TEST_CASE("snapshot format round trips") {
  Geometry g(2, 2, 3);
  Configuration c = random_config(g, 7);
  std::stringstream ss;
  write_snapshot(ss, c);
  const std::string text = ss.str();
  CHECK(text.rfind("2 2 3 reservoirs\n", 0) == 0);
  CHECK(read_snapshot(ss) == c);

  std::istringstream bad("1 1 1 reservoirs\n014\n");
  CHECK_THROWS(read_snapshot(bad));
}

TEST_CASE("invalid geometries are rejected") {
  CHECK_THROWS_AS(Geometry(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(Geometry(1, -1), std::invalid_argument);
  CHECK_THROWS_AS(Geometry(1, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(Geometry(2, 2, 0), std::invalid_argument);
}
