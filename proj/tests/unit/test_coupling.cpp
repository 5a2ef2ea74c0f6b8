#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include "bdcp/coupling.hpp"
#include "bdcp/generator.hpp"
#include "coupling_oracle.hpp"
#include "doctest.h"

using namespace bdcp;

namespace {

using namespace bdcp::oracle;

ModelParams double_params() {
  ModelParams p;
  p.lambda1 = 2.0;
  p.lambda2 = 1.0;
  p.r = 0.5;
  p.b_hat = BoundaryProfile::constant({0.3, 0.2, 0.1});
  return p;
}

}  // namespace

TEST_CASE("default box radius") {
  CHECK(default_box_M(8, 2) == 22);
  CHECK(default_box_M(16, 2) == 64);
  CHECK(default_box_M(32, 2) == 181);
  CHECK(default_box_M(4, 2) == 8);
  CHECK(default_box_M(5, 1) == 25);
  CHECK_THROWS(default_box_M(0, 1));
}

TEST_CASE("pair construction") {
  const Geometry g(2, 1, 5);
  CHECK_THROWS(CoupledConfiguration(Configuration(g), Configuration(Geometry(2, 1, 3)), 1));
  CHECK_THROWS(CoupledConfiguration(Configuration(g), Configuration(g), -1));
  const CoupledConfiguration p{Configuration{g}, Configuration{g}, 1};
  int inside = 0;
  for (SiteIndex x = 0; x < g.site_count(); ++x) inside += p.in_box(x);
  CHECK(inside == 3 * 3);
}

TEST_CASE("exhaustive marginal fidelity in exact arithmetic, 3-site lattices") {
  // Column of three sites on a transverse ring: box = middle site only, or
  // all three; plus the d = 1 segment of half-width 1 (box is everything).
  const Geometry ring(2, 0, 3);
  const Geometry segment(1, 1);
  for (const auto& m : rational_models()) {
    for (const auto& [g, M] : {std::pair{ring, 0}, std::pair{ring, 1}, std::pair{segment, 0}}) {
      const auto res = check_marginals(g, M, m);
      CHECK_MESSAGE(res.ok(), res.error);
      CHECK(res.pairs == 4096);
    }
  }
}

TEST_CASE("matched jumps reproduce the joint table line by line") {
  // Centre site of a 3-ring with box = centre: beta_M counts no neighbour, so
  // use the segment where both neighbours are inside.
  const Geometry g(1, 1);
  const RationalModel m = rational_models()[0];
  const Q r = m.k.r;
  // Neighbour states chosen so that beta~ = lambda1 + lambda2 (left) and beta = 2 lambda1 (right).
  for (State a = 0; a < 4; ++a) {
    for (State b = 0; b < 4; ++b) {
      Configuration l(g), rr(g);
      l.set(0, 1);
      l.set(2, 3);
      rr.set(0, 1);
      rr.set(2, 1);
      l.set(1, a);
      rr.set(1, b);
      const CoupledConfiguration p(l, rr, 0);
      const Q bl = m.k.lambda1 + m.k.lambda2, br = Q(2) * m.k.lambda1;
      const Q bar = std::min(bl, br);
      std::map<std::pair<int, int>, Q> joint;
      for (const auto& mv : coupled_reaction_rates<Q>(p, 1, m.k))
        if (mv.moves_left && mv.moves_right) joint[{mv.left_to, mv.right_to}] += mv.rate;
      auto e = [&](int i, int j) { return (a == i && b == j) ? Q(1) : Q(0); };
      std::map<std::pair<int, int>, Q> want;
      auto put = [&](int i, int j, Q v) {
        if (v != Q(0)) want[{i, j}] += v;
      };
      put(1, 1, e(0, 0) * bar + e(3, 3));
      put(0, 0, e(1, 1) + e(2, 2));
      put(2, 2, r * e(0, 0) + e(3, 3));
      put(3, 3, e(2, 2) * bar + r * e(1, 1));
      put(3, 1, e(2, 0) * bar);
      put(1, 3, e(0, 2) * bar);
      put(0, 1, e(2, 3));
      put(1, 0, e(3, 2));
      put(2, 0, e(3, 1));
      put(0, 2, e(1, 3));
      put(3, 2, e(1, 0) * r);
      put(2, 3, e(0, 1) * r);
      CAPTURE(int(a));
      CAPTURE(int(b));
      CHECK(joint == want);
    }
  }
}

TEST_CASE("equal pairs move together at sites whose neighbourhood lies in the box") {
  const Geometry g(2, 1, 7);
  const auto models = rational_models();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomStream rng(seed, 0);
    Configuration c(g);
    for (SiteIndex x = 0; x < g.site_count(); ++x) c.set(x, State(rng.below(4)));
    const CoupledConfiguration p(c, c, 2);
    for (SiteIndex x = 0; x < g.site_count(); ++x) {
      if (std::abs(g.transverse_offset(x)) > 1) continue;
      for (const auto& mv : coupled_reaction_rates<Q>(p, x, models[seed % 4].k)) {
        CHECK(mv.moves_left);
        CHECK(mv.moves_right);
        CHECK(mv.left_to == mv.right_to);
      }
      if (g.is_boundary(x))
        for (const auto& mv : coupled_boundary_rates<Q>(p, x, models[0].weights(), Q(4)))
          CHECK(mv.left_to == mv.right_to);
    }
    for (BondIndex b = 0; b < g.bonds().size(); ++b) {
      const Bond& bd = g.bonds()[b];
      const bool in = p.in_box(bd.tail) && p.in_box(bd.head);
      for (const auto& mv : coupled_exchange_rates<Q>(p, b, Q(4))) {
        CHECK(mv.moves_right);
        CHECK(mv.moves_left == in);
      }
    }
  }
}

TEST_CASE("outside the box only the right copy moves") {
  const Geometry g(2, 1, 5);
  Configuration c(g, 0);
  const CoupledConfiguration p(c, c, 0);
  const ModelParams par = double_params();
  for (SiteIndex x = 0; x < g.site_count(); ++x) {
    if (p.in_box(x)) continue;
    for (const auto& mv : coupled_reaction_rates(p, x, par)) CHECK_FALSE(mv.moves_left);
    if (g.is_boundary(x))
      for (const auto& mv : coupled_boundary_rates(p, x, par)) CHECK_FALSE(mv.moves_left);
  }
  const SiteIndex interior = g.index(0, 2);
  CHECK_THROWS_AS(coupled_boundary_rates(p, interior, par), std::invalid_argument);
}

TEST_CASE("discrepancy functional") {
  SUBCASE("identical pair") {
    const Geometry g(2, 4, 9);
    RandomStream rng(3, 0);
    Configuration c(g);
    for (SiteIndex x = 0; x < g.site_count(); ++x) c.set(x, State(rng.below(4)));
    const CoupledConfiguration p(c, c, 4);
    CHECK(discrepancy_total(p) == 0.0);
    for (int i = 0; i < 4; ++i) CHECK(discrepancy_h(p, i) == 0.0);
    CHECK_THROWS(discrepancy_h(p, 4));
  }
  SUBCASE("single disagreement at the centre, d = 1") {
    const int N = 4, M = default_box_M(N, 1);
    const Geometry g(1, N);
    Configuration l(g), r(g);
    r.set(g.index(0), 3);
    const CoupledConfiguration p(l, r, M);
    const double q = std::exp(-1.0 / N);
    const double geometric = q * (1.0 - std::pow(q, M - 1)) / (1.0 - q);
    const double want = geometric / (N * N);
    CHECK(discrepancy_h(p, 0) == doctest::Approx(want).epsilon(1e-13));
    CHECK(discrepancy_h(p, 3) == doctest::Approx(want).epsilon(1e-13));
    CHECK(discrepancy_h(p, 1) == 0.0);
    CHECK(discrepancy_total(p) == doctest::Approx(2 * want).epsilon(1e-13));
  }
  SUBCASE("rows beyond radius M - 1 do not count; extra disagreements never lower h") {
    const int N = 2, M = 3;
    const Geometry g = decay_geometry(N, M);
    Configuration l(g), r(g);
    CoupledConfiguration p(l, r, M);
    for (SiteIndex x = 0; x < g.site_count(); ++x)
      if (std::abs(g.transverse_offset(x)) >= M) p.right.set(x, 1);
    CHECK(discrepancy_total(p) == 0.0);
    double prev = 0.0;
    RandomStream rng(9, 1);
    for (int k = 0; k < 40; ++k) {
      const auto x = static_cast<SiteIndex>(rng.below(g.site_count()));
      if (p.left[x] != p.right[x]) continue;
      p.left.set(x, State((p.right[x] + 1 + rng.below(3)) % 4));
      const double now = discrepancy_total(p);
      CHECK(now >= prev);
      prev = now;
    }
    CHECK(prev > 0.0);
  }
}

TEST_CASE("a box covering the lattice keeps an identical pair identical") {
  const Geometry g(2, 2, 5);
  RandomStream rng(11, 0);
  Configuration c(g);
  for (SiteIndex x = 0; x < g.site_count(); ++x) c.set(x, State(rng.below(4)));
  ModelParams par = double_params();
  par.scale_N = 2;
  struct Watch {
    std::uint64_t events = 0, split = 0;
    void on_event(const CoupledEvent& e, const CoupledConfiguration&) {
      ++events;
      split += e.move.moves_left != e.move.moves_right;
    }
  } w;
  const auto out = simulate_coupled(CoupledConfiguration(c, c, 2), par, 10.0, 5, 0, w);
  CHECK(out.left == out.right);
  CHECK(w.events > 1000);
  CHECK(w.split == 0);
}

TEST_CASE("coupled-simulation marginals match the single-copy oracles") {
  const Geometry g(2, 0, 3);
  ModelParams par = double_params();
  par.lambda1 = 1.5;
  par.lambda2 = 2.5;
  Configuration l0(g), r0(g);
  l0.set(0, 1);
  l0.set(1, 3);
  r0.set(0, 1);
  r0.set(1, 2);
  r0.set(2, 3);
  const CoupledConfiguration start(l0, r0, 0);

  const double t = 0.5;
  std::vector<double> pl(64, 0.0), pr(64, 0.0);
  const std::size_t replicas = 1'000'000;
  for (std::size_t k = 0; k < replicas; ++k) {
    const auto out = simulate_coupled(start, par, t, 2024, k);
    pl[out.left.code()] += 1.0;
    pr[out.right.code()] += 1.0;
  }
  for (auto& v : pl) v /= replicas;
  for (auto& v : pr) v /= replicas;
  auto oracle = [&](const Configuration& init, const std::optional<SiteMask>& mask) {
    std::vector<double> p0(64, 0.0);
    p0[init.code()] = 1.0;
    return transient_distribution(build_generator(g, par, mask), p0, t);
  };
  const double tv_left = total_variation(pl, oracle(l0, start.box_mask()));
  const double tv_right = total_variation(pr, oracle(r0, std::nullopt));
  MESSAGE("marginal TV: left " << tv_left << ", right " << tv_right);
  CHECK(tv_left < 0.01);
  CHECK(tv_right < 0.01);
}

TEST_CASE("decay csv") {
  std::ostringstream os;
  write_decay_csv(os, {{8, 22, 0.1, 0.5, 0.01, 4}});
  CHECK(os.str() == "N,M,t,mean_h,stderr,replicas\n8,22,0.1,0.5,0.01,4\n");
}
