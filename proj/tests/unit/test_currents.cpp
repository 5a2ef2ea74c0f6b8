#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdcp/currents.hpp"
#include "bdcp/engine.hpp"
#include "doctest.h"

using namespace bdcp;

namespace {

ModelParams full_params(double scale) {
  ModelParams p;
  p.lambda1 = 2.0;
  p.lambda2 = 1.0;
  p.r = 0.5;
  p.b_hat = BoundaryProfile::constant({0.3, 0.2, 0.1});
  p.scale_N = scale;
  return p;
}

EventRecord exchange_event(const Geometry& g, BondIndex k, const Configuration& c) {
  const Bond& b = g.bonds()[k];
  return {EventKind::exchange, 0.0, k, b.tail, b.head, c[b.tail], c[b.head]};
}

}  // namespace

TEST_CASE("ledger_apply: exchanges move W, reactions move Q") {
  Geometry g(1, 2);
  Configuration c(g);
  CurrentLedger L(g);
  const Bond& b0 = g.bonds()[0];
  c.set(b0.tail, 1);
  ledger_apply(L, exchange_event(g, 0, c), c);
  CHECK(L.W(0, 1) == 1);
  CHECK(L.W(0, 2) == 0);
  CHECK(L.W(0, 3) == 0);

  c.set(b0.head, 2);
  ledger_apply(L, exchange_event(g, 0, c), c);
  CHECK(L.W(0, 1) == 2);
  CHECK(L.W(0, 2) == -1);

  const SiteIndex x = g.index(0);
  ledger_apply(L, {EventKind::reaction, 0.0, 0, x, x, 0, 2}, c);
  CHECK(L.Q_bulk(x, 2) == 1);
  CHECK(L.Q_boundary(x, 2) == 0);

  // Inconsistent with the configuration.
  CHECK_THROWS_AS(ledger_apply(L, {EventKind::reaction, 0.0, 0, x, x, 1, 2}, c), std::invalid_argument);
  CHECK_THROWS_AS(ledger_apply(L, {EventKind::boundary, 0.0, 0, x, x, 0, 2}, c), std::invalid_argument);
  Configuration same(g, 3);
  CHECK_THROWS_AS(ledger_apply(L, exchange_event(g, 1, same), same), std::invalid_argument);
}

TEST_CASE("current pairing: empty, single crossing, jump and reverse") {
  const int N = 4;
  Geometry g(1, N);
  const VectorTestTriple ones{{{TestFunction::constant(1.0), TestFunction::zero()},
                               {TestFunction::zero(), TestFunction::zero()},
                               {TestFunction::zero(), TestFunction::zero()}}};
  CurrentLedger L(g);
  CHECK(current_pairing(L, ones) == 0.0);
  Configuration c(g);
  c.set(g.bonds()[1].tail, 1);
  L.apply(exchange_event(g, 1, c), c);
  CHECK(current_pairing(L, ones) == doctest::Approx(1.0 / (N * N)));
  c.swap_sites(g.bonds()[1].tail, g.bonds()[1].head);
  L.apply(exchange_event(g, 1, c), c);
  CHECK(current_pairing(L, ones) == 0.0);
}

TEST_CASE("continuity identity holds after every event of a long run") {
  for (const Geometry& g : {Geometry(1, 5), Geometry(2, 3, 4), Geometry(2, 2, 3, BoundaryMode::torus)}) {
    Configuration init(g);
    for (SiteIndex s = 0; s < init.size(); ++s) init.set(s, static_cast<State>((s * 7) % 4));
    ContinuityAuditor audit(init);
    Simulator sim(init, full_params(2.0), RandomStream(8, 0));
    sim.advance(200.0, audit);
    CHECK(audit.checks() > 5000);
    CHECK(audit.ledger().continuity_defect(init, sim.configuration()) == 0);
  }
}

TEST_CASE("compensators of a frozen configuration") {
  Geometry g(1, 2);
  ModelParams p = full_params(3.0);
  // Symmetric occupancies: no W drift.
  Configuration c(g, 2);
  CompensatorTracker tr(c, p);
  tr.on_finish(1.5, c);
  for (BondIndex b = 0; b < g.bonds().size(); ++b)
    for (int i = 1; i <= 3; ++i) {
      CHECK(tr.W_drift(b, i) == 0.0);
      CHECK(tr.W_qv(b, i) == 0.0);
    }
  // Empty lattice with r = 0: no bulk creation.
  p.r = 0.0;
  Configuration empty(g);
  CompensatorTracker te(empty, p);
  te.on_finish(2.0, empty);
  for (SiteIndex x = 0; x < g.site_count(); ++x)
    for (int i = 1; i <= 3; ++i) CHECK(te.Q_bulk_drift(x, i) == 0.0);
}

TEST_CASE("bulk and reservoir drift follow the microscopic reaction functions") {
  Geometry g(1, 3);
  ModelParams p = full_params(2.0);
  Configuration c(g);
  const State pattern[] = {1, 0, 3, 2, 1, 2, 0};
  for (SiteIndex s = 0; s < c.size(); ++s) c.set(s, pattern[s]);
  const double T = 0.75;
  CompensatorTracker tr(c, p);
  tr.on_finish(T, c);
  for (SiteIndex x = 0; x < c.size(); ++x) {
    int n1 = 0, n3 = 0;
    for (SiteIndex y : g.neighbors(x)) {
      n1 += c[y] == 1;
      n3 += c[y] == 3;
    }
    const double b = p.lambda1 * n1 + p.lambda2 * n3;
    const double e0 = c.eta(x, 0), e1 = c.eta(x, 1), e2 = c.eta(x, 2), e3 = c.eta(x, 3);
    const double f1 = b * e0 + e3 - (p.r + 1) * e1;
    const double f2 = p.r * e0 + e3 - b * e2 - e2;
    const double f3 = b * e2 + p.r * e1 - 2 * e3;
    CHECK(tr.Q_bulk_drift(x, 1) == doctest::Approx(T * f1));
    CHECK(tr.Q_bulk_drift(x, 2) == doctest::Approx(T * f2));
    CHECK(tr.Q_bulk_drift(x, 3) == doctest::Approx(T * f3));
    CHECK(tr.Q_bulk_qv(x, 1) == doctest::Approx(T * (b * e0 + e3 + (p.r + 1) * e1)));
    CHECK(tr.Q_bulk_qv(x, 3) == doctest::Approx(T * (b * e2 + p.r * e1 + 2 * e3)));
    if (g.is_boundary(x)) {
      const double bh[] = {0.3, 0.2, 0.1};
      for (int i = 1; i <= 3; ++i) {
        const double ei = c.eta(x, i);
        CHECK(tr.Q_boundary_drift(x, i) == doctest::Approx(T * 4.0 * (bh[i - 1] - ei)));
        CHECK(tr.Q_boundary_qv(x, i) ==
              doctest::Approx(T * 4.0 * (bh[i - 1] * (1 - ei) + (1 - bh[i - 1]) * ei)));
      }
    } else {
      for (int i = 1; i <= 3; ++i) CHECK(tr.Q_boundary_drift(x, i) == 0.0);
    }
  }
  for (BondIndex k = 0; k < g.bonds().size(); ++k) {
    const Bond& bd = g.bonds()[k];
    for (int i = 1; i <= 3; ++i)
      CHECK(tr.W_drift(k, i) == doctest::Approx(T * 4.0 * (c.eta(bd.tail, i) - c.eta(bd.head, i))));
  }
}

TEST_CASE("two-site martingales: E[W - A] and E[Q - A] vanish within 3 standard errors") {
  Geometry g(2, 0, 2);
  ModelParams p = full_params(1.5);
  Configuration init(g);
  init.set(0, 1);
  init.set(1, 2);
  const int replicas = 100000;
  const int nb = static_cast<int>(g.bonds().size());
  const int ns = static_cast<int>(g.site_count());
  // Per observable: sum of M, sum of M^2, sum of predictable QV.
  const int obs = 3 * nb + 6 * ns;
  std::vector<double> s1(obs, 0.0), s2(obs, 0.0), sv(obs, 0.0);
  for (int k = 0; k < replicas; ++k) {
    CurrentLedger L(g);
    CompensatorTracker tr(init, p);
    simulate(init, p, 0.4, 99, k, L, tr);
    int j = 0;
    auto add = [&](double m, double v) {
      s1[j] += m;
      s2[j] += m * m;
      sv[j] += v;
      ++j;
    };
    for (int b = 0; b < nb; ++b)
      for (int i = 1; i <= 3; ++i) add(L.W(b, i) - tr.W_drift(b, i), tr.W_qv(b, i));
    for (int x = 0; x < ns; ++x)
      for (int i = 1; i <= 3; ++i) {
        add(L.Q_bulk(x, i) - tr.Q_bulk_drift(x, i), tr.Q_bulk_qv(x, i));
        add(L.Q_boundary(x, i) - tr.Q_boundary_drift(x, i), tr.Q_boundary_qv(x, i));
      }
  }
  for (int j = 0; j < obs; ++j) {
    const double mean = s1[j] / replicas;
    const double var = s2[j] / replicas - mean * mean;
    const double qv = sv[j] / replicas;
    const double se = std::sqrt(qv / replicas);
    CAPTURE(j);
    CHECK(std::abs(mean) <= 3.0 * se + 1e-12);
    // E[M^2] = E[V]: empirical variance within 10% of the mean QV.
    if (qv > 0.01) CHECK(std::abs(var - qv) < 0.1 * qv);
  }
}

TEST_CASE("ledger CSV export") {
  Geometry g(1, 1);
  CurrentLedger L(g);
  std::ostringstream os;
  write_ledger_csv(os, L);
  const std::string s = os.str();
  CHECK(s.rfind("bond_or_site,type,W_or_Q,compensator,quad_variation\n", 0) == 0);
  CHECK(s.find("bond:1,3,0") != std::string::npos);
  CHECK(s.find("site:2,1,0") != std::string::npos);
  CHECK(s.find("reservoir:0,1,0") != std::string::npos);
  CHECK(s.find("reservoir:1,") == std::string::npos);
}

TEST_CASE("ledgers merge by summation") {
  Geometry g(1, 1);
  Configuration c(g);
  c.set(0, 1);
  CurrentLedger a(g), b(g);
  a.apply(exchange_event(g, 0, c), c);
  b.apply(exchange_event(g, 0, c), c);
  a.merge(b);
  CHECK(a.W(0, 1) == 2);
  CHECK_THROWS(a.merge(CurrentLedger(Geometry(1, 2))));
}
