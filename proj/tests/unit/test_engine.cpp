#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bdcp/engine.hpp"
#include "bdcp/generator.hpp"
#include "doctest.h"

using namespace bdcp;

namespace {

ModelParams full_params(double scale = 1.0) {
  ModelParams p;
  p.lambda1 = 2.0;
  p.lambda2 = 1.0;
  p.r = 0.5;
  p.b_hat = BoundaryProfile::constant({0.3, 0.2, 0.1});
  p.scale_N = scale;
  return p;
}

struct CountGuard {
  Counts counts{};
  bool violated = false;
  void on_event(const EventRecord& e, const Configuration& before) {
    if (counts == Counts{}) counts = occupancy_counts(before);
    if (e.kind == EventKind::exchange) {
      if (occupancy_counts(before) != counts) violated = true;
    } else {
      --counts[e.from];
      ++counts[e.to];
    }
  }
};

struct ProposalTimes {
  std::vector<double> t;
  void on_event(const EventRecord&, const Configuration&) {}
  void on_proposal(double time) { t.push_back(time); }
};

}  // namespace

TEST_CASE("all toggles off: nothing happens") {
  Geometry g(1, 3);
  Configuration init(g, 1);
  ModelParams p = full_params();
  p.reaction_on = p.exchange_on = p.boundary_on = false;
  EventCounter counter;
  Simulator sim(init, p, RandomStream(1, 0));
  sim.advance(10.0, counter);
  CHECK(sim.configuration() == init);
  CHECK(sim.clock().event_count == 0);
  CHECK(sim.clock().t == 10.0);
}

TEST_CASE("the empty configuration is absorbing when r = 0 and reservoirs inject only state 0") {
  Geometry g(2, 3, 4);
  ModelParams p = full_params(3.0);
  p.r = 0.0;
  p.b_hat = BoundaryProfile::constant({0.0, 0.0, 0.0});
  Configuration init(g);
  EventCounter counter;
  const auto out = simulate(init, p, 2.0, 5, 0, counter);
  CHECK(out == init);
  CHECK(counter.by_kind == std::array<std::uint64_t, 3>{0, 0, 0});
}

TEST_CASE("total rate bound per channel") {
  Geometry g(1, 2);
  Configuration c(g);
  ModelParams p = full_params(2.0);
  p.reaction_on = p.boundary_on = false;
  CHECK(total_rate_bound(c, p) == doctest::Approx(4 * p.speedup()));
  p = full_params(2.0);
  p.exchange_on = p.boundary_on = false;
  p.r = 0.0;
  CHECK(total_rate_bound(c, p) == doctest::Approx(5 * (1.0 + 4.0)));
  p = full_params(2.0);
  const auto b = channel_bounds(g, p);
  CHECK(total_rate_bound(c, p) == doctest::Approx(b.exchange + b.reaction + b.boundary));
  CHECK(b.boundary == doctest::Approx(2 * 4.0));
}

TEST_CASE("exchange events never change type counts") {
  Geometry g(2, 3, 5);
  Configuration init(g);
  for (SiteIndex s = 0; s < init.size(); ++s) init.set(s, static_cast<State>(s % 4));
  CountGuard guard;
  ModelParams p = full_params(3.0);
  Simulator sim(init, p, RandomStream(9, 1));
  sim.advance(1.0, guard);
  CHECK_FALSE(guard.violated);
  CHECK(guard.counts == occupancy_counts(sim.configuration()));
}

TEST_CASE("identical seeds give identical event streams") {
  Geometry g(1, 4);
  Configuration init(g, 1);
  auto run = [&](std::uint64_t seed) {
    std::ostringstream os;
    EventLogWriter log(os);
    simulate(init, full_params(2.0), 1.0, seed, 3, log);
    return os.str();
  };
  const auto a = run(77);
  CHECK(a == run(77));
  CHECK(a != run(78));
  CHECK(a.find("\"kind\":\"exchange\"") != std::string::npos);
}

TEST_CASE("envelope proposal gaps are exponential (KS at the 1% level)") {
  Geometry g(1, 2);
  Configuration init(g, 2);
  ModelParams p = full_params(1.7);
  ProposalTimes times;
  Simulator sim(init, p, RandomStream(123, 0));
  sim.advance(2000.0, times);
  const double rate = sim.bounds().total();
  std::vector<double> gaps;
  double prev = 0.0;
  for (double t : times.t) {
    gaps.push_back(t - prev);
    prev = t;
  }
  std::sort(gaps.begin(), gaps.end());
  const double n = static_cast<double>(gaps.size());
  REQUIRE(n > 10000);
  double d = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * gaps[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  CHECK(d * std::sqrt(n) < 1.628);
}

TEST_CASE("advance in pieces keeps time monotone and reaches t_end") {
  Geometry g(1, 3);
  Simulator sim(Configuration(g, 3), full_params(2.0), RandomStream(4, 4));
  double last = 0.0;
  for (double t : {0.1, 0.2, 0.2, 0.5}) {
    sim.advance(t);
    CHECK(sim.clock().t >= last);
    CHECK(sim.clock().t == t);
    last = sim.clock().t;
  }
}

TEST_CASE("two-site strip at t = 0.5 matches the uniformization oracle") {
  Geometry g(2, 0, 2);
  ModelParams p = full_params(1.0);
  Configuration init(g);
  init.set(0, 1);
  init.set(1, 2);
  const auto gen = build_generator(g, p);
  std::vector<double> start(gen.dimension(), 0.0);
  start[init.code()] = 1.0;
  const auto exact = transient_distribution(gen, start, 0.5);

  const int replicas = 1000000;
  std::vector<double> hist(gen.dimension(), 0.0);
  for (int k = 0; k < replicas; ++k) {
    Simulator sim(init, p, RandomStream(2718, static_cast<std::uint64_t>(k)));
    sim.advance(0.5);
    hist[sim.configuration().code()] += 1.0;
  }
  for (auto& h : hist) h /= replicas;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double se = std::sqrt(exact[i] * (1.0 - exact[i]) / replicas);
    CHECK(std::abs(hist[i] - exact[i]) <= 3.0 * se + 1e-12);
  }
  CHECK(total_variation(hist, exact) < 0.01);
}

TEST_CASE("non-finite rates are rejected") {
  Geometry g(1, 1);
  ModelParams p = full_params();
  p.lambda1 = INFINITY;
  CHECK_THROWS_AS(Simulator(Configuration(g), p, RandomStream(0, 0)), std::invalid_argument);
}
