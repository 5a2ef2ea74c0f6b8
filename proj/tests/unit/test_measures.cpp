#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bdcp/measures.hpp"
#include "bdcp/testfn.hpp"
#include "doctest.h"

using namespace bdcp;

TEST_CASE("test function library: values, derivatives, support") {
  const auto s = TestFunction::parse("sine:2:0.5");
  CHECK(s.value(0.0, {-1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(std::abs(s.value(0.0, {1.0, 0.0})) < 1e-14);
  CHECK(s.value(0.0, {-0.5, 0.0}) == doctest::Approx(1.0));
  CHECK(s.value(2.0, {-0.5, 0.0}) == doctest::Approx(std::exp(1.0)));
  CHECK(s.time_derivative(0.0, {-0.5, 0.0}) == doctest::Approx(0.5));
  CHECK(s.boundary_vanishing());
  CHECK_FALSE(s.compactly_supported());

  const auto b = TestFunction::parse("bump:0.1:0.5");
  CHECK(b.value(0.0, {0.1, 0.0}) == doctest::Approx(1.0));
  CHECK(b.value(0.0, {0.61, 0.0}) == 0.0);
  CHECK(b.value(0.0, {-0.41, 0.0}) == 0.0);
  CHECK(b.compactly_supported());
  CHECK(TestFunction::parse("bump:0.8:0.5").boundary_vanishing() == false);

  CHECK_FALSE(TestFunction::parse("const:1").boundary_vanishing());
  CHECK(TestFunction::parse("zero").is_zero());
  CHECK_THROWS(TestFunction::parse("sine:1.5"));
  CHECK_THROWS(TestFunction::parse("poly:3"));
  CHECK_THROWS(parse_test_triple("sine:1,sine:2"));
}

TEST_CASE("analytic derivatives agree with central differences") {
  for (const char* name : {"sine:1", "sine:3:0.7", "bump:0.2:0.6", "bump:-0.3:0.4:1.5"}) {
    const auto f = TestFunction::parse(name);
    for (double u : {-0.55, -0.2, 0.05, 0.31, 0.6}) {
      const double h = 1e-4;
      const Point p{u, 0.0};
      const double d1 = (f.value(0.3, {u + h, 0.0}) - f.value(0.3, {u - h, 0.0})) / (2 * h);
      const double d2 =
          (f.value(0.3, {u + h, 0.0}) - 2 * f.value(0.3, p) + f.value(0.3, {u - h, 0.0})) / (h * h);
      const double dt = (f.value(0.3 + h, p) - f.value(0.3 - h, p)) / (2 * h);
      CHECK(f.grad1(0.3, p) == doctest::Approx(d1).epsilon(1e-5).scale(1.0));
      CHECK(f.laplacian(0.3, p) == doctest::Approx(d2).epsilon(1e-4).scale(1.0));
      CHECK(f.time_derivative(0.3, p) == doctest::Approx(dt).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("product measure: degenerate profiles") {
  Geometry g(2, 5, 4);
  RandomStream rng(1, 0);
  const auto zero = sample_product_measure(constant_profile({0, 0, 0}), g, rng);
  CHECK(occupancy_counts(zero)[0] == g.site_count());
  const auto ones = sample_product_measure(constant_profile({1, 0, 0}), g, rng);
  CHECK(occupancy_counts(ones)[1] == g.site_count());
  const DensityProfile bad = [](const Point&) { return Density{0.6, 0.5, 0.0}; };
  CHECK_THROWS_AS(sample_product_measure(bad, g, rng), std::invalid_argument);
}

TEST_CASE("product measure: (1/4,1/4,1/4) on 10^4 sites is binomially concentrated") {
  Geometry g(2, 49, 100);
  RandomStream rng(31, 0);
  const auto c = sample_product_measure(constant_profile({0.25, 0.25, 0.25}), g, rng);
  const auto counts = occupancy_counts(c);
  const double n = static_cast<double>(g.site_count());
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (auto k : counts) CHECK(std::abs(static_cast<double>(k) - n / 4) < 4 * sd);
}

TEST_CASE("cosine profile matches the reservoirs at u1 = +-1") {
  const Density l{0.3, 0.2, 0.1}, r{0.1, 0.3, 0.2}, a{0.2, -0.1, 0.15};
  const auto p = cosine_profile(l, r, a);
  for (int i = 0; i < 3; ++i) {
    CHECK(p({-1.0, 0.0})[i] == doctest::Approx(l[i]));
    CHECK(p({1.0, 0.0})[i] == doctest::Approx(r[i]));
    CHECK(p({0.0, 0.0})[i] == doctest::Approx((l[i] + r[i]) / 2 + a[i]));
  }
}

TEST_CASE("empirical pairing") {
  const int N = 7;
  Geometry g(1, N);
  const TestTriple ones{TestFunction::constant(1.0), TestFunction::zero(), TestFunction::zero()};
  CHECK(empirical_pairing(Configuration(g, 1), ones) == doctest::Approx((2.0 * N + 1) / N));
  CHECK(empirical_pairing(Configuration(g), ones) == 0.0);

  Configuration single(g);
  single.set(g.index(0), 2);
  const TestTriple second{TestFunction::zero(), TestFunction::sine(2), TestFunction::zero()};
  CHECK(std::abs(empirical_pairing(single, second)) < 1e-15);

  Geometry g2(2, 4, 6);
  RandomStream rng(5, 0);
  const auto c = sample_product_measure(constant_profile({0.2, 0.3, 0.1}), g2, rng);
  const auto counts = occupancy_counts(c);
  for (int i = 0; i < 3; ++i) {
    TestTriple t{TestFunction::zero(), TestFunction::zero(), TestFunction::zero()};
    t[i] = TestFunction::constant(1.0);
    CHECK(empirical_pairing(c, t) == doctest::Approx(counts[i + 1] / 16.0));
  }
}
