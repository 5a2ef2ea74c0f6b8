#include <cmath>
#include <vector>

#include "bdcp/rng.hpp"
#include "doctest.h"

using namespace bdcp;

// Reference words from numpy.random.Philox(key=..., counter=...).random_raw(8).
TEST_CASE("Philox4x64-10 reproduces numpy's raw stream") {
  {
    RandomStream rng({0, 0}, {0, 0, 0, 0});
    const std::uint64_t expected[] = {0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL,
                                      0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL,
                                      0x809bf322883987c3ULL, 0x471128b9e807f7ddULL,
                                      0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL};
    for (auto e : expected) CHECK(rng.next_u64() == e);
  }
  {
    RandomStream rng({0x0123456789abcdefULL, 0xfedcba9876543210ULL}, {5, 0, 7, 0});
    const std::uint64_t expected[] = {0xe237714d64c93d6bULL, 0xdd0c4eb0b0816272ULL,
                                      0x6a1ee9848ac5549bULL, 0x948be3a902f62f65ULL,
                                      0x4ff6e068d150600cULL, 0xfa3123625cbcc05eULL,
                                      0xfe43e8dee27b3620ULL, 0xe0ac719bcc922581ULL};
    for (auto e : expected) CHECK(rng.next_u64() == e);
  }
}

TEST_CASE("streams are reproducible and distinct per replica") {
  RandomStream a(99, 3), b(99, 3), c(99, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("uniform, exponential and bounded draws have the right moments") {
  RandomStream rng(2024, 0);
  const int n = 200000;
  double su = 0, se = 0, se2 = 0;
  std::vector<int> hist(7, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double e = rng.exponential(2.0);
    se += e;
    se2 += e * e;
    ++hist[rng.below(7)];
  }
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(se / n - 0.5) < 4 * 0.5 / std::sqrt(n));
  CHECK(std::abs(se2 / n - 0.5) < 0.01);
  for (int h : hist) CHECK(std::abs(h - n / 7.0) < 4 * std::sqrt(n / 7.0));
}
