#include "bdcp/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bdcp {

bool in_simplex(const Density& rho, double slack) noexcept {
  for (double v : rho)
    if (!(v >= -slack)) return false;
  return rho[0] + rho[1] + rho[2] <= 1.0 + slack;
}

namespace {

void check_reservoir(const Density& b) {
  for (double v : b)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw std::invalid_argument("reservoir densities must lie in [0,1]");
  if (b[0] + b[1] + b[2] > 1.0 + 1e-12)
    throw std::invalid_argument("reservoir densities must satisfy b1+b2+b3 <= 1");
}

std::string describe(const Density& b) {
  std::ostringstream os;
  os << b[0] << ',' << b[1] << ',' << b[2];
  return os.str();
}

}  // namespace

BoundaryProfile::BoundaryProfile() : BoundaryProfile(constant({0.0, 0.0, 0.0})) {}

BoundaryProfile::BoundaryProfile(Fn fn, std::string description)
    : fn_(std::move(fn)), description_(std::move(description)) {}

BoundaryProfile BoundaryProfile::constant(const Density& b) {
  check_reservoir(b);
  return BoundaryProfile([b](int, double) { return b; }, "constant:" + describe(b));
}

BoundaryProfile BoundaryProfile::sides(const Density& left, const Density& right) {
  check_reservoir(left);
  check_reservoir(right);
  return BoundaryProfile([left, right](int side, double) { return side < 0 ? left : right; },
                         "sides:" + describe(left) + ";" + describe(right));
}

void validate(const ModelParams& p) {
  for (double v : {p.lambda1, p.lambda2, p.r})
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("rates lambda1, lambda2, r must be finite and >= 0");
  if (!std::isfinite(p.scale_N) || p.scale_N <= 0.0)
    throw std::invalid_argument("scale_N must be finite and > 0");
}

std::vector<std::string> warnings(const ModelParams& p) {
  std::vector<std::string> out;
  if (p.reaction_on && p.lambda2 >= p.lambda1 && (p.lambda1 > 0.0 || p.lambda2 > 0.0))
    out.emplace_back("lambda2 >= lambda1: sterile-occupied sites breed at least as fast as wild ones");
  return out;
}

}  // namespace bdcp
