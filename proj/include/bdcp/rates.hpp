#pragma once

// Microscopic transition rates of the three channels:
//   reaction  (CPRS flips, unscaled),
//   exchange  (nearest-neighbour swaps at rate N^2 per bond),
//   boundary  (reservoir flips at rate N^2 b_j on Gamma_N).
//
// The reaction kernels are templated on the scalar so that the coupling
// tests can compare rate tables in exact rational arithmetic.

#include <algorithm>
#include <array>

#include "bdcp/lattice.hpp"
#include "bdcp/params.hpp"

namespace bdcp {

/// Rate to each target state; the entry of the current state is zero.
template <class Scalar = double>
using RateTable = std::array<Scalar, 4>;

template <class Scalar>
struct ReactionConstants {
  Scalar lambda1{};
  Scalar lambda2{};
  Scalar r{};
};

inline ReactionConstants<double> reaction_constants(const ModelParams& p) {
  return {p.lambda1, p.lambda2, p.r};
}

/// Birth rate lambda1 * #{type-1 neighbours} + lambda2 * #{type-3 neighbours},
/// counting only neighbours y with include(y).
template <class Scalar, class Include>
Scalar birth_rate(const Configuration& config, SiteIndex site, const ReactionConstants<Scalar>& k,
                  Include&& include) {
  int n1 = 0;
  int n3 = 0;
  for (SiteIndex y : config.geometry().neighbors(site)) {
    if (!include(y)) continue;
    const State s = config[y];
    n1 += s == 1;
    n3 += s == 3;
  }
  return k.lambda1 * Scalar(n1) + k.lambda2 * Scalar(n3);
}

template <class Scalar>
Scalar birth_rate(const Configuration& config, SiteIndex site, const ReactionConstants<Scalar>& k) {
  return birth_rate(config, site, k, [](SiteIndex) { return true; });
}

/// Two flip channels at a site in state s:
///   omega flip (0<->2, 1<->3) at r(1-omega) + omega,
///   xi flip    (0<->1, 2<->3) at beta(1-xi) + xi.
template <class Scalar>
RateTable<Scalar> flip_rates(State s, Scalar beta, Scalar r) {
  RateTable<Scalar> t{};
  t[s ^ 2u] = omega_of(s) ? Scalar(1) : r;
  t[s ^ 1u] = xi_of(s) ? Scalar(1) : beta;
  return t;
}

double beta(const Configuration& config, SiteIndex site, const ModelParams& params);

RateTable<> reaction_rates(const Configuration& config, SiteIndex site, const ModelParams& params);

/// Reservoir rates N^2 b_j(x/N) to every j != current state.
/// Throws std::invalid_argument for a site outside Gamma_N.
RateTable<> boundary_rates(const Configuration& config, SiteIndex site, const ModelParams& params);

/// Reservoir distribution (b0, b1, b2, b3) seen by a boundary site.
std::array<double, 4> reservoir_weights(const Geometry& geometry, SiteIndex site,
                                        const ModelParams& params);

/// Exchange rate per unordered bond: N^2.
inline double exchange_rate(const ModelParams& params) { return params.speedup(); }

/// Upper bound on the total reaction rate at any site:
/// max(r, 1) + max(2d * max(lambda1, lambda2), 1).
double reaction_rate_bound(const ModelParams& params, int dim);

template <class Scalar>
Scalar total(const RateTable<Scalar>& t) {
  return t[0] + t[1] + t[2] + t[3];
}

}  // namespace bdcp
