#pragma once

// Product (local-equilibrium) initial measures and empirical density pairings.

#include <functional>
#include <string>

#include "bdcp/lattice.hpp"
#include "bdcp/params.hpp"
#include "bdcp/rng.hpp"
#include "bdcp/testfn.hpp"

namespace bdcp {

/// Macroscopic density profile u -> (rho1, rho2, rho3).
using DensityProfile = std::function<Density(const Point& u)>;

DensityProfile constant_profile(const Density& rho);

/// Affine interpolation between `left` at u1 = -1 and `right` at u1 = +1,
/// plus amplitude * cos(pi u1 / 2). The cosine vanishes at u1 = +-1, so the
/// profile is compatible with reservoir data (left, right).
DensityProfile cosine_profile(const Density& left, const Density& right, const Density& amplitude);

/// Named profiles: "const:a,b,c", "cosine:a1,a2,a3" (lift from b_hat sides).
DensityProfile parse_profile(const std::string& name, const BoundaryProfile& b_hat);

/// Independent sites; site x takes state i with probability rho_i(x/N).
/// Throws std::invalid_argument if the profile leaves the simplex (1e-12 slack).
Configuration sample_product_measure(const DensityProfile& profile, const Geometry& geometry,
                                     RandomStream& rng);

/// N^{-d} sum_i sum_x G_i(t, x/N) eta_i(x).
double empirical_pairing(const Configuration& config, const TestTriple& g, double t = 0.0);

}  // namespace bdcp
