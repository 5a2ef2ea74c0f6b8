#include "bdcp/rates.hpp"

#include <stdexcept>

namespace bdcp {

double beta(const Configuration& config, SiteIndex site, const ModelParams& params) {
  return birth_rate(config, site, reaction_constants(params));
}

RateTable<> reaction_rates(const Configuration& config, SiteIndex site, const ModelParams& params) {
  return flip_rates(config[site], beta(config, site, params), params.r);
}

std::array<double, 4> reservoir_weights(const Geometry& geometry, SiteIndex site,
                                        const ModelParams& params) {
  const Point u = geometry.macro(site);
  const Density b = params.b_hat(geometry.boundary_side(site), u[1]);
  return {empty_density(b), b[0], b[1], b[2]};
}

RateTable<> boundary_rates(const Configuration& config, SiteIndex site, const ModelParams& params) {
  if (!config.geometry().is_boundary(site))
    throw std::invalid_argument("boundary_rates called on a site outside Gamma_N");
  const auto w = reservoir_weights(config.geometry(), site, params);
  RateTable<> t{};
  const double n2 = params.speedup();
  for (int j = 0; j < 4; ++j)
    if (j != config[site]) t[j] = n2 * w[j];
  return t;
}

double reaction_rate_bound(const ModelParams& params, int dim) {
  return std::max(params.r, 1.0) +
         std::max(2.0 * dim * std::max(params.lambda1, params.lambda2), 1.0);
}

}  // namespace bdcp
