#include "bdcp/measures.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bdcp {

namespace {

Density parse_density(const std::string& text) {
  Density d{};
  std::istringstream is(text);
  std::string item;
  int k = 0;
  while (std::getline(is, item, ',')) {
    if (k == 3) throw std::invalid_argument("density needs 3 entries: '" + text + "'");
    d[k++] = std::stod(item);
  }
  if (k != 3) throw std::invalid_argument("density needs 3 entries: '" + text + "'");
  return d;
}

double lattice_scale(const Geometry& g) { return g.half_width() > 0 ? g.half_width() : 1.0; }

}  // namespace

DensityProfile constant_profile(const Density& rho) {
  if (!in_simplex(rho, 1e-12)) throw std::invalid_argument("constant profile outside the simplex");
  return [rho](const Point&) { return rho; };
}

DensityProfile cosine_profile(const Density& left, const Density& right, const Density& amplitude) {
  return [=](const Point& u) {
    const double w = (1.0 + u[0]) / 2.0;
    const double c = std::cos(std::numbers::pi * u[0] / 2.0);
    Density rho;
    for (int i = 0; i < 3; ++i) rho[i] = (1.0 - w) * left[i] + w * right[i] + amplitude[i] * c;
    return rho;
  };
}

DensityProfile parse_profile(const std::string& name, const BoundaryProfile& b_hat) {
  const auto colon = name.find(':');
  const std::string head = name.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : name.substr(colon + 1);
  if (head == "const") return constant_profile(parse_density(rest));
  if (head == "cosine") return cosine_profile(b_hat(-1), b_hat(+1), parse_density(rest));
  if (head == "lift") return cosine_profile(b_hat(-1), b_hat(+1), Density{});
  throw std::invalid_argument("unknown profile '" + name + "'");
}

Configuration sample_product_measure(const DensityProfile& profile, const Geometry& geometry,
                                     RandomStream& rng) {
  Configuration c(geometry);
  for (SiteIndex x = 0; x < geometry.site_count(); ++x) {
    const Density rho = profile(geometry.macro(x));
    if (!in_simplex(rho, 1e-12)) {
      std::ostringstream os;
      os << "profile outside the simplex at site " << x << ": (" << rho[0] << ", " << rho[1]
         << ", " << rho[2] << ")";
      throw std::invalid_argument(os.str());
    }
    const double u = rng.uniform();
    State s = 0;
    if (u < rho[0]) s = 1;
    else if (u < rho[0] + rho[1]) s = 2;
    else if (u < rho[0] + rho[1] + rho[2]) s = 3;
    c.set(x, s);
  }
  return c;
}

double empirical_pairing(const Configuration& config, const TestTriple& g, double t) {
  const Geometry& geo = config.geometry();
  double sum = 0.0;
  for (SiteIndex x = 0; x < geo.site_count(); ++x) {
    const State s = config[x];
    if (s == 0 || g[s - 1].is_zero()) continue;
    sum += g[s - 1].value(t, geo.macro(x));
  }
  return sum / std::pow(lattice_scale(geo), geo.dim());
}

}  // namespace bdcp
