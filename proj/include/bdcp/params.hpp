#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace bdcp {

/// Densities (rho1, rho2, rho3) of the three particle types; rho0 = 1 - sum.
using Density = std::array<double, 3>;

inline double empty_density(const Density& rho) noexcept { return 1.0 - rho[0] - rho[1] - rho[2]; }

/// True when every component is >= -slack and the sum is <= 1 + slack.
bool in_simplex(const Density& rho, double slack = 0.0) noexcept;

/// Reservoir densities b = (b1, b2, b3) on the boundary u1 = +-1, as a
/// function of the side (-1 or +1) and the transverse coordinate u2.
class BoundaryProfile {
 public:
  using Fn = std::function<Density(int side, double u2)>;

  BoundaryProfile();
  explicit BoundaryProfile(Fn fn, std::string description = "custom");

  static BoundaryProfile constant(const Density& b);
  static BoundaryProfile sides(const Density& left, const Density& right);

  Density operator()(int side, double u2 = 0.0) const { return fn_(side, u2); }
  const std::string& description() const noexcept { return description_; }

 private:
  Fn fn_;
  std::string description_;
};

struct ModelParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double r = 0.0;
  BoundaryProfile b_hat;
  /// The N of the N^2 speed-up of the exchange and boundary channels.
  double scale_N = 1.0;
  bool reaction_on = true;
  bool exchange_on = true;
  bool boundary_on = true;

  double speedup() const noexcept { return scale_N * scale_N; }
};

/// Throws std::invalid_argument on negative or non-finite rates.
void validate(const ModelParams& params);

/// Non-fatal remarks, e.g. lambda2 >= lambda1.
std::vector<std::string> warnings(const ModelParams& params);

}  // namespace bdcp
