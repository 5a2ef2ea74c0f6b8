#pragma once

// Independent d = 1 solver: Dirichlet sine basis on [-1, 1], heat semigroup
// per mode, and the Duhamel fixed point
//   rho = lift + e^{t Laplace} (gamma - lift) + int_0^t e^{(t-s) Laplace} F(rho_s) ds
// solved by Picard iteration on chained subintervals.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "bdcp/measures.hpp"
#include "bdcp/params.hpp"

namespace bdcp {

/// phi_n(u) = sin(n pi (u + 1) / 2), alpha_n = (n pi / 2)^2; int phi_n^2 = 1.
struct DirichletMode {
  int n = 1;
  double alpha = 0.0;
  double operator()(double u) const noexcept;
  double second_derivative(double u) const noexcept { return -alpha * (*this)(u); }
};

DirichletMode dirichlet_mode(int n);

/// Entry k holds the coefficient of mode k + 1; multiplies it by e^{-alpha dt}.
Eigen::VectorXd heat_propagate(const Eigen::VectorXd& coeffs, double dt);

struct SpectralOptions {
  int modes = 128;
  /// Gauss-Legendre points for projections; 0 means 4 * modes.
  int quadrature = 0;
  /// Picard runs on subintervals of at most this length.
  double subinterval = 0.05;
  int initial_steps = 16;  // per subinterval, doubled by the refinement loop
  int picard_max = 100;
  double tol = 1e-8;
  int max_refinements = 10;
};

struct SpectralSolution {
  Density left{}, right{};  // boundary lift endpoints
  int modes = 0;
  std::vector<double> times;
  std::vector<std::array<Eigen::VectorXd, 3>> coeffs;  // per time node
  std::vector<int> picard_iterations;                  // per subinterval, finest grid
  int steps_per_subinterval = 0;
  double refinement_change = 0.0;

  Density lift(double u) const;
  /// Solution at a time node (exact match within 1e-12) or interpolated
  /// linearly in time between nodes.
  Density evaluate(double t, double u) const;
};

/// Throws std::runtime_error when Picard fails within picard_max sweeps or
/// the time refinement does not settle within max_refinements halvings.
SpectralSolution duhamel_solve(const DensityProfile& gamma, const ModelParams& params, double T,
                               const SpectralOptions& options = {});

}  // namespace bdcp
