#pragma once

// The limiting reaction-diffusion system
//   d_t rho = Laplace rho + F(rho),   rho = b_hat on u1 = +-1,
// on [-1,1] (x a transverse torus in d = 2), by explicit FTCS.

#include <array>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdcp/lattice.hpp"
#include "bdcp/measures.hpp"
#include "bdcp/params.hpp"
#include "bdcp/testfn.hpp"

namespace bdcp {

using Jacobian = std::array<std::array<double, 3>, 3>;

/// F of the limiting equation with beta_hat = 2d (lambda1 rho1 + lambda2 rho3):
///   F1 = beta_hat rho0 + rho3 - (r + 1) rho1
///   F2 = r rho0 + rho3 - beta_hat rho2 - rho2
///   F3 = beta_hat rho2 + r rho1 - 2 rho3
/// Throws std::domain_error outside the simplex (1e-12 slack).
Density reaction_F(const Density& rho, const ModelParams& params, int dim);

/// Same formula without the simplex check.
Density reaction_F_unchecked(const Density& rho, const ModelParams& params, int dim) noexcept;

/// J[i][j] = dF_i / d rho_j (rho0 eliminated).
Jacobian reaction_jacobian(const Density& rho, const ModelParams& params, int dim) noexcept;

struct SimplexViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Node (i1, i2) sits at u = (-1 + i1 h, i2 h). Strip mode has 2/h + 1 axial
/// nodes including both boundary columns; torus mode has 2/h (period 2).
struct PdeGrid {
  int dim = 1;
  double h = 0.0;
  int n1 = 0;
  int n2 = 1;
  BoundaryMode mode = BoundaryMode::reservoirs;

  std::size_t size() const noexcept { return static_cast<std::size_t>(n1) * n2; }
  std::size_t index(int i1, int i2 = 0) const noexcept {
    return static_cast<std::size_t>(i1) + static_cast<std::size_t>(n1) * i2;
  }
  Point node(int i1, int i2 = 0) const noexcept { return {-1.0 + i1 * h, i2 * h}; }
  /// Trapezoid weight of axial node i1 (times h^{d-1} for the transverse sum).
  double weight(int i1) const noexcept;
  bool is_dirichlet(int i1) const noexcept {
    return mode == BoundaryMode::reservoirs && (i1 == 0 || i1 == n1 - 1);
  }
};

PdeGrid make_grid(int dim, double h, BoundaryMode mode = BoundaryMode::reservoirs,
                  double transverse_period = 1.0);

struct PdeState {
  PdeGrid grid;
  double t = 0.0;
  std::vector<Density> rho;

  const Density& at(int i1, int i2 = 0) const { return rho[grid.index(i1, i2)]; }
};

struct PdeOptions {
  double h = 1.0 / 64;
  /// 0 picks the CFL limit h^2 / (4d); each interval between snapshots is
  /// then split into whole steps of at most dt.
  double dt = 0.0;
  BoundaryMode mode = BoundaryMode::reservoirs;
  double transverse_period = 1.0;
  std::vector<double> snapshots;  // horizon T is always included
  bool record_all_steps = false;
  double simplex_tol = 1e-9;
};

struct PdeTrajectory {
  std::vector<PdeState> states;  // snapshot times (or every step), increasing
  double dt_max = 0.0;
  std::size_t steps = 0;
  std::vector<std::string> warnings;

  /// The recorded state at time t (exact match within 1e-12).
  const PdeState& at(double t) const;
};

/// Receives the initial state and the state after every step.
using PdeStepObserver = std::function<void(const PdeState&)>;

/// Diffusion is on iff exchange_on, F iff reaction_on. In strip mode the
/// axial ends are Dirichlet nodes pinned to b_hat when boundary_on and
/// reflecting otherwise. Throws std::invalid_argument on a CFL violation and
/// SimplexViolation if a node leaves the simplex by more than simplex_tol.
PdeTrajectory solve_pde(const DensityProfile& gamma, const ModelParams& params, int dim, double T,
                        const PdeOptions& options, const PdeStepObserver& observer = {});

/// sum_i <rho_i, G_i(t)> by the trapezoid rule.
double pde_pairing(const PdeState& s, const TestTriple& g, double t);

/// sum_i <-grad rho_i, G_i(t)>, gradient by centered differences (one-sided at the ends).
double gradient_pairing(const PdeState& s, const VectorTestTriple& g, double t);

/// sum_i <F_i(rho), H_i(t)>.
double reaction_pairing(const PdeState& s, const TestTriple& h, const ModelParams& params, double t);

/// Max over nodes and components of |a - b| (same grid).
double sup_distance(const PdeState& a, const PdeState& b);

/// Linear interpolation in u1 (d = 1, or along the row i2 = 0).
Density interpolate(const PdeState& s, double u1);

/// Trapezoid-in-time accumulator of the weak (integrated) formulation
///   R = <rho_T, G_T> - <rho_0, G_0> - int <rho, d_s G> - int <rho, Laplace G>
///       - int <F(rho), G> + int sum_i int_Gamma n1 b_i d_1 G_i dS ds.
/// The Laplace and surface terms are present iff diffusion is on, the F
/// term iff reaction is on. Feed states in time order.
class WeakResidual {
 public:
  /// Throws std::invalid_argument if some G_i does not vanish on u1 = +-1.
  WeakResidual(TestTriple g, ModelParams params, int dim, BoundaryMode mode = BoundaryMode::reservoirs);

  void add(const PdeState& s);
  void operator()(const PdeState& s) { add(s); }
  /// Signed residual over the states added so far.
  double value() const;

 private:
  double integrand(const PdeState& s) const;

  TestTriple g_;
  ModelParams params_;
  int dim_;
  BoundaryMode mode_;
  bool started_ = false;
  double first_pairing_ = 0.0, last_pairing_ = 0.0, last_t_ = 0.0, last_integrand_ = 0.0;
  double integral_ = 0.0;
};

/// |R| over the recorded states of a trajectory.
double weak_residual(const PdeTrajectory& traj, const TestTriple& g, const ModelParams& params, int dim);

/// CSV rows t,u1[,u2],rho1,rho2,rho3 for each state.
void write_pde_csv(std::ostream& out, const std::vector<PdeState>& states);

}  // namespace bdcp
