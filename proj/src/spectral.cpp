#include "bdcp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "bdcp/pde.hpp"

namespace bdcp {

double DirichletMode::operator()(double u) const noexcept {
  if (u <= -1.0 || u >= 1.0) return 0.0;
  return std::sin(n * std::numbers::pi * (u + 1.0) / 2.0);
}

DirichletMode dirichlet_mode(int n) {
  if (n < 1) throw std::invalid_argument("dirichlet_mode: n must be >= 1");
  const double k = n * std::numbers::pi / 2.0;
  return {n, k * k};
}

Eigen::VectorXd heat_propagate(const Eigen::VectorXd& coeffs, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("heat_propagate: dt must be >= 0");
  Eigen::VectorXd out = coeffs;
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] *= std::exp(-dirichlet_mode(static_cast<int>(k) + 1).alpha * dt);
  return out;
}

Density SpectralSolution::lift(double u) const {
  const double w = (1.0 + u) / 2.0;
  Density out;
  for (int i = 0; i < 3; ++i) out[i] = (1.0 - w) * left[i] + w * right[i];
  return out;
}

Density SpectralSolution::evaluate(double t, double u) const {
  if (times.empty()) throw std::logic_error("empty spectral solution");
  if (t < times.front() - 1e-12 || t > times.back() + 1e-12)
    throw std::out_of_range("spectral solution: time outside the solved horizon");
  auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12);
  std::size_t k = static_cast<std::size_t>(it - times.begin());
  std::array<Eigen::VectorXd, 3> c;
  if (k < times.size() && std::abs(times[k] - t) <= 1e-12) {
    c = coeffs[k];
  } else {
    const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    for (int i = 0; i < 3; ++i) c[i] = (1.0 - w) * coeffs[k - 1][i] + w * coeffs[k][i];
  }
  Density out = lift(u);
  for (int n = 1; n <= modes; ++n) {
    const double phi = dirichlet_mode(n)(u);
    for (int i = 0; i < 3; ++i) out[i] += c[i][n - 1] * phi;
  }
  return out;
}

namespace {

// phi1(z) = (1 - e^{-z}) / z and phi2(z) = (1 - e^{-z}(1 + z)) / z^2.
double phi1(double z) { return z < 1e-8 ? 1.0 - z / 2.0 : -std::expm1(-z) / z; }
double phi2(double z) {
  if (z < 1e-3) return 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0;
  return (-std::expm1(-z) - z * std::exp(-z)) / (z * z);
}

struct Discretization {
  int M = 0;
  Eigen::MatrixXd phi;   // Q x M basis values at the quadrature nodes
  Eigen::MatrixXd proj;  // M x Q: weighted transpose
  Eigen::MatrixXd lift;  // Q x 3
  Eigen::ArrayXd alpha;  // M
};

void gauss_legendre(int q, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd sub(std::max(q - 1, 0));
  for (int k = 1; k < q; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  x = es.eigenvalues();
  w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

using Coeffs = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct Solver {
  const ModelParams& p;
  const Discretization& D;

  Coeffs forcing(const Coeffs& c) const {
    Eigen::MatrixXd rho = D.lift + D.phi * c;
    Eigen::MatrixXd f(rho.rows(), 3);
    for (Eigen::Index j = 0; j < rho.rows(); ++j) {
      const Density v = reaction_F_unchecked({rho(j, 0), rho(j, 1), rho(j, 2)}, p, 1);
      f(j, 0) = v[0];
      f(j, 1) = v[1];
      f(j, 2) = v[2];
    }
    return D.proj * f;
  }

  static double l1_distance(const Coeffs& a, const Coeffs& b) {
    return (a - b).cwiseAbs().colwise().sum().maxCoeff();
  }

  // Picard on [t0, t0 + K tau] from c0. Returns the coefficients at the K + 1 nodes.
  std::vector<Coeffs> picard(const Coeffs& c0, int K, double tau, double tol, int cap, int& iterations) const {
    const Eigen::ArrayXd z = D.alpha * tau;
    Eigen::ArrayXd decay(D.M), w0(D.M), w1(D.M);
    for (int n = 0; n < D.M; ++n) {
      decay[n] = std::exp(-z[n]);
      w0[n] = tau * phi2(z[n]);
      w1[n] = tau * (phi1(z[n]) - phi2(z[n]));
    }
    std::vector<Coeffs> c(K + 1), f(K + 1);
    c[0] = c0;
    for (int k = 1; k <= K; ++k) c[k] = (decay.matrix().asDiagonal() * c[k - 1]).eval();
    if (!p.reaction_on) {
      iterations = 0;
      return c;
    }
    for (int k = 0; k <= K; ++k) f[k] = forcing(c[k]);
    for (int it = 1; it <= cap; ++it) {
      std::vector<Coeffs> next(K + 1);
      next[0] = c0;
      double diff = 0.0;
      for (int k = 0; k < K; ++k) {
        next[k + 1] = decay.matrix().asDiagonal() * next[k];
        next[k + 1] += w0.matrix().asDiagonal() * f[k];
        next[k + 1] += w1.matrix().asDiagonal() * f[k + 1];
        diff = std::max(diff, l1_distance(next[k + 1], c[k + 1]));
      }
      c.swap(next);
      for (int k = 1; k <= K; ++k) f[k] = forcing(c[k]);
      if (diff < tol) {
        iterations = it;
        return c;
      }
    }
    std::ostringstream os;
    os << "duhamel_solve: Picard iteration did not converge within " << cap << " sweeps";
    throw std::runtime_error(os.str());
  }
};

struct Pass {
  std::vector<double> times;
  std::vector<Coeffs> coeffs;
  std::vector<int> iterations;
};

Pass run_pass(const Solver& s, const Coeffs& c0, double T, int subintervals, int K, double tol, int cap) {
  Pass out;
  const double H = T / subintervals;
  const double tau = H / K;
  out.times.push_back(0.0);
  out.coeffs.push_back(c0);
  Coeffs start = c0;
  for (int m = 0; m < subintervals; ++m) {
    int its = 0;
    auto c = s.picard(start, K, tau, tol, cap, its);
    out.iterations.push_back(its);
    for (int k = 1; k <= K; ++k) {
      out.times.push_back(k == K ? (m + 1) * H : m * H + k * tau);
      out.coeffs.push_back(c[k]);
    }
    start = c[K];
  }
  out.times.back() = T;
  return out;
}

}  // namespace

SpectralSolution duhamel_solve(const DensityProfile& gamma, const ModelParams& params, double T,
                               const SpectralOptions& opt) {
  validate(params);
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("duhamel_solve: T must be finite and >= 0");
  if (opt.modes < 1 || opt.initial_steps < 1 || opt.picard_max < 1 || !(opt.tol > 0.0) ||
      !(opt.subinterval > 0.0))
    throw std::invalid_argument("duhamel_solve: invalid options");
  if (!params.exchange_on)
    throw std::invalid_argument("duhamel_solve: the heat-kernel representation needs diffusion on");

  SpectralSolution sol;
  sol.modes = opt.modes;
  if (params.boundary_on) {
    sol.left = params.b_hat(-1);
    sol.right = params.b_hat(+1);
  } else {
    throw std::invalid_argument("duhamel_solve: Dirichlet data required (boundary_on)");
  }

  Discretization D;
  D.M = opt.modes;
  const int Q = opt.quadrature > 0 ? opt.quadrature : 4 * opt.modes;
  Eigen::VectorXd x, w;
  gauss_legendre(Q, x, w);
  D.phi.resize(Q, D.M);
  D.lift.resize(Q, 3);
  D.alpha.resize(D.M);
  for (int n = 1; n <= D.M; ++n) D.alpha[n - 1] = dirichlet_mode(n).alpha;
  Eigen::MatrixXd g0(Q, 3);
  for (int j = 0; j < Q; ++j) {
    for (int n = 1; n <= D.M; ++n) D.phi(j, n - 1) = dirichlet_mode(n)(x[j]);
    const Density l = sol.lift(x[j]);
    const Density g = gamma({x[j], 0.0});
    for (int i = 0; i < 3; ++i) {
      D.lift(j, i) = l[i];
      g0(j, i) = g[i] - l[i];
    }
  }
  D.proj = D.phi.transpose() * w.asDiagonal();
  const Coeffs c0 = D.proj * g0;

  const Solver solver{params, D};
  const int subintervals = std::max(1, static_cast<int>(std::ceil(T / opt.subinterval - 1e-12)));
  if (T == 0.0) {
    sol.times = {0.0};
    sol.coeffs.push_back({c0.col(0), c0.col(1), c0.col(2)});
    return sol;
  }

  int K = opt.initial_steps;
  Pass prev = run_pass(solver, c0, T, subintervals, K, opt.tol, opt.picard_max);
  bool settled = !params.reaction_on;  // exact per mode without forcing
  double change = 0.0;
  for (int r = 0; !settled && r < opt.max_refinements; ++r) {
    K *= 2;
    Pass next = run_pass(solver, c0, T, subintervals, K, opt.tol, opt.picard_max);
    change = 0.0;
    for (std::size_t k = 0; k < prev.coeffs.size(); ++k)
      change = std::max(change, Solver::l1_distance(prev.coeffs[k], next.coeffs[2 * k]));
    prev = std::move(next);
    settled = change < opt.tol / 10.0;
  }
  if (!settled) {
    std::ostringstream os;
    os << "duhamel_solve: time refinement did not settle (last change " << change << ")";
    throw std::runtime_error(os.str());
  }
  sol.times = std::move(prev.times);
  sol.picard_iterations = std::move(prev.iterations);
  sol.steps_per_subinterval = K;
  sol.refinement_change = change;
  sol.coeffs.reserve(prev.coeffs.size());
  for (const auto& c : prev.coeffs) sol.coeffs.push_back({c.col(0), c.col(1), c.col(2)});
  return sol;
}

}  // namespace bdcp
