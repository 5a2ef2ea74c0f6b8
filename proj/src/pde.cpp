#include "bdcp/pde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace bdcp {

Density reaction_F_unchecked(const Density& rho, const ModelParams& p, int dim) noexcept {
  const double r0 = empty_density(rho);
  const double b = 2.0 * dim * (p.lambda1 * rho[0] + p.lambda2 * rho[2]);
  return {b * r0 + rho[2] - (p.r + 1.0) * rho[0],
          p.r * r0 + rho[2] - b * rho[1] - rho[1],
          b * rho[1] + p.r * rho[0] - 2.0 * rho[2]};
}

Density reaction_F(const Density& rho, const ModelParams& p, int dim) {
  if (!in_simplex(rho, 1e-12)) {
    std::ostringstream os;
    os << "reaction_F: (" << rho[0] << ", " << rho[1] << ", " << rho[2] << ") is outside the simplex";
    throw std::domain_error(os.str());
  }
  return reaction_F_unchecked(rho, p, dim);
}

Jacobian reaction_jacobian(const Density& rho, const ModelParams& p, int dim) noexcept {
  const double r0 = empty_density(rho);
  const double k1 = 2.0 * dim * p.lambda1;
  const double k3 = 2.0 * dim * p.lambda2;
  const double b = k1 * rho[0] + k3 * rho[2];
  Jacobian j;
  j[0] = {k1 * r0 - b - (p.r + 1.0), -b, k3 * r0 - b + 1.0};
  j[1] = {-p.r - k1 * rho[1], -p.r - b - 1.0, -p.r + 1.0 - k3 * rho[1]};
  j[2] = {k1 * rho[1] + p.r, b, k3 * rho[1] - 2.0};
  return j;
}

double PdeGrid::weight(int i1) const noexcept {
  if (mode == BoundaryMode::reservoirs && (i1 == 0 || i1 == n1 - 1)) return h / 2.0;
  return h;
}

PdeGrid make_grid(int dim, double h, BoundaryMode mode, double transverse_period) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("pde grid: dimension must be 1 or 2");
  if (!(h > 0.0) || h > 1.0) throw std::invalid_argument("pde grid: need 0 < h <= 1");
  const double cells = 2.0 / h;
  if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
    throw std::invalid_argument("pde grid: h must divide the interval [-1, 1]");
  PdeGrid g;
  g.dim = dim;
  g.h = h;
  g.mode = mode;
  g.n1 = static_cast<int>(std::lround(cells)) + (mode == BoundaryMode::reservoirs ? 1 : 0);
  if (dim == 2) {
    const double m = transverse_period / h;
    if (!(m >= 1.0) || std::abs(m - std::round(m)) > 1e-9 * m)
      throw std::invalid_argument("pde grid: h must divide the transverse period");
    g.n2 = static_cast<int>(std::lround(m));
  }
  return g;
}

const PdeState& PdeTrajectory::at(double t) const {
  for (const auto& s : states)
    if (std::abs(s.t - t) <= 1e-12) return s;
  std::ostringstream os;
  os << "no recorded PDE state at t = " << t;
  throw std::out_of_range(os.str());
}

namespace {

void check_simplex(const PdeState& s, double tol) {
  for (std::size_t k = 0; k < s.rho.size(); ++k) {
    if (!in_simplex(s.rho[k], tol)) {
      const auto& r = s.rho[k];
      std::ostringstream os;
      os << "PDE state left the simplex at t = " << s.t << ", node " << k << ": (" << r[0] << ", "
         << r[1] << ", " << r[2] << ")";
      throw SimplexViolation(os.str());
    }
  }
}

struct Stepper {
  const ModelParams& p;
  int dim;
  bool pin;
  std::vector<Density> pinned;  // per Dirichlet node: index by (side, i2)

  void step(const PdeState& in, PdeState& out, double dt) const {
    const PdeGrid& g = in.grid;
    const double inv_h2 = 1.0 / (g.h * g.h);
    const bool torus = g.mode == BoundaryMode::torus;
    for (int i2 = 0; i2 < g.n2; ++i2) {
      const int up = (i2 + 1) % g.n2;
      const int down = (i2 + g.n2 - 1) % g.n2;
      for (int i1 = 0; i1 < g.n1; ++i1) {
        const std::size_t k = g.index(i1, i2);
        if (pin && g.is_dirichlet(i1)) {
          out.rho[k] = pinned[2 * i2 + (i1 == 0 ? 0 : 1)];
          continue;
        }
        int left = i1 - 1, right = i1 + 1;
        if (torus) {
          left = (left + g.n1) % g.n1;
          right %= g.n1;
        } else {
          // Reflecting ends when the reservoirs are off.
          if (left < 0) left = 1;
          if (right >= g.n1) right = g.n1 - 2;
        }
        const Density& c = in.rho[k];
        Density rate{0.0, 0.0, 0.0};
        if (p.exchange_on) {
          const Density& l = in.rho[g.index(left, i2)];
          const Density& r = in.rho[g.index(right, i2)];
          for (int i = 0; i < 3; ++i) rate[i] = l[i] + r[i] - 2.0 * c[i];
          if (dim == 2) {
            const Density& a = in.rho[g.index(i1, up)];
            const Density& b = in.rho[g.index(i1, down)];
            for (int i = 0; i < 3; ++i) rate[i] += a[i] + b[i] - 2.0 * c[i];
          }
          for (double& v : rate) v *= inv_h2;
        }
        if (p.reaction_on) {
          const Density f = reaction_F_unchecked(c, p, dim);
          for (int i = 0; i < 3; ++i) rate[i] += f[i];
        }
        for (int i = 0; i < 3; ++i) out.rho[k][i] = c[i] + dt * rate[i];
      }
    }
  }
};

}  // namespace

PdeTrajectory solve_pde(const DensityProfile& gamma, const ModelParams& params, int dim, double T,
                        const PdeOptions& opt, const PdeStepObserver& observer) {
  validate(params);
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("solve_pde: T must be finite and >= 0");
  const PdeGrid grid = make_grid(dim, opt.h, opt.mode, opt.transverse_period);
  const double dt_cfl = grid.h * grid.h / (4.0 * dim);
  if (opt.dt < 0.0 || opt.dt > dt_cfl * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "solve_pde: dt = " << opt.dt << " violates the CFL limit h^2/(4d) = " << dt_cfl;
    throw std::invalid_argument(os.str());
  }
  const double dt_max = opt.dt > 0.0 ? opt.dt : dt_cfl;

  PdeTrajectory traj;
  traj.dt_max = dt_max;

  PdeState cur{grid, 0.0, std::vector<Density>(grid.size())};
  for (int i2 = 0; i2 < grid.n2; ++i2)
    for (int i1 = 0; i1 < grid.n1; ++i1) cur.rho[grid.index(i1, i2)] = gamma(grid.node(i1, i2));
  check_simplex(cur, opt.simplex_tol);

  Stepper stepper{params, dim, params.boundary_on && grid.mode == BoundaryMode::reservoirs, {}};
  if (stepper.pin) {
    double mismatch = 0.0;
    for (int i2 = 0; i2 < grid.n2; ++i2) {
      const double u2 = grid.node(0, i2)[1];
      stepper.pinned.push_back(params.b_hat(-1, u2));
      stepper.pinned.push_back(params.b_hat(+1, u2));
      for (int i = 0; i < 3; ++i) {
        mismatch = std::max(mismatch, std::abs(cur.at(0, i2)[i] - stepper.pinned[2 * i2][i]));
        mismatch = std::max(mismatch, std::abs(cur.at(grid.n1 - 1, i2)[i] - stepper.pinned[2 * i2 + 1][i]));
      }
    }
    if (mismatch > 1e-9) {
      std::ostringstream os;
      os << "initial profile differs from b_hat on the boundary by " << mismatch
         << "; boundary nodes are pinned from the first step";
      traj.warnings.push_back(os.str());
    }
  }

  std::vector<double> stops;
  for (double s : opt.snapshots)
    if (s >= 0.0 && s <= T) stops.push_back(s);
  stops.push_back(T);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
              stops.end());

  traj.states.push_back(cur);
  if (observer) observer(cur);
  PdeState next = cur;
  for (double stop : stops) {
    const double span = stop - cur.t;
    if (span > 1e-15) {
      const auto n = static_cast<std::size_t>(std::ceil(span / dt_max - 1e-9));
      const double dt = span / static_cast<double>(n);
      const double t0 = cur.t;
      for (std::size_t s = 1; s <= n; ++s) {
        stepper.step(cur, next, dt);
        next.t = s == n ? stop : t0 + static_cast<double>(s) * dt;
        std::swap(cur, next);
        check_simplex(cur, opt.simplex_tol);
        ++traj.steps;
        if (observer) observer(cur);
        if (opt.record_all_steps) traj.states.push_back(cur);
      }
    }
    if (!opt.record_all_steps && std::abs(traj.states.back().t - stop) > 1e-12) traj.states.push_back(cur);
  }
  return traj;
}

namespace {

double transverse_weight(const PdeGrid& g) { return g.dim == 2 ? g.h : 1.0; }

template <class Fn>
double quadrature(const PdeState& s, Fn&& f) {
  const PdeGrid& g = s.grid;
  double sum = 0.0;
  for (int i2 = 0; i2 < g.n2; ++i2) {
    double row = 0.0;
    for (int i1 = 0; i1 < g.n1; ++i1) row += g.weight(i1) * f(i1, i2);
    sum += row;
  }
  return sum * transverse_weight(g);
}

}  // namespace

double pde_pairing(const PdeState& s, const TestTriple& g, double t) {
  return quadrature(s, [&](int i1, int i2) {
    const Point u = s.grid.node(i1, i2);
    const Density& r = s.at(i1, i2);
    double v = 0.0;
    for (int i = 0; i < 3; ++i)
      if (!g[i].is_zero()) v += r[i] * g[i].value(t, u);
    return v;
  });
}

double gradient_pairing(const PdeState& s, const VectorTestTriple& g, double t) {
  const PdeGrid& grid = s.grid;
  const bool torus = grid.mode == BoundaryMode::torus;
  const double inv2h = 1.0 / (2.0 * grid.h);
  return quadrature(s, [&](int i1, int i2) {
    const Point u = grid.node(i1, i2);
    double v = 0.0;
    for (int i = 0; i < 3; ++i) {
      const TestFunction& g1 = g[i][0];
      if (!g1.is_zero()) {
        double d;
        if (torus) {
          d = (s.at((i1 + 1) % grid.n1, i2)[i] - s.at((i1 + grid.n1 - 1) % grid.n1, i2)[i]) * inv2h;
        } else if (i1 == 0) {
          d = (-3.0 * s.at(0, i2)[i] + 4.0 * s.at(1, i2)[i] - s.at(2, i2)[i]) * inv2h;
        } else if (i1 == grid.n1 - 1) {
          d = (3.0 * s.at(i1, i2)[i] - 4.0 * s.at(i1 - 1, i2)[i] + s.at(i1 - 2, i2)[i]) * inv2h;
        } else {
          d = (s.at(i1 + 1, i2)[i] - s.at(i1 - 1, i2)[i]) * inv2h;
        }
        v -= d * g1.value(t, u);
      }
      const TestFunction& g2 = g[i][1];
      if (grid.dim == 2 && !g2.is_zero()) {
        const double d =
            (s.at(i1, (i2 + 1) % grid.n2)[i] - s.at(i1, (i2 + grid.n2 - 1) % grid.n2)[i]) * inv2h;
        v -= d * g2.value(t, u);
      }
    }
    return v;
  });
}

double reaction_pairing(const PdeState& s, const TestTriple& h, const ModelParams& params, double t) {
  return quadrature(s, [&](int i1, int i2) {
    const Point u = s.grid.node(i1, i2);
    const Density f = reaction_F_unchecked(s.at(i1, i2), params, s.grid.dim);
    double v = 0.0;
    for (int i = 0; i < 3; ++i)
      if (!h[i].is_zero()) v += f[i] * h[i].value(t, u);
    return v;
  });
}

double sup_distance(const PdeState& a, const PdeState& b) {
  if (a.rho.size() != b.rho.size()) throw std::invalid_argument("sup_distance: grid mismatch");
  double d = 0.0;
  for (std::size_t k = 0; k < a.rho.size(); ++k)
    for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(a.rho[k][i] - b.rho[k][i]));
  return d;
}

Density interpolate(const PdeState& s, double u1) {
  const PdeGrid& g = s.grid;
  const double x = (u1 + 1.0) / g.h;
  int k = static_cast<int>(std::floor(x));
  k = std::clamp(k, 0, g.n1 - 2);
  const double w = std::clamp(x - k, 0.0, 1.0);
  Density out;
  for (int i = 0; i < 3; ++i) out[i] = (1.0 - w) * s.at(k)[i] + w * s.at(k + 1)[i];
  return out;
}

WeakResidual::WeakResidual(TestTriple g, ModelParams params, int dim, BoundaryMode mode)
    : g_(std::move(g)), params_(std::move(params)), dim_(dim), mode_(mode) {
  if (mode_ == BoundaryMode::reservoirs)
    for (const auto& f : g_)
      if (!f.boundary_vanishing())
        throw std::invalid_argument("weak residual: test function '" + f.name() +
                                    "' does not vanish on the boundary");
}

double WeakResidual::integrand(const PdeState& s) const {
  const double t = s.t;
  const bool diff = params_.exchange_on;
  const bool react = params_.reaction_on;
  double v = quadrature(s, [&](int i1, int i2) {
    const Point u = s.grid.node(i1, i2);
    const Density& r = s.at(i1, i2);
    const Density f = react ? reaction_F_unchecked(r, params_, dim_) : Density{};
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (g_[i].is_zero()) continue;
      acc += r[i] * g_[i].time_derivative(t, u);
      if (diff) acc += r[i] * g_[i].laplacian(t, u);
      if (react) acc += f[i] * g_[i].value(t, u);
    }
    return acc;
  });
  if (diff && s.grid.mode == BoundaryMode::reservoirs) {
    const PdeGrid& g = s.grid;
    double surface = 0.0;
    for (int i2 = 0; i2 < g.n2; ++i2) {
      for (int side : {-1, 1}) {
        const int i1 = side < 0 ? 0 : g.n1 - 1;
        const Point u = g.node(i1, i2);
        const Density b = params_.boundary_on ? params_.b_hat(side, u[1]) : s.at(i1, i2);
        for (int i = 0; i < 3; ++i)
          if (!g_[i].is_zero()) surface += side * b[i] * g_[i].grad1(t, u);
      }
    }
    v -= surface * transverse_weight(g);
  }
  return v;
}

void WeakResidual::add(const PdeState& s) {
  const double p = pde_pairing(s, g_, s.t);
  const double in = integrand(s);
  if (!started_) {
    started_ = true;
    first_pairing_ = p;
  } else {
    if (s.t < last_t_) throw std::invalid_argument("weak residual: states must be added in time order");
    integral_ += 0.5 * (s.t - last_t_) * (in + last_integrand_);
  }
  last_pairing_ = p;
  last_t_ = s.t;
  last_integrand_ = in;
}

double WeakResidual::value() const { return last_pairing_ - first_pairing_ - integral_; }

double weak_residual(const PdeTrajectory& traj, const TestTriple& g, const ModelParams& params, int dim) {
  if (traj.states.empty()) return 0.0;
  WeakResidual acc(g, params, dim, traj.states.front().grid.mode);
  for (const auto& s : traj.states) acc.add(s);
  return std::abs(acc.value());
}

void write_pde_csv(std::ostream& out, const std::vector<PdeState>& states) {
  if (states.empty()) return;
  const bool two = states.front().grid.dim == 2;
  out << (two ? "t,u1,u2,rho1,rho2,rho3\n" : "t,u1,rho1,rho2,rho3\n");
  out.precision(12);
  for (const auto& s : states)
    for (int i2 = 0; i2 < s.grid.n2; ++i2)
      for (int i1 = 0; i1 < s.grid.n1; ++i1) {
        const Point u = s.grid.node(i1, i2);
        const Density& r = s.at(i1, i2);
        out << s.t << ',' << u[0];
        if (two) out << ',' << u[1];
        out << ',' << r[0] << ',' << r[1] << ',' << r[2] << '\n';
      }
}

}  // namespace bdcp
