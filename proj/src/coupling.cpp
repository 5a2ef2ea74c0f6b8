#include "bdcp/coupling.hpp"

#include <ostream>

namespace bdcp {

CoupledConfiguration::CoupledConfiguration(Configuration left_, Configuration right_, int box_M_)
    : left(std::move(left_)), right(std::move(right_)), box_M(box_M_) {
  if (!(left.geometry() == right.geometry()))
    throw std::invalid_argument("CoupledConfiguration: copies must share one geometry");
  if (box_M < 0) throw std::invalid_argument("CoupledConfiguration: box_M must be >= 0");
}

std::vector<std::uint8_t> CoupledConfiguration::box_mask() const {
  std::vector<std::uint8_t> m(geometry().site_count());
  for (SiteIndex x = 0; x < m.size(); ++x) m[x] = in_box(x) ? 1 : 0;
  return m;
}

int default_box_M(int N, int dim) {
  if (N < 1 || dim < 1) throw std::invalid_argument("default_box_M: N and d must be >= 1");
  return static_cast<int>(std::floor(std::pow(double(N), 1.0 + 1.0 / dim) + 1e-9));
}

JointMoves<> coupled_exchange_rates(const CoupledConfiguration& pair, BondIndex bond, const ModelParams& params) {
  return coupled_exchange_rates<double>(pair, bond, exchange_rate(params));
}

JointMoves<> coupled_reaction_rates(const CoupledConfiguration& pair, SiteIndex site, const ModelParams& params) {
  return coupled_reaction_rates<double>(pair, site, reaction_constants(params));
}

JointMoves<> coupled_boundary_rates(const CoupledConfiguration& pair, SiteIndex site, const ModelParams& params) {
  if (!pair.geometry().is_boundary(site))
    throw std::invalid_argument("coupled_boundary_rates called on a site outside Gamma_N");
  return coupled_boundary_rates<double>(pair, site, reservoir_weights(pair.geometry(), site, params),
                                        params.speedup());
}

void apply(CoupledConfiguration& pair, const JointMove<>& m) {
  if (m.kind == EventKind::exchange) {
    if (m.moves_left) pair.left.swap_sites(m.site, m.other);
    if (m.moves_right) pair.right.swap_sites(m.site, m.other);
    return;
  }
  if (m.moves_left) pair.left.set(m.site, m.left_to);
  if (m.moves_right) pair.right.set(m.site, m.right_to);
}

namespace {

// Disagreement counts per type and per |offset| row, for |offset| <= M - 1.
std::vector<std::array<double, 4>> row_disagreement(const CoupledConfiguration& pair) {
  const Geometry& g = pair.geometry();
  std::vector<std::array<double, 4>> rows(std::max(pair.box_M, 1));
  for (SiteIndex x = 0; x < g.site_count(); ++x) {
    const int o = std::abs(g.transverse_offset(x));
    if (o >= pair.box_M) continue;
    const State a = pair.left[x], b = pair.right[x];
    if (a == b) continue;
    rows[o][a] += 1.0;
    rows[o][b] += 1.0;
  }
  return rows;
}

std::array<double, 4> discrepancy_all(const CoupledConfiguration& pair) {
  const int N = pair.geometry().half_width();
  if (N < 1) throw std::invalid_argument("discrepancy_h: needs N >= 1");
  const auto rows = row_disagreement(pair);
  std::array<double, 4> H{}, h{};
  for (int n = 0; n < pair.box_M; ++n) {
    for (int i = 0; i < 4; ++i) H[i] += rows[n][i];
    if (n == 0) continue;
    const double w = std::exp(-double(n) / N);
    for (int i = 0; i < 4; ++i) h[i] += w * H[i];
  }
  const double scale = std::pow(double(N), -(pair.geometry().dim() + 1));
  for (double& v : h) v *= scale;
  return h;
}

}  // namespace

double discrepancy_h(const CoupledConfiguration& pair, int i) {
  if (i < 0 || i > 3) throw std::invalid_argument("discrepancy_h: type must be in 0..3");
  return discrepancy_all(pair)[i];
}

double discrepancy_total(const CoupledConfiguration& pair) {
  const auto h = discrepancy_all(pair);
  return h[0] + h[1] + h[2] + h[3];
}

CoupledSimulator::CoupledSimulator(CoupledConfiguration init, ModelParams params, RandomStream rng)
    : pair_(std::move(init)), params_(std::move(params)), rng_(rng) {
  validate(params_);
  const Geometry& g = pair_.geometry();
  bounds_ = channel_bounds(g, params_);
  bounds_.reaction *= 2.0;
  site_bound_ = 2.0 * reaction_rate_bound(params_, g.dim());
  if (!std::isfinite(bounds_.total())) throw std::invalid_argument("simulate_coupled: non-finite rates");
  for (SiteIndex x : g.boundary_sites()) {
    double s = 0.0;
    for (double v : reservoir_weights(g, x, params_)) {
      if (!std::isfinite(v) || v < -1e-12) throw std::invalid_argument("simulate_coupled: bad reservoir density");
      s += v;
    }
    if (s > 1.0 + 1e-12) throw std::invalid_argument("simulate_coupled: reservoir weights exceed 1");
  }
}

Geometry decay_geometry(int N, int M) {
  if (N < 1 || M < 1) throw std::invalid_argument("decay_geometry: N and M must be >= 1");
  return Geometry(2, N, 2 * M + 1 + 2 * N);
}

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows) {
  out << "N,M,t,mean_h,stderr,replicas\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.N << ',' << r.M << ',' << r.t << ',' << r.mean << ',' << r.stderr_ << ',' << r.replicas << '\n';
}

}  // namespace bdcp
