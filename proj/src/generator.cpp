#include "bdcp/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bdcp/rates.hpp"

namespace bdcp {

GeneratorMatrix::GeneratorMatrix(std::size_t dimension) : rows_(dimension), diagonal_(dimension, 0.0) {}

void GeneratorMatrix::add(std::uint32_t from, std::uint32_t to, double rate) {
  if (rate == 0.0) return;
  if (from == to) throw std::invalid_argument("generator: diagonal entries are implied");
  if (rate < 0.0) throw std::invalid_argument("generator: negative off-diagonal rate");
  auto& row = rows_.at(from);
  auto it = std::find_if(row.begin(), row.end(), [to](const Entry& e) { return e.column == to; });
  if (it == row.end())
    row.push_back({to, rate});
  else
    it->rate += rate;
  diagonal_[from] -= rate;
}

double GeneratorMatrix::entry(std::uint32_t i, std::uint32_t j) const {
  if (i == j) return diagonal_.at(i);
  for (const Entry& e : rows_.at(i))
    if (e.column == j) return e.rate;
  return 0.0;
}

double GeneratorMatrix::max_exit_rate() const {
  double q = 0.0;
  for (double d : diagonal_) q = std::max(q, -d);
  return q;
}

GeneratorMatrix build_generator(const Geometry& geometry, const ModelParams& params,
                                const std::optional<SiteMask>& active) {
  validate(params);
  const std::size_t n = geometry.site_count();
  if (n > kMaxGeneratorSites)
    throw std::length_error("build_generator: state space capped at 4^8 configurations");
  if (active && active->size() != n) throw std::invalid_argument("build_generator: mask size");
  auto is_active = [&](SiteIndex s) { return !active || (*active)[s] != 0; };

  const std::size_t dim = std::size_t{1} << (2 * n);
  GeneratorMatrix gen(dim);
  const auto k = reaction_constants(params);
  const double n2 = params.speedup();

  for (std::uint64_t c = 0; c < dim; ++c) {
    const Configuration config = Configuration::from_code(geometry, c);
    const auto from = static_cast<std::uint32_t>(c);
    auto retarget = [&](SiteIndex x, State to) {
      const std::uint64_t shift = 2u * x;
      return static_cast<std::uint32_t>((c & ~(std::uint64_t{3} << shift)) |
                                        (std::uint64_t{to} << shift));
    };

    if (params.exchange_on) {
      for (const Bond& b : geometry.bonds()) {
        if (!is_active(b.tail) || !is_active(b.head)) continue;
        const State sa = config[b.tail];
        const State sb = config[b.head];
        if (sa == sb) continue;
        Configuration swapped = config;
        swapped.swap_sites(b.tail, b.head);
        gen.add(from, static_cast<std::uint32_t>(swapped.code()), n2);
      }
    }
    for (SiteIndex x = 0; x < n; ++x) {
      if (!is_active(x)) continue;
      if (params.reaction_on) {
        const double bx = birth_rate(config, x, k, is_active);
        const auto t = flip_rates(config[x], bx, params.r);
        for (State j = 0; j < 4; ++j) gen.add(from, retarget(x, j), t[j]);
      }
      if (params.boundary_on && geometry.is_boundary(x)) {
        const auto t = boundary_rates(config, x, params);
        for (State j = 0; j < 4; ++j) gen.add(from, retarget(x, j), t[j]);
      }
    }
  }
  return gen;
}

namespace {

// v <- v * (I + Q / q)
void uniformized_step(const GeneratorMatrix& gen, double q, const std::vector<double>& v,
                      std::vector<double>& out) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i] * (1.0 + gen.diagonal(static_cast<std::uint32_t>(i)) / q);
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == 0.0) continue;
    for (const auto& e : gen.row(static_cast<std::uint32_t>(i))) out[e.column] += v[i] * e.rate / q;
  }
}

}  // namespace

std::vector<double> transient_distribution(const GeneratorMatrix& gen, std::span<const double> init,
                                           double t) {
  if (init.size() != gen.dimension()) throw std::invalid_argument("transient: size mismatch");
  if (!(t >= 0.0)) throw std::invalid_argument("transient: t must be >= 0");
  std::vector<double> v(init.begin(), init.end());
  const double q = gen.max_exit_rate();
  if (t == 0.0 || q == 0.0) return v;

  // Chunks keep the Poisson weight e^{-q dt} well away from underflow.
  constexpr double kMaxMean = 32.0;
  const auto chunks = static_cast<std::size_t>(std::ceil(q * t / kMaxMean));
  const double mean = q * t / static_cast<double>(chunks);
  const double tail_budget = std::max(1e-11 / static_cast<double>(chunks), 1e-15);

  std::vector<double> term(v.size()), next(v.size()), acc(v.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    term = v;
    double weight = std::exp(-mean);
    double mass = weight;
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] = weight * term[i];
    for (std::size_t k = 1; 1.0 - mass > tail_budget; ++k) {
      uniformized_step(gen, q, term, next);
      term.swap(next);
      weight *= mean / static_cast<double>(k);
      mass += weight;
      for (std::size_t i = 0; i < v.size(); ++i) acc[i] += weight * term[i];
      if (k > 100000) throw std::runtime_error("transient: uniformization did not converge");
    }
    v.swap(acc);
  }
  return v;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace bdcp
