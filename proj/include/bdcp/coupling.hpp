#pragma once

// Basic coupling of a box-restricted copy (left, eta~) and the full process
// (right, eta) on one geometry. The box is the set of sites with
// |transverse offset| <= M; the left copy is frozen outside it, counts only
// in-box neighbours for births, exchanges only across in-box bonds, and sees
// only in-box reservoirs.
//
// Reaction moves are built per channel:
//   omega flip: joint when both omegas agree, otherwise one copy at a time;
//   xi flip:    joint death when both xi = 1; when both xi = 0 a joint birth
//               at min(beta~, beta) plus the one-sided excesses; otherwise
//               one copy at a time.
// Outside the box only the right copy moves, with its full rates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/container/static_vector.hpp>

#include "bdcp/engine.hpp"
#include "bdcp/lattice.hpp"
#include "bdcp/params.hpp"
#include "bdcp/rates.hpp"
#include "bdcp/rng.hpp"

namespace bdcp {

struct CoupledConfiguration {
  Configuration left;
  Configuration right;
  int box_M = 0;

  CoupledConfiguration(Configuration left_, Configuration right_, int box_M_);

  const Geometry& geometry() const noexcept { return right.geometry(); }
  bool in_box(SiteIndex site) const { return std::abs(geometry().transverse_offset(site)) <= box_M; }
  /// Mask usable with build_generator for the left copy's restricted dynamics.
  std::vector<std::uint8_t> box_mask() const;
};

/// floor(N^{1 + 1/d}).
int default_box_M(int N, int dim);

/// A transition of the pair: the left copy moves to left_to and/or the right one to right_to.
/// Exchanges swap `site` (bond tail) and `other` (bond head) in the flagged copies.
template <class Scalar = double>
struct JointMove {
  EventKind kind = EventKind::reaction;
  SiteIndex site = 0;
  SiteIndex other = 0;
  bool moves_left = false;
  bool moves_right = false;
  State left_to = 0;
  State right_to = 0;
  Scalar rate{};
};

template <class Scalar = double>
using JointMoves = boost::container::static_vector<JointMove<Scalar>, 8>;

template <class Scalar>
JointMoves<Scalar> coupled_exchange_rates(const CoupledConfiguration& pair, BondIndex bond, Scalar rate) {
  JointMoves<Scalar> out;
  const Bond& b = pair.geometry().bonds()[bond];
  const bool joint = pair.in_box(b.tail) && pair.in_box(b.head);
  const bool l = joint && pair.left[b.tail] != pair.left[b.head];
  const bool r = pair.right[b.tail] != pair.right[b.head];
  if (l || r) {
    JointMove<Scalar> m;
    m.kind = EventKind::exchange;
    m.site = b.tail;
    m.other = b.head;
    m.moves_left = l;
    m.moves_right = r;
    m.rate = rate;
    out.push_back(m);
  }
  return out;
}

template <class Scalar>
JointMoves<Scalar> coupled_reaction_rates(const CoupledConfiguration& pair, SiteIndex x,
                                          const ReactionConstants<Scalar>& k) {
  JointMoves<Scalar> out;
  const State a = pair.left[x];
  const State b = pair.right[x];
  auto push = [&](bool ml, State lt, bool mr, State rt, Scalar rate) {
    if (!(rate > Scalar(0))) return;
    JointMove<Scalar> m;
    m.site = m.other = x;
    m.moves_left = ml;
    m.moves_right = mr;
    m.left_to = ml ? lt : a;
    m.right_to = mr ? rt : b;
    m.rate = rate;
    out.push_back(m);
  };
  const Scalar one(1);
  if (!pair.in_box(x)) {
    const Scalar beta = birth_rate(pair.right, x, k);
    push(false, a, true, State(b ^ 2u), omega_of(b) ? one : k.r);
    push(false, a, true, State(b ^ 1u), xi_of(b) ? one : beta);
    return out;
  }
  const auto inside = [&](SiteIndex y) { return pair.in_box(y); };
  const auto outside = [&](SiteIndex y) { return !pair.in_box(y); };
  const Scalar beta_l = birth_rate(pair.left, x, k, inside);
  const Scalar beta_r = birth_rate(pair.right, x, k, inside);
  const Scalar beta_out = birth_rate(pair.right, x, k, outside);

  if (omega_of(a) == omega_of(b)) {
    push(true, State(a ^ 2u), true, State(b ^ 2u), omega_of(a) ? one : k.r);
  } else {
    push(true, State(a ^ 2u), false, b, omega_of(a) ? one : k.r);
    push(false, a, true, State(b ^ 2u), omega_of(b) ? one : k.r);
  }

  if (xi_of(a) && xi_of(b)) {
    push(true, State(a ^ 1u), true, State(b ^ 1u), one);
  } else if (!xi_of(a) && !xi_of(b)) {
    const Scalar m = std::min(beta_l, beta_r);
    push(true, State(a ^ 1u), true, State(b ^ 1u), m);
    push(true, State(a ^ 1u), false, b, beta_l - m);
    push(false, a, true, State(b ^ 1u), beta_r - m + beta_out);
  } else {
    push(true, State(a ^ 1u), false, b, xi_of(a) ? one : beta_l);
    push(false, a, true, State(b ^ 1u), xi_of(b) ? one : beta_r + beta_out);
  }
  return out;
}

/// weights = reservoir distribution (b0, b1, b2, b3) at the site, speed = N^2.
template <class Scalar>
JointMoves<Scalar> coupled_boundary_rates(const CoupledConfiguration& pair, SiteIndex x,
                                          const std::array<Scalar, 4>& weights, Scalar speed) {
  if (!pair.geometry().is_boundary(x))
    throw std::invalid_argument("coupled_boundary_rates called on a site outside Gamma_N");
  JointMoves<Scalar> out;
  const State a = pair.left[x];
  const State b = pair.right[x];
  const bool joint = pair.in_box(x);
  for (int j = 0; j < 4; ++j) {
    const bool ml = joint && a != j;
    const bool mr = b != j;
    const Scalar rate = speed * weights[j];
    if (!(ml || mr) || !(rate > Scalar(0))) continue;
    JointMove<Scalar> m;
    m.kind = EventKind::boundary;
    m.site = m.other = x;
    m.moves_left = ml;
    m.moves_right = mr;
    m.left_to = ml ? State(j) : a;
    m.right_to = mr ? State(j) : b;
    m.rate = rate;
    out.push_back(m);
  }
  return out;
}

JointMoves<> coupled_exchange_rates(const CoupledConfiguration& pair, BondIndex bond, const ModelParams& params);
JointMoves<> coupled_reaction_rates(const CoupledConfiguration& pair, SiteIndex site, const ModelParams& params);
JointMoves<> coupled_boundary_rates(const CoupledConfiguration& pair, SiteIndex site, const ModelParams& params);

/// Applies a move to the pair.
void apply(CoupledConfiguration& pair, const JointMove<>& move);

/// N^{-d-1} sum_{n=1}^{M-1} e^{-n/N} H_{i,n}, H_{i,n} = #{x : |offset(x)| <= n, [left(x)=i] != [right(x)=i]}.
/// Throws std::invalid_argument for N = 0 or i outside 0..3.
double discrepancy_h(const CoupledConfiguration& pair, int i);
/// Sum of discrepancy_h over i = 0..3 in one pass.
double discrepancy_total(const CoupledConfiguration& pair);

struct CoupledEvent {
  double time = 0.0;
  JointMove<> move;
};

template <class T>
concept CoupledObserver = requires(T& o, const CoupledEvent& e, const CoupledConfiguration& c) {
  o.on_event(e, c);
};

/// Rejection sampler for the coupled generator. Envelope per channel:
/// N^2 per bond, twice the single-copy reaction bound per site, N^2 per reservoir site.
class CoupledSimulator {
 public:
  CoupledSimulator(CoupledConfiguration init, ModelParams params, RandomStream rng);

  /// Observers see the pre-event pair; optional on_finish(t, pair).
  template <CoupledObserver... Obs>
  void advance(double t_end, Obs&... observers);

  const CoupledConfiguration& pair() const noexcept { return pair_; }
  const SimClock& clock() const noexcept { return clock_; }
  const ChannelBounds& bounds() const noexcept { return bounds_; }

 private:
  CoupledConfiguration pair_;
  ModelParams params_;
  RandomStream rng_;
  ChannelBounds bounds_;
  double site_bound_ = 0.0;
  SimClock clock_;
};

template <CoupledObserver... Obs>
void CoupledSimulator::advance(double t_end, Obs&... observers) {
  const Geometry& g = pair_.geometry();
  const double total = bounds_.total();
  const auto boundary = g.boundary_sites();
  const auto bonds = static_cast<std::uint64_t>(g.bonds().size());
  const auto sites = static_cast<std::uint64_t>(g.site_count());
  const double n2 = params_.speedup();
  const ReactionConstants<double> k = reaction_constants(params_);

  if (total > 0.0) {
    for (;;) {
      const double t_next = clock_.t + rng_.exponential(total);
      if (t_next > t_end) break;
      clock_.t = t_next;
      ++clock_.proposals;

      const double u = rng_.uniform() * total;
      JointMoves<> moves;
      double envelope;
      if (u < bounds_.exchange) {
        moves = coupled_exchange_rates(pair_, static_cast<BondIndex>(rng_.below(bonds)), n2);
        envelope = n2;
      } else if (u < bounds_.exchange + bounds_.reaction) {
        moves = coupled_reaction_rates(pair_, static_cast<SiteIndex>(rng_.below(sites)), k);
        envelope = site_bound_;
      } else {
        const SiteIndex x = boundary[rng_.below(boundary.size())];
        moves = coupled_boundary_rates(pair_, x, reservoir_weights(g, x, params_), n2);
        envelope = n2;
      }
      double v = rng_.uniform() * envelope;
      const JointMove<>* chosen = nullptr;
      for (const auto& m : moves) {
        if (v < m.rate) {
          chosen = &m;
          break;
        }
        v -= m.rate;
      }
      if (!chosen) continue;
      [[maybe_unused]] const CoupledEvent e{t_next, *chosen};
      (observers.on_event(e, pair_), ...);
      apply(pair_, *chosen);
      ++clock_.event_count;
    }
  }
  if (t_end > clock_.t) clock_.t = t_end;
  ([&] {
    if constexpr (requires { observers.on_finish(clock_.t, pair_); }) observers.on_finish(clock_.t, pair_);
  }(), ...);
}

template <CoupledObserver... Obs>
CoupledConfiguration simulate_coupled(CoupledConfiguration pair, const ModelParams& params, double t_end,
                                      std::uint64_t seed, std::uint64_t replica, Obs&... observers) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("simulate_coupled: t_end must be >= 0");
  CoupledSimulator sim(std::move(pair), params, RandomStream(seed, replica));
  sim.advance(t_end, observers...);
  return sim.pair();
}

/// Per-replica strip for the decay experiment: d = 2, half-width N,
/// transverse period 2M + 1 + 2N so that 2N rows lie outside the box.
Geometry decay_geometry(int N, int M);

struct DecayRow {
  int N = 0;
  int M = 0;
  double t = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t replicas = 0;
};

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows);

}  // namespace bdcp
