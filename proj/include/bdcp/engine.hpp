#pragma once

// Exact event-driven simulation of the full generator
//   N^2 * exchange + reaction + N^2 * boundary
// by three-channel rejection (thinning). The envelope rate is constant in
// the configuration, so tentative event times form a Poisson process of
// rate total_rate_bound; a tentative event picks a channel in proportion to
// its bound, a bond/site uniformly within the channel, and is accepted with
// probability true rate / envelope share.

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bdcp/lattice.hpp"
#include "bdcp/params.hpp"
#include "bdcp/rates.hpp"
#include "bdcp/rng.hpp"

namespace bdcp {

enum class EventKind : std::uint8_t { exchange, reaction, boundary };

const char* to_string(EventKind kind) noexcept;

/// An applied state change. For exchanges `site`/`other` are the bond tail
/// and head and `from`/`to` their states before the swap; otherwise `site`
/// changed from `from` to `to`.
struct EventRecord {
  EventKind kind = EventKind::reaction;
  double time = 0.0;
  BondIndex bond = 0;
  SiteIndex site = 0;
  SiteIndex other = 0;
  State from = 0;
  State to = 0;
};

struct SimClock {
  double t = 0.0;
  std::uint64_t event_count = 0;
  std::uint64_t proposals = 0;
};

struct ChannelBounds {
  double exchange = 0.0;
  double reaction = 0.0;
  double boundary = 0.0;
  double total() const noexcept { return exchange + reaction + boundary; }
};

ChannelBounds channel_bounds(const Geometry& geometry, const ModelParams& params);

/// N^2 #bonds + #sites * reaction bound + N^2 #boundary sites (toggles respected).
double total_rate_bound(const Configuration& config, const ModelParams& params);

/// Observers receive every applied event, in time order, before it is
/// applied (so `before` is the pre-event configuration). Optional hooks:
/// on_proposal(t) for every tentative envelope event, on_finish(t, config)
/// at the end of each advance.
template <class T>
concept EventObserver = requires(T& o, const EventRecord& e, const Configuration& c) {
  o.on_event(e, c);
};

class Simulator {
 public:
  Simulator(Configuration init, ModelParams params, RandomStream rng);

  /// Runs the chain up to macroscopic time t_end (no-op when t_end <= now).
  template <EventObserver... Obs>
  void advance(double t_end, Obs&... observers);

  const Configuration& configuration() const noexcept { return config_; }
  const SimClock& clock() const noexcept { return clock_; }
  const ModelParams& params() const noexcept { return params_; }
  const ChannelBounds& bounds() const noexcept { return bounds_; }

 private:
  template <class... Obs>
  void emit(const EventRecord& e, Obs&... observers);

  Configuration config_;
  ModelParams params_;
  RandomStream rng_;
  ChannelBounds bounds_;
  double site_bound_ = 0.0;
  // Cumulative reservoir weights (b0, b0+b1, b0+b1+b2) per boundary site.
  std::vector<std::array<double, 3>> reservoir_cdf_;
  SimClock clock_;
};

template <class... Obs>
void Simulator::emit(const EventRecord& e, Obs&... observers) {
  (observers.on_event(e, config_), ...);
}

template <EventObserver... Obs>
void Simulator::advance(double t_end, Obs&... observers) {
  const Geometry& g = config_.geometry();
  const double total = bounds_.total();
  const auto bonds = g.bonds();
  const auto boundary = g.boundary_sites();
  const auto sites = static_cast<std::uint64_t>(g.site_count());
  const ReactionConstants<double> k = reaction_constants(params_);

  if (total > 0.0) {
    for (;;) {
      const double t_next = clock_.t + rng_.exponential(total);
      if (t_next > t_end) break;
      clock_.t = t_next;
      ++clock_.proposals;
      ([&] {
        if constexpr (requires { observers.on_proposal(t_next); }) observers.on_proposal(t_next);
      }(), ...);

      const double u = rng_.uniform() * total;
      if (u < bounds_.exchange) {
        const BondIndex b = static_cast<BondIndex>(rng_.below(bonds.size()));
        const Bond& bond = bonds[b];
        const State sa = config_[bond.tail];
        const State sb = config_[bond.head];
        if (sa == sb) continue;
        emit(EventRecord{EventKind::exchange, t_next, b, bond.tail, bond.head, sa, sb},
             observers...);
        config_.set(bond.tail, sb);
        config_.set(bond.head, sa);
        ++clock_.event_count;
      } else if (u < bounds_.exchange + bounds_.reaction) {
        const auto x = static_cast<SiteIndex>(rng_.below(sites));
        const State s = config_[x];
        const double v = rng_.uniform() * site_bound_;
        const double omega_rate = omega_of(s) ? 1.0 : params_.r;
        State target;
        if (v < omega_rate) {
          target = static_cast<State>(s ^ 2u);
        } else {
          const double xi_rate = xi_of(s) ? 1.0 : birth_rate(config_, x, k);
          if (v >= omega_rate + xi_rate) continue;
          target = static_cast<State>(s ^ 1u);
        }
        emit(EventRecord{EventKind::reaction, t_next, 0, x, x, s, target}, observers...);
        config_.set(x, target);
        ++clock_.event_count;
      } else {
        const std::size_t i = rng_.below(boundary.size());
        const SiteIndex x = boundary[i];
        const double v = rng_.uniform();
        const auto& cdf = reservoir_cdf_[i];
        const State target = v < cdf[0] ? 0 : v < cdf[1] ? 1 : v < cdf[2] ? 2 : 3;
        const State s = config_[x];
        if (target == s) continue;
        emit(EventRecord{EventKind::boundary, t_next, 0, x, x, s, target}, observers...);
        config_.set(x, target);
        ++clock_.event_count;
      }
    }
  }
  // Memorylessness: the pending tentative event past t_end is discarded and
  // redrawn from t_end on the next call without changing the law.
  if (t_end > clock_.t) clock_.t = t_end;
  ([&] {
    if constexpr (requires { observers.on_finish(clock_.t, config_); })
      observers.on_finish(clock_.t, config_);
  }(), ...);
}

/// Convenience wrapper: simulate from init to t_end with stream (seed, replica).
template <EventObserver... Obs>
Configuration simulate(Configuration init, const ModelParams& params, double t_end,
                       std::uint64_t seed, std::uint64_t replica, Obs&... observers) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("simulate: t_end must be >= 0");
  Simulator sim(std::move(init), params, RandomStream(seed, replica));
  sim.advance(t_end, observers...);
  return sim.configuration();
}

/// Writes one NDJSON line per event: {"t":..,"kind":..,"site":..,"from":..,"to":..}
/// or, for exchanges, {"t":..,"kind":"exchange","bond":..,"from":[a,b],"to":[b,a]}.
class EventLogWriter {
 public:
  explicit EventLogWriter(std::ostream& out) : out_(&out) {}
  void on_event(const EventRecord& e, const Configuration& before);

 private:
  std::ostream* out_;
};

/// Tallies reported events by kind.
struct EventCounter {
  std::array<std::uint64_t, 3> by_kind{};
  void on_event(const EventRecord& e, const Configuration&) noexcept {
    ++by_kind[static_cast<std::size_t>(e.kind)];
  }
};

}  // namespace bdcp
