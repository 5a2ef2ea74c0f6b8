#include "bdcp/engine.hpp"

#include <ostream>

namespace bdcp {

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::exchange: return "exchange";
    case EventKind::reaction: return "reaction";
    case EventKind::boundary: return "boundary";
  }
  return "?";
}

ChannelBounds channel_bounds(const Geometry& g, const ModelParams& params) {
  ChannelBounds b;
  if (params.exchange_on) b.exchange = params.speedup() * static_cast<double>(g.bonds().size());
  if (params.reaction_on)
    b.reaction = static_cast<double>(g.site_count()) * reaction_rate_bound(params, g.dim());
  if (params.boundary_on)
    b.boundary = params.speedup() * static_cast<double>(g.boundary_sites().size());
  return b;
}

double total_rate_bound(const Configuration& config, const ModelParams& params) {
  return channel_bounds(config.geometry(), params).total();
}

Simulator::Simulator(Configuration init, ModelParams params, RandomStream rng)
    : config_(std::move(init)), params_(std::move(params)), rng_(rng) {
  validate(params_);
  const Geometry& g = config_.geometry();
  bounds_ = channel_bounds(g, params_);
  if (!std::isfinite(bounds_.total())) throw std::invalid_argument("simulate: non-finite rates");
  site_bound_ = reaction_rate_bound(params_, g.dim());
  for (SiteIndex x : g.boundary_sites()) {
    const auto w = reservoir_weights(g, x, params_);
    for (double v : w)
      if (!std::isfinite(v)) throw std::invalid_argument("simulate: non-finite reservoir density");
    reservoir_cdf_.push_back({w[0], w[0] + w[1], w[0] + w[1] + w[2]});
  }
}

void EventLogWriter::on_event(const EventRecord& e, const Configuration&) {
  std::ostream& o = *out_;
  o.precision(17);
  o << "{\"t\":" << e.time << ",\"kind\":\"" << to_string(e.kind) << '"';
  if (e.kind == EventKind::exchange) {
    o << ",\"bond\":" << e.bond << ",\"sites\":[" << e.site << ',' << e.other << "],\"from\":["
      << int(e.from) << ',' << int(e.to) << "],\"to\":[" << int(e.to) << ',' << int(e.from) << "]}";
  } else {
    o << ",\"site\":" << e.site << ",\"from\":" << int(e.from) << ",\"to\":" << int(e.to) << '}';
  }
  o << '\n';
}

}  // namespace bdcp
