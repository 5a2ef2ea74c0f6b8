#include "bdcp/lattice.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace bdcp {

std::string to_string(BoundaryMode mode) {
  return mode == BoundaryMode::reservoirs ? "reservoirs" : "torus";
}

BoundaryMode boundary_mode_from_string(const std::string& name) {
  if (name == "reservoirs" || name == "strip") return BoundaryMode::reservoirs;
  if (name == "torus") return BoundaryMode::torus;
  throw std::invalid_argument("unknown boundary mode '" + name + "'");
}

Geometry::Geometry(int dim, int half_width, int transverse_len, BoundaryMode mode)
    : dim_(dim), half_width_(half_width), transverse_len_(transverse_len), mode_(mode) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (half_width < 0) throw std::invalid_argument("half width N must be >= 0");
  if (dim == 1 && transverse_len != 1)
    throw std::invalid_argument("transverse_len must be 1 when d = 1");
  if (transverse_len < 1) throw std::invalid_argument("transverse_len must be >= 1");

  const int nx = axial_len();
  const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(transverse_len);
  if (n > std::size_t{1} << 31) throw std::invalid_argument("lattice too large");
  coords_.resize(n);
  boundary_flag_.assign(n, 0);
  for (int x2 = 0; x2 < transverse_len; ++x2) {
    for (int x1 = -half_width; x1 <= half_width; ++x1) {
      const SiteIndex s = index(x1, x2);
      coords_[s] = {x1, x2};
      if (mode == BoundaryMode::reservoirs && (x1 == -half_width || x1 == half_width)) {
        boundary_flag_[s] = 1;
        boundary_sites_.push_back(s);
      }
    }
  }

  const bool wrap_axial = mode == BoundaryMode::torus;
  // Neighbour in direction (axis, sign), or the site itself when it does not exist.
  auto step = [&](SiteIndex s, int axis, int sign) -> SiteIndex {
    Coord c = coords_[s];
    if (axis == 0) {
      int x1 = c.x1 + sign;
      if (x1 < -half_width || x1 > half_width) {
        if (!wrap_axial) return s;
        x1 = x1 < -half_width ? half_width : -half_width;
      }
      return index(x1, c.x2);
    }
    const int x2 = ((c.x2 + sign) % transverse_len + transverse_len) % transverse_len;
    return index(c.x1, x2);
  };

  neighbor_offset_.assign(n + 1, 0);
  for (SiteIndex s = 0; s < n; ++s) {
    std::array<SiteIndex, 4> found{};
    std::size_t count = 0;
    for (int axis = 0; axis < dim; ++axis) {
      for (int sign : {-1, 1}) {
        const SiteIndex y = step(s, axis, sign);
        if (y == s) continue;
        if (std::find(found.begin(), found.begin() + count, y) != found.begin() + count) continue;
        found[count++] = y;
      }
    }
    neighbor_data_.insert(neighbor_data_.end(), found.begin(), found.begin() + count);
    neighbor_offset_[s + 1] = neighbor_data_.size();
  }

  std::unordered_set<std::uint64_t> seen;
  for (SiteIndex s = 0; s < n; ++s) {
    for (int axis = 0; axis < dim; ++axis) {
      const SiteIndex y = step(s, axis, +1);
      if (y == s) continue;
      const std::uint64_t key = (std::uint64_t{std::min(s, y)} << 32) | std::max(s, y);
      if (!seen.insert(key).second) continue;
      bonds_.push_back({s, y, axis});
    }
  }

  std::vector<std::vector<BondIndex>> incident(n);
  for (BondIndex b = 0; b < bonds_.size(); ++b) {
    incident[bonds_[b].tail].push_back(b);
    incident[bonds_[b].head].push_back(b);
  }
  incident_offset_.assign(n + 1, 0);
  for (SiteIndex s = 0; s < n; ++s) {
    incident_data_.insert(incident_data_.end(), incident[s].begin(), incident[s].end());
    incident_offset_[s + 1] = incident_data_.size();
  }
}

SiteIndex Geometry::index(int x1, int x2) const {
  if (x1 < -half_width_ || x1 > half_width_ || x2 < 0 || x2 >= transverse_len_)
    throw std::out_of_range("site coordinates outside the lattice");
  return static_cast<SiteIndex>((x1 + half_width_) + axial_len() * x2);
}

Point Geometry::macro(SiteIndex site) const {
  const Coord c = coords_.at(site);
  if (half_width_ == 0) return {0.0, static_cast<double>(c.x2)};
  const double n = half_width_;
  return {c.x1 / n, c.x2 / n};
}

Configuration::Configuration(Geometry geometry, State fill)
    : geometry_(std::move(geometry)), words_((geometry_.site_count() + 31) / 32, 0) {
  if (fill > 3) throw std::invalid_argument("state must be in {0,1,2,3}");
  if (fill != 0)
    for (SiteIndex s = 0; s < size(); ++s) set(s, fill);
}

std::uint64_t Configuration::code() const {
  if (size() > 32) throw std::length_error("configuration code needs <= 32 sites");
  std::uint64_t c = 0;
  for (SiteIndex s = static_cast<SiteIndex>(size()); s-- > 0;) c = c * 4 + (*this)[s];
  return c;
}

Configuration Configuration::from_code(const Geometry& geometry, std::uint64_t code) {
  Configuration config(geometry);
  if (config.size() > 32) throw std::length_error("configuration code needs <= 32 sites");
  for (SiteIndex s = 0; s < config.size(); ++s) {
    config.set(s, static_cast<State>(code & 3u));
    code >>= 2;
  }
  return config;
}

std::vector<State> Configuration::states() const {
  std::vector<State> out(size());
  for (SiteIndex s = 0; s < size(); ++s) out[s] = (*this)[s];
  return out;
}

Configuration Configuration::from_states(const Geometry& geometry, std::span<const State> states) {
  Configuration config(geometry);
  if (states.size() != config.size()) throw std::invalid_argument("state vector size mismatch");
  for (SiteIndex s = 0; s < config.size(); ++s) {
    if (states[s] > 3) throw std::invalid_argument("state must be in {0,1,2,3}");
    config.set(s, states[s]);
  }
  return config;
}

Counts occupancy_counts(const Configuration& config) {
  Counts counts{};
  for (SiteIndex s = 0; s < config.size(); ++s) ++counts[config[s]];
  return counts;
}

void write_snapshot(std::ostream& out, const Configuration& config) {
  const Geometry& g = config.geometry();
  out << g.dim() << ' ' << g.half_width() << ' ' << g.transverse_len() << ' '
      << to_string(g.mode()) << '\n';
  std::string row(static_cast<std::size_t>(g.axial_len()), '0');
  for (int x2 = 0; x2 < g.transverse_len(); ++x2) {
    for (int x1 = -g.half_width(); x1 <= g.half_width(); ++x1)
      row[static_cast<std::size_t>(x1 + g.half_width())] =
          static_cast<char>('0' + config[g.index(x1, x2)]);
    out << row << '\n';
  }
}

Configuration read_snapshot(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("snapshot: missing header");
  std::istringstream hs(header);
  int d = 0, n = 0, l = 0;
  std::string mode;
  if (!(hs >> d >> n >> l >> mode)) throw std::runtime_error("snapshot: malformed header");
  Geometry g(d, n, l, boundary_mode_from_string(mode));
  Configuration config(g);
  std::string row;
  for (int x2 = 0; x2 < l; ++x2) {
    if (!std::getline(in, row) || row.size() != static_cast<std::size_t>(g.axial_len()))
      throw std::runtime_error("snapshot: malformed row");
    for (int x1 = -n; x1 <= n; ++x1) {
      const char c = row[static_cast<std::size_t>(x1 + n)];
      if (c < '0' || c > '3') throw std::runtime_error("snapshot: digit outside 0..3");
      config.set(g.index(x1, x2), static_cast<State>(c - '0'));
    }
  }
  return config;
}

}  // namespace bdcp
