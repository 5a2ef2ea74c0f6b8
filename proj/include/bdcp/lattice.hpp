#pragma once

// Strip / cylinder lattice geometry and the bit-packed two-species configuration.
//
// Sites are x = (x1, x2) with x1 in {-N, ..., N} along e1 and x2 in
// {0, ..., L-1} along the (periodic) transverse direction when d = 2.
// Flat site index is row-major with e1 fastest: idx = (x1 + N) + (2N+1) * x2.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bdcp {

using SiteIndex = std::uint32_t;
using BondIndex = std::uint32_t;

/// Per-site state. xi is bit 0, omega is bit 1:
/// 0 = empty, 1 = wild only, 2 = sterile only, 3 = wild and sterile.
using State = std::uint8_t;

constexpr State encode(unsigned xi, unsigned omega) noexcept {
  return static_cast<State>((xi & 1u) | ((omega & 1u) << 1));
}
constexpr unsigned xi_of(State s) noexcept { return s & 1u; }
constexpr unsigned omega_of(State s) noexcept { return (s >> 1) & 1u; }

/// Indicator eta_i(x) for i in {0,1,2,3}.
constexpr int indicator(State s, int i) noexcept { return s == i ? 1 : 0; }

enum class BoundaryMode : std::uint8_t { reservoirs, torus };

std::string to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& name);

struct Coord {
  int x1 = 0;
  int x2 = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

/// Oriented nearest-neighbour bond tail -> head = tail + e_axis (axis 0 is e1).
struct Bond {
  SiteIndex tail = 0;
  SiteIndex head = 0;
  int axis = 0;
};

/// Macroscopic point u = x / N (u2 is 0 when d = 1).
using Point = std::array<double, 2>;

class Geometry {
 public:
  Geometry(int dim, int half_width, int transverse_len = 1,
           BoundaryMode mode = BoundaryMode::reservoirs);

  int dim() const noexcept { return dim_; }
  int half_width() const noexcept { return half_width_; }
  int axial_len() const noexcept { return 2 * half_width_ + 1; }
  int transverse_len() const noexcept { return transverse_len_; }
  BoundaryMode mode() const noexcept { return mode_; }
  std::size_t site_count() const noexcept { return coords_.size(); }

  SiteIndex index(int x1, int x2 = 0) const;
  Coord coords(SiteIndex site) const { return coords_.at(site); }

  /// Strip mode: x1 = -N or x1 = N. Torus mode: never.
  bool is_boundary(SiteIndex site) const { return boundary_flag_.at(site) != 0; }
  /// -1 for x1 < 0, +1 otherwise (the single column of an N = 0 strip counts as +1).
  int boundary_side(SiteIndex site) const { return coords_.at(site).x1 < 0 ? -1 : 1; }

  /// Distinct lattice neighbours, e1 direction first (-e1, +e1), then transverse (-e2, +e2).
  std::span<const SiteIndex> neighbors(SiteIndex site) const {
    return {neighbor_data_.data() + neighbor_offset_[site],
            neighbor_offset_[site + 1] - neighbor_offset_[site]};
  }
  /// Bonds touching a site (either endpoint).
  std::span<const BondIndex> incident_bonds(SiteIndex site) const {
    return {incident_data_.data() + incident_offset_[site],
            incident_offset_[site + 1] - incident_offset_[site]};
  }

  std::span<const Bond> bonds() const noexcept { return bonds_; }
  std::span<const SiteIndex> boundary_sites() const noexcept { return boundary_sites_; }

  /// x / N; with N = 0 the axial coordinate is reported as 0.
  Point macro(SiteIndex site) const;

  /// Signed transverse offset from the central row, -floor(L/2) <= offset < L - floor(L/2).
  int transverse_offset(SiteIndex site) const {
    return coords_.at(site).x2 - transverse_len_ / 2;
  }

  friend bool operator==(const Geometry& a, const Geometry& b) noexcept {
    return a.dim_ == b.dim_ && a.half_width_ == b.half_width_ &&
           a.transverse_len_ == b.transverse_len_ && a.mode_ == b.mode_;
  }

 private:
  int dim_;
  int half_width_;
  int transverse_len_;
  BoundaryMode mode_;
  std::vector<Coord> coords_;
  std::vector<std::uint8_t> boundary_flag_;
  std::vector<SiteIndex> boundary_sites_;
  std::vector<std::size_t> neighbor_offset_;
  std::vector<SiteIndex> neighbor_data_;
  std::vector<std::size_t> incident_offset_;
  std::vector<BondIndex> incident_data_;
  std::vector<Bond> bonds_;
};

/// Occupation counts (N0, N1, N2, N3).
using Counts = std::array<std::size_t, 4>;

class Configuration {
 public:
  explicit Configuration(Geometry geometry, State fill = 0);

  const Geometry& geometry() const noexcept { return geometry_; }
  std::size_t size() const noexcept { return geometry_.site_count(); }

  State operator[](SiteIndex site) const noexcept {
    return static_cast<State>((words_[site >> 5] >> ((site & 31u) * 2)) & 3u);
  }
  void set(SiteIndex site, State value) noexcept {
    const unsigned shift = (site & 31u) * 2;
    auto& w = words_[site >> 5];
    w = (w & ~(std::uint64_t{3} << shift)) | (std::uint64_t{value & 3u} << shift);
  }
  void swap_sites(SiteIndex a, SiteIndex b) noexcept {
    const State sa = (*this)[a];
    set(a, (*this)[b]);
    set(b, sa);
  }

  int eta(SiteIndex site, int type) const noexcept { return indicator((*this)[site], type); }

  /// Base-4 code sum_x state(x) * 4^x; only meaningful for tiny lattices.
  std::uint64_t code() const;
  static Configuration from_code(const Geometry& geometry, std::uint64_t code);

  std::vector<State> states() const;
  static Configuration from_states(const Geometry& geometry, std::span<const State> states);

  friend bool operator==(const Configuration& a, const Configuration& b) noexcept {
    return a.geometry_ == b.geometry_ && a.words_ == b.words_;
  }

 private:
  Geometry geometry_;
  std::vector<std::uint64_t> words_;
};

Counts occupancy_counts(const Configuration& config);

/// Snapshot format: header line "d N transverse_len boundary_mode", then one
/// line of base-4 digits per transverse row (e1 fastest).
void write_snapshot(std::ostream& out, const Configuration& config);
Configuration read_snapshot(std::istream& in);

}  // namespace bdcp
