#pragma once

// Exhaustive rate matrix of the full generator on a tiny lattice, and its
// transient distribution by uniformization. Used as the exactness oracle for
// the event engine.
//
// States are indexed by Configuration::code() (site 0 is the least
// significant base-4 digit). Rows are stored sparsely; the matrix semantics
// are those of the dense 4^n x 4^n generator.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bdcp/lattice.hpp"
#include "bdcp/params.hpp"

namespace bdcp {

inline constexpr std::size_t kMaxGeneratorSites = 8;

class GeneratorMatrix {
 public:
  struct Entry {
    std::uint32_t column;
    double rate;
  };

  explicit GeneratorMatrix(std::size_t dimension);

  std::size_t dimension() const noexcept { return diagonal_.size(); }

  /// Adds rate to the off-diagonal entry (from, to) and keeps the row sum zero.
  void add(std::uint32_t from, std::uint32_t to, double rate);

  std::span<const Entry> row(std::uint32_t i) const { return rows_[i]; }
  double diagonal(std::uint32_t i) const { return diagonal_[i]; }
  double entry(std::uint32_t i, std::uint32_t j) const;
  double max_exit_rate() const;

 private:
  std::vector<std::vector<Entry>> rows_;
  std::vector<double> diagonal_;
};

/// Restricts every channel to the sites with active[x] != 0: exchanges need
/// both endpoints active, births count active neighbours only, inactive sites
/// neither react nor see the reservoirs.
using SiteMask = std::vector<std::uint8_t>;

GeneratorMatrix build_generator(const Geometry& geometry, const ModelParams& params,
                                const std::optional<SiteMask>& active = std::nullopt);

/// init * exp(t * Q) by uniformization; truncation error below 1e-10 in total variation.
std::vector<double> transient_distribution(const GeneratorMatrix& gen, std::span<const double> init,
                                           double t);

double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace bdcp
