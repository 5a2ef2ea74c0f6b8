#pragma once

// Configuration-driven experiments. A spec is a flat "key = value" text file
// ('#' starts a comment); see README for the schema. Every report carries the
// canonical spec echo and its FNV-1a hash, and every number in it depends
// only on (spec, seed): replica r of grid point N always uses the Philox key
// (seed, stream_key(purpose, N, r)) and aggregation runs in replica order.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "bdcp/lattice.hpp"
#include "bdcp/params.hpp"

namespace bdcp {

enum class ExperimentKind { hydro_converge, currents_lln, oracle_check, couple_decay, pde_compare };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::hydro_converge;
  int dim = 1;
  int transverse_len = 1;
  BoundaryMode mode = BoundaryMode::reservoirs;
  double lambda1 = 2.0;
  double lambda2 = 1.0;
  double r = 0.5;
  Density b_left{0.3, 0.2, 0.1};
  Density b_right{0.3, 0.2, 0.1};
  bool reaction = true;
  bool exchange = true;
  bool boundary = true;

  std::vector<int> N_grid{32, 64, 128};
  std::size_t replicas = 64;
  std::uint64_t seed = 1;
  std::string profile = "cosine:0.2,-0.1,0.15";
  std::vector<std::string> test_functions{"sine:1,zero,zero", "zero,sine:3,zero", "sine:1,sine:1,sine:1"};
  std::vector<std::string> current_test_functions{"bump:0.5:0.4,zero,zero", "zero,bump:-0.5:0.4,zero",
                                                  "bump:0.5:0.4,bump:0.5:0.4,bump:0.5:0.4"};
  std::vector<std::string> reaction_test_functions{"bump:0:0.5,zero,zero", "zero,bump:0:0.5,zero",
                                                   "bump:0:0.5,bump:0:0.5,bump:0:0.5"};
  std::vector<double> snapshots{0.05, 0.1, 0.2};
  double pde_h = 1.0 / 128;
  int spectral_modes = 128;
  double spectral_tol = 1e-7;
  int box_M = 0;  // 0: floor(N^{1+1/d}) per grid point
  std::uint64_t initial_code = 0;
  double tv_tol = 0.01;
  double max_error = 0.0;  // > 0 adds an absolute bound at the largest N
  double compare_tol = 1e-3;
  bool assert_monotone = true;
  std::string out_dir = "out";

  double horizon() const;
  ModelParams model(double scale_N = 1.0) const;
};

/// Parses "key = value" lines and applies them over the defaults. Throws
/// std::invalid_argument on unknown or repeated keys and on malformed values.
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec load_spec(const std::string& path);
/// Applies one "key=value" override.
void apply_override(ExperimentSpec& spec, const std::string& assignment);

/// N_grid strictly increasing and positive, replicas >= 1, times and sizes sane.
void validate(const ExperimentSpec& spec);

/// Canonical echo: every key in fixed order, one per line.
std::string canonical_text(const ExperimentSpec& spec);
std::uint64_t fnv1a64(const std::string& bytes) noexcept;
std::uint64_t spec_hash(const ExperimentSpec& spec);
std::string hex64(std::uint64_t v);

constexpr std::uint64_t stream_key(unsigned purpose, std::uint64_t grid, std::uint64_t replica) noexcept {
  return (std::uint64_t{purpose} << 56) | ((grid & 0xFFFFFFull) << 32) | (replica & 0xFFFFFFFFull);
}

/// Runs f(0..n-1) on `threads` workers and returns the results in index order.
template <class F>
auto parallel_map(std::size_t n, unsigned threads, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> out(n);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < std::min<std::size_t>(threads, n); ++k) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct Assertion {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::hydro_converge;
  std::string spec_text;
  std::uint64_t hash = 0;
  /// File name -> contents; the main table is <kind>.csv.
  std::map<std::string, std::string> files;
  std::vector<Assertion> assertions;

  bool passed() const;
};

ExperimentReport run_experiment(const ExperimentSpec& spec, unsigned threads = 1);

/// Writes every report file plus spec.txt and assertions.csv under dir.
void write_report(const ExperimentReport& report, const std::string& dir);

/// mean and standard error of the mean.
std::pair<double, double> mean_stderr(const std::vector<double>& v);

}  // namespace bdcp
