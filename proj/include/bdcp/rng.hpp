#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
//
// A RandomStream is keyed by (seed, replica_id): every replica of an
// experiment gets its own key, and the 256-bit counter walks through the
// blocks of that key. Streams with different keys are independent, so
// results depend only on (seed, replica_id) and never on scheduling.
// The counter is incremented before each block, which reproduces the raw
// output of numpy.random.Philox for the same key and starting counter.

#include <array>
#include <cmath>
#include <cstdint>

namespace bdcp {

class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Block encrypt(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B97F4A7C15ULL;
        key[1] += 0xBB67AE8584CAA73BULL;
      }
      const unsigned __int128 p0 = static_cast<unsigned __int128>(0xD2E7470EE14C6C93ULL) * ctr[0];
      const unsigned __int128 p1 = static_cast<unsigned __int128>(0xCA5A826395121157ULL) * ctr[2];
      const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
      const auto lo0 = static_cast<std::uint64_t>(p0);
      const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
      const auto lo1 = static_cast<std::uint64_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t replica_id) noexcept
      : key_{seed, replica_id} {}

  /// Starts from an explicit 256-bit counter (the first block uses counter + 1).
  RandomStream(Philox4x64::Key key, Philox4x64::Block counter) noexcept
      : key_(key), counter_(counter) {}

  std::uint64_t next_u64() noexcept {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Exp(rate) variate.
  double exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

  /// Integer in [0, n) by multiply-shift (bias below n / 2^64).
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  void refill() noexcept {
    for (auto& w : counter_)
      if (++w != 0) break;
    buffer_ = Philox4x64::encrypt(counter_, key_);
    pos_ = 0;
  }

  Philox4x64::Key key_;
  Philox4x64::Block counter_{};
  Philox4x64::Block buffer_{};
  int pos_ = 4;
};

}  // namespace bdcp
