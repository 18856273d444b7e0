#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace catmouse {

using Block = std::array<std::uint64_t, 4>;
using Key = std::array<std::uint64_t, 2>;

// One Philox4x64-10 block.
Block philox4x64_10(Block counter, Key key) noexcept;

// Counter-based stream addressed by (root seed, stream id). Two streams with
// different ids use different Philox keys, so replica k's stream can be
// constructed directly without touching streams 0..k-1.
class Stream {
 public:
  Stream(std::uint64_t root_seed, std::uint64_t stream_id) noexcept
      : key_{root_seed, stream_id} {}

  std::uint64_t root_seed() const noexcept { return key_[0]; }
  std::uint64_t stream_id() const noexcept { return key_[1]; }
  std::uint64_t blocks_used() const noexcept { return counter_; }

  // UniformRandomBitGenerator interface, for the standard distributions.
  using result_type = std::uint64_t;
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return UINT64_MAX; }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  // Halves of 64-bit outputs, low half first.
  std::uint32_t next_u32() noexcept {
    if (half_valid_) {
      half_valid_ = false;
      return static_cast<std::uint32_t>(half_ >> 32);
    }
    half_ = next_u64();
    half_valid_ = true;
    return static_cast<std::uint32_t>(half_);
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); never returns 0, safe for logarithms.
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  double exponential(double mean = 1.0) noexcept { return -mean * std::log(uniform_open()); }

  double normal() noexcept;

  // Number of failures before the first success, success probability q.
  std::uint64_t geometric_failures(double q) noexcept;

  // Binomial(n, 1/2) from raw bits.
  std::uint64_t fair_binomial(std::uint64_t n) noexcept;

  // Gamma(shape, scale 1); Marsaglia-Tsang with the shape<1 boost.
  double gamma(double shape) noexcept;

  std::uint64_t uniform_index(std::uint64_t n) noexcept;

  std::uint64_t poisson(double mean);

  // Failures before the r-th success, success probability q; Poisson-gamma mixture.
  std::uint64_t negative_binomial_failures(std::uint64_t r, double q);

 private:
  void refill() noexcept;

  Key key_;
  std::uint64_t counter_ = 0;
  Block buf_{};
  int pos_ = 4;
  std::uint64_t half_ = 0;
  bool half_valid_ = false;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Threshold for next_u32() < t to be a Bernoulli(p) draw, exact up to 2^-32.
inline std::uint32_t u32_threshold(double p) noexcept {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return UINT32_MAX;
  return static_cast<std::uint32_t>(std::llround(p * 4294967296.0));
}

// Root seed for a named sub-experiment, so runs that share a root seed
// but not a label draw from unrelated streams.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label) noexcept;

// Stream for replica `index` of the experiment family `tag`.
inline Stream replica_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return Stream(seed, (tag << 40) | index);
}

}  // namespace catmouse
