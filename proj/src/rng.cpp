#include "catmouse/rng.hpp"

#include <bit>
#include <numbers>
#include <random>

namespace catmouse {

namespace {

constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

}  // namespace

Block philox4x64_10(Block c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

void Stream::refill() noexcept {
  buf_ = philox4x64_10({counter_, 0, 0, 0}, key_);
  ++counter_;
  pos_ = 0;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : label) h = (h ^ ch) * 0x100000001b3ULL;
  return philox4x64_10({h, 0, 0, 0}, {root, 0xD1B54A32D192ED03ULL})[0];
}

double Stream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double a = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t Stream::geometric_failures(double q) noexcept {
  if (q >= 1.0) return 0;
  const double g = std::floor(std::log(uniform_open()) / std::log1p(-q));
  if (!(g < 9.0e18)) return UINT64_MAX;
  return static_cast<std::uint64_t>(g);
}

std::uint64_t Stream::fair_binomial(std::uint64_t n) noexcept {
  std::uint64_t heads = 0;
  while (n >= 64) {
    heads += static_cast<std::uint64_t>(std::popcount(next_u64()));
    n -= 64;
  }
  if (n > 0) {
    const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
    heads += static_cast<std::uint64_t>(std::popcount(next_u64() & mask));
  }
  return heads;
}

double Stream::gamma(double shape) noexcept {
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t Stream::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<std::uint64_t>(dist(*this));
}

std::uint64_t Stream::negative_binomial_failures(std::uint64_t r, double q) {
  if (r == 0 || q >= 1.0) return 0;
  return poisson(gamma(static_cast<double>(r)) * (1.0 - q) / q);
}

std::uint64_t Stream::uniform_index(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t t = (0 - n) % n;
    while (lo < t) {
      x = next_u64();
      m = static_cast<unsigned __int128>(x) * n;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace catmouse
