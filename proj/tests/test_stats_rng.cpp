#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "catmouse/oracles.hpp"
#include "catmouse/rng.hpp"
#include "catmouse/stats.hpp"

using namespace catmouse;

// Reference words from numpy.random.Philox (4x64, 10 rounds). numpy bumps the
// counter before each block, so its first block is counter 1.
TEST_CASE("philox known answers") {
  const Block zero1 = philox4x64_10({1, 0, 0, 0}, {0, 0});
  CHECK(zero1 == Block{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL});
  const Block zero2 = philox4x64_10({2, 0, 0, 0}, {0, 0});
  CHECK(zero2 == Block{0x809bf322883987c3ULL, 0x471128b9e807f7ddULL, 0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL});
  const Block keyed = philox4x64_10({6, 0, 0, 0}, {0x0123456789abcdefULL, 0xfedcba9876543210ULL});
  CHECK(keyed == Block{0xd0bba8f1bcf6f692ULL, 0xe3473c643c54e623ULL, 0xeded168e9338e0d9ULL, 0xc20bc8d6143b0f29ULL});

  Stream s(42, 7);
  for (int i = 0; i < 4; ++i) s.next_u64();
  CHECK(s.next_u64() == 0xa64064f34e84b9a3ULL);
  CHECK(s.next_u64() == 0xe287959a866a08fdULL);
}

TEST_CASE("streams are reproducible and addressable") {
  Stream a(9, 3), b(9, 3), c(9, 4);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("distinct streams are uncorrelated") {
  Stream a(2024, 0), b(2024, 1);
  const int n = 1'000'000;
  double sab = 0.0;
  for (int i = 0; i < n; ++i) sab += (a.uniform() - 0.5) * (b.uniform() - 0.5);
  // Each product has variance 1/144.
  const double z = sab / (std::sqrt(static_cast<double>(n)) / 12.0);
  CHECK(std::abs(z) < 3.0);
}

TEST_CASE("u32 halves and thresholds") {
  Stream a(5, 5), b(5, 5);
  const auto w = a.next_u64();
  CHECK(b.next_u32() == static_cast<std::uint32_t>(w));
  CHECK(b.next_u32() == static_cast<std::uint32_t>(w >> 32));
  CHECK(u32_threshold(0.0) == 0u);
  CHECK(u32_threshold(0.5) == 2147483648u);
  CHECK(u32_threshold(1.0) == UINT32_MAX);
}

TEST_CASE("derived samplers match their moments") {
  Stream s(77, 0);
  const int n = 200'000;
  std::vector<double> geo, bin, g05, g3, g1000;
  for (int i = 0; i < n; ++i) {
    geo.push_back(static_cast<double>(s.geometric_failures(0.25)));
    bin.push_back(static_cast<double>(s.fair_binomial(101)));
    g05.push_back(s.gamma(0.5));
    g3.push_back(s.gamma(3.0));
    g1000.push_back(s.gamma(1000.0));
  }
  CHECK(mean_within_sigma("geometric", geo, 3.0).pass);
  CHECK(mean_within_sigma("binomial", bin, 50.5).pass);
  CHECK(mean_within_sigma("gamma 0.5", g05, 0.5).pass);
  CHECK(mean_within_sigma("gamma 3", g3, 3.0).pass);
  CHECK(mean_within_sigma("gamma 1000", g1000, 1000.0).pass);
  CHECK(mean_se(g1000).sd == doctest::Approx(std::sqrt(1000.0)).epsilon(0.02));
  CHECK(mean_se(bin).sd == doctest::Approx(std::sqrt(101.0) / 2.0).epsilon(0.02));
  std::vector<double> idx;
  for (int i = 0; i < n; ++i) idx.push_back(static_cast<double>(s.uniform_index(7)));
  CHECK(mean_within_sigma("index", idx, 3.0).pass);
}

TEST_CASE("one-sample KS") {
  Stream s(1, 1);
  std::vector<double> u, e;
  for (int i = 0; i < 100'000; ++i) {
    u.push_back(s.uniform());
    e.push_back(s.exponential());
  }
  auto unif = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_distance(u, unif) < 0.01);
  CHECK(ks_distance(e, unif) > 0.2);
  auto v = ks_verdict("uniform", u, unif, 0.01);
  CHECK(v.pass);
  CHECK(v.n1 == 100'000u);
  CHECK_THROWS(ks_distance(std::vector<double>{}, unif));
}

TEST_CASE("two-sample KS handles ties") {
  const std::vector<double> a{0, 0, 1, 1}, b{0, 1, 1, 1};
  CHECK(ks_two_sample(a, b) == doctest::Approx(0.25));
  CHECK(ks_two_sample(a, a) == 0.0);
  const std::vector<double> c{5, 6}, d{1, 2};
  CHECK(ks_two_sample(c, d) == 1.0);
}

TEST_CASE("half-normal oracle agrees across seeds") {
  Stream a(10, 0), b(11, 0);
  std::vector<double> x, y;
  for (int i = 0; i < 100'000; ++i) {
    x.push_back(oracle::half_normal(1.0, a));
    y.push_back(oracle::half_normal(1.0, b));
  }
  CHECK(ks_two_sample(x, y) < 0.01);
  CHECK(ks_distance(x, [](double v) { return oracle::half_normal_cdf(v, 1.0); }) < 0.01);
}

TEST_CASE("brownian at local time oracle") {
  Stream s(3, 0);
  for (double t : {0.5, 1.0, 2.0}) {
    std::vector<double> x, x2;
    for (int i = 0; i < 100'000; ++i) {
      x.push_back(oracle::brownian_at_local_time(t, s));
      x2.push_back(x.back() * x.back());
    }
    CHECK(mean_within_sigma("variance", x2, std::sqrt(2.0 * t / std::numbers::pi)).pass);
    CHECK(ks_distance(x, [t](double v) { return oracle::brownian_at_local_time_cdf(v, t); }) < 0.01);
  }
  CHECK(oracle::brownian_at_local_time(0.0, s) == 0.0);
  CHECK(oracle::brownian_at_local_time_cdf(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("bilateral exponential oracle") {
  Stream s(4, 0);
  const double a0 = 1.9, t = 1.5;
  std::vector<double> x, ax;
  for (int i = 0; i < 200'000; ++i) {
    x.push_back(oracle::bilateral_exponential(a0, t, s));
    ax.push_back(std::abs(x.back()));
  }
  CHECK(mean_within_sigma("mean", x, 0.0).pass);
  CHECK(mean_within_sigma("abs mean", ax, std::sqrt(t) / a0).pass);
  CHECK(ks_distance(x, [&](double v) { return oracle::bilateral_exponential_cdf(v, a0, t); }) < 0.01);
  CHECK(oracle::bilateral_exponential(a0, 0.0, s) == 0.0);

  const std::vector<double> thetas{0.0, 0.5, 1.0, 2.0};
  const auto cf = empirical_char_function(x, thetas);
  CHECK(cf[0].value == std::complex<double>(1.0, 0.0));
  for (const auto& c : cf) {
    const double exact = a0 * a0 / (a0 * a0 + c.theta * c.theta * t);
    if (c.theta > 0) {
      CHECK(std::abs(c.value.real() - exact) < 3.0 * c.se_re);
      CHECK(std::abs(c.value.imag()) < 3.0 * c.se_im);
    }
  }
}

TEST_CASE("chi-square and Wilson") {
  Stream s(8, 0);
  std::vector<std::uint64_t> counts(6, 0);
  for (int i = 0; i < 60'000; ++i) ++counts[s.uniform_index(6)];
  const std::vector<double> fair(6, 1.0 / 6.0);
  CHECK(chi_square_gof(counts, fair).p_value > 0.001);
  const std::vector<double> skew{0.3, 0.1, 0.15, 0.15, 0.15, 0.15};
  CHECK(chi_square_gof(counts, skew).p_value < 1e-10);
  const auto w = wilson_interval(30, 100);
  CHECK(w.lo < 0.3);
  CHECK(w.hi > 0.3);
  CHECK(w.lo == doctest::Approx(0.2189).epsilon(1e-3));
}

TEST_CASE("verdict bound directions") {
  CHECK(make_verdict("a", "x", 1.0, 2.0).pass);
  CHECK_FALSE(make_verdict("a", "x", 3.0, 2.0).pass);
  CHECK(make_verdict("a", "x", 3.0, 2.0, Bound::at_least).pass);
  CHECK(relative_error("r", 1.04, 1.0, 0.05).pass);
}
