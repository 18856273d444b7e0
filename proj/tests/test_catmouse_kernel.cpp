#include <doctest.h>

#include <cmath>
#include <map>

#include "catmouse/catmouse.hpp"
#include "catmouse/stationary_analysis.hpp"
#include "catmouse/stats.hpp"

using namespace catmouse;

namespace {

FiniteChain four_state_example() {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(4, 4);
  P(0, 1) = 1.0;
  P(1, 2) = 0.5;
  P(1, 0) = 0.5;
  P(2, 3) = 1.0;
  P(3, 1) = 1.0;
  return FiniteChain(P);
}

}  // namespace

TEST_CASE("apart steps leave the mouse in place") {
  Stream rng(1, 0);
  const ZLine line;
  for (int i = 0; i < 1000; ++i) {
    CatMouseState<std::int64_t> s{static_cast<std::int64_t>(rng.uniform_index(9)) - 4, 2, 0.0};
    if (s.together()) continue;
    CHECK(cm_step(s, line, rng).mouse == 2);
  }
  const FiniteChain base = four_state_example();
  CatMouseState<std::size_t> s{0, 3, 0.0};
  CHECK(cm_step(s, base, rng).mouse == 3);
}

TEST_CASE("together step on Z draws both coordinates") {
  Stream rng(2, 0);
  const ZLine line;
  std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t> counts;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const auto s = cm_step(CatMouseState<std::int64_t>{0, 0, 0.0}, line, rng);
    ++counts[{s.cat, s.mouse}];
  }
  CHECK(counts.size() == 4);
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (auto [key, c] : counts) {
    CHECK(std::abs(std::abs(key.first) - 1) == 0);
    CHECK(std::abs(static_cast<double>(c) - n / 4.0) < 3.0 * sd);
  }
}

TEST_CASE("fixed draw order reproduces trajectories") {
  const FiniteChain base = four_state_example();
  Stream a(3, 1), b(3, 1);
  CatMouseState<std::size_t> s{1, 1, 0.0}, t{1, 1, 0.0};
  for (int i = 0; i < 1000; ++i) {
    s = cm_step(s, base, a);
    t = cm_step(t, base, b);
    CHECK(s == t);
  }
}

TEST_CASE("cat marginal follows the base chain") {
  Stream gen(4, 0);
  const FiniteChain base = random_chain(5, gen);
  const Measure pi = stationary(base);
  Stream rng(4, 1);
  CatMouseState<std::size_t> s{0, 0, 0.0};
  std::vector<std::uint64_t> counts(5, 0);
  std::vector<std::uint64_t> mouse_trans(25, 0);
  for (int i = 0; i < 1'000'000; ++i) {
    const auto next = cm_step(s, base, rng);
    if (!s.together()) CHECK(next.mouse == s.mouse);
    if (next.mouse != s.mouse) ++mouse_trans[s.mouse * 5 + next.mouse];
    s = next;
    if (i % 50 == 0) ++counts[s.cat];  // thinned to near-independence
  }
  CHECK(chi_square_gof(counts, pi.weights).p_value > 0.001);
  // Mouse positions at its move instants form a path of the base chain.
  for (std::size_t x = 0; x < 5; ++x) {
    std::vector<std::uint64_t> obs;
    std::vector<double> probs;
    for (std::size_t y = 0; y < 5; ++y)
      if (base.p(x, y) > 0) {
        obs.push_back(mouse_trans[x * 5 + y]);
        probs.push_back(base.p(x, y));
      }
    CHECK(chi_square_gof(obs, probs).p_value > 0.001);
  }
}

TEST_CASE("explicit product kernel") {
  const FiniteChain base = four_state_example();
  const FiniteChain Q = cm_kernel(base);
  CHECK(Q.size() == 16);
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t w = 0; w < 4; ++w) {
          const double q = Q.p(pair_index(x, y, 4), pair_index(z, w, 4));
          const double expect = x != y ? base.p(x, z) * (w == y ? 1.0 : 0.0) : base.p(y, z) * base.p(y, w);
          CHECK(q == doctest::Approx(expect).epsilon(1e-15));
        }
  const auto reach = Q.reachable_from(pair_index(1, 1, 4));
  CHECK_FALSE(reach[pair_index(0, 3, 4)]);
  CHECK(reach[pair_index(3, 0, 4)]);
  Stream rng(5, 0);
  CHECK_THROWS_AS(cm_kernel(random_chain(9, rng), 8), ChainError);
}

TEST_CASE("pair occupation matches the exact invariant law") {
  Stream gen(6, 0);
  for (const FiniteChain& base : {four_state_example(), random_chain(6, gen, 0.6)}) {
    const std::size_t n = base.size();
    const Measure law = limit_law_finite(base);
    std::vector<double> freq(n * n, 0.0);
    Stream rng(6, 1 + n);
    CatMouseState<std::size_t> s{0, 0, 0.0};
    const int steps = 10'000'000;
    for (int i = 0; i < steps; ++i) {
      s = cm_step(s, base, rng);
      freq[pair_index(s.cat, s.mouse, n)] += 1.0 / steps;
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) tv += 0.5 * std::abs(freq[i] - law[i]);
    CHECK(tv < 0.02);
  }
}

TEST_CASE("cycle records on Z") {
  const ZLine line;
  std::vector<std::int64_t> G;
  std::vector<double> Gd;
  Stream rng(7, 0);
  // Apart phases are heavy tailed; each run is capped and only completed
  // cycles are kept. G is independent of the apart phase, so this is unbiased.
  while (G.size() < 100'000) {
    const auto run = simulate_cycles(line, CatMouseState<std::int64_t>{0, 0, 0.0}, 1, rng, 10'000);
    for (const auto& c : run.cycles) {
      CHECK(c.together_duration >= 1u);
      CHECK(c.apart_duration >= 1u);
      CHECK(std::abs(displacement(c)) <= static_cast<std::int64_t>(c.together_duration));
      G.push_back(static_cast<std::int64_t>(c.together_duration));
      Gd.push_back(static_cast<double>(c.together_duration));
    }
  }
  const double d = ks_distance_discrete(G, [](std::int64_t k) { return k < 1 ? 0.0 : 1.0 - std::ldexp(1.0, -static_cast<int>(k)); });
  CHECK(d < 0.01);
  CHECK(mean_within_sigma("E G", Gd, 2.0).pass);

  const auto partial = simulate_cycles(line, CatMouseState<std::int64_t>{0, 0, 0.0}, 1000, rng, 50);
  CHECK(partial.partial);
  CHECK(partial.steps == 50u);
}

TEST_CASE("cycle records on Z2") {
  const Z2Plane plane;
  std::vector<double> G;
  Stream rng(8, 0);
  while (G.size() < 100'000) {
    const auto run = simulate_cycles(plane, CatMouseState<Point2>{{0, 0}, {0, 0}, 0.0}, 1, rng, 2'000);
    for (const auto& c : run.cycles) G.push_back(static_cast<double>(c.together_duration));
  }
  CHECK(mean_within_sigma("E G 2D", G, 4.0 / 3.0).pass);
}
