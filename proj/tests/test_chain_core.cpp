#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "catmouse/chain.hpp"
#include "catmouse/stats.hpp"

using namespace catmouse;

namespace {

Eigen::MatrixXd ring(std::size_t n, double cw) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>((i + 1) % n)) = cw;
    P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>((i + n - 1) % n)) = 1.0 - cw;
  }
  return P;
}

// E_x(H_y) by summing P(H > k) over paths that avoid y, to a fixed depth.
double hitting_by_enumeration(const FiniteChain& c, std::size_t x, std::size_t y, int depth) {
  const std::size_t n = c.size();
  std::vector<double> alive(n, 0.0);
  alive[x] = 1.0;  // distribution of C_k on {H > k}
  double mean = 1.0;  // P(H > 0)
  for (int k = 1; k <= depth; ++k) {
    std::vector<double> next(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (b != y) next[b] += alive[a] * c.p(a, b);
    alive = next;
    double s = 0.0;
    for (double v : alive) s += v;
    mean += s;
  }
  return mean;
}

}  // namespace

TEST_CASE("construction validates kernels") {
  Eigen::MatrixXd flip(2, 2);
  flip << 0, 1, 1, 0;
  CHECK_THROWS_AS(FiniteChain{flip}, ChainError);
  CHECK_NOTHROW(FiniteChain(flip, ChainOptions{.allow_periodic = true}));

  Eigen::MatrixXd bad = ring(3, 0.5);
  bad(0, 1) += 1e-9;
  CHECK_THROWS_AS(FiniteChain{bad}, ChainError);

  Eigen::MatrixXd loop(2, 2);
  loop << 0.5, 0.5, 1, 0;
  CHECK_THROWS_AS(FiniteChain{loop}, ChainError);
  const FiniteChain with_loop(loop, ChainOptions{.allow_loops = true});
  CHECK_FALSE(with_loop.loop_free());
  CHECK(with_loop.aperiodic());

  const FiniteChain three(ring(3, 0.5));
  CHECK(three.irreducible());
  CHECK(three.aperiodic());
  CHECK(three.loop_free());
  CHECK(FiniteChain(ring(6, 0.5), ChainOptions{.allow_periodic = true}).period() == 2);
}

TEST_CASE("stationary laws") {
  const auto pi = stationary(FiniteChain(ring(3, 0.5)));
  for (double v : pi.weights) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const double p = 0.3, rho = p / (1 - p);
  const std::size_t K = 200;
  const FiniteChain refl = truncated_reflected_walk(p, K);
  const auto g = stationary(refl);
  const double norm = (1 - rho) / (1 - std::pow(rho, static_cast<double>(K + 1)));
  for (std::size_t x = 0; x <= K; ++x) CHECK(std::abs(g[x] - norm * std::pow(rho, static_cast<double>(x))) < 1e-14);
  CHECK(stationary_residual(refl, g) <= 1e-12);
  // Doubling the truncation level changes nothing at the 1e-8 level.
  const auto g2 = stationary(truncated_reflected_walk(p, 2 * K));
  for (std::size_t x = 0; x <= K; ++x) CHECK(std::abs(g[x] - g2[x]) < 1e-8);

  Eigen::MatrixXd red(3, 3);
  red << 0, 1, 0, 1, 0, 0, 0.5, 0.5, 0;
  const FiniteChain reducible(red, ChainOptions{.allow_periodic = true});
  CHECK_FALSE(reducible.irreducible());
  try {
    stationary(reducible);
    FAIL("expected ChainError");
  } catch (const ChainError& e) {
    CHECK(e.states == std::vector<std::size_t>{2});
  }
}

TEST_CASE("reversed kernels") {
  const FiniteChain biased(ring(3, 0.9));
  const auto pi = stationary(biased);
  const FiniteChain rev = reversed(biased, pi);
  CHECK(rev.matrix().isApprox(ring(3, 0.1), 1e-14));
  const FiniteChain back = reversed(rev, stationary(rev));
  CHECK((back.matrix() - biased.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  const auto pr = stationary(rev);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(pr[i] - pi[i]) < 1e-14);

  Eigen::MatrixXd sym(3, 3);
  sym << 0, 0.25, 0.75, 0.5, 0, 0.5, 0.6, 0.4, 0;
  const FiniteChain c(sym);
  const auto pc = stationary(c);
  if (is_reversible(c, pc)) CHECK(reversed(c, pc).matrix().isApprox(sym, 1e-12));
  const FiniteChain sr(ring(3, 0.5));
  CHECK(reversed(sr, stationary(sr)).matrix().isApprox(sr.matrix(), 1e-14));

  Measure zero{{0.5, 0.5, 0.0}, true};
  CHECK_THROWS_AS(reversed(sr, zero), ChainError);
}

TEST_CASE("hitting times") {
  const FiniteChain sym(ring(3, 0.5));
  for (std::size_t y = 0; y < 3; ++y) {
    const auto h = expected_hitting_times(sym, y);
    for (std::size_t x = 0; x < 3; ++x) {
      // Geometric tail after depth 40 is below 2^-40.
      CHECK(h[x] == doctest::Approx(hitting_by_enumeration(sym, x, y, 40)).epsilon(1e-9));
      CHECK(h[x] >= 1.0);
    }
  }
  Stream rng(12, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(5, 5);
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y)
        if (x != y) P(x, y) = rng.exponential();
      P.row(x) /= P.row(x).sum();
    }
    const FiniteChain c(P);
    const auto pi = stationary(c);
    for (std::size_t y = 0; y < 5; ++y) {
      const auto h = expected_hitting_times(c, y);
      CHECK(std::abs(h[y] * pi[y] - 1.0) < 1e-10);
      for (double v : h) CHECK(v >= 1.0);
    }
  }
}

TEST_CASE("sampled paths") {
  const FiniteChain c(ring(3, 0.7));
  Stream a(1, 2), b(1, 2);
  CHECK(sample_path(c, 1, 0, a) == std::vector<std::size_t>{1});
  CHECK(sample_path(c, 0, 500, a) == sample_path(c, 0, 500, b));

  // Transition frequencies against the kernel rows.
  Stream s(3, 3);
  const auto path = sample_path(c, 0, 1'000'000, s);
  for (std::size_t x = 0; x < 3; ++x) {
    std::vector<std::uint64_t> counts(3, 0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      if (path[i] == x) ++counts[path[i + 1]];
    std::vector<std::uint64_t> obs;
    std::vector<double> probs;
    for (std::size_t y = 0; y < 3; ++y)
      if (c.p(x, y) > 0) {
        obs.push_back(counts[y]);
        probs.push_back(c.p(x, y));
      } else {
        CHECK(counts[y] == 0u);
      }
    CHECK(chi_square_gof(obs, probs).p_value > 0.001);
  }

  const double p = 0.3, rho = p / (1 - p);
  const ReflectedWalk walk(p);
  Stream r(5, 0);
  const auto rw = sample_path(walk, std::int64_t{0}, 1'000'000, r);
  std::vector<double> at0;
  at0.reserve(rw.size());
  for (auto x : rw) at0.push_back(x == 0 ? 1.0 : 0.0);
  // Correlated samples: batch means for the standard error.
  std::vector<double> batches;
  for (std::size_t b0 = 0; b0 + 10'000 <= at0.size(); b0 += 10'000) {
    double s0 = 0;
    for (std::size_t i = b0; i < b0 + 10'000; ++i) s0 += at0[i];
    batches.push_back(s0 / 10'000.0);
  }
  const double oracle0 = stationary(truncated_reflected_walk(p, 200))[0];
  CHECK(oracle0 == doctest::Approx(1 - rho).epsilon(1e-12));
  CHECK(mean_within_sigma("occupation of 0", batches, oracle0).pass);
}

TEST_CASE("implicit kernels enumerate stochastic rows") {
  const ReflectedWalk w(0.3);
  for (std::int64_t x : {0, 1, 7}) {
    double s = 0;
    for (auto [y, q] : w.neighbors(x)) s += q;
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  CHECK(w.neighbors(0)[1].first == 0);
  CHECK(w.neighbors(0)[1].second == doctest::Approx(0.7));
  double s2 = 0;
  for (auto [y, q] : Z2Plane{}.neighbors({3, -1})) s2 += q;
  CHECK(s2 == 1.0);
  const MMInf q(1.5);
  CHECK(q.total_rate(4) == 5.5);
  CHECK(q.rates(4)[1].second == 4.0);
  CHECK(q.rates(0).size() == 1);
}

TEST_CASE("matrix files") {
  const auto dir = std::filesystem::temp_directory_path() / "catmouse_chain_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "m.txt");
    f << "3\n0 1/2 1/2\n0.5 0 0.5\n1/2 0.5 0\n";
    std::ofstream l(dir / "m.labels");
    l << "a b c\n";
  }
  const auto c = load_matrix_file(dir / "m.txt", dir / "m.labels");
  CHECK(c.size() == 3);
  CHECK(c.label(2) == "c");
  {
    std::ofstream f(dir / "bad.txt");
    f << "2\n0 1\n1 x\n";
  }
  try {
    load_matrix_file(dir / "bad.txt");
    FAIL("expected parse error");
  } catch (const ChainError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
}
