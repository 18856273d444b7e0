#include <doctest.h>

#include <cmath>

#include "catmouse/catmouse.hpp"
#include "catmouse/stationary_analysis.hpp"

using namespace catmouse;

namespace {

// Independent route: stationary law of the explicit pair kernel, scaled so the
// diagonal equals pi.
Eigen::MatrixXd nu_by_product_solve(const FiniteChain& base) {
  const std::size_t n = base.size();
  const Measure law = stationary_on_class(cm_kernel(base), pair_index(0, 0, n));
  const Measure pi = stationary(base);
  double diag = 0.0;
  for (std::size_t x = 0; x < n; ++x) diag += law[pair_index(x, x, n)];
  Eigen::MatrixXd nu(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      nu(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = law[pair_index(x, y, n)] / diag;
  return nu;
}

FiniteChain aperiodic_ring6() {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 6; ++i) {
    P(i, (i + 1) % 6) = P(i, (i + 5) % 6) = 0.35;
    P(i, (i + 2) % 6) = P(i, (i + 4) % 6) = 0.15;
  }
  return FiniteChain(P);
}

}  // namespace

TEST_CASE("randomized invariants over many chains") {
  Stream rng(1234, 0);
  int reversible_seen = 0;
  for (int i = 0; i < 600; ++i) {
    const std::size_t n = 3 + rng.uniform_index(6);
    const double density = i % 3 == 0 ? 0.5 : 1.0;
    const bool rev = i % 2 == 1;
    const FiniteChain base = rev ? random_reversible_chain(n, rng, density) : random_chain(n, rng, density);
    const NuTable t = nu_exact(base);
    const auto chk = check_nu_table(t);
    CHECK(chk.diagonal_error < 1e-10);
    CHECK(chk.row_sum_error < 1e-10);
    CHECK(chk.alpha_error < 1e-12);
    CHECK(chk.h_spread < 1e-9);
    CHECK(verify_invariance(t.nu, base).pass);
    CHECK(t.alpha <= static_cast<double>(n) - 1.0 + 1e-9);
    const Measure direct = nu2_direct(base);
    for (std::size_t y = 0; y < n; ++y) CHECK(std::abs(direct[y] - t.nu2[y]) < 1e-9);
    if (is_reversible(base, t.pi)) {
      ++reversible_seen;
      for (std::size_t y = 0; y < n; ++y) CHECK(std::abs(t.nu2[y] - (1.0 - t.pi[y])) < 1e-9);
      CHECK(std::abs(t.alpha - (static_cast<double>(n) - 1.0)) < 1e-9);
    }
  }
  CHECK(reversible_seen >= 300);
}

TEST_CASE("exact nu agrees with the product-chain solve") {
  Stream rng(99, 0);
  for (int i = 0; i < 40; ++i) {
    const FiniteChain base = random_chain(3 + rng.uniform_index(4), rng, 0.7);
    const NuTable t = nu_exact(base);
    CHECK((t.nu - nu_by_product_solve(base)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("perturbed table is detected") {
  Stream rng(5, 0);
  const FiniteChain base = random_chain(5, rng);
  NuTable t = nu_exact(base);
  t.nu(1, 3) += 1e-3;
  const auto r = verify_invariance(t.nu, base);
  CHECK(r.max_residual >= 1e-4);
  CHECK_FALSE(r.pass);
}

TEST_CASE("r-cycles example") {
  const FiniteChain base = r_cycles_chain({1, 2});
  REQUIRE(base.size() == 4);
  CHECK(base.label(1) == "(1,1)");
  const NuTable t = nu_exact(base);
  const std::vector<double> pi{0.4, 0.2, 0.2, 0.2};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(t.pi[i] - pi[i]) < 1e-14);
  // Values from the independent product-chain solve.
  const Eigen::MatrixXd brute = nu_by_product_solve(base);
  const std::vector<double> nu2{0.4, 0.8, 0.2, 0.6};
  for (std::size_t y = 0; y < 4; ++y) {
    CHECK(std::abs(t.nu2[y] - nu2[y]) < 1e-12);
    CHECK(std::abs(brute.col(static_cast<Eigen::Index>(y)).sum() - nu2[y]) < 1e-10);
  }
  CHECK(std::abs(t.alpha - 2.0) < 1e-12);
  const auto tb = tetali_bound_check(base);
  CHECK(tb.pass);
  CHECK_FALSE(tb.reversible);
  // Larger instance: alpha equals the number of cycles.
  CHECK(std::abs(nu_exact(r_cycles_chain({2, 3, 1})).alpha - 3.0) < 1e-10);
}

TEST_CASE("biased 3-cycle routes agree") {
  Eigen::MatrixXd P(3, 3);
  P << 0, 0.9, 0.1, 0.1, 0, 0.9, 0.9, 0.1, 0;
  const FiniteChain base(P);
  const NuTable t = nu_exact(base);
  const Measure d = nu2_direct(base);
  for (std::size_t y = 0; y < 3; ++y) CHECK(std::abs(d[y] - t.nu2[y]) < 1e-9);
  CHECK(t.alpha < 2.0);
}

TEST_CASE("reversible ring and Tetali equality") {
  const FiniteChain ring = aperiodic_ring6();
  const NuTable t = nu_exact(ring);
  for (double v : t.nu2) CHECK(std::abs(v - 5.0 / 6.0) < 1e-10);
  const auto r = tetali_bound_check(ring);
  CHECK(std::abs(r.alpha - 5.0) < 1e-9);
  CHECK(r.reversible);
  CHECK(r.equality);
  CHECK(r.pass);

  Stream rng(77, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto c = tetali_bound_check(random_chain(3 + rng.uniform_index(6), rng));
    CHECK(c.pass);
  }
}

TEST_CASE("finite limit law") {
  Stream rng(31, 0);
  const FiniteChain rev = random_reversible_chain(5, rng);
  const Measure law = limit_law_finite(rev);
  const Measure pi = stationary(rev);
  double diag = 0.0;
  for (std::size_t y = 0; y < 5; ++y) {
    double my = 0.0;
    for (std::size_t x = 0; x < 5; ++x) my += law[pair_index(x, y, 5)];
    CHECK(std::abs(my - (1.0 - pi[y]) / 4.0) < 1e-10);
    CHECK(std::abs(law[pair_index(y, y, 5)] - pi[y] / 4.0) < 1e-10);
    diag += law[pair_index(y, y, 5)];
  }
  CHECK(std::abs(diag - 0.25) < 1e-10);
  CHECK(limit_law_crosscheck(rev) < 1e-10);

  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(4, 4);
  P(0, 1) = 1.0;
  P(1, 2) = 0.5;
  P(1, 0) = 0.5;
  P(2, 3) = 1.0;
  P(3, 1) = 1.0;
  const FiniteChain four(P);
  const Measure l4 = limit_law_finite(four);
  CHECK(l4[pair_index(0, 3, 4)] < 1e-15);
  CHECK(limit_law_crosscheck(four) < 1e-10);
  CHECK_THROWS_AS(limit_law_finite(four, 3), ChainError);
}
