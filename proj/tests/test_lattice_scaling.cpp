#include <doctest.h>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "catmouse/catmouse.hpp"
#include "catmouse/errors.hpp"
#include "catmouse/lattice.hpp"
#include "catmouse/stats.hpp"

using namespace catmouse;
using namespace catmouse::lattice;

namespace {

// P(T1 = 2k+1) = Catalan(k) / 2^{2k+1}.
double t1_pmf(std::uint64_t k) {
  const double kk = static_cast<double>(k);
  return std::exp(std::lgamma(2 * kk + 1) - std::lgamma(kk + 1) - std::lgamma(kk + 2) -
                  (2 * kk + 1) * std::numbers::ln2);
}

// Full-plane phi on the box |x|_inf <= R by sparse LU, no mirror symmetry.
std::map<std::pair<int, int>, double> full_plane_phi(int R) {
  auto fixed = [](int a, int b) { return std::abs(a) + std::abs(b) == 1; };
  auto fixed_value = [](int a, int b) { return (a == 1 && b == 0) ? 1.0 : 0.0; };
  std::map<std::pair<int, int>, int> id;
  for (int a = -R + 1; a < R; ++a)
    for (int b = -R + 1; b < R; ++b)
      if (!fixed(a, b)) id[{a, b}] = static_cast<int>(id.size());
  const int n = static_cast<int>(id.size());
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& [pt, i] : id) {
    trip.emplace_back(i, i, 1.0);
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int a = pt.first + dx[k], b = pt.second + dy[k];
      if (std::max(std::abs(a), std::abs(b)) >= R)
        rhs[i] += 0.25 * 0.25;
      else if (fixed(a, b))
        rhs[i] += 0.25 * fixed_value(a, b);
      else
        trip.emplace_back(i, id.at({a, b}), -0.25);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  const Eigen::VectorXd x = lu.solve(rhs);
  std::map<std::pair<int, int>, double> out;
  for (const auto& [pt, i] : id) out[pt] = x[i];
  return out;
}

}  // namespace

TEST_CASE("first-passage survival table and tail") {
  const auto& fp = FirstPassage::instance();
  CHECK(fp.survival(0) == 1.0);
  CHECK(fp.survival(1) == doctest::Approx(0.5));
  double s = 1.0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    CHECK(fp.survival(k) == doctest::Approx(s).epsilon(1e-12));
    s -= t1_pmf(k);
  }
  const std::uint64_t edge = std::uint64_t{1} << 16;
  const double a = fp.survival(edge);
  const double direct = std::exp(std::lgamma(2.0 * edge + 1) - 2 * std::lgamma(edge + 1.0) -
                                 2.0 * edge * std::numbers::ln2);
  CHECK(std::abs(a / direct - 1) < 1e-9);
  const double b = fp.survival(edge + 1);
  CHECK(b < a);
  CHECK(std::abs(b / a - (2.0 * edge + 1) / (2.0 * edge + 2)) < 1e-12);
}

TEST_CASE("first-passage samples follow the Catalan law") {
  const auto& fp = FirstPassage::instance();
  Stream rng(11, 0);
  const std::size_t n = 1'000'000;
  const std::size_t cells = 60;
  std::vector<std::uint64_t> counts(cells + 1, 0);
  std::uint64_t beyond = 0;
  const std::uint64_t far = 2'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t t = fp.sample(rng, kNone - 1);
    REQUIRE(t % 2 == 1);
    const std::uint64_t k = (t - 1) / 2;
    ++counts[std::min<std::uint64_t>(k, cells)];
    if (t > far) ++beyond;
  }
  std::vector<double> probs(cells + 1);
  double tail = 1.0;
  for (std::size_t k = 0; k < cells; ++k) {
    probs[k] = t1_pmf(k);
    tail -= probs[k];
  }
  probs[cells] = tail;
  const auto chi = chi_square_gof(counts, probs);
  CHECK(chi.p_value > 1e-3);
  const double p_far = std::exp(std::lgamma(far + 1.0) - 2 * std::lgamma(far / 2.0 + 1) -
                                far * std::numbers::ln2);
  const double se = std::sqrt(p_far * (1 - p_far) / n);
  CHECK(std::abs(static_cast<double>(beyond) / n - p_far) < 3 * se);
}

TEST_CASE("first-passage cap returns the sentinel with the right frequency") {
  const auto& fp = FirstPassage::instance();
  Stream rng(12, 0);
  const std::size_t n = 400'000;
  const std::uint64_t cap = 99;
  std::size_t none = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t t = fp.sample(rng, cap);
    if (t == kNone)
      ++none;
    else
      REQUIRE(t <= cap);
  }
  const double p = fp.survival(50);
  CHECK(std::abs(static_cast<double>(none) / n - p) < 3 * std::sqrt(p * (1 - p) / n));
  CHECK(fp.sample(rng, 0) == kNone);
}

TEST_CASE("exact 1D mouse sampler matches the stepped pair chain") {
  const std::uint64_t n = 1u << 16;
  const std::size_t reps = 5000;
  std::vector<double> pos_a, pos_b, kap_a, kap_b, meet_a, meet_b;
  for (std::size_t r = 0; r < reps; ++r) {
    Stream ra(21, r), rb(22, r);
    const auto a = sample_mouse_1d(n, ra);
    const auto b = brute_force_mouse_1d(n, rb);
    pos_a.push_back(static_cast<double>(a.position));
    pos_b.push_back(static_cast<double>(b.position));
    kap_a.push_back(static_cast<double>(a.kappa));
    kap_b.push_back(static_cast<double>(b.kappa));
    meet_a.push_back(static_cast<double>(a.meetings));
    meet_b.push_back(static_cast<double>(b.meetings));
    REQUIRE(std::abs(a.position) <= static_cast<std::int64_t>(a.kappa));
    REQUIRE((a.position + static_cast<std::int64_t>(a.kappa)) % 2 == 0);
  }
  const double crit = 1.95 * std::sqrt(2.0 / reps);
  CHECK(ks_two_sample(pos_a, pos_b) < crit);
  CHECK(ks_two_sample(kap_a, kap_b) < crit);
  CHECK(ks_two_sample(meet_a, meet_b) < crit);
}

TEST_CASE("mouse increments in 1D are fair") {
  Stream rng(23, 0);
  const ZLine line;
  CatMouseState<std::int64_t> s{};
  std::uint64_t up = 0, moves = 0;
  while (moves < 1'000'000) {
    const auto next = cm_step(s, line, rng);
    if (next.mouse != s.mouse) {
      REQUIRE(std::abs(next.mouse - s.mouse) == 1);
      ++moves;
      if (next.mouse > s.mouse) ++up;
    }
    // Mouse moves happen only while together; rejoin to skip the excursion.
    s = next.together() ? next : CatMouseState<std::int64_t>{next.mouse, next.mouse, 0.0};
  }
  const double z = std::abs(static_cast<double>(up) - 0.5 * moves) / std::sqrt(0.25 * moves);
  CHECK(z < 3.0);
}

TEST_CASE("renewal counts and meeting counter") {
  const auto zero = meeting_counter(10'000, {0.0}, 100, 1);
  for (double v : zero[0]) CHECK(v == 0.0);
  const auto grid = meeting_counter(10'000, {0.25, 0.5, 1.0, 2.0}, 200, 2);
  for (std::size_t r = 0; r < 200; ++r)
    for (std::size_t g = 1; g < 4; ++g) CHECK(grid[g][r] >= grid[g - 1][r]);
  Stream rng(3, 0);
  const auto c = renewal_counts({0, 1, 2, 3}, rng);
  CHECK(c[0] == 0);
  CHECK(c[1] == 0);
  CHECK(meeting_counter(10'000, {1.0}, 64, 9, 1) == meeting_counter(10'000, {1.0}, 64, 9, 4));
  CHECK_THROWS_AS(meeting_counter(10'000, {-1.0}, 4, 1), ConfigError);
}

TEST_CASE("1D scaling sampler is worker-independent and symmetric") {
  const auto a = scaling_1d(1u << 12, 1.0, 256, 5, 1);
  const auto b = scaling_1d(1u << 12, 1.0, 256, 5, 3);
  CHECK(a == b);
  const auto big = scaling_1d(1u << 16, 1.0, 20000, 6, 0);
  CHECK(mean_within_sigma("sym", big, 0.0).pass);
}

TEST_CASE("generating function of T1") {
  CHECK(t1_generating_function(0.5) == doctest::Approx(0.2679491924311227).epsilon(1e-14));
  CHECK(t1_generating_function(1.0 - 1e-12) == doctest::Approx(1.0).epsilon(1e-5));
  Stream rng(31, 0);
  const auto g = hitting_gf_check(0.9, 1'000'000, rng);
  CHECK(g.verdict.pass);
  CHECK(g.se > 0.0);
  Stream rng2(32, 0);
  CHECK(hitting_gf_check(0.5, 200'000, rng2).verdict.pass);
  CHECK_THROWS_AS(hitting_gf_check(1.0, 10, rng2), ConfigError);
}

TEST_CASE("Dirichlet solver on a small box") {
  const auto s = solve_dirichlet(20, 1e-13);
  CHECK(s.phi_at(1, 0) == 1.0);
  CHECK(s.phi_at(-1, 0) == 0.0);
  CHECK(s.phi_at(0, 1) == 0.0);
  CHECK(s.phi_at(0, -1) == 0.0);
  CHECK(s.residual < 1e-13);
  CHECK(harmonic_residual(s) < 1e-13);
  CHECK(std::abs(s.r.sum() - 1.0) < 1e-8);
  for (int a = -20; a <= 20; ++a)
    for (int b = 0; b <= 20; ++b) CHECK(s.phi_at(a, b) == s.phi_at(a, -b));
  for (std::size_t i = 1; i < s.residual_history.size(); ++i)
    CHECK(s.residual_history[i] <= s.residual_history[i - 1]);
  const auto full = full_plane_phi(20);
  double worst = 0.0;
  for (const auto& [pt, v] : full) worst = std::max(worst, std::abs(v - s.phi_at(pt.first, pt.second)));
  CHECK(worst < 1e-10);
  CHECK_THROWS_AS(solve_dirichlet(19), ConfigError);
  CHECK_THROWS_AS(solve_dirichlet(60, 1e-13, 5), SolveError);
}

TEST_CASE("Richardson extrapolation requires doubled radius") {
  const auto a = solve_dirichlet(20), b = solve_dirichlet(40), c = solve_dirichlet(30);
  const auto r = richardson(a, b);
  CHECK(std::abs(r.sum() - 1.0) < 1e-8);
  CHECK_THROWS_AS(richardson(a, c), ConfigError);
}

TEST_CASE("Monte Carlo return kernel matches the solver at the same box") {
  const auto s = solve_dirichlet(20);
  const auto mc = return_kernel_mc(1'000'000, 20, 41, 0);
  CHECK(std::abs(mc.estimate.same - s.r.same) < 3 * mc.se.same);
  CHECK(std::abs(mc.estimate.opposite - s.r.opposite) < 3 * mc.se.opposite);
  CHECK(std::abs(mc.estimate.perp - s.r.perp) < 3 * mc.se.perp);
  CHECK(mc.exits > 0);
}

TEST_CASE("relative chain structure") {
  const auto s = solve_dirichlet(40);
  const auto rc = build_relative_chain(s.r);
  REQUIRE(rc.kernel.size() == 16);
  for (int e = 0; e < 4; ++e) {
    int nonzero = 0;
    for (int j = 0; j < 16; ++j) {
      const double p = rc.kernel.p(5 * e, j);
      if (p != 0.0) {
        ++nonzero;
        CHECK(p == 1.0 / 3.0);
        CHECK(j / 4 == e);
      }
    }
    CHECK(nonzero == 3);
  }
  CHECK(stationary_residual(rc.kernel, rc.mu_R) < 1e-10);
  CHECK(rc.diag_mass > 0.0);
  CHECK(rc.diag_mass < 1.0);
  // Dihedral group generated by the quarter turn and the reflection x <-> -x.
  auto rot = [](Point2 p) { return Point2{-p.y, p.x}; };
  auto ref = [](Point2 p) { return Point2{-p.x, p.y}; };
  for (auto g : {std::function<Point2(Point2)>(rot), std::function<Point2(Point2)>(ref)}) {
    for (int e = 0; e < 4; ++e)
      for (int h = 0; h < 4; ++h) {
        const int ge = unit_index(g(unit_vector(e))), gh = unit_index(g(unit_vector(h)));
        CHECK(rc.mu_R[4 * e + h] == doctest::Approx(rc.mu_R[4 * ge + gh]).epsilon(1e-12));
      }
  }
  // Power iteration oracle for the stationary law.
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(16, 1.0 / 16);
  for (int i = 0; i < 5000; ++i) v = v * rc.kernel.matrix();
  for (int j = 0; j < 16; ++j) CHECK(std::abs(v[j] - rc.mu_R[j]) < 1e-10);
  CHECK(rc.alpha0() == doctest::Approx(std::sqrt(3 * std::numbers::pi) / (4 * std::sqrt(rc.diag_mass))));
  CHECK_THROWS_AS(build_relative_chain(ReturnKernel{0.5, 0.5, 0.5}), ConfigError);
}

TEST_CASE("pair simulation of relative visits matches the chain at the same box") {
  const auto s = solve_dirichlet(20);
  const auto rc = build_relative_chain(s.r);
  const auto mc = relative_visits_mc(200'000, 20, 51, 0);
  CHECK(std::abs(mc.estimate - rc.diag_mass) < 3 * mc.se);
  CHECK(mc.visits > mc.meetings);
}

TEST_CASE("exact 2D mouse sampler matches the stepped pair chain") {
  const std::uint64_t N = 20000;
  const std::size_t reps = 5000;
  std::vector<double> xa, xb, ya, yb, ka, kb;
  for (std::size_t r = 0; r < reps; ++r) {
    Stream ra(61, r), rb(62, r);
    const auto a = sample_mouse_2d(N, ra);
    const auto b = brute_force_mouse_2d(N, rb);
    xa.push_back(static_cast<double>(a.x));
    xb.push_back(static_cast<double>(b.x));
    ya.push_back(static_cast<double>(a.y));
    yb.push_back(static_cast<double>(b.y));
    ka.push_back(static_cast<double>(a.kappa));
    kb.push_back(static_cast<double>(b.kappa));
    REQUIRE(std::abs(a.x) + std::abs(a.y) <= static_cast<std::int64_t>(a.kappa));
  }
  const double crit = 1.95 * std::sqrt(2.0 / reps);
  CHECK(ks_two_sample(xa, xb) < crit);
  CHECK(ks_two_sample(ya, yb) < crit);
  CHECK(ks_two_sample(ka, kb) < crit);
}

TEST_CASE("2D marginal sampler arguments and determinism") {
  CHECK_THROWS_AS(scaling_2d_marginal(50, 1, 4, 1), ConfigError);
  CHECK(scaling_2d_marginal(8, 1, 64, 3, 1) == scaling_2d_marginal(8, 1, 64, 3, 4));
}
