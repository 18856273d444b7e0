#include "catmouse/stationary_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "catmouse/catmouse.hpp"

namespace catmouse {

using Eigen::Index;

namespace {

void require_base(const FiniteChain& base, const char* who) {
  if (!base.irreducible()) throw ChainError(std::string(who) + ": base chain is reducible");
  if (!base.aperiodic()) throw ChainError(std::string(who) + ": base chain is periodic");
}

}  // namespace

NuTable nu_exact(const FiniteChain& base) {
  require_base(base, "nu_exact");
  const std::size_t n = base.size();
  const auto N = static_cast<Index>(n);
  NuTable t;
  t.pi = stationary(base);
  const FiniteChain rev = reversed(base, t.pi);
  const Eigen::MatrixXd& Ps = rev.matrix();
  const Eigen::MatrixXd& P = base.matrix();
  t.nu = Eigen::MatrixXd::Zero(N, N);
  t.h.assign(n, 0.0);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  for (Index y = 0; y < N; ++y) {
    // g(x) = sum_z p*(x,z) p(z,y) + sum_{z != y} p*(x,z) g(z)
    Eigen::MatrixXd A = I - Ps;
    A.col(y) = I.col(y);
    const Eigen::VectorXd b = Ps * P.col(y);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rc = lu.rcond();
    if (!(rc > 1e-13))
      throw SolveError("nu_exact: ill-conditioned solve for target " + std::to_string(y) +
                           ", rcond estimate " + std::to_string(rc),
                       rc);
    Eigen::VectorXd g = lu.solve(b);
    g += lu.solve(b - A * g);
    for (Index x = 0; x < N; ++x) {
      t.nu(x, y) = t.pi[static_cast<std::size_t>(x)] * g(x);
      t.h[static_cast<std::size_t>(x)] += g(x);
    }
  }
  t.nu2.assign(n, 0.0);
  for (Index y = 0; y < N; ++y) t.nu2[static_cast<std::size_t>(y)] = t.nu.col(y).sum();
  t.alpha = 0.0;
  for (double v : t.nu2) t.alpha += v;
  return t;
}

Measure nu2_direct(const FiniteChain& base) {
  require_base(base, "nu2_direct");
  const std::size_t n = base.size();
  const Measure pi = stationary(base);
  Measure out{std::vector<double>(n, 0.0), false};
  for (std::size_t y = 0; y < n; ++y) {
    const auto h = expected_hitting_times(base, y);
    double s = 0.0;
    for (std::size_t x = 0; x < n; ++x) s += pi[x] * base.p(x, y) * h[x];
    out.weights[y] = s;
  }
  return out;
}

NuTableCheck check_nu_table(const NuTable& t) {
  NuTableCheck c;
  const Index n = t.nu.rows();
  for (Index x = 0; x < n; ++x) {
    const auto xs = static_cast<std::size_t>(x);
    c.diagonal_error = std::max(c.diagonal_error, std::abs(t.nu(x, x) - t.pi[xs]));
    c.row_sum_error = std::max(c.row_sum_error, std::abs(t.nu.row(x).sum() - t.alpha * t.pi[xs]));
  }
  double s = 0.0;
  for (double v : t.nu2) s += v;
  c.alpha_error = std::abs(s - t.alpha);
  if (!t.h.empty()) {
    const auto [lo, hi] = std::minmax_element(t.h.begin(), t.h.end());
    c.h_spread = *hi - *lo;
  }
  return c;
}

ResidualReport verify_invariance(const Eigen::MatrixXd& nu, const FiniteChain& base, std::size_t limit,
                                 double tol) {
  const std::size_t n = base.size();
  if (static_cast<std::size_t>(nu.rows()) != n || static_cast<std::size_t>(nu.cols()) != n)
    throw ChainError("verify_invariance: table size does not match base chain");
  const std::size_t top = std::min(limit, n - 1);
  ResidualReport r;
  r.tolerance = tol;
  for (std::size_t x = 0; x <= top; ++x) {
    for (std::size_t y = 0; y <= top; ++y) {
      double rhs = 0.0;
      for (std::size_t z = 0; z < n; ++z) {
        const double pzx = base.p(z, x);
        if (pzx == 0.0) continue;
        if (z != y) rhs += nu(static_cast<Index>(z), static_cast<Index>(y)) * pzx;
        rhs += nu(static_cast<Index>(z), static_cast<Index>(z)) * pzx * base.p(z, y);
      }
      const double res = std::abs(nu(static_cast<Index>(x), static_cast<Index>(y)) - rhs);
      if (res > r.max_residual) {
        r.max_residual = res;
        r.at_x = x;
        r.at_y = y;
      }
    }
  }
  r.pass = r.max_residual < tol;
  return r;
}

TetaliReport tetali_bound_check(const FiniteChain& base) {
  const NuTable t = nu_exact(base);
  TetaliReport r;
  r.alpha = t.alpha;
  r.bound = static_cast<double>(base.size()) - 1.0;
  r.pass = r.alpha <= r.bound + 1e-9;
  r.reversible = is_reversible(base, t.pi);
  r.equality = std::abs(r.alpha - r.bound) <= 1e-9;
  return r;
}

Measure limit_law_finite(const FiniteChain& base, std::size_t cap) {
  if (base.size() > cap)
    throw ChainError("limit_law_finite: base has more states than the product cap " + std::to_string(cap));
  const NuTable t = nu_exact(base);
  const std::size_t n = base.size();
  Measure m{std::vector<double>(n * n), true};
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      m.weights[pair_index(x, y, n)] = t.nu(static_cast<Index>(x), static_cast<Index>(y)) / t.alpha;
  return m;
}

double limit_law_crosscheck(const FiniteChain& base, std::size_t cap) {
  const Measure law = limit_law_finite(base, cap);
  const Measure direct = stationary_on_class(cm_kernel(base, cap), pair_index(0, 0, base.size()));
  double d = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) d = std::max(d, std::abs(law[i] - direct[i]));
  return d;
}

FiniteChain random_chain(std::size_t n, Stream& rng, double density) {
  const auto N = static_cast<Index>(n);
  for (;;) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N);
    bool empty_row = false;
    for (Index x = 0; x < N; ++x) {
      for (Index y = 0; y < N; ++y) P(x, y) = rng.exponential();
      P(x, x) = 0.0;
      for (Index y = 0; y < N; ++y)
        if (y != x && density < 1.0 && !rng.bernoulli(density)) P(x, y) = 0.0;
      const double s = P.row(x).sum();
      if (s <= 0.0) {
        empty_row = true;
        break;
      }
      P.row(x) /= s;
    }
    if (empty_row) continue;
    try {
      FiniteChain c(std::move(P));
      if (c.irreducible()) return c;
    } catch (const ChainError&) {
      // periodic draw, try again
    }
  }
}

FiniteChain random_reversible_chain(std::size_t n, Stream& rng, double density) {
  const auto N = static_cast<Index>(n);
  for (;;) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N, N);
    for (Index x = 0; x < N; ++x)
      for (Index y = x + 1; y < N; ++y) {
        const double w = rng.exponential();
        const bool keep = density >= 1.0 || rng.bernoulli(density);
        W(x, y) = W(y, x) = keep ? w : 0.0;
      }
    bool empty_row = false;
    for (Index x = 0; x < N; ++x) {
      const double s = W.row(x).sum();
      if (s <= 0.0) {
        empty_row = true;
        break;
      }
      W.row(x) /= s;
    }
    if (empty_row) continue;
    try {
      FiniteChain c(std::move(W));
      if (c.irreducible()) return c;
    } catch (const ChainError&) {
    }
  }
}

FiniteChain r_cycles_chain(const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) throw ChainError("r_cycles_chain: need at least one cycle");
  std::size_t n = 1;
  for (auto m : sizes) {
    if (m == 0) throw ChainError("r_cycles_chain: cycle sizes must be positive");
    n += m;
  }
  const double r = static_cast<double>(sizes.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(n));
  std::vector<std::string> labels{"0"};
  Index offset = 1;  // index of (k,1)
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto m = static_cast<Index>(sizes[k]);
    for (Index i = 1; i <= m; ++i) labels.push_back("(" + std::to_string(k + 1) + "," + std::to_string(i) + ")");
    P(0, offset + m - 1) += 1.0 / r;
    P(offset, 0) = 1.0;
    for (Index i = 1; i < m; ++i) P(offset + i, offset + i - 1) = 1.0;
    offset += m;
  }
  return FiniteChain(std::move(P), {}, std::move(labels));
}

}  // namespace catmouse
