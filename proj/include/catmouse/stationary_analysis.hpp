#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <vector>

#include "catmouse/chain.hpp"

namespace catmouse {

// Invariant measure of the pair chain for a finite base.
struct NuTable {
  Eigen::MatrixXd nu;      // nu(x, y): cat at x, mouse at y
  std::vector<double> nu2; // mouse marginal
  double alpha = 0.0;      // total mass
  Measure pi;              // base stationary law
  std::vector<double> h;   // h(x) = sum_y g_y(x), constant equal to alpha
};

NuTable nu_exact(const FiniteChain& base);

// sum_x pi(x) p(x,y) E_x(H_y), through the hitting-time solve.
Measure nu2_direct(const FiniteChain& base);

struct NuTableCheck {
  double diagonal_error = 0.0;   // max |nu(x,x) - pi(x)|
  double row_sum_error = 0.0;    // max |sum_y nu(x,y) - alpha pi(x)|
  double alpha_error = 0.0;      // |alpha - sum nu2|
  double h_spread = 0.0;         // max h - min h
};

NuTableCheck check_nu_table(const NuTable& t);

struct ResidualReport {
  double max_residual = 0.0;
  std::size_t at_x = 0;
  std::size_t at_y = 0;
  double tolerance = 1e-9;
  bool pass = false;
};

// Balance residual of nu under the pair kernel, over x, y <= limit.
ResidualReport verify_invariance(const Eigen::MatrixXd& nu, const FiniteChain& base,
                                 std::size_t limit = std::numeric_limits<std::size_t>::max(),
                                 double tol = 1e-9);

struct TetaliReport {
  double alpha = 0.0;
  double bound = 0.0;  // N - 1
  bool pass = false;
  bool reversible = false;
  bool equality = false;
};

TetaliReport tetali_bound_check(const FiniteChain& base);

// nu / alpha on the product space, indexed by pair_index.
Measure limit_law_finite(const FiniteChain& base, std::size_t cap = 64);

// max |limit_law_finite - stationary of the pair kernel on the class of (0,0)|.
double limit_law_crosscheck(const FiniteChain& base, std::size_t cap = 64);

// Rows drawn uniform on the simplex, diagonal zeroed and renormalized; each
// off-diagonal entry is kept with probability `density`. Rejection sampled
// until irreducible and aperiodic.
FiniteChain random_chain(std::size_t n, Stream& rng, double density = 1.0);

// Random walk on a random symmetric weighted graph without loops.
FiniteChain random_reversible_chain(std::size_t n, Stream& rng, double density = 1.0);

// r cycles of sizes m_k glued at state 0. State 0 first, then cycle k states
// (k,1..m_k); 0 -> (k,m_k) with probability 1/r, (k,i) -> (k,i-1), (k,1) -> 0.
FiniteChain r_cycles_chain(const std::vector<std::size_t>& sizes);

}  // namespace catmouse
