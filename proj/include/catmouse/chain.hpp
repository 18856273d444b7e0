#pragma once

#include <algorithm>
#include <Eigen/Dense>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "catmouse/errors.hpp"
#include "catmouse/rng.hpp"

namespace catmouse {

inline constexpr double kRowSumTol = 1e-12;

struct ChainOptions {
  bool allow_loops = false;     // nonzero diagonal entries
  bool allow_periodic = false;  // period > 1
};

// Dense row-stochastic kernel on {0, ..., n-1}. Immutable after construction.
class FiniteChain {
 public:
  using state_type = std::size_t;

  explicit FiniteChain(Eigen::MatrixXd P, ChainOptions options = {},
                       std::vector<std::string> labels = {});

  std::size_t size() const { return static_cast<std::size_t>(P_.rows()); }
  const Eigen::MatrixXd& matrix() const { return P_; }
  double p(std::size_t x, std::size_t y) const { return P_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(std::size_t x) const;
  const ChainOptions& options() const { return options_; }

  bool irreducible() const { return irreducible_; }
  bool aperiodic() const { return period_ == 1; }
  std::size_t period() const { return period_; }
  bool loop_free() const { return loop_free_; }

  // States reachable from `from` in zero or more steps.
  std::vector<bool> reachable_from(std::size_t from) const;

  std::size_t step(std::size_t x, Stream& rng) const;

 private:
  Eigen::MatrixXd P_;
  ChainOptions options_;
  std::vector<std::string> labels_;
  std::vector<std::vector<double>> cumulative_;
  bool irreducible_ = false;
  bool loop_free_ = true;
  std::size_t period_ = 0;
};

// Possibly unnormalized nonnegative weights over indexed states.
struct Measure {
  std::vector<double> weights;
  bool normalized = false;

  double total() const;
  std::size_t size() const { return weights.size(); }
  double operator[](std::size_t i) const { return weights[i]; }
};

// Unique probability vector with pi P = pi. Throws ChainError naming the
// states outside the class of state 0 if the chain is reducible.
Measure stationary(const FiniteChain& chain);

// Stationary law of the closed class reached from `start`, zero elsewhere.
Measure stationary_on_class(const FiniteChain& chain, std::size_t start);

double stationary_residual(const FiniteChain& chain, const Measure& pi);

FiniteChain reversed(const FiniteChain& chain, const Measure& pi);

bool is_reversible(const FiniteChain& chain, const Measure& pi, double tol = 1e-11);

// E_x(H_target) for every x, H_target = inf{n > 0 : C_n = target}.
std::vector<double> expected_hitting_times(const FiniteChain& chain, std::size_t target);

// Plain-text matrix: first token n, then n*n probabilities (decimal or a/b).
FiniteChain load_matrix_file(const std::filesystem::path& matrix,
                             const std::filesystem::path& labels = {},
                             ChainOptions options = {});

// Reflected walk on {0..K}: up with p, down with 1-p, holding 1-p at 0 and p at K.
FiniteChain truncated_reflected_walk(double p, std::size_t K);

// ---------------------------------------------------------------------------
// Rule-based kernels on countable lattice domains.

template <class K>
concept DiscreteKernel = requires(const K& k, const typename K::state_type& s, Stream& rng) {
  { k.step(s, rng) } -> std::convertible_to<typename K::state_type>;
};

struct Point2 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const Point2&, const Point2&) = default;
  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
};

template <class S>
using Transitions = std::vector<std::pair<S, double>>;

// Simple random walk on Z.
struct ZLine {
  using state_type = std::int64_t;
  Transitions<state_type> neighbors(state_type x) const { return {{x - 1, 0.5}, {x + 1, 0.5}}; }
  state_type step(state_type x, Stream& rng) const { return (rng.next_u64() >> 63) ? x + 1 : x - 1; }
};

// Simple random walk on Z^2.
struct Z2Plane {
  using state_type = Point2;
  Transitions<state_type> neighbors(state_type s) const;
  state_type step(state_type s, Stream& rng) const;
};

// Reflected walk on N: p up, 1-p down, mass 1-p held at 0.
struct ReflectedWalk {
  using state_type = std::int64_t;
  explicit ReflectedWalk(double up);
  double p;
  std::uint32_t up_threshold;
  Transitions<state_type> neighbors(state_type x) const;
  state_type step(state_type x, Stream& rng) const {
    const state_type d = rng.next_u32() < up_threshold ? 1 : -1;
    return std::max<state_type>(x + d, 0);
  }
};

// M/M/infinity queue: rate rho up, rate x down. Continuous time.
struct MMInf {
  using state_type = std::int64_t;
  explicit MMInf(double arrival_rate);
  double rho;
  Transitions<state_type> rates(state_type x) const;
  double total_rate(state_type x) const { return rho + static_cast<double>(x); }
  // Jump of the embedded chain.
  state_type step(state_type x, Stream& rng) const {
    return rng.uniform() * (rho + static_cast<double>(x)) < rho ? x + 1 : x - 1;
  }
};

// Visit counts at 0..n-1 of a nearest-neighbour chain on N run from x_start
// until it first reaches n. From j the chain steps to j+1 with probability
// up[j], otherwise to j-1 (stays put at 0). Exact: given the up-steps from j,
// the down-steps from j are negative binomial, level by level from the top.
std::vector<std::uint64_t> passage_visits(std::span<const double> up, std::int64_t x_start, std::int64_t n,
                                          Stream& rng);

// Steps of the reflected walk from x_start to its first visit to n.
std::uint64_t reflected_passage_steps(double p, std::int64_t x_start, std::int64_t n, Stream& rng);

template <DiscreteKernel K>
std::vector<typename K::state_type> sample_path(const K& kernel, typename K::state_type start,
                                                std::size_t steps, Stream& rng) {
  std::vector<typename K::state_type> path;
  path.reserve(steps + 1);
  path.push_back(start);
  for (std::size_t i = 0; i < steps; ++i) path.push_back(kernel.step(path.back(), rng));
  return path;
}

}  // namespace catmouse
