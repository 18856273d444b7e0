#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <vector>

#include "catmouse/catmouse.hpp"
#include "catmouse/chain.hpp"
#include "catmouse/stats.hpp"

namespace catmouse::ctmc {

// A jump chain with state-dependent total rates.
template <class K>
concept RateKernel = DiscreteKernel<K> && requires(const K& k, const typename K::state_type& s) {
  { k.total_rate(s) } -> std::convertible_to<double>;
};

// Continuous-time chain on {0..n-1} from a generator matrix.
class FiniteRateChain {
 public:
  using state_type = std::size_t;
  explicit FiniteRateChain(const Eigen::MatrixXd& Q);
  std::size_t size() const { return jump_.size(); }
  double total_rate(std::size_t x) const { return rate_[x]; }
  const FiniteChain& jump_chain() const { return jump_; }
  std::size_t step(std::size_t x, Stream& rng) const { return jump_.step(x, rng); }

 private:
  std::vector<double> rate_;
  FiniteChain jump_;
};

template <class S>
struct CtStep {
  double hold = 0.0;
  CatMouseState<S> next;
};

// Holds Exp(q_cat), then moves like the discrete pair: the cat alone when
// apart, both independently when together.
template <RateKernel K>
CtStep<typename K::state_type> ct_step(const CatMouseState<typename K::state_type>& s, const K& base,
                                       Stream& rng) {
  const double hold = rng.exponential(1.0 / base.total_rate(s.cat));
  CtStep<typename K::state_type> out{hold, cm_step(s, base, rng)};
  out.next.clock = s.clock + hold;
  return out;
}

// Piecewise-constant trajectory: states[i] holds on [times[i], times[i+1]),
// the last one on [times.back(), t_end). together[i] = U(times[i]).
template <class State>
struct CtmcTrajectory {
  std::vector<double> times;
  std::vector<CatMouseState<State>> states;
  std::vector<double> together;
  double t_end = 0.0;
  bool partial = false;

  double end_of(std::size_t i) const { return i + 1 < times.size() ? times[i + 1] : t_end; }

  // U(t) = integral of 1{C = M} over [0, t].
  double U(double t) const {
    if (t <= 0.0 || times.empty()) return 0.0;
    t = std::min(t, t_end);
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
    return together[i] + (states[i].together() ? t - times[i] : 0.0);
  }

  // Right-continuous inverse S(u) = inf{t : U(t) > u}, capped at t_end.
  double S(double u) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!states[i].together()) continue;
      const double hi = together[i] + (end_of(i) - times[i]);
      if (u < hi) return times[i] + std::max(0.0, u - together[i]);
    }
    return t_end;
  }
};

template <RateKernel K>
CtmcTrajectory<typename K::state_type> simulate_ct(
    const K& base, CatMouseState<typename K::state_type> start, double t_max, Stream& rng,
    std::uint64_t max_jumps = std::numeric_limits<std::uint64_t>::max()) {
  CtmcTrajectory<typename K::state_type> tr;
  tr.t_end = t_max;
  start.clock = 0.0;
  auto s = start;
  double u = 0.0;
  for (std::uint64_t j = 0;; ++j) {
    tr.times.push_back(s.clock);
    tr.states.push_back(s);
    tr.together.push_back(u);
    if (j >= max_jumps) {
      tr.partial = true;
      tr.t_end = std::min(t_max, s.clock);
      break;
    }
    const auto st = ct_step(s, base, rng);
    if (st.next.clock >= t_max) break;
    if (s.together()) u += st.hold;
    s = st.next;
  }
  return tr;
}

// --- M/M/infinity ------------------------------------------------------------

// Exact E_x(T_n), x < n, by the birth-death passage formula.
double mminf_expected_hitting(double rho, std::int64_t x, std::int64_t n);

// Exact expected number of embedded jumps to go from x to n.
double mminf_expected_jumps_up(double rho, std::int64_t x, std::int64_t n);

// Exact E_n(T_0).
double mminf_expected_down(double rho, std::int64_t n);

inline constexpr double kDefaultJumpBudget = 2e11;

// T_n samples from x_start: visit counts of the embedded chain come from
// passage_visits and the time is a sum of Gamma(visits, rate rho + x) holds.
// The budget applies to the declared embedded jumps.
std::vector<double> mminf_hitting_up(double rho, std::int64_t x_start, std::int64_t n,
                                     std::size_t replicas, std::uint64_t seed, unsigned workers = 1,
                                     double jump_budget = kDefaultJumpBudget);

// T_0 from n. Exact: the last of the n initial services ends at the maximum
// of n Exp(1) variables, and the arrivals still present then are Poisson.
double mminf_hitting_down_one(double rho, std::int64_t n, Stream& rng);

std::vector<double> mminf_hitting_down(double rho, std::int64_t n, std::size_t replicas,
                                       std::uint64_t seed, unsigned workers = 1);

struct FSamples {
  std::vector<double> values;  // M(T_0) / n
  std::uint64_t above_bound = 0;  // samples above 1 + 2/n
};

// From C = M = n until the cat hits 0. Only the jump chain is needed.
FSamples mminf_F_sample(double rho, std::int64_t n, std::size_t replicas, std::uint64_t seed,
                        unsigned workers = 1);

struct CascadeRecord {
  std::vector<std::int64_t> levels;  // levels[0] = n, levels[k] after round k
  bool truncated = false;            // floor reached before the last round
  std::int64_t rounds_to_floor = -1;  // first round with level <= floor, -1 if none
};

// Rounds start with the cat meeting the mouse (the ascent leaves the mouse in
// place) and end when the cat is at 0. Runs continue past `rounds` until the
// floor is reached so rounds_to_floor is always set.
std::vector<CascadeRecord> multiplicative_cascade(double rho, std::int64_t n, int rounds,
                                                  std::size_t replicas, std::uint64_t seed,
                                                  unsigned workers = 1, std::int64_t floor = 10);

// --- time change ---------------------------------------------------------------

struct StateStats {
  std::vector<double> holds;
  std::uint64_t up = 0;
  std::uint64_t down = 0;
};

struct TimeChangeReport {
  std::vector<StateStats> mouse;  // M(S(.)) per state 0..max_state
  std::vector<StateStats> cat;    // directly simulated C(.)
  std::vector<double> u_over_t;   // U(t_max) / t_max per replica
  std::vector<double> apart_holds_rate_scaled;  // holds at (x,y), x != y, times (rho + x)
  std::uint64_t partial = 0;
};

TimeChangeReport time_change_check(double rho, double t_max, std::size_t replicas, std::uint64_t seed,
                                   unsigned workers = 1, std::size_t max_state = 2,
                                   std::uint64_t max_jumps = 50'000'000);

struct PairOccupation {
  std::vector<std::vector<double>> table;  // per replica, time at (x, y), x, y <= max_state, row-major
  std::vector<double> together_fraction;  // per replica, time with C = M over t_max
  double t_max = 0.0;
  std::size_t max_state = 0;
};

// Pair run from (0, 0) over [0, t_max].
PairOccupation pair_occupation(double rho, double t_max, std::size_t replicas, std::uint64_t seed,
                               unsigned workers = 1, std::size_t max_state = 3);

// Cat state sampled every `spacing` time units after a burn-in.
std::vector<std::uint64_t> cat_occupation_counts(double rho, std::size_t samples, double spacing,
                                                 std::size_t max_state, Stream& rng);

}  // namespace catmouse::ctmc
