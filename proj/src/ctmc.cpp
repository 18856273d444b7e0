#include "catmouse/ctmc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "catmouse/errors.hpp"
#include "catmouse/parallel.hpp"

namespace catmouse::ctmc {

namespace {

constexpr std::uint64_t kTagHitUp = 20;
constexpr std::uint64_t kTagHitDown = 21;
constexpr std::uint64_t kTagF = 22;
constexpr std::uint64_t kTagCascade = 23;
constexpr std::uint64_t kTagPair = 24;
constexpr std::uint64_t kTagCat = 25;
constexpr std::uint64_t kTagOccupation = 26;

void check_rho(double rho) {
  if (!(rho > 0.0 && std::isfinite(rho))) throw ConfigError("M/M/infinity: rho must be positive");
}

Eigen::MatrixXd jump_matrix(const Eigen::MatrixXd& Q) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) throw ChainError("FiniteRateChain: generator must be square");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(Q.rows(), Q.cols());
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    double out = 0.0;
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
      if (i == j) continue;
      if (Q(i, j) < 0.0) throw ChainError("FiniteRateChain: negative off-diagonal rate in row " + std::to_string(i));
      out += Q(i, j);
    }
    if (!(out > 0.0)) throw ChainError("FiniteRateChain: absorbing state " + std::to_string(i));
    if (std::abs(out + Q(i, i)) > 1e-10 * std::max(1.0, out))
      throw ChainError("FiniteRateChain: row " + std::to_string(i) + " does not sum to zero");
    for (Eigen::Index j = 0; j < Q.cols(); ++j)
      if (i != j) P(i, j) = Q(i, j) / out;
  }
  return P;
}

}  // namespace

FiniteRateChain::FiniteRateChain(const Eigen::MatrixXd& Q)
    : jump_(jump_matrix(Q), ChainOptions{false, true}) {
  for (Eigen::Index i = 0; i < Q.rows(); ++i) rate_.push_back(-Q(i, i));
}

double mminf_expected_hitting(double rho, std::int64_t x, std::int64_t n) {
  check_rho(rho);
  if (x < 0 || x >= n) throw ConfigError("mminf_expected_hitting: need 0 <= x < n");
  // E_k T_{k+1} = (1/rho) sum_{j<=k} k!/j! rho^{j-k}.
  double total = 0.0;
  for (std::int64_t k = x; k < n; ++k) {
    double term = 1.0, sum = 0.0;
    for (std::int64_t j = k; j >= 0; --j) {
      sum += term;
      term *= static_cast<double>(j) / rho;
    }
    total += sum / rho;
  }
  return total;
}

double mminf_expected_jumps_up(double rho, std::int64_t x, std::int64_t n) {
  check_rho(rho);
  if (x < 0 || x >= n) throw ConfigError("mminf_expected_jumps_up: need 0 <= x < n");
  // N_k = expected jumps from k to k+1: N_k = (1 + q_k N_{k-1}) / p_k.
  double prev = 0.0, total = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double up = rho / (rho + static_cast<double>(k));
    const double cur = (1.0 + (1.0 - up) * prev) / up;
    if (k >= x) total += cur;
    prev = cur;
  }
  return total;
}

double mminf_expected_down(double rho, std::int64_t n) {
  check_rho(rho);
  if (n < 1) throw ConfigError("mminf_expected_down: need n >= 1");
  // E_k T_{k-1} = (1/k) sum_{j>=k} k!/j! rho^{j-k}.
  double total = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    double term = 1.0, sum = 0.0;
    for (std::int64_t j = k; term > 1e-18 * sum; ++j) {
      sum += term;
      term *= rho / static_cast<double>(j + 1);
    }
    total += sum / static_cast<double>(k);
  }
  return total;
}

std::vector<double> mminf_hitting_up(double rho, std::int64_t x_start, std::int64_t n, std::size_t replicas,
                                     std::uint64_t seed, unsigned workers, double jump_budget) {
  check_rho(rho);
  if (x_start < 0 || x_start >= n) throw ConfigError("mminf_hitting_up: need 0 <= x_start < n");
  const double declared = static_cast<double>(replicas) * mminf_expected_jumps_up(rho, x_start, n);
  if (declared > jump_budget)
    throw BudgetExceeded("mminf_hitting_up: declared " + std::to_string(declared) +
                             " jumps exceeds the cap of " + std::to_string(jump_budget),
                         declared, jump_budget);
  std::vector<double> up(static_cast<std::size_t>(n));
  for (std::int64_t x = 0; x < n; ++x) up[static_cast<std::size_t>(x)] = rho / (rho + static_cast<double>(x));
  std::vector<double> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, kTagHitUp, r);
    const auto visits = passage_visits(up, x_start, n, rng);
    double t = 0.0;
    for (std::int64_t y = 0; y < n; ++y) {
      const auto v = visits[static_cast<std::size_t>(y)];
      if (v > 0) t += rng.gamma(static_cast<double>(v)) / (rho + static_cast<double>(y));
    }
    out[r] = t;
  });
  return out;
}

double mminf_hitting_down_one(double rho, std::int64_t n, Stream& rng) {
  // All n initial customers are gone at the maximum of n Exp(1) services.
  const double tau = -std::log(-std::expm1(std::log(rng.uniform_open()) / static_cast<double>(n)));
  // Later arrivals still present at tau: Poisson, each with a fresh Exp(1) residual.
  const MMInf q(rho);
  auto x = static_cast<std::int64_t>(rng.poisson(rho * -std::expm1(-tau)));
  double t = tau;
  while (x > 0) {
    t += rng.exponential(1.0 / q.total_rate(x));
    x = q.step(x, rng);
  }
  return t;
}

std::vector<double> mminf_hitting_down(double rho, std::int64_t n, std::size_t replicas, std::uint64_t seed,
                                       unsigned workers) {
  check_rho(rho);
  if (n < 1) throw ConfigError("mminf_hitting_down: need n >= 1");
  std::vector<double> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, kTagHitDown, r);
    out[r] = mminf_hitting_down_one(rho, n, rng);
  });
  return out;
}

FSamples mminf_F_sample(double rho, std::int64_t n, std::size_t replicas, std::uint64_t seed, unsigned workers) {
  check_rho(rho);
  if (n < 1) throw ConfigError("mminf_F_sample: need n >= 1");
  const MMInf q(rho);
  FSamples out;
  out.values.resize(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, kTagF, r);
    CatMouseState<std::int64_t> s{n, n, 0.0};
    while (s.cat != 0) s = cm_step(s, q, rng);
    out.values[r] = static_cast<double>(s.mouse) / static_cast<double>(n);
  });
  const double bound = 1.0 + 2.0 / static_cast<double>(n);
  for (double v : out.values) out.above_bound += v > bound;
  return out;
}

std::vector<CascadeRecord> multiplicative_cascade(double rho, std::int64_t n, int rounds, std::size_t replicas,
                                                  std::uint64_t seed, unsigned workers, std::int64_t floor) {
  check_rho(rho);
  if (n < 1 || rounds < 0 || floor < 0) throw ConfigError("multiplicative_cascade: need n >= 1, rounds >= 0, floor >= 0");
  const MMInf q(rho);
  std::vector<CascadeRecord> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, kTagCascade, r);
    CascadeRecord rec;
    rec.levels.push_back(n);
    for (;;) {
      const std::int64_t level = rec.levels.back();
      const auto done = static_cast<std::int64_t>(rec.levels.size()) - 1;
      if (level <= floor) {
        rec.rounds_to_floor = done;
        rec.truncated = done < rounds;
        break;
      }
      CatMouseState<std::int64_t> s{level, level, 0.0};
      do s = cm_step(s, q, rng);
      while (s.cat != 0);
      rec.levels.push_back(s.mouse);
    }
    out[r] = std::move(rec);
  });
  return out;
}

TimeChangeReport time_change_check(double rho, double t_max, std::size_t replicas, std::uint64_t seed,
                                   unsigned workers, std::size_t max_state, std::uint64_t max_jumps) {
  check_rho(rho);
  if (!(t_max > 0.0)) throw ConfigError("time_change_check: t_max must be positive");
  const MMInf q(rho);
  constexpr std::size_t kApartPerReplica = 64;
  struct Local {
    std::vector<StateStats> mouse, cat;
    double u_over_t = 0.0;
    std::vector<double> apart;
    bool partial = false;
  };
  std::vector<Local> locals(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Local& L = locals[r];
    L.mouse.resize(max_state + 1);
    L.cat.resize(max_state + 1);
    Stream rng = replica_stream(seed, kTagPair, r);
    const auto tr = simulate_ct(q, CatMouseState<std::int64_t>{}, t_max, rng, max_jumps);
    L.partial = tr.partial;
    double u_last = 0.0;
    for (std::size_t i = 0; i + 1 < tr.times.size(); ++i) {
      const auto& a = tr.states[i];
      const auto& b = tr.states[i + 1];
      const double d = tr.times[i + 1] - tr.times[i];
      const double du = tr.together[i + 1] - tr.together[i];
      if (du != (a.together() ? d : 0.0) && std::abs(du - (a.together() ? d : 0.0)) > 1e-9 * (1.0 + d))
        throw std::logic_error("time_change_check: U moved outside a together interval");
      if (!a.together() && L.apart.size() < kApartPerReplica) L.apart.push_back(d * q.total_rate(a.cat));
      if (b.mouse != a.mouse) {
        const auto x = static_cast<std::size_t>(a.mouse);
        if (x <= max_state) {
          L.mouse[x].holds.push_back(tr.together[i + 1] - u_last);
          (b.mouse > a.mouse ? L.mouse[x].up : L.mouse[x].down)++;
        }
        u_last = tr.together[i + 1];
      }
    }
    L.u_over_t = tr.U(tr.t_end) / tr.t_end;
    Stream crng = replica_stream(seed, kTagCat, r);
    std::int64_t c = 0;
    double t = 0.0;
    while (true) {
      const double h = crng.exponential(1.0 / q.total_rate(c));
      if (t + h >= t_max) break;
      t += h;
      const std::int64_t next = q.step(c, crng);
      if (static_cast<std::size_t>(c) <= max_state) {
        auto& st = L.cat[static_cast<std::size_t>(c)];
        st.holds.push_back(h);
        (next > c ? st.up : st.down)++;
      }
      c = next;
    }
  });
  TimeChangeReport rep;
  rep.mouse.resize(max_state + 1);
  rep.cat.resize(max_state + 1);
  for (const auto& L : locals) {
    for (std::size_t x = 0; x <= max_state; ++x) {
      rep.mouse[x].holds.insert(rep.mouse[x].holds.end(), L.mouse[x].holds.begin(), L.mouse[x].holds.end());
      rep.mouse[x].up += L.mouse[x].up;
      rep.mouse[x].down += L.mouse[x].down;
      rep.cat[x].holds.insert(rep.cat[x].holds.end(), L.cat[x].holds.begin(), L.cat[x].holds.end());
      rep.cat[x].up += L.cat[x].up;
      rep.cat[x].down += L.cat[x].down;
    }
    rep.u_over_t.push_back(L.u_over_t);
    rep.apart_holds_rate_scaled.insert(rep.apart_holds_rate_scaled.end(), L.apart.begin(), L.apart.end());
    rep.partial += L.partial;
  }
  return rep;
}

PairOccupation pair_occupation(double rho, double t_max, std::size_t replicas, std::uint64_t seed,
                               unsigned workers, std::size_t max_state) {
  check_rho(rho);
  if (!(t_max > 0.0)) throw ConfigError("pair_occupation: t_max must be positive");
  const MMInf q(rho);
  const std::size_t w = max_state + 1;
  PairOccupation occ;
  occ.t_max = t_max;
  occ.max_state = max_state;
  occ.table.assign(replicas, std::vector<double>(w * w, 0.0));
  occ.together_fraction.assign(replicas, 0.0);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, kTagOccupation, r);
    CatMouseState<std::int64_t> s{};
    double together = 0.0;
    while (s.clock < t_max) {
      const auto st = ct_step(s, q, rng);
      const double h = std::min(st.next.clock, t_max) - s.clock;
      if (s.together()) together += h;
      if (static_cast<std::size_t>(s.cat) <= max_state && static_cast<std::size_t>(s.mouse) <= max_state)
        occ.table[r][static_cast<std::size_t>(s.cat) * w + static_cast<std::size_t>(s.mouse)] += h;
      s = st.next;
    }
    occ.together_fraction[r] = together / t_max;
  });
  return occ;
}

std::vector<std::uint64_t> cat_occupation_counts(double rho, std::size_t samples, double spacing,
                                                 std::size_t max_state, Stream& rng) {
  check_rho(rho);
  if (!(spacing > 0.0)) throw ConfigError("cat_occupation_counts: spacing must be positive");
  const MMInf q(rho);
  std::vector<std::uint64_t> counts(max_state + 1, 0);
  std::int64_t c = 0;
  double t = 0.0;
  double next_sample = 20.0 / std::min(1.0, rho) + spacing;
  std::size_t taken = 0;
  while (taken < samples) {
    const double end = t + rng.exponential(1.0 / q.total_rate(c));
    while (taken < samples && next_sample < end) {
      ++counts[std::min(static_cast<std::size_t>(c), max_state)];
      ++taken;
      next_sample += spacing;
    }
    t = end;
    c = q.step(c, rng);
  }
  return counts;
}

}  // namespace catmouse::ctmc
