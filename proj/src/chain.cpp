#include "catmouse/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

namespace catmouse {

namespace {

using Eigen::Index;

std::vector<bool> bfs(const Eigen::MatrixXd& P, std::size_t from, bool backwards) {
  const auto n = static_cast<std::size_t>(P.rows());
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = backwards ? P(static_cast<Index>(v), static_cast<Index>(u))
                                 : P(static_cast<Index>(u), static_cast<Index>(v));
      if (w > 0.0 && !seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

// gcd of cycle lengths through state 0 via BFS levels.
std::size_t period_through_zero(const Eigen::MatrixXd& P) {
  const auto n = static_cast<std::size_t>(P.rows());
  std::vector<long> level(n, -1);
  std::deque<std::size_t> queue{0};
  level[0] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      if (P(static_cast<Index>(u), static_cast<Index>(v)) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
    }
  }
  long g = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (level[u] < 0) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (level[v] < 0 || P(static_cast<Index>(u), static_cast<Index>(v)) <= 0.0) continue;
      g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    }
  }
  return static_cast<std::size_t>(g);
}

std::string list_states(const std::vector<std::size_t>& states) {
  std::ostringstream os;
  for (std::size_t i = 0; i < states.size(); ++i) os << (i ? ", " : "") << states[i];
  return os.str();
}

Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& P) {
  const Index n = P.rows();
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) throw SolveError("stationary: singular balance system", rc);
  Eigen::VectorXd pi = lu.solve(b);
  pi += lu.solve(b - A * pi);  // one refinement step
  for (Index i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
  pi /= pi.sum();
  return pi;
}

}  // namespace

FiniteChain::FiniteChain(Eigen::MatrixXd P, ChainOptions options, std::vector<std::string> labels)
    : P_(std::move(P)), options_(options), labels_(std::move(labels)) {
  if (P_.rows() == 0 || P_.rows() != P_.cols())
    throw ChainError("FiniteChain: matrix must be square and non-empty");
  if (!labels_.empty() && labels_.size() != size())
    throw ChainError("FiniteChain: label count does not match state count");
  const std::size_t n = size();
  std::vector<std::size_t> bad;
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    bool ok = true;
    for (std::size_t y = 0; y < n; ++y) {
      const double v = p(x, y);
      if (!std::isfinite(v) || v < 0.0) ok = false;
      s += v;
    }
    if (!ok || std::abs(s - 1.0) > kRowSumTol) bad.push_back(x);
  }
  if (!bad.empty())
    throw ChainError("FiniteChain: rows not stochastic within 1e-12: " + list_states(bad), bad);
  for (std::size_t x = 0; x < n; ++x)
    if (p(x, x) != 0.0) bad.push_back(x);
  loop_free_ = bad.empty();
  if (!loop_free_ && !options_.allow_loops)
    throw ChainError("FiniteChain: nonzero diagonal at states " + list_states(bad), bad);

  const auto fwd = bfs(P_, 0, false);
  const auto bwd = bfs(P_, 0, true);
  irreducible_ = std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
                 std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
  period_ = period_through_zero(P_);
  if (period_ > 1 && !options_.allow_periodic)
    throw ChainError("FiniteChain: periodic chain (period " + std::to_string(period_) + ")");

  cumulative_.assign(n, std::vector<double>(n));
  for (std::size_t x = 0; x < n; ++x) {
    double c = 0.0;
    for (std::size_t y = 0; y < n; ++y) cumulative_[x][y] = (c += p(x, y));
    cumulative_[x][n - 1] = INFINITY;
  }
}

std::string FiniteChain::label(std::size_t x) const {
  return labels_.empty() ? std::to_string(x) : labels_[x];
}

std::vector<bool> FiniteChain::reachable_from(std::size_t from) const { return bfs(P_, from, false); }

std::size_t FiniteChain::step(std::size_t x, Stream& rng) const {
  const auto& row = cumulative_[x];
  const double u = rng.uniform();
  auto it = std::upper_bound(row.begin(), row.end(), u);
  std::size_t y = static_cast<std::size_t>(it - row.begin());
  while (p(x, y) == 0.0) ++y;  // skip zero-width cells hit by ties
  return y;
}

double Measure::total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

Measure stationary(const FiniteChain& chain) {
  if (!chain.irreducible()) {
    const auto fwd = bfs(chain.matrix(), 0, false);
    const auto bwd = bfs(chain.matrix(), 0, true);
    std::vector<std::size_t> off;
    for (std::size_t x = 0; x < chain.size(); ++x)
      if (!fwd[x] || !bwd[x]) off.push_back(x);
    throw ChainError("stationary: reducible chain; states outside the class of state 0: " +
                         list_states(off),
                     off);
  }
  const Eigen::VectorXd pi = solve_stationary(chain.matrix());
  Measure m{std::vector<double>(pi.data(), pi.data() + pi.size()), true};
  const double res = stationary_residual(chain, m);
  if (res > 1e-12) throw SolveError("stationary: residual " + std::to_string(res) + " above 1e-12", res);
  return m;
}

Measure stationary_on_class(const FiniteChain& chain, std::size_t start) {
  const auto fwd = chain.reachable_from(start);
  std::vector<std::size_t> idx;
  for (std::size_t x = 0; x < chain.size(); ++x)
    if (fwd[x]) idx.push_back(x);
  const auto m = static_cast<Index>(idx.size());
  Eigen::MatrixXd sub(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) sub(i, j) = chain.p(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  for (Index i = 0; i < m; ++i)
    if (std::abs(sub.row(i).sum() - 1.0) > kRowSumTol)
      throw ChainError("stationary_on_class: class reached from state is not closed", {idx[static_cast<std::size_t>(i)]});
  // Irreducibility of the reached set: every state must lead back to start.
  const std::size_t start_pos = static_cast<std::size_t>(std::find(idx.begin(), idx.end(), start) - idx.begin());
  const auto back_from_start = bfs(sub, start_pos, true);
  std::vector<std::size_t> transient;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (!back_from_start[i]) transient.push_back(idx[i]);
  if (!transient.empty())
    throw ChainError("stationary_on_class: start state is transient", transient);
  const Eigen::VectorXd pi = solve_stationary(sub);
  Measure out{std::vector<double>(chain.size(), 0.0), true};
  for (std::size_t i = 0; i < idx.size(); ++i) out.weights[idx[i]] = pi(static_cast<Index>(i));
  return out;
}

double stationary_residual(const FiniteChain& chain, const Measure& pi) {
  const auto n = static_cast<Index>(chain.size());
  Eigen::Map<const Eigen::RowVectorXd> v(pi.weights.data(), n);
  return (v * chain.matrix() - v).cwiseAbs().maxCoeff();
}

FiniteChain reversed(const FiniteChain& chain, const Measure& pi) {
  const std::size_t n = chain.size();
  if (pi.size() != n) throw ChainError("reversed: measure size mismatch");
  std::vector<std::size_t> zero;
  for (std::size_t x = 0; x < n; ++x)
    if (!(pi[x] > 0.0)) zero.push_back(x);
  if (!zero.empty()) throw ChainError("reversed: zero-mass states " + list_states(zero), zero);
  Eigen::MatrixXd R(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      R(static_cast<Index>(x), static_cast<Index>(y)) = pi[y] * chain.p(y, x) / pi[x];
  // Rounding can leave rows a few ulps off; renormalize so the result is exactly stochastic.
  for (Index x = 0; x < R.rows(); ++x) R.row(x) /= R.row(x).sum();
  return FiniteChain(std::move(R), chain.options(), chain.labels());
}

bool is_reversible(const FiniteChain& chain, const Measure& pi, double tol) {
  for (std::size_t x = 0; x < chain.size(); ++x)
    for (std::size_t y = x + 1; y < chain.size(); ++y)
      if (std::abs(pi[x] * chain.p(x, y) - pi[y] * chain.p(y, x)) > tol) return false;
  return true;
}

std::vector<double> expected_hitting_times(const FiniteChain& chain, std::size_t target) {
  const std::size_t n = chain.size();
  if (target >= n) throw ChainError("expected_hitting_times: target out of range", {target});
  if (!chain.irreducible()) throw ChainError("expected_hitting_times: chain is reducible");
  std::vector<double> h(n, 0.0);
  if (n > 1) {
    const auto m = static_cast<Index>(n - 1);
    auto idx = [&](Index i) { return static_cast<std::size_t>(i) < target ? static_cast<std::size_t>(i) : static_cast<std::size_t>(i) + 1; };
    Eigen::MatrixXd A(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) A(i, j) = (i == j ? 1.0 : 0.0) - chain.p(idx(i), idx(j));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rc = lu.rcond();
    if (!(rc > 1e-14))
      throw SolveError("expected_hitting_times: singular system, rcond estimate " + std::to_string(rc), rc);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd sol = lu.solve(ones);
    sol += lu.solve(ones - A * sol);
    for (Index i = 0; i < m; ++i) h[idx(i)] = sol(i);
  }
  double ret = 1.0;
  for (std::size_t z = 0; z < n; ++z)
    if (z != target) ret += chain.p(target, z) * h[z];
  h[target] = ret;
  return h;
}

namespace {

double parse_probability(const std::string& tok, const std::string& where) {
  auto parse_num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (...) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ChainError(where + ": cannot parse '" + tok + "'");
    return v;
  };
  const auto slash = tok.find('/');
  if (slash == std::string::npos) return parse_num(tok);
  const double den = parse_num(tok.substr(slash + 1));
  if (den == 0.0) throw ChainError(where + ": zero denominator in '" + tok + "'");
  return parse_num(tok.substr(0, slash)) / den;
}

}  // namespace

FiniteChain load_matrix_file(const std::filesystem::path& matrix, const std::filesystem::path& labels,
                             ChainOptions options) {
  std::ifstream in(matrix);
  if (!in) throw ChainError("cannot open matrix file " + matrix.string());
  std::string line;
  std::size_t line_no = 0;
  long n = -1;
  std::vector<double> values;
  std::vector<std::size_t> value_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      const std::string where = matrix.string() + ":" + std::to_string(line_no);
      if (n < 0) {
        std::size_t used = 0;
        try {
          n = std::stol(tok, &used);
        } catch (...) {
          used = 0;
        }
        if (used != tok.size() || n <= 0) throw ChainError(where + ": expected a positive state count, got '" + tok + "'");
        continue;
      }
      values.push_back(parse_probability(tok, where));
      value_lines.push_back(line_no);
    }
  }
  if (n < 0) throw ChainError(matrix.string() + ": empty matrix file");
  const auto N = static_cast<std::size_t>(n);
  if (values.size() != N * N)
    throw ChainError(matrix.string() + ": expected " + std::to_string(N * N) + " probabilities, found " +
                     std::to_string(values.size()));
  Eigen::MatrixXd P(n, n);
  for (std::size_t i = 0; i < N * N; ++i) {
    if (values[i] < 0.0)
      throw ChainError(matrix.string() + ":" + std::to_string(value_lines[i]) + ": negative probability");
    P(static_cast<Index>(i / N), static_cast<Index>(i % N)) = values[i];
  }
  std::vector<std::string> names;
  if (!labels.empty()) {
    std::ifstream lf(labels);
    if (!lf) throw ChainError("cannot open label file " + labels.string());
    std::string tok;
    while (lf >> tok) names.push_back(tok);
  }
  return FiniteChain(std::move(P), options, std::move(names));
}

std::vector<std::uint64_t> passage_visits(std::span<const double> up, std::int64_t x_start, std::int64_t n,
                                          Stream& rng) {
  if (x_start < 0 || x_start >= n || static_cast<std::int64_t>(up.size()) < n)
    throw ChainError("passage_visits: need 0 <= x_start < n <= up.size()");
  for (std::int64_t j = 0; j < n; ++j)
    if (!(up[static_cast<std::size_t>(j)] > 0.0 && up[static_cast<std::size_t>(j)] <= 1.0))
      throw ChainError("passage_visits: up probabilities must lie in (0, 1]");
  std::vector<std::uint64_t> visits(static_cast<std::size_t>(n), 0);
  std::uint64_t ups = 1;  // up-steps from level j
  for (std::int64_t j = n - 1; j >= 0 && ups > 0; --j) {
    const auto downs = rng.negative_binomial_failures(ups, up[static_cast<std::size_t>(j)]);
    visits[static_cast<std::size_t>(j)] = ups + downs;
    if (j == 0) break;
    // Down-steps from j are matched by up-steps from j-1, plus the first
    // crossing when the start lies below j.
    ups = downs + (j - 1 >= x_start ? 1 : 0);
  }
  return visits;
}

std::uint64_t reflected_passage_steps(double p, std::int64_t x_start, std::int64_t n, Stream& rng) {
  const std::vector<double> up(static_cast<std::size_t>(std::max<std::int64_t>(n, 1)), p);
  std::uint64_t total = 0;
  for (auto v : passage_visits(up, x_start, n, rng)) total += v;
  return total;
}

FiniteChain truncated_reflected_walk(double p, std::size_t K) {
  if (!(p > 0.0 && p < 1.0) || K < 1) throw ChainError("truncated_reflected_walk: need 0<p<1, K>=1");
  const auto n = static_cast<Index>(K + 1);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Index x = 0; x < n; ++x) {
    if (x + 1 < n) P(x, x + 1) = p; else P(x, x) += p;
    if (x > 0) P(x, x - 1) = 1.0 - p; else P(x, x) += 1.0 - p;
  }
  return FiniteChain(std::move(P), ChainOptions{.allow_loops = true});
}

Transitions<Point2> Z2Plane::neighbors(Point2 s) const {
  return {{{s.x + 1, s.y}, 0.25}, {{s.x - 1, s.y}, 0.25}, {{s.x, s.y + 1}, 0.25}, {{s.x, s.y - 1}, 0.25}};
}

Point2 Z2Plane::step(Point2 s, Stream& rng) const {
  switch (rng.next_u64() >> 62) {
    case 0: return {s.x + 1, s.y};
    case 1: return {s.x - 1, s.y};
    case 2: return {s.x, s.y + 1};
    default: return {s.x, s.y - 1};
  }
}

ReflectedWalk::ReflectedWalk(double up) : p(up), up_threshold(u32_threshold(up)) {
  if (!(up > 0.0 && up < 0.5)) throw ChainError("ReflectedWalk: need 0 < p < 1/2");
}

Transitions<std::int64_t> ReflectedWalk::neighbors(std::int64_t x) const {
  if (x == 0) return {{1, p}, {0, 1.0 - p}};
  return {{x + 1, p}, {x - 1, 1.0 - p}};
}

MMInf::MMInf(double arrival_rate) : rho(arrival_rate) {
  if (!(arrival_rate > 0.0)) throw ChainError("MMInf: need rho > 0");
}

Transitions<std::int64_t> MMInf::rates(std::int64_t x) const {
  if (x == 0) return {{1, rho}};
  return {{x + 1, rho}, {x - 1, static_cast<double>(x)}};
}

}  // namespace catmouse
