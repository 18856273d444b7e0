#include "catmouse/lattice.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "catmouse/catmouse.hpp"
#include "catmouse/errors.hpp"
#include "catmouse/parallel.hpp"

namespace catmouse::lattice {

namespace {

// Two random bits per plane step, 32 steps per 64-bit word.
class PlaneSteps {
 public:
  explicit PlaneSteps(Stream& rng) : rng_(rng) {}
  unsigned next() {
    if (left_ == 0) {
      word_ = rng_.next_u64();
      left_ = 32;
    }
    const unsigned d = static_cast<unsigned>(word_ & 3u);
    word_ >>= 2;
    --left_;
    return d;
  }

 private:
  Stream& rng_;
  std::uint64_t word_ = 0;
  int left_ = 0;
};

constexpr std::array<Point2, 4> kUnits{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

inline Point2 move(Point2 p, unsigned d) { return p + kUnits[d]; }

inline std::int64_t linf(Point2 p) { return std::max(std::abs(p.x), std::abs(p.y)); }

inline bool is_unit(Point2 p) { return std::abs(p.x) + std::abs(p.y) == 1; }

inline std::int64_t signed_fair_walk(std::uint64_t steps, Stream& rng) {
  return 2 * static_cast<std::int64_t>(rng.fair_binomial(steps)) - static_cast<std::int64_t>(steps);
}

}  // namespace

FirstPassage::FirstPassage() : table_(kTable + 1) {
  table_[0] = 1.0;
  for (std::uint64_t k = 1; k <= kTable; ++k)
    table_[k] = table_[k - 1] * static_cast<double>(2 * k - 1) / static_cast<double>(2 * k);
}

const FirstPassage& FirstPassage::instance() {
  static const FirstPassage fp;
  return fp;
}

double FirstPassage::survival(std::uint64_t k) const {
  if (k <= kTable) return table_[k];
  const double x = static_cast<double>(k);
  return std::exp(-0.5 * std::log(std::numbers::pi * x) - 1.0 / (8.0 * x) + 1.0 / (192.0 * x * x * x));
}

std::uint64_t FirstPassage::sample(Stream& rng, std::uint64_t cap) const {
  if (cap == 0) return kNone;
  const double u = rng.uniform_open();
  const std::uint64_t kc = (cap - 1) / 2 + 1;
  if (u < survival(kc)) return kNone;
  std::uint64_t k;
  if (kc <= kTable || u >= table_[kTable]) {
    const auto end = table_.begin() + static_cast<std::ptrdiff_t>(std::min(kc, kTable + 1));
    const auto it = std::partition_point(table_.begin(), end, [u](double s) { return s > u; });
    k = static_cast<std::uint64_t>(it - table_.begin()) - 1;
  } else {
    std::uint64_t lo = kTable;
    std::uint64_t hi = kc;
    const double guess = std::ceil(1.0 / (std::numbers::pi * u * u)) + 1.0;
    if (guess < static_cast<double>(hi)) hi = std::max(lo + 1, static_cast<std::uint64_t>(guess));
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (u < survival(mid))
        lo = mid;
      else
        hi = mid;
    }
    k = lo;
  }
  return 2 * k + 1;
}

std::uint64_t FirstPassage::sample_t2(Stream& rng, std::uint64_t cap) const {
  const std::uint64_t a = sample(rng, cap);
  if (a == kNone) return kNone;
  const std::uint64_t b = sample(rng, cap - a);
  return b == kNone ? kNone : a + b;
}

Mouse1D sample_mouse_1d(std::uint64_t n, Stream& rng) {
  const auto& fp = FirstPassage::instance();
  Mouse1D m;
  std::uint64_t time = 0;
  std::uint64_t completed_g = 0;  // G over the nu_n completed cycles
  std::uint64_t next_g = 0;       // G of cycle nu_n + 1
  for (;;) {
    const std::uint64_t g = 1 + rng.geometric_failures(0.5);
    next_g = g;
    if (g >= n - time) {
      m.kappa += n - time;
      break;
    }
    m.kappa += g;
    time += g;
    const std::uint64_t apart = fp.sample_t2(rng, n - time);
    if (apart == kNone) break;
    time += apart;
    completed_g += g;
    ++m.meetings;
  }
  if (m.kappa < completed_g || m.kappa > completed_g + next_g)
    throw std::logic_error("sample_mouse_1d: kappa outside its cycle bounds");
  m.position = signed_fair_walk(m.kappa, rng);
  return m;
}

Mouse1D brute_force_mouse_1d(std::uint64_t n, Stream& rng) {
  const ZLine line;
  CatMouseState<std::int64_t> s{};
  Mouse1D m;
  bool was_together = true;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (s.together()) ++m.kappa;
    s = cm_step(s, line, rng);
    if (s.together() && !was_together) ++m.meetings;
    was_together = s.together();
  }
  m.position = s.mouse;
  return m;
}

std::vector<std::uint64_t> renewal_counts(const std::vector<std::uint64_t>& times, Stream& rng) {
  const auto& fp = FirstPassage::instance();
  std::vector<std::uint64_t> out(times.size(), 0);
  if (times.empty()) return out;
  const std::uint64_t horizon = *std::max_element(times.begin(), times.end());
  std::vector<std::uint64_t> renewals;
  std::uint64_t s = 0;
  while (s + 2 <= horizon) {
    const std::uint64_t t2 = fp.sample_t2(rng, horizon - s - 2);
    if (t2 == kNone) break;
    s += 2 + t2;
    renewals.push_back(s);
  }
  for (std::size_t g = 0; g < times.size(); ++g)
    out[g] = static_cast<std::uint64_t>(std::upper_bound(renewals.begin(), renewals.end(), times[g]) -
                                        renewals.begin());
  return out;
}

std::vector<std::vector<double>> meeting_counter(std::uint64_t n, const std::vector<double>& t_grid,
                                                 std::size_t replicas, std::uint64_t seed,
                                                 unsigned workers) {
  if (n == 0) throw ConfigError("meeting_counter: n must be positive");
  std::vector<std::uint64_t> times;
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw ConfigError("meeting_counter: times must be nonnegative");
    times.push_back(static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * t)));
  }
  std::vector<std::vector<double>> out(t_grid.size(), std::vector<double>(replicas));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, 1, r);
    const auto counts = renewal_counts(times, rng);
    for (std::size_t g = 0; g < times.size(); ++g) out[g][r] = static_cast<double>(counts[g]) * scale;
  });
  return out;
}

std::vector<double> scaling_1d(std::uint64_t n, double t, std::size_t replicas, std::uint64_t seed,
                               unsigned workers) {
  if (n == 0 || !(t > 0.0)) throw ConfigError("scaling_1d: need n > 0 and t > 0");
  const auto steps = static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * t));
  const double scale = std::pow(static_cast<double>(n), -0.25);
  std::vector<double> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, 2, r);
    out[r] = static_cast<double>(sample_mouse_1d(steps, rng).position) * scale;
  });
  return out;
}

GfCheck hitting_gf_check(double u, std::size_t samples, Stream& rng) {
  if (!(u > 0.0 && u < 1.0)) throw ConfigError("hitting_gf_check: need 0 < u < 1");
  if (samples < 2) throw ConfigError("hitting_gf_check: need at least 2 samples");
  const auto horizon = static_cast<std::uint64_t>(std::ceil(std::log(1e-18) / std::log(u)));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    std::int64_t x = 1;
    std::uint64_t t = 0;
    std::uint64_t word = 0;
    int left = 0;
    while (x != 0 && t < horizon) {
      if (left == 0) {
        word = rng.next_u64();
        left = 64;
      }
      x += (word & 1u) ? 1 : -1;
      word >>= 1;
      --left;
      ++t;
    }
    const double v = x == 0 ? std::pow(u, static_cast<double>(t)) : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double ns = static_cast<double>(samples);
  GfCheck g;
  g.u = u;
  g.estimate = sum / ns;
  g.se = std::sqrt(std::max(0.0, sum_sq / ns - g.estimate * g.estimate) / (ns - 1.0));
  g.exact = t1_generating_function(u);
  const double z = g.se > 0.0 ? std::abs(g.estimate - g.exact) / g.se : 0.0;
  g.verdict = make_verdict("hitting-gf", "mean-3sigma", z, 3.0);
  g.verdict.n1 = samples;
  g.verdict.se = g.se;
  g.verdict.estimate = g.estimate;
  g.verdict.target = g.exact;
  return g;
}

// ---------------------------------------------------------------------------

double DirichletSolution::phi_at(int x1, int x2) const {
  x2 = std::abs(x2);
  if (std::abs(x1) > radius || x2 > radius) return 0.25;
  return phi[static_cast<std::size_t>(x2) * (2 * radius + 1) + static_cast<std::size_t>(x1 + radius)];
}

namespace {

bool fixed_site(int x1, int x2) { return x2 <= 1 && std::abs(x1) + x2 == 1; }

ReturnKernel extract_kernel(const DirichletSolution& s) {
  auto p = [&](int a, int b) { return s.phi_at(a, b); };
  ReturnKernel r;
  r.same = 0.25 * (p(2, 0) + p(0, 0) + p(1, 1) + p(1, -1));
  r.opposite = 0.25 * (p(-2, 0) + p(0, 0) + p(-1, 1) + p(-1, -1));
  r.perp = 0.25 * (p(0, -2) + p(0, 0) + p(1, -1) + p(-1, -1));
  return r;
}

}  // namespace

double harmonic_residual(const DirichletSolution& s) {
  const int R = s.radius;
  const std::size_t W = static_cast<std::size_t>(2 * R + 1);
  double worst = 0.0;
  for (int x2 = 0; x2 < R; ++x2) {
    for (int x1 = -R + 1; x1 <= R - 1; ++x1) {
      if (fixed_site(x1, x2)) continue;
      const std::size_t i = static_cast<std::size_t>(x2) * W + static_cast<std::size_t>(x1 + R);
      const double* p = s.phi.data();
      const double avg = x2 == 0 ? 0.25 * (p[i + 1] + p[i - 1] + 2.0 * p[i + W])
                                 : 0.25 * (p[i + 1] + p[i - 1] + p[i + W] + p[i - W]);
      worst = std::max(worst, std::abs(avg - p[i]));
    }
  }
  return worst;
}

DirichletSolution solve_dirichlet(int radius, double tol, int max_sweeps, int checkpoint_every) {
  if (radius < 20) throw ConfigError("solve_dirichlet: radius must be at least 20");
  if (checkpoint_every < 1) throw ConfigError("solve_dirichlet: checkpoint interval must be positive");
  DirichletSolution s;
  s.radius = radius;
  s.checkpoint_every = checkpoint_every;
  const int R = radius;
  const std::size_t W = static_cast<std::size_t>(2 * R + 1);
  s.phi.assign(W * static_cast<std::size_t>(R + 1), 0.25);
  auto at = [&](int x1, int x2) -> double& {
    return s.phi[static_cast<std::size_t>(x2) * W + static_cast<std::size_t>(x1 + R)];
  };
  at(1, 0) = 1.0;
  at(-1, 0) = 0.0;
  at(0, 1) = 0.0;
  const double omega = 2.0 / (1.0 + std::sin(std::numbers::pi / (2.0 * R)));
  double* p = s.phi.data();
  s.residual = INFINITY;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int color = 0; color < 2; ++color) {
      for (int x2 = 0; x2 < R; ++x2) {
        int x1 = -R + 1;
        if (((x1 + x2) & 1) != color) ++x1;
        const std::size_t row = static_cast<std::size_t>(x2) * W;
        for (; x1 <= R - 1; x1 += 2) {
          if (x2 <= 1 && fixed_site(x1, x2)) continue;
          const std::size_t i = row + static_cast<std::size_t>(x1 + R);
          const double avg = x2 == 0 ? 0.25 * (p[i + 1] + p[i - 1] + 2.0 * p[i + W])
                                     : 0.25 * (p[i + 1] + p[i - 1] + p[i + W] + p[i - W]);
          p[i] += omega * (avg - p[i]);
        }
      }
    }
    s.sweeps = sweep;
    if (sweep % checkpoint_every == 0 || sweep == max_sweeps) {
      s.residual = harmonic_residual(s);
      s.residual_history.push_back(s.residual);
      if (s.residual < tol) break;
    }
  }
  if (!(s.residual < tol))
    throw SolveError("solve_dirichlet: no convergence within the sweep limit", s.residual);
  s.r = extract_kernel(s);
  return s;
}

ReturnKernel richardson(const DirichletSolution& a, const DirichletSolution& b) {
  if (b.radius != 2 * a.radius) throw ConfigError("richardson: second radius must double the first");
  auto ex = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
  return {ex(a.r.same, b.r.same), ex(a.r.opposite, b.r.opposite), ex(a.r.perp, b.r.perp)};
}

ReturnKernelMc return_kernel_mc(std::size_t excursions, int stop_radius, std::uint64_t seed,
                                unsigned workers) {
  if (stop_radius < 3) throw ConfigError("return_kernel_mc: stop radius must be at least 3");
  constexpr std::size_t kChunks = 256;
  struct Tally {
    std::array<std::uint64_t, 4> hits{};
    std::uint64_t exits = 0;
    std::uint64_t steps = 0;
  };
  std::vector<Tally> tallies(kChunks);
  parallel_for(kChunks, workers, [&](std::size_t c) {
    Stream rng = replica_stream(seed, 3, c);
    PlaneSteps dirs(rng);
    Tally& t = tallies[c];
    const std::size_t todo = excursions / kChunks + (c < excursions % kChunks ? 1 : 0);
    for (std::size_t e = 0; e < todo; ++e) {
      Point2 x{1, 0};
      for (;;) {
        x = move(x, dirs.next());
        ++t.steps;
        if (is_unit(x)) {
          ++t.hits[static_cast<std::size_t>(unit_index(x))];
          break;
        }
        if (linf(x) >= stop_radius) {
          ++t.exits;
          break;
        }
      }
    }
  });
  Tally total;
  for (const auto& t : tallies) {
    for (int k = 0; k < 4; ++k) total.hits[k] += t.hits[k];
    total.exits += t.exits;
    total.steps += t.steps;
  }
  const double n = static_cast<double>(excursions);
  const double ex = static_cast<double>(total.exits);
  auto est = [&](double hits, double weight) {
    const double mean = (hits * weight + 0.25 * ex) / n;
    const double second = (hits * weight * weight + 0.0625 * ex) / n;
    return std::pair{mean, std::sqrt(std::max(0.0, second - mean * mean) / n)};
  };
  ReturnKernelMc out;
  out.excursions = excursions;
  out.exits = total.exits;
  out.steps = total.steps;
  out.stop_radius = stop_radius;
  const auto same = est(static_cast<double>(total.hits[0]), 1.0);
  const auto opp = est(static_cast<double>(total.hits[1]), 1.0);
  const auto perp = est(static_cast<double>(total.hits[2] + total.hits[3]), 0.5);
  out.estimate = {same.first, opp.first, perp.first};
  out.se = {same.second, opp.second, perp.second};
  return out;
}

int unit_index(Point2 e) {
  for (int k = 0; k < 4; ++k)
    if (kUnits[static_cast<std::size_t>(k)] == e) return k;
  throw ConfigError("unit_index: not a unit vector");
}

Point2 unit_vector(int index) { return kUnits.at(static_cast<std::size_t>(index)); }

double RelativeChain::alpha0() const {
  return std::sqrt(3.0 * std::numbers::pi) / (4.0 * std::sqrt(diag_mass));
}

RelativeChain build_relative_chain(const ReturnKernel& r) {
  const double total = r.sum();
  if (!(r.same >= 0.0 && r.opposite >= 0.0 && r.perp >= 0.0 && std::abs(total - 1.0) < 1e-6))
    throw ConfigError("build_relative_chain: return kernel is not a probability vector");
  auto rk = [&](int e, int f) {
    const Point2 a = unit_vector(e), b = unit_vector(f);
    if (a == b) return r.same / total;
    if (a + b == Point2{0, 0}) return r.opposite / total;
    return r.perp / total;
  };
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(16, 16);
  std::vector<std::string> labels;
  for (int e = 0; e < 4; ++e) {
    for (int g = 0; g < 4; ++g) {
      const Point2 pe = unit_vector(e), pg = unit_vector(g);
      labels.push_back("(" + std::to_string(pe.x) + "," + std::to_string(pe.y) + ";" +
                       std::to_string(pg.x) + "," + std::to_string(pg.y) + ")");
      const int from = 4 * e + g;
      if (e != g) {
        for (int f = 0; f < 4; ++f) q(from, 4 * f + g) += rk(e, f);
      } else {
        for (int h = 0; h < 4; ++h)
          if (h != e) q(from, 4 * e + h) = 1.0 / 3.0;
      }
    }
  }
  RelativeChain out{FiniteChain(q, ChainOptions{true, true}, labels), {}, 0.0};
  out.mu_R = stationary(out.kernel);
  for (int e = 0; e < 4; ++e) out.diag_mass += out.mu_R[static_cast<std::size_t>(5 * e)];
  return out;
}

DiagMassMc relative_visits_mc(std::size_t meetings, int stop_radius, std::uint64_t seed,
                              unsigned workers) {
  if (stop_radius < 4) throw ConfigError("relative_visits_mc: stop radius must be at least 4");
  constexpr std::size_t kChunks = 256;
  struct Tally {
    std::uint64_t cycles = 0;
    double visits = 0.0;
    double visits_sq = 0.0;
    std::uint64_t exits = 0;
    std::uint64_t steps = 0;
  };
  std::vector<Tally> tallies(kChunks);
  const std::uint32_t third = u32_threshold(1.0 / 3.0);
  parallel_for(kChunks, workers, [&](std::size_t c) {
    Stream rng = replica_stream(seed, 4, c);
    PlaneSteps dirs(rng);
    Tally& t = tallies[c];
    const std::size_t todo = meetings / kChunks + (c < meetings % kChunks ? 1 : 0);
    for (std::size_t m = 0; m < todo; ++m) {
      // Mouse at the origin; cat at d; frame origin o.
      const Point2 u = kUnits[dirs.next()];
      Point2 d, o = u;
      if (rng.next_u32() < third) {
        d = u + u;
      } else {
        const Point2 v = (rng.next_u64() >> 63) ? Point2{u.y, u.x} : Point2{-u.y, -u.x};
        d = u + v;
      }
      std::uint64_t visits = 1;
      for (;;) {
        d = move(d, dirs.next());
        ++t.steps;
        if (linf(d - o) >= stop_radius) {
          ++t.exits;
          d = o + kUnits[dirs.next()];
        } else if (!is_unit(d - o)) {
          continue;
        }
        ++visits;
        if (d == Point2{0, 0}) break;
      }
      ++t.cycles;
      t.visits += static_cast<double>(visits);
      t.visits_sq += static_cast<double>(visits) * static_cast<double>(visits);
    }
  });
  Tally total;
  for (const auto& t : tallies) {
    total.cycles += t.cycles;
    total.visits += t.visits;
    total.visits_sq += t.visits_sq;
    total.exits += t.exits;
    total.steps += t.steps;
  }
  DiagMassMc out;
  out.meetings = total.cycles;
  out.visits = static_cast<std::uint64_t>(total.visits);
  out.exits = total.exits;
  out.steps = total.steps;
  const double n = static_cast<double>(total.cycles);
  const double mean_len = total.visits / n;
  const double var_len = std::max(0.0, total.visits_sq / n - mean_len * mean_len);
  out.estimate = 1.0 / mean_len;
  out.se = std::sqrt(var_len / n) / (mean_len * mean_len);
  return out;
}

namespace {

// First common zero of two independent 1D walks started at |a| = 2 and
// |b| = b0 in {0, 2}, or kNone if it exceeds cap.
std::uint64_t first_common_zero(bool b_starts_at_zero, Stream& rng, std::uint64_t cap) {
  const auto& fp = FirstPassage::instance();
  std::uint64_t a = fp.sample_t2(rng, cap);
  if (a == kNone) return kNone;
  std::uint64_t b;
  if (b_starts_at_zero) {
    if (cap < 2) return kNone;
    const std::uint64_t t = fp.sample(rng, cap - 1);
    if (t == kNone) return kNone;
    b = 1 + t;
  } else {
    b = fp.sample_t2(rng, cap);
    if (b == kNone) return kNone;
  }
  while (a != b) {
    std::uint64_t& lag = a < b ? a : b;
    if (cap - lag < 2) return kNone;
    const std::uint64_t t = fp.sample(rng, cap - lag - 1);
    if (t == kNone) return kNone;
    lag += 1 + t;
  }
  return a;
}

}  // namespace

Mouse2D sample_mouse_2d(std::uint64_t N, Stream& rng) {
  Mouse2D m;
  const std::uint32_t third = u32_threshold(1.0 / 3.0);
  std::uint64_t time = 0;
  for (;;) {
    const std::uint64_t g = 1 + rng.geometric_failures(0.75);
    if (g >= N - time) {
      m.kappa += N - time;
      break;
    }
    m.kappa += g;
    time += g;
    const bool perpendicular = rng.next_u32() >= third;
    const std::uint64_t apart = first_common_zero(perpendicular, rng, N - time);
    if (apart == kNone) break;
    time += apart;
    ++m.meetings;
  }
  if (m.kappa > N) throw std::logic_error("sample_mouse_2d: kappa exceeds the horizon");
  const std::int64_t a = signed_fair_walk(m.kappa, rng);
  const std::int64_t b = signed_fair_walk(m.kappa, rng);
  m.x = (a + b) / 2;
  m.y = (a - b) / 2;
  return m;
}

Mouse2D brute_force_mouse_2d(std::uint64_t N, Stream& rng) {
  const Z2Plane plane;
  CatMouseState<Point2> s{};
  Mouse2D m;
  bool was_together = true;
  for (std::uint64_t i = 0; i < N; ++i) {
    if (s.together()) ++m.kappa;
    s = cm_step(s, plane, rng);
    if (s.together() && !was_together) ++m.meetings;
    was_together = s.together();
  }
  m.x = s.mouse.x;
  m.y = s.mouse.y;
  return m;
}

std::vector<double> scaling_2d_marginal(double n, double t, std::size_t replicas, std::uint64_t seed,
                                        unsigned workers) {
  if (!(n > 0.0 && t > 0.0) || n * t > 43.0)
    throw ConfigError("scaling_2d_marginal: need n, t > 0 and e^{n t} below 2^62");
  const auto N = static_cast<std::uint64_t>(std::floor(std::exp(n * t)));
  const double scale = 1.0 / std::sqrt(n);
  std::vector<double> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    Stream rng = replica_stream(seed, 5, r);
    out[r] = static_cast<double>(sample_mouse_2d(N, rng).x) * scale;
  });
  return out;
}

}  // namespace catmouse::lattice
