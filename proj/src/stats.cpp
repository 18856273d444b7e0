#include "catmouse/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace catmouse {

Verdict make_verdict(std::string name, std::string statistic, double value, double threshold,
                     Bound bound) {
  Verdict v;
  v.name = std::move(name);
  v.statistic = std::move(statistic);
  v.value = value;
  v.threshold = threshold;
  v.bound = bound;
  v.pass = bound == Bound::at_most ? value <= threshold : value >= threshold;
  return v;
}

MeanSe mean_se(std::span<const double> xs) {
  MeanSe r;
  r.n = xs.size();
  if (xs.empty()) return r;
  // Two-pass for accuracy.
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  if (xs.size() > 1) {
    r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    r.se = r.sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return r;
}

Verdict mean_within_sigma(std::string name, std::span<const double> xs, double target,
                          double sigmas) {
  const MeanSe m = mean_se(xs);
  const double z = m.se > 0.0 ? std::abs(m.mean - target) / m.se
                              : (m.mean == target ? 0.0 : INFINITY);
  Verdict v = make_verdict(std::move(name), "mean-3sigma", z, sigmas);
  v.n1 = m.n;
  v.se = m.se;
  v.estimate = m.mean;
  v.target = target;
  return v;
}

Verdict relative_error(std::string name, double estimate, double target, double tol) {
  Verdict v = make_verdict(std::move(name), "rel-error", std::abs(estimate - target) / std::abs(target),
                           tol);
  v.estimate = estimate;
  v.target = target;
  return v;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

Verdict ks_verdict(std::string name, std::span<const double> samples,
                   const std::function<double(double)>& cdf, double threshold) {
  Verdict v = make_verdict(std::move(name), "KS", ks_distance(samples, cdf), threshold);
  v.n1 = samples.size();
  return v;
}

double ks_distance_discrete(std::span<const std::int64_t> samples,
                            const std::function<double(std::int64_t)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance_discrete: empty sample");
  std::vector<std::int64_t> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = std::abs(cdf(xs.front() - 1));
  std::size_t i = 0;
  for (std::int64_t k = xs.front(); k <= xs.back(); ++k) {
    while (i < xs.size() && xs[i] <= k) ++i;
    d = std::max(d, std::abs(static_cast<double>(i) / n - cdf(k)));
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const double na = static_cast<double>(xa.size()), nb = static_cast<double>(xb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() || j < xb.size()) {
    double x;
    if (j == xb.size() || (i < xa.size() && xa[i] <= xb[j])) {
      x = xa[i];
    } else {
      x = xb[j];
    }
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

Verdict ks_two_sample_verdict(std::string name, std::span<const double> a,
                              std::span<const double> b, double threshold) {
  Verdict v = make_verdict(std::move(name), "KS-2", ks_two_sample(a, b), threshold);
  v.n1 = a.size();
  v.n2 = b.size();
  return v;
}

ChiSquare chi_square_gof(std::span<const std::uint64_t> counts, std::span<const double> probs,
                         double min_expected) {
  if (counts.size() != probs.size() || counts.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  ChiSquare r;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = probs[i] * total;
    const double o = static_cast<double>(counts[i]);
    if (e < min_expected) {
      pooled_obs += o;
      pooled_exp += e;
      continue;
    }
    r.statistic += (o - e) * (o - e) / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    r.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  } else if (pooled_obs > 0.0) {
    r.statistic = INFINITY;
  }
  r.dof = std::max(1, cells - 1);
  if (std::isinf(r.statistic)) {
    r.p_value = 0.0;
  } else {
    boost::math::chi_squared dist(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  }
  return r;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  return {centre - half, centre + half};
}

std::vector<CharValue> empirical_char_function(std::span<const double> samples,
                                               std::span<const double> thetas) {
  std::vector<CharValue> out;
  const std::size_t n = samples.size();
  for (double th : thetas) {
    CharValue cv;
    cv.theta = th;
    if (n == 0) {
      out.push_back(cv);
      continue;
    }
    std::vector<double> re(n), im(n);
    double sr = 0.0, si = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = std::cos(th * samples[i]);
      im[i] = std::sin(th * samples[i]);
      sr += re[i];
      si += im[i];
    }
    cv.value = {sr / static_cast<double>(n), si / static_cast<double>(n)};
    if (n > 1) {
      // Jackknife over leave-one-out means.
      const double m = static_cast<double>(n - 1);
      double vr = 0.0, vi = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double lr = (sr - re[i]) / m - cv.value.real();
        const double li = (si - im[i]) / m - cv.value.imag();
        vr += lr * lr;
        vi += li * li;
      }
      const double f = m / static_cast<double>(n);
      cv.se_re = std::sqrt(f * vr);
      cv.se_im = std::sqrt(f * vi);
    }
    out.push_back(cv);
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double q) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), q);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  const auto k = static_cast<std::size_t>(std::clamp(q, 0.0, 1.0) * static_cast<double>(xs.size() - 1));
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k), xs.end());
  return xs[k];
}

}  // namespace catmouse
