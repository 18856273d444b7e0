#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace catmouse {

enum class Bound { at_most, at_least };

// Outcome of one statistical or numerical comparison. For Bound::at_most the
// check passes iff value <= threshold, for Bound::at_least iff value >= threshold.
struct Verdict {
  std::string name;
  std::string statistic;  // KS | KS-2 | chi-square | mean-3sigma | char-function | rel-error | abs-error | ...
  double value = 0.0;
  double threshold = 0.0;
  Bound bound = Bound::at_most;
  bool pass = false;
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  double se = 0.0;
  double estimate = 0.0;
  double target = 0.0;
  std::uint64_t seed = 0;
  std::string note;
};

Verdict make_verdict(std::string name, std::string statistic, double value, double threshold,
                     Bound bound = Bound::at_most);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

MeanSe mean_se(std::span<const double> xs);

// |mean - target| / se against 3.
Verdict mean_within_sigma(std::string name, std::span<const double> xs, double target,
                          double sigmas = 3.0);

// |estimate - target| / |target| against tol.
Verdict relative_error(std::string name, double estimate, double target, double tol);

// sup |F_n - F| for a continuous target CDF. Throws on empty input.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

Verdict ks_verdict(std::string name, std::span<const double> samples,
                   const std::function<double(double)>& cdf, double threshold);

// sup_k |F_n(k) - F(k)| for integer-valued samples against an integer CDF,
// evaluated at every integer between the sample extremes.
double ks_distance_discrete(std::span<const std::int64_t> samples,
                            const std::function<double(std::int64_t)>& cdf);

// sup |F_a - F_b| over the pooled sample, ties handled exactly.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

Verdict ks_two_sample_verdict(std::string name, std::span<const double> a,
                              std::span<const double> b, double threshold);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of counts against probabilities. Cells with expected count
// below min_expected are pooled into one cell.
ChiSquare chi_square_gof(std::span<const std::uint64_t> counts, std::span<const double> probs,
                         double min_expected = 5.0);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct CharValue {
  double theta = 0.0;
  std::complex<double> value;
  double se_re = 0.0;
  double se_im = 0.0;
};

// Mean of exp(i theta X) per theta, jackknife standard errors.
std::vector<CharValue> empirical_char_function(std::span<const double> samples,
                                               std::span<const double> thetas);

double normal_cdf(double x);
double normal_quantile(double q);
double quantile(std::vector<double> xs, double q);

}  // namespace catmouse
