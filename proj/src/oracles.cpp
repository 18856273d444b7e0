#include "catmouse/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "catmouse/stats.hpp"

namespace catmouse::oracle {

double half_normal(double t, Stream& rng) { return std::abs(std::sqrt(t) * rng.normal()); }

double half_normal_cdf(double x, double t) {
  if (x < 0.0) return 0.0;
  if (t <= 0.0) return 1.0;
  return std::erf(x / std::sqrt(2.0 * t));
}

double brownian_at_local_time(double t, Stream& rng) {
  const double local = std::abs(std::sqrt(t) * rng.normal());
  return std::sqrt(local) * rng.normal();
}

double brownian_at_local_time_cdf(double x, double t) {
  if (t <= 0.0) return x >= 0.0 ? 1.0 : 0.0;
  // L = sqrt(t) s with s half-normal; P(X <= x) = E Phi(x / sqrt(L)).
  const double root_t = std::sqrt(t);
  auto integrand = [&](double s) {
    const double dens = 2.0 * std::exp(-0.5 * s * s) / std::sqrt(2.0 * std::numbers::pi);
    if (s <= 0.0) return dens * (x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5));
    return dens * normal_cdf(x / std::sqrt(root_t * s));
  };
  using boost::math::quadrature::gauss_kronrod;
  // The integrand has a boundary layer near s = 0 of width ~x^2/sqrt(t).
  const double knee = std::min(1.0, x * x / root_t + 1e-12);
  const double a = gauss_kronrod<double, 31>::integrate(integrand, 0.0, knee, 8, 1e-11);
  const double b = gauss_kronrod<double, 31>::integrate(integrand, knee, std::numeric_limits<double>::infinity(), 8, 1e-11);
  return a + b;
}

double bilateral_exponential(double alpha0, double t, Stream& rng) {
  const double scale = std::sqrt(t) / alpha0;
  const double mag = rng.exponential(scale);
  return (rng.next_u64() >> 63) ? mag : -mag;
}

double bilateral_exponential_cdf(double x, double alpha0, double t) {
  if (t <= 0.0) return x >= 0.0 ? 1.0 : 0.0;
  const double scale = std::sqrt(t) / alpha0;
  return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

}  // namespace catmouse::oracle
