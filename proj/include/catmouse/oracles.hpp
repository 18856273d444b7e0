#pragma once

#include "catmouse/rng.hpp"

namespace catmouse::oracle {

// |B(t)|, equal in law to the Brownian local time at 0 by time t.
double half_normal(double t, Stream& rng);
double half_normal_cdf(double x, double t);

// B1(L_{B2}(t)) built as L = |sqrt(t) Z2|, X = sqrt(L) Z1.
double brownian_at_local_time(double t, Stream& rng);
double brownian_at_local_time_cdf(double x, double t);

// Laplace law with density (a/(2 sqrt t)) exp(-a|y|/sqrt t).
double bilateral_exponential(double alpha0, double t, Stream& rng);
double bilateral_exponential_cdf(double x, double alpha0, double t);

}  // namespace catmouse::oracle
