#pragma once

namespace ssdopt::stats {

double normal_cdf(double x);
/// Phi^{-1}(p) for p in (0,1).
double normal_quantile(double p);

/// Upper quantile of Student's t with `df` degrees of freedom: P(T > t) = tail.
double t_upper_quantile(double df, double tail);

/// P(X > h, Y > k) for a standard bivariate normal with correlation r.
/// Drezner-Wesolowsky / Genz Gauss-Legendre scheme; |r| = 1 handled exactly.
double bvn_upper(double h, double k, double r);

/// P(X <= h, Y <= k) for a standard bivariate normal with correlation r.
double bvn_lower(double h, double k, double r);

}  // namespace ssdopt::stats
