#pragma once

// Scalar special functions used by the distribution families.

namespace proxyvote::special {

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF, Phi(z).
double normal_cdf(double z);

/// Standard normal upper tail 1 - Phi(z), accurate far into the tail.
double normal_sf(double z);

/// Inverse of Phi (Wichura AS241, relative error ~1e-16). p must be in (0,1).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0,1].
double incomplete_beta(double a, double b, double x);

/// log B(a, b).
double log_beta(double a, double b);

}  // namespace proxyvote::special
