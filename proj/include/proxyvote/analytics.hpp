#pragma once

// Closed-form losses and Monte Carlo summaries.
//
// Interval losses are squared distances to the population optimum, binary
// losses are expected Hamming errors.

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "proxyvote/distributions.hpp"
#include "proxyvote/mechanisms.hpp"

namespace proxyvote {

/// Constants of the proxy-median bounds on [-1,1].
inline constexpr double kMedianProxyUniformConstant = 4.0;
inline constexpr double kMedianProxySinglePeakedConstant = 7.0;

/// The two asymptotic constants quoted for the proxy-weighted mean on U[-1,1]
/// (loss ~ c/n^2). Neither matches simulation; see
/// mean_proxy_loss_uniform_order_statistics.
inline constexpr double kMeanProxyStatedConstant = 8.0;
inline constexpr double kMeanProxyDerivedConstant = 2.0;

struct LossEstimate {
  double mean_loss = 0;
  double std_error = 0;
  double bias_sq = 0;   ///< NaN for binary losses
  double variance = 0;  ///< NaN for binary losses
  long trials = 0;      ///< trials that entered the mean
  long nonconverged = 0;
  std::string scenario, mechanism, source;
  long n = 0;
};

/// Laplace approximation of the basic median's loss, 1/(4 n f(x*)^2).
double median_basic_loss_approx(long n, const DistributionSpec& d);

/// 4/n^2 for uniform, 7/n^2 for other single-peaked densities, scaled by the
/// squared half-width of the support. Throws for other shapes.
double median_proxy_bound(long n, const DistributionSpec& d);

/// Variance of the sample mean under U(a,b): (b-a)^2 / (12 n).
double mean_basic_loss_uniform(long n, double a, double b);

/// 2((n-5)n+14) n (n-1) / prod_{t=1..6} (n+t).
double mean_proxy_loss_uniform_exact(long n);

/// E[mn^P(S_N)^2] on U[-1,1] integrated over the joint law of the sample
/// extremes: 40 / ((n+1)(n+2)(n+3)(n+4)).
double mean_proxy_loss_uniform_order_statistics(long n);

/// Proxy-weighted mean on U[-1,1] from the extremes alone:
/// (s_max + s_min)/2 + (s_min^2 - s_max^2)/4.
double weighted_mean_closed_form(double s_min, double s_max);

/// Pr(Bin(n, p) > n/2), strict.
double binomial_majority_tail(long n, double p);

/// k * Pr(Bin(n, mu) > n/2).
double condorcet_loss(long n, double mu, long k);

/// k * E[min of n draws from h]. Throws std::domain_error when the median of h
/// is at least 1/2, where the best agent need not dominate.
double dictator_loss(const CompetenceDistribution& h, long n, long k);

struct Decomposition {
  double bias_sq = 0;
  double variance = 0;  ///< population convention (divide by count)
  double mean_loss = 0;
};

/// Splits the mean squared error of point outcomes around `optimum`.
Decomposition decompose(std::span<const double> outcomes, double optimum);
Decomposition decompose(const std::vector<Outcome>& outcomes, const Outcome& optimum);

/// Mean and standard error of the mean (sample standard deviation / sqrt(count)).
std::pair<double, double> mean_and_stderr(std::span<const double> values);

/// Average ranks (1-based, ties share the mean rank).
Eigen::VectorXd ranks(const Eigen::VectorXd& x);

/// Spearman rank correlation.
double spearman(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace proxyvote
