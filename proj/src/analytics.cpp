#include "proxyvote/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace proxyvote {

double median_basic_loss_approx(long n, const DistributionSpec& d) {
  if (n < 1) throw std::invalid_argument("median_basic_loss_approx: n must be positive");
  const double f = pdf(d, distribution_median(d));
  if (!(f > 0)) throw std::domain_error("median_basic_loss_approx: zero density at the median");
  return 1.0 / (4.0 * static_cast<double>(n) * f * f);
}

double median_proxy_bound(long n, const DistributionSpec& d) {
  if (n < 1) throw std::invalid_argument("median_proxy_bound: n must be positive");
  const double half = d.width() / 2;
  const double scale = half * half / (static_cast<double>(n) * static_cast<double>(n));
  if (std::holds_alternative<Uniform>(d.variant())) return kMedianProxyUniformConstant * scale;
  if (classify(d).single_peaked) return kMedianProxySinglePeakedConstant * scale;
  throw std::domain_error("median_proxy_bound: no bound for this distribution shape");
}

double mean_basic_loss_uniform(long n, double a, double b) {
  if (n < 1) throw std::invalid_argument("mean_basic_loss_uniform: n must be positive");
  if (!(a < b)) throw std::invalid_argument("mean_basic_loss_uniform: need a < b");
  return (b - a) * (b - a) / (12.0 * static_cast<double>(n));
}

double mean_proxy_loss_uniform_exact(long n) {
  if (n < 2) throw std::invalid_argument("mean_proxy_loss_uniform_exact: n must be at least 2");
  const double x = static_cast<double>(n);
  double den = 1;
  for (int t = 1; t <= 6; ++t) den *= x + t;
  return 2.0 * ((x - 5) * x + 14) * x * (x - 1) / den;
}

double mean_proxy_loss_uniform_order_statistics(long n) {
  if (n < 1) throw std::invalid_argument("mean_proxy_loss_uniform_order_statistics: n must be positive");
  const double x = static_cast<double>(n);
  return 40.0 / ((x + 1) * (x + 2) * (x + 3) * (x + 4));
}

double weighted_mean_closed_form(double s_min, double s_max) {
  if (!(-1 <= s_min && s_min <= s_max && s_max <= 1))
    throw std::invalid_argument("weighted_mean_closed_form: need -1 <= s_min <= s_max <= 1");
  return (s_max + s_min) / 2 + (s_min * s_min - s_max * s_max) / 4;
}

double binomial_majority_tail(long n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_majority_tail: negative n");
  if (!(0 <= p && p <= 1)) throw std::invalid_argument("binomial_majority_tail: p outside [0,1]");
  if (p == 0) return 0;
  if (p == 1) return n > 0 ? 1 : 0;
  const double lp = std::log(p), lq = std::log1p(-p);
  const double nn = static_cast<double>(n);
  double total = 0;
  for (long j = n / 2 + 1; j <= n; ++j) {
    const double jj = static_cast<double>(j);
    total += std::exp(std::lgamma(nn + 1) - std::lgamma(jj + 1) - std::lgamma(nn - jj + 1) + jj * lp + (nn - jj) * lq);
  }
  return std::min(total, 1.0);
}

double condorcet_loss(long n, double mu, long k) {
  if (n < 1) throw std::invalid_argument("condorcet_loss: n must be positive");
  return static_cast<double>(k) * binomial_majority_tail(n, mu);
}

namespace {

// Gauss-Legendre on [lo, hi] split into equal panels.
template <typename F>
double integrate(F&& f, double lo, double hi, int panels) {
  static constexpr double node[5] = {0.0, 0.5384693101056831, 0.9061798459386640, -0.5384693101056831,
                                     -0.9061798459386640};
  static constexpr double weight[5] = {0.5688888888888889, 0.4786286704993665, 0.2369268850561891,
                                       0.4786286704993665, 0.2369268850561891};
  const double h = (hi - lo) / panels;
  double total = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (int q = 0; q < 5; ++q) total += weight[q] * f(mid + 0.5 * h * node[q]);
  }
  return total * 0.5 * h;
}

}  // namespace

double dictator_loss(const CompetenceDistribution& h, long n, long k) {
  if (n < 1) throw std::invalid_argument("dictator_loss: n must be positive");
  if (h.median() >= 0.5) throw std::domain_error("dictator_loss: median competence is not below 1/2");
  const double kk = static_cast<double>(k);
  if (const auto* u = std::get_if<UniformOn>(&h.variant())) return u->a * kk / (static_cast<double>(n) + 1);
  if (const auto* pm = std::get_if<PointMassAt>(&h.variant())) return pm->p * kk;
  // E[min] = integral over [0,1] of Pr(min > p) = (1 - H(p))^n.
  const double e = integrate([&](double p) { return std::pow(1.0 - h.cdf(p), static_cast<double>(n)); }, 0.0, 1.0,
                             4000);
  return kk * e;
}

Decomposition decompose(std::span<const double> outcomes, double optimum) {
  if (outcomes.size() < 2) throw std::invalid_argument("decompose: need at least two outcomes");
  const double count = static_cast<double>(outcomes.size());
  const double m = std::accumulate(outcomes.begin(), outcomes.end(), 0.0) / count;
  double var = 0, mse = 0;
  for (double o : outcomes) {
    var += (o - m) * (o - m);
    mse += (o - optimum) * (o - optimum);
  }
  return {(m - optimum) * (m - optimum), var / count, mse / count};
}

Decomposition decompose(const std::vector<Outcome>& outcomes, const Outcome& optimum) {
  if (!optimum.is_point()) throw std::invalid_argument("decompose: only interval outcomes decompose");
  std::vector<double> points;
  points.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (!o.is_point()) throw std::invalid_argument("decompose: only interval outcomes decompose");
    points.push_back(o.point());
  }
  return decompose(points, optimum.point());
}

std::pair<double, double> mean_and_stderr(std::span<const double> values) {
  if (values.empty()) return {std::nan(""), std::nan("")};
  const double count = static_cast<double>(values.size());
  const double m = std::accumulate(values.begin(), values.end(), 0.0) / count;
  if (values.size() < 2) return {m, std::nan("")};
  double ss = 0;
  for (double v : values) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (count - 1) / count)};
}

Eigen::VectorXd ranks(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double shared = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (Eigen::Index t = i; t <= j; ++t) r[order[t]] = shared;
    i = j + 1;
  }
  return r;
}

double spearman(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length series");
  const Eigen::VectorXd rx = ranks(x), ry = ranks(y);
  const Eigen::VectorXd cx = rx.array() - rx.mean(), cy = ry.array() - ry.mean();
  const double den = std::sqrt(cx.squaredNorm() * cy.squaredNorm());
  if (den == 0) return std::nan("");
  return cx.dot(cy) / den;
}

}  // namespace proxyvote
