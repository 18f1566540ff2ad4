#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include "proxyvote/rng.hpp"

namespace proxyvote {

// ---------------------------------------------------------------------------
// Population distributions on a bounded interval [a, b].
// ---------------------------------------------------------------------------

struct Uniform {
  double a, b;
};

/// Normal(center, sd) conditioned on [a, b].
struct TruncatedNormal {
  double center, sd, a, b;
};

struct Triangular {
  double a, peak, b;
};

/// Two truncated normals on a common support. `weight` is the mass of `first`.
struct BimodalMixture {
  TruncatedNormal first, second;
  double weight;
};

/// Beta(alpha, beta) affinely mapped from [0,1] onto [a, b].
struct ScaledBeta {
  double alpha, beta, a, b;
};

namespace detail {
// Precomputed truncation constants for one normal component.
struct NormalPiece {
  double center = 0, sd = 1, a = 0, b = 0;
  bool upper_tail = false;  // work with survival functions when the support sits in the upper tail
  double base = 0, mass = 1;

  void init(const TruncatedNormal& t);
  double pdf(double x) const;
  double cdf(double x) const;
  double inverse(double u) const;
};
}  // namespace detail

class DistributionSpec {
 public:
  using Variant = std::variant<Uniform, TruncatedNormal, Triangular, BimodalMixture, ScaledBeta>;

  DistributionSpec(Variant v);  // NOLINT(google-explicit-constructor)
  template <typename Family>
    requires std::is_constructible_v<Variant, Family>
  DistributionSpec(Family f) : DistributionSpec(Variant(std::move(f))) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return variant_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double width() const { return upper_ - lower_; }

 private:
  Variant variant_;
  double lower_, upper_;
  detail::NormalPiece pieces_[2];
  double log_beta_ = 0;

  friend double pdf(const DistributionSpec&, double);
  friend double cdf(const DistributionSpec&, double);
  friend double draw(const DistributionSpec&, Stream&);
  friend double distribution_mean(const DistributionSpec&);
};

/// Density; 0 outside the support.
double pdf(const DistributionSpec& d, double x);

/// Pr(z <= x). Exact for Uniform/Triangular.
double cdf(const DistributionSpec& d, double x);

/// Smallest x with cdf(x) >= p. Throws std::domain_error for p outside [0,1].
double quantile(const DistributionSpec& d, double p);

/// One draw.
double draw(const DistributionSpec& d, Stream& rng);

/// n i.i.d. draws.
Eigen::VectorXd sample(const DistributionSpec& d, Eigen::Index n, Stream& rng);

double distribution_mean(const DistributionSpec& d);
inline double distribution_median(const DistributionSpec& d) { return quantile(d, 0.5); }

struct ShapeFlags {
  bool symmetric = false;
  bool single_peaked = false;
  bool weakly = false;  ///< single_peaked holds only weakly (flat density)
  bool single_dipped = false;
  double turning_point = 0;  ///< peak (or dip) location when one of the flags holds
};

ShapeFlags classify(const DistributionSpec& d);

/// Parses `uniform:-1,1`, `tnorm:0,0.3,-1,1`, `tri:0,0.5,1`, `beta:2,5,0,1`,
/// `bimodal:c1,sd1,c2,sd2,w[,a,b]` (support defaults to [-1,1]).
DistributionSpec parse_distribution(std::string_view literal);

/// Inverse of parse_distribution; round-trips exactly.
std::string to_literal(const DistributionSpec& d);

// ---------------------------------------------------------------------------
// Competence distributions h on [0,1] for the binary-issue model.
// ---------------------------------------------------------------------------

struct UniformOn {
  double a;  ///< support [0, a], 0 < a <= 1
};

struct TruncatedNormalOn {
  double mu, sigma;  ///< Normal(mu, sigma) conditioned on [0,1]
};

/// Every agent has the same competence p (homogeneous jury).
struct PointMassAt {
  double p;
};

class CompetenceDistribution {
 public:
  using Variant = std::variant<UniformOn, TruncatedNormalOn, PointMassAt>;
  CompetenceDistribution(Variant v);  // NOLINT(google-explicit-constructor)
  template <typename Family>
    requires std::is_constructible_v<Variant, Family>
  CompetenceDistribution(Family f) : CompetenceDistribution(Variant(std::move(f))) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return variant_; }
  double mean() const;
  double median() const;
  double cdf(double p) const;
  double draw(Stream& rng) const;
  Eigen::VectorXd sample(Eigen::Index n, Stream& rng) const;

 private:
  Variant variant_;
};

/// `uniform,0.66`, `tnorm,0.33,0.3`, `point,0.2`.
CompetenceDistribution parse_competence(std::string_view literal);
std::string to_literal(const CompetenceDistribution& h);

}  // namespace proxyvote
