#pragma once

// Voting rules on the interval (median, mean) and on binary issues
// (issue-wise majority), weighted and unweighted. All ties break towards the
// lower outcome.

#include <Eigen/Core>
#include <algorithm>
#include <iosfwd>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "proxyvote/bits.hpp"

namespace proxyvote {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Mechanism { Median, Mean, Majority };

std::string_view to_string(Mechanism m);
Mechanism parse_mechanism(std::string_view s);

template <typename Scalar = double>
struct IntervalProfile {
  VectorX<Scalar> positions;
  std::optional<VectorX<Scalar>> weights;
};

struct BinaryProfile {
  BitMatrix bits;
  std::optional<Eigen::VectorXd> weights;
};

struct Outcome {
  std::variant<double, BitVector> value;

  bool is_point() const { return std::holds_alternative<double>(value); }
  double point() const { return std::get<double>(value); }
  const BitVector& bits() const { return std::get<BitVector>(value); }
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

namespace detail {

template <typename Derived>
void check_weights(const Eigen::DenseBase<Derived>& w, Eigen::Index n) {
  using Scalar = typename Derived::Scalar;
  if (w.size() != n) throw std::invalid_argument("weights and positions differ in length");
  Scalar total(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w[i] < Scalar(0)) throw std::invalid_argument("negative weight");
    total += w[i];
  }
  if (!(total > Scalar(0))) throw std::invalid_argument("weights sum to zero");
}

}  // namespace detail

/// Weighted median: the lowest position whose cumulative weight (positions
/// sorted, duplicates merged) reaches half of the total weight.
template <typename DerivedP, typename DerivedW>
typename DerivedP::Scalar median(const Eigen::DenseBase<DerivedP>& positions,
                                 const Eigen::DenseBase<DerivedW>& weights) {
  using Scalar = typename DerivedP::Scalar;
  const Eigen::Index n = positions.size();
  if (n == 0) throw std::invalid_argument("median of an empty profile");
  detail::check_weights(weights, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return positions[a] < positions[b]; });
  // Prefix weight against the weight above it, both summed in sorted order,
  // so that equal splits compare equal in floating point.
  std::vector<Scalar> above(order.size() + 1, Scalar(0));
  for (std::size_t r = order.size(); r-- > 0;) above[r] = above[r + 1] + Scalar(weights[order[r]]);
  Scalar cumulative(0);
  for (std::size_t r = 0; r < order.size();) {
    const Scalar here = positions[order[r]];
    while (r < order.size() && !(here < positions[order[r]])) cumulative += Scalar(weights[order[r++]]);
    if (!(cumulative < above[r])) return here;
  }
  return positions[order.back()];
}

template <typename DerivedP>
typename DerivedP::Scalar median(const Eigen::DenseBase<DerivedP>& positions) {
  using Scalar = typename DerivedP::Scalar;
  return median(positions, VectorX<Scalar>::Constant(positions.size(), Scalar(1)));
}

/// Weighted mean, sum w_i s_i / sum w_i.
template <typename DerivedP, typename DerivedW>
typename DerivedP::Scalar mean(const Eigen::DenseBase<DerivedP>& positions, const Eigen::DenseBase<DerivedW>& weights) {
  using Scalar = typename DerivedP::Scalar;
  const Eigen::Index n = positions.size();
  if (n == 0) throw std::invalid_argument("mean of an empty profile");
  detail::check_weights(weights, n);
  Scalar num(0), den(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    num += Scalar(weights[i]) * positions[i];
    den += Scalar(weights[i]);
  }
  return num / den;
}

template <typename DerivedP>
typename DerivedP::Scalar mean(const Eigen::DenseBase<DerivedP>& positions) {
  using Scalar = typename DerivedP::Scalar;
  const Eigen::Index n = positions.size();
  if (n == 0) throw std::invalid_argument("mean of an empty profile");
  Scalar sum(0);
  for (Eigen::Index i = 0; i < n; ++i) sum += positions[i];
  return sum / Scalar(static_cast<int>(n));
}

template <typename Scalar>
Scalar median(const IntervalProfile<Scalar>& p) {
  return p.weights ? median(p.positions, *p.weights) : median(p.positions);
}

template <typename Scalar>
Scalar mean(const IntervalProfile<Scalar>& p) {
  return p.weights ? mean(p.positions, *p.weights) : mean(p.positions);
}

/// Issue-wise strict majority of ones by weight; ties go to 0.
/// `rows` selects the voting rows of `bits` (all rows when empty);
/// `weights` is aligned with `rows` (unit weights when empty).
BitVector majority(const BitMatrix& bits, std::span<const Eigen::Index> rows = {},
                   std::span<const double> weights = {});

BitVector majority(const BinaryProfile& p);

/// |difference| for points, Hamming distance for bit vectors.
double error(const Outcome& o, const Outcome& optimum);

/// Evaluates an interval rule; `Majority` is rejected here.
double apply(Mechanism m, const Eigen::VectorXd& positions, const std::optional<Eigen::VectorXd>& weights = {});

/// CSV, one row per agent: `position,weight` or `b1,...,bk,weight`.
void write_csv(std::ostream& os, const IntervalProfile<double>& p);
void write_csv(std::ostream& os, const BinaryProfile& p);

}  // namespace proxyvote
