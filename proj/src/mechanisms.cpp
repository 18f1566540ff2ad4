#include "proxyvote/mechanisms.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "proxyvote/text.hpp"

namespace proxyvote {

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Median: return "median";
    case Mechanism::Mean: return "mean";
    case Mechanism::Majority: return "majority";
  }
  return "?";
}

Mechanism parse_mechanism(std::string_view s) {
  if (s == "median" || s == "md") return Mechanism::Median;
  if (s == "mean" || s == "mn") return Mechanism::Mean;
  if (s == "majority" || s == "mj") return Mechanism::Majority;
  throw std::invalid_argument("unknown mechanism: " + std::string(s));
}

BitVector majority(const BitMatrix& bits, std::span<const Eigen::Index> rows, std::span<const double> weights) {
  const Eigen::Index n = rows.empty() ? bits.rows() : static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw std::invalid_argument("majority of an empty profile");
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != n)
    throw std::invalid_argument("majority: weights and rows differ in length");
  const int k = bits.cols();
  const Eigen::Index words = bits.words_per_row();
  BitVector out(k);

  if (weights.empty()) {
    std::vector<int> ones(static_cast<std::size_t>(k), 0);
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::uint64_t* row = bits.row_data(rows.empty() ? r : rows[r]);
      for (Eigen::Index w = 0; w < words; ++w)
        for (std::uint64_t x = row[w]; x; x &= x - 1) ++ones[static_cast<std::size_t>(w * 64 + std::countr_zero(x))];
    }
    for (int j = 0; j < k; ++j)
      if (2 * static_cast<Eigen::Index>(ones[j]) > n) out.set(j, true);
    return out;
  }

  double total = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("negative weight");
    total += w;
  }
  if (!(total > 0)) throw std::invalid_argument("weights sum to zero");
  // Both sides summed row by row, so equal splits compare equal.
  std::vector<double> ones(static_cast<std::size_t>(k), 0.0), zeros(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double wr = weights[r];
    if (wr == 0) continue;
    const Eigen::Index row = rows.empty() ? r : rows[r];
    for (int j = 0; j < k; ++j) (bits.get(row, j) ? ones : zeros)[static_cast<std::size_t>(j)] += wr;
  }
  for (int j = 0; j < k; ++j)
    if (ones[j] > zeros[j]) out.set(j, true);
  return out;
}

BitVector majority(const BinaryProfile& p) {
  if (!p.weights) return majority(p.bits);
  const Eigen::VectorXd& w = *p.weights;
  return majority(p.bits, {}, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

double error(const Outcome& o, const Outcome& optimum) {
  if (o.is_point() != optimum.is_point()) throw std::invalid_argument("error: outcome kinds differ");
  if (o.is_point()) return std::fabs(o.point() - optimum.point());
  return hamming(o.bits(), optimum.bits());
}

double apply(Mechanism m, const Eigen::VectorXd& positions, const std::optional<Eigen::VectorXd>& weights) {
  switch (m) {
    case Mechanism::Median: return weights ? median(positions, *weights) : median(positions);
    case Mechanism::Mean: return weights ? mean(positions, *weights) : mean(positions);
    case Mechanism::Majority: break;
  }
  throw std::invalid_argument("majority is not an interval rule");
}

void write_csv(std::ostream& os, const IntervalProfile<double>& p) {
  os << "position,weight\n";
  for (Eigen::Index i = 0; i < p.positions.size(); ++i)
    os << text::format_double(p.positions[i]) << ',' << text::format_double(p.weights ? (*p.weights)[i] : 1.0)
       << '\n';
}

void write_csv(std::ostream& os, const BinaryProfile& p) {
  for (int j = 0; j < p.bits.cols(); ++j) os << "bit_" << (j + 1) << ',';
  os << "weight\n";
  for (Eigen::Index i = 0; i < p.bits.rows(); ++i) {
    for (int j = 0; j < p.bits.cols(); ++j) os << (p.bits.get(i, j) ? '1' : '0') << ',';
    os << text::format_double(p.weights ? (*p.weights)[i] : 1.0) << '\n';
  }
}

}  // namespace proxyvote
