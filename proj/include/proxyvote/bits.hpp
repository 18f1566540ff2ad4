#pragma once

#include <Eigen/Core>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace proxyvote {

/// Fixed-length bit vector, packed 64 bits per word (bit j of the vector is
/// bit j%64 of word j/64). Padding bits are always zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(int k) : k_(k), words_((k + 63) / 64, 0) {
    if (k < 0) throw std::invalid_argument("BitVector: negative length");
  }

  /// From a string of '0'/'1' characters, issue 0 first.
  static BitVector from_string(std::string_view s) {
    BitVector v(static_cast<int>(s.size()));
    for (int j = 0; j < v.k_; ++j) {
      if (s[j] == '1')
        v.set(j, true);
      else if (s[j] != '0')
        throw std::invalid_argument("BitVector: expected '0' or '1'");
    }
    return v;
  }

  int size() const { return k_; }
  bool get(int j) const { return (words_[j >> 6] >> (j & 63)) & 1U; }
  void set(int j, bool on) {
    const std::uint64_t mask = std::uint64_t{1} << (j & 63);
    if (on)
      words_[j >> 6] |= mask;
    else
      words_[j >> 6] &= ~mask;
  }
  int count() const {
    int c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(k_), '0');
    for (int j = 0; j < k_; ++j)
      if (get(j)) s[j] = '1';
    return s;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  int k_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Rows of k bits, packed into an Eigen row-major word matrix.
class BitMatrix {
 public:
  using Words = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BitMatrix() = default;
  BitMatrix(Eigen::Index rows, int k) : k_(k), words_(Words::Zero(rows, (k + 63) / 64)) {
    if (k < 1) throw std::invalid_argument("BitMatrix: need at least one issue");
  }

  static BitMatrix from_strings(const std::vector<std::string>& rows) {
    if (rows.empty()) throw std::invalid_argument("BitMatrix: no rows");
    BitMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<int>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != m.k_) throw std::invalid_argument("BitMatrix: ragged rows");
      m.set_row(static_cast<Eigen::Index>(i), BitVector::from_string(rows[i]));
    }
    return m;
  }

  Eigen::Index rows() const { return words_.rows(); }
  int cols() const { return k_; }
  Eigen::Index words_per_row() const { return words_.cols(); }
  const Words& words() const { return words_; }
  Words& words() { return words_; }
  const std::uint64_t* row_data(Eigen::Index i) const { return words_.row(i).data(); }
  std::uint64_t* row_data(Eigen::Index i) { return words_.row(i).data(); }

  bool get(Eigen::Index i, int j) const { return (words_(i, j >> 6) >> (j & 63)) & 1U; }
  void set(Eigen::Index i, int j, bool on) {
    const std::uint64_t mask = std::uint64_t{1} << (j & 63);
    if (on)
      words_(i, j >> 6) |= mask;
    else
      words_(i, j >> 6) &= ~mask;
  }

  BitVector row(Eigen::Index i) const {
    BitVector v(k_);
    for (Eigen::Index w = 0; w < words_.cols(); ++w) v.words()[w] = words_(i, w);
    return v;
  }
  void set_row(Eigen::Index i, const BitVector& v) {
    if (v.size() != k_) throw std::invalid_argument("BitMatrix: row length mismatch");
    for (Eigen::Index w = 0; w < words_.cols(); ++w) words_(i, w) = v.words()[w];
  }

  int row_count(Eigen::Index i) const {
    int c = 0;
    for (Eigen::Index w = 0; w < words_.cols(); ++w) c += std::popcount(words_(i, w));
    return c;
  }

  /// Hamming distance between row i of this matrix and row j of `other`.
  int hamming(Eigen::Index i, const BitMatrix& other, Eigen::Index j) const {
    const std::uint64_t* a = row_data(i);
    const std::uint64_t* b = other.row_data(j);
    int c = 0;
    for (Eigen::Index w = 0; w < words_.cols(); ++w) c += std::popcount(a[w] ^ b[w]);
    return c;
  }

  int hamming(Eigen::Index i, const BitVector& v) const {
    const std::uint64_t* a = row_data(i);
    int c = 0;
    for (Eigen::Index w = 0; w < words_.cols(); ++w) c += std::popcount(a[w] ^ v.words()[w]);
    return c;
  }

  /// Sub-matrix made of the listed rows, in order.
  BitMatrix select_rows(const std::vector<Eigen::Index>& idx) const {
    BitMatrix out(static_cast<Eigen::Index>(idx.size()), k_);
    for (std::size_t r = 0; r < idx.size(); ++r) out.words_.row(static_cast<Eigen::Index>(r)) = words_.row(idx[r]);
    return out;
  }

  /// Sub-matrix made of the listed columns, in order.
  BitMatrix select_columns(const std::vector<int>& cols) const {
    BitMatrix out(rows(), static_cast<int>(cols.size()));
    for (Eigen::Index i = 0; i < rows(); ++i)
      for (std::size_t c = 0; c < cols.size(); ++c)
        if (get(i, cols[c])) out.set(i, static_cast<int>(c), true);
    return out;
  }

  friend bool operator==(const BitMatrix& a, const BitMatrix& b) { return a.k_ == b.k_ && a.words_ == b.words_; }

 private:
  int k_ = 0;
  Words words_;
};

inline int hamming(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  int c = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) c += std::popcount(a.words()[w] ^ b.words()[w]);
  return c;
}

}  // namespace proxyvote
