#pragma once

// PrefLib ingestion. Approval ballots become one issue per candidate, strict
// rankings one issue per pair of alternatives.

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "proxyvote/bits.hpp"
#include "proxyvote/rng.hpp"

namespace proxyvote {

struct BinaryDataset {
  BitMatrix matrix;                 ///< one row per voter, multiplicities expanded
  std::vector<std::string> labels;  ///< one per column
  std::string source;
  std::string kind;  ///< "approval", "pairwise" or "csv"
  int alternatives = 0;
  long dropped = 0;  ///< ballots discarded as incomplete
};

struct Rankings {
  int alternatives = 0;
  std::vector<std::vector<int>> orders;  ///< 1-based ids, best first
  std::vector<long> counts;
  long dropped = 0;
  std::string source;

  long voters() const;
};

/// Thrown for malformed input; `line` is 1-based (0 when not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line);
  long line() const { return line_; }

 private:
  long line_;
};

/// Approval data: `# NUMBER ALTERNATIVES: m` header plus ballot lines such as
/// `3: {1,2},{3}` whose first group is the approved set. Falls back to the
/// CSV layout `voter_id,bit_1,...,bit_k` when the first data line is that header.
BinaryDataset parse_approval(std::istream& in, const std::string& source = "stream");
BinaryDataset parse_approval(const std::filesystem::path& path);

enum class IncompleteBallots { Reject, Drop };

/// Strict orders, one ballot per line (`2: 3,1,2`). Incomplete ballots, ties
/// and repeated alternatives are rejected, or dropped and counted.
Rankings parse_strict_orders(std::istream& in, IncompleteBallots policy = IncompleteBallots::Reject,
                             const std::string& source = "stream");
Rankings parse_strict_orders(const std::filesystem::path& path, IncompleteBallots policy = IncompleteBallots::Reject);

/// One column per pair a < b of alternative ids; bit 1 iff the voter ranks a
/// above b.
BinaryDataset binarize_pairwise(const Rankings& r);

/// Rebuilds a ranking from one pairwise row (alternatives sorted by wins).
std::vector<int> ranking_from_pairwise(const BitMatrix& bits, Eigen::Index row, int alternatives);

/// Uniform column subset without replacement; rows and their order are kept.
BinaryDataset subsample_issues(const BinaryDataset& ds, int k_sub, Stream& rng);

/// Picks the loader by extension: .csv, .toc/.toi/.cat (approval),
/// .soc/.soi (strict orders, incomplete ballots dropped).
BinaryDataset load_dataset(const std::filesystem::path& path);

/// Dump with `# key: value` metadata lines, then the CSV fallback layout.
void write_dataset_csv(std::ostream& os, const BinaryDataset& ds);

struct WeightProfile {
  Eigen::VectorXd mean_weight;  ///< index r: agent with the r-th lowest competence value
  double spearman = 0;          ///< rank vs mean weight
};

/// Mean delegation weight by within-sample competence rank. Per trial, n
/// actives are drawn uniformly, the whole dataset delegates to them, and the
/// weights are sorted by the actives' empirical competence (ties by draw order).
WeightProfile weight_profile(const BinaryDataset& ds, Eigen::Index n, long trials, std::uint64_t seed);

}  // namespace proxyvote
