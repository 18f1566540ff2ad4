#pragma once

// Monte Carlo experiments over (scenario x n) grids with seeded, order-fixed
// reduction: results do not depend on the number of worker threads.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proxyvote/analytics.hpp"
#include "proxyvote/binary.hpp"
#include "proxyvote/distributions.hpp"
#include "proxyvote/mechanisms.hpp"
#include "proxyvote/preflib.hpp"
#include "proxyvote/proxy.hpp"

namespace proxyvote {

enum class SourceKind { Distribution, BinaryModel, Dataset };

struct ExperimentConfig {
  Mechanism mechanism = Mechanism::Median;
  std::vector<Scenario> scenarios{Scenario::Basic, Scenario::Proxy};
  SourceKind kind = SourceKind::Distribution;
  std::optional<DistributionSpec> distribution;
  std::optional<BinaryPopulationModel> model;
  const BinaryDataset* dataset = nullptr;  ///< not owned
  std::string source;                      ///< label written to the CSV
  std::vector<long> ns;
  long trials = 1000;
  std::optional<std::uint64_t> seed;
  std::optional<int> cap;            ///< dynamics cap; 50 n when unset
  int k_sub = 15;                    ///< issues kept per dataset trial
  Eigen::Index population = 2000;    ///< voters per synthetic binary trial
  int workers = 1;                   ///< 0 means one per hardware thread
  bool check_median_dominance = true;
};

/// Throws std::invalid_argument describing the first problem found.
void validate(const ExperimentConfig& cfg);

struct ResultRow {
  LossEstimate estimate;
  long trials = 0;  ///< trials requested
  std::uint64_t seed = 0;
};

/// One grid point; every scenario sees the same sample in each trial.
/// `point` selects the substreams.
std::vector<LossEstimate> estimate_loss(const ExperimentConfig& cfg, std::size_t point, long n);

/// All grid points, in (n, scenario) order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

inline constexpr const char* kResultHeader =
    "mechanism,scenario,source,n,trials,loss,stderr,bias_sq,variance,nonconverged,seed";

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);

/// Reads what write_results_csv wrote.
std::vector<ResultRow> read_results_csv(std::istream& is);

struct SlopeFit {
  double slope = 0, intercept = 0, r2 = 0;
  int points = 0;
};

/// Least-squares fit of log loss against log n over the matching rows.
SlopeFit slope_fit(const std::vector<ResultRow>& rows, Scenario scenario, Mechanism mechanism);

struct RatioRow {
  std::string mechanism, source;
  long n = 0;
  double basic = 0, proxy = 0, ratio = 0;  ///< ratio = basic / proxy
};

/// Pairs B with P (and B+L with P+L) rows at equal n.
std::vector<RatioRow> ratio_table(const std::vector<ResultRow>& rows);
void write_ratio_csv(std::ostream& os, const std::vector<RatioRow>& rows);

/// `10,32,100` or `10:1000:5` (5 log-spaced integers from 10 to 1000).
std::vector<long> parse_n_grid(const std::string& text);

}  // namespace proxyvote
