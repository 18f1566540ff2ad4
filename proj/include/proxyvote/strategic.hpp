#pragma once

// Lazy-bias participation games. Each sampled agent chooses to be active or
// not; it joins only when that strictly moves the outcome closer to its own
// position, and otherwise stays home.

#include <Eigen/Core>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "proxyvote/bits.hpp"
#include "proxyvote/distributions.hpp"
#include "proxyvote/mechanisms.hpp"
#include "proxyvote/proxy.hpp"

namespace proxyvote {

using ActiveSet = std::vector<bool>;

class ParticipationGame {
 public:
  virtual ~ParticipationGame() = default;

  virtual Eigen::Index size() const = 0;
  /// Outcome when exactly `active` vote; nullopt for the empty set.
  virtual std::optional<Outcome> outcome(const ActiveSet& active) const = 0;
  /// How far agent i is from an outcome (its disutility).
  virtual double distance(Eigen::Index agent, const Outcome& o) const = 0;
  /// Distance gaps up to this size count as indifference.
  virtual double indifference_band() const = 0;
  /// Agents in ascending position (interval) or index (binary) order.
  virtual std::vector<Eigen::Index> ascending_order() const = 0;
};

/// Median or mean on the interval. Weighted games take Voronoi weights of the
/// active agents under `d`; unweighted ones ignore it.
class IntervalGame final : public ParticipationGame {
 public:
  IntervalGame(Mechanism mech, bool weighted, Eigen::VectorXd positions, std::optional<DistributionSpec> d);

  Eigen::Index size() const override { return positions_.size(); }
  std::optional<Outcome> outcome(const ActiveSet& active) const override;
  double distance(Eigen::Index agent, const Outcome& o) const override;
  double indifference_band() const override { return band_; }
  std::vector<Eigen::Index> ascending_order() const override;

  const Eigen::VectorXd& positions() const { return positions_; }

 private:
  Mechanism mech_;
  bool weighted_;
  Eigen::VectorXd positions_;
  std::optional<DistributionSpec> dist_;
  double band_;
  std::vector<Eigen::Index> order_;
};

/// Issue-wise majority over the rows `sample` of `population`. The weighted
/// game delegates every population row to its nearest active agent.
class BinaryGame final : public ParticipationGame {
 public:
  BinaryGame(bool weighted, const BitMatrix& population, std::vector<Eigen::Index> sample);

  Eigen::Index size() const override { return static_cast<Eigen::Index>(sample_.size()); }
  std::optional<Outcome> outcome(const ActiveSet& active) const override;
  double distance(Eigen::Index agent, const Outcome& o) const override;
  double indifference_band() const override { return 0.0; }
  std::vector<Eigen::Index> ascending_order() const override;

 private:
  bool weighted_;
  const BitMatrix* population_;
  std::vector<Eigen::Index> sample_;
};

std::unique_ptr<ParticipationGame> make_game(Mechanism mech, Scenario scenario, const Eigen::VectorXd& sample,
                                             const DistributionSpec& d);

/// True iff agent i is strictly better off active than inactive, the rest of
/// `active` fixed. Ties mean inactive.
bool prefers_active(const ParticipationGame& game, Eigen::Index agent, const ActiveSet& active);

/// True iff nobody wants to switch.
bool is_equilibrium(const ParticipationGame& game, const ActiveSet& active);

struct Move {
  int step;
  Eigen::Index agent;
  bool joined;
  std::optional<Outcome> outcome;  ///< after the move
};

struct EquilibriumResult {
  std::vector<Eigen::Index> active;  ///< ascending agent index
  std::optional<Outcome> outcome;
  bool converged = false;
  int steps = 0;
  std::vector<Move> trace;
};

struct DynamicsOptions {
  /// Starting active set; all agents when unset.
  std::optional<ActiveSet> initial;
  /// Maximum number of moves; 50 * n when unset.
  std::optional<int> cap;
  /// When false, join moves are scanned before leave moves.
  bool leaves_first = true;
  /// Visit order; ascending position when unset.
  std::optional<std::vector<Eigen::Index>> order;
  bool record_trace = false;
};

/// Repeatedly applies the first profitable move found in a scan of the
/// schedule (leave moves of active agents, then join moves of inactive ones,
/// each in visit order) until a scan finds none or the cap is hit.
EquilibriumResult best_response_dynamics(const ParticipationGame& game, const DynamicsOptions& options = {});

/// Every equilibrium, by exhaustive search over all 2^n active sets.
std::vector<EquilibriumResult> enumerate_equilibria(const ParticipationGame& game, int max_agents = 15);

/// Writes `sweep,agent,move,outcome,error` rows for a dynamics trace.
void write_trace_csv(std::ostream& os, const EquilibriumResult& result, const Outcome& optimum);

/// Change of the proxy-weighted mean when the middle agent of s1 < s2 < s3
/// joins an active set whose neighbours around s2 are s1 and s3.
double mean_triple_delta(double s1, double s2, double s3, const DistributionSpec& d);

/// With x the peak of a single-peaked `d`, s- the largest agent at or below x
/// and s+ the smallest at or above it (swapped so that f(s-) >= f(s+)): the
/// proxy mean of the whole sample lies between s- and s+ and its density is
/// at least f(s+). The point A of the condition is read as that proxy mean.
bool is_equitable_partition(const Eigen::VectorXd& sample, const DistributionSpec& d);

/// Active agents at or left of the equilibrium outcome, and right of it.
std::pair<int, int> single_dip_side_counts(const EquilibriumResult& eq, const Eigen::VectorXd& sample);

/// Same count with the dip location taken into account: with the outcome at
/// or left of `dip`, agents in [min, outcome] and in [dip, max]; mirrored
/// otherwise.
std::pair<int, int> single_dip_region_counts(const EquilibriumResult& eq, const Eigen::VectorXd& sample, double dip);

/// Closed-form equilibrium where a known result applies; nullopt otherwise.
std::optional<std::vector<Eigen::Index>> predicted_equilibrium(Mechanism mech, Scenario scenario,
                                                               const Eigen::VectorXd& sample,
                                                               const std::optional<DistributionSpec>& d);

/// Binary-domain prediction: B+L gives everyone, P+L the agent closest to the
/// population majority. Only offered when k >= n * 2^(n+1).
std::optional<std::vector<Eigen::Index>> predicted_equilibrium(Scenario scenario, const BitMatrix& population,
                                                               std::span<const Eigen::Index> sample);

}  // namespace proxyvote
