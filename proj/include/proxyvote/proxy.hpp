#pragma once

// Delegation: every voter picks the nearest active agent as its proxy, and an
// active agent votes with the mass of voters that picked it.

#include <Eigen/Core>
#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "proxyvote/bits.hpp"
#include "proxyvote/distributions.hpp"
#include "proxyvote/mechanisms.hpp"

namespace proxyvote {

enum class Scenario { Basic, Proxy, BasicLazy, ProxyLazy };

std::string_view to_string(Scenario s);
/// Accepts `B`, `P`, `B+L`, `P+L` (case-insensitive).
Scenario parse_scenario(std::string_view s);
inline bool is_strategic(Scenario s) { return s == Scenario::BasicLazy || s == Scenario::ProxyLazy; }
inline bool is_weighted(Scenario s) { return s == Scenario::Proxy || s == Scenario::ProxyLazy; }

/// Voronoi-cell masses on an interval, aligned with the input order.
/// `cdf` maps a boundary point to population mass below it. Cells are cut at
/// midpoints between consecutive distinct positions; the outermost cells run
/// to `lower` and `upper`. Agents sharing a position put the whole cell on
/// the lowest-index one.
template <typename Scalar, typename Cdf>
VectorX<Scalar> interval_weights(const VectorX<Scalar>& positions, const Scalar& lower, const Scalar& upper,
                                 Cdf&& cdf) {
  const Eigen::Index n = positions.size();
  if (n == 0) throw std::invalid_argument("interval_weights: no agents");
  for (Eigen::Index i = 0; i < n; ++i)
    if (positions[i] < lower || upper < positions[i])
      throw std::invalid_argument("interval_weights: position outside the support");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return positions[a] < positions[b]; });

  VectorX<Scalar> w = VectorX<Scalar>::Constant(n, Scalar(0));
  Scalar left_mass = cdf(lower);
  std::size_t r = 0;
  while (r < order.size()) {
    const Eigen::Index owner = order[r];
    const Scalar here = positions[owner];
    std::size_t next = r + 1;
    while (next < order.size() && !(here < positions[order[next]])) ++next;
    const Scalar right_mass = next < order.size() ? cdf((here + positions[order[next]]) / Scalar(2)) : cdf(upper);
    w[owner] = right_mass - left_mass;
    left_mass = right_mass;
    r = next;
  }
  return w;
}

struct DelegationWeights {
  std::vector<Eigen::Index> order;  ///< agent indices sorted by position (interval) or as given (binary)
  Eigen::VectorXd weights;          ///< aligned with the input agents, not with `order`
};

/// Weights of the sampled agents under population distribution `d`; sum to 1.
DelegationWeights interval_weights(const Eigen::VectorXd& positions, const DistributionSpec& d);

/// Index of the active row nearest to `voter` in Hamming distance; ties go to
/// the lowest index.
Eigen::Index hamming_delegate(const BitVector& voter, const BitMatrix& actives);

/// For every population row, the position in `actives` of its proxy (the
/// active row at minimum Hamming distance, ties to the lowest population index).
std::vector<Eigen::Index> delegate_rows(const BitMatrix& population, std::span<const Eigen::Index> actives);

/// Follower counts of the active rows (aligned with `actives`). Every
/// population row delegates, active rows included, so the weights sum to the
/// population size.
DelegationWeights binary_weights(const BitMatrix& population, std::span<const Eigen::Index> actives);

struct DynamicsOptions;

/// Scenario outcome with the active set it was computed from.
struct ScenarioOutcome {
  Outcome outcome;
  std::vector<Eigen::Index> active;  ///< indices into the sample
  bool converged = true;
  int steps = 0;
};

/// Interval scenario dispatcher: B and P use the whole sample, B+L and P+L
/// the equilibrium reached by best-response dynamics.
ScenarioOutcome scenario_outcome(Scenario scenario, Mechanism mech, const Eigen::VectorXd& sample,
                                 const DistributionSpec& d, const DynamicsOptions* options = nullptr);

/// Binary scenario dispatcher. `sample` lists population rows that are
/// sampled agents; delegation weights come from the whole population.
ScenarioOutcome scenario_outcome(Scenario scenario, const BitMatrix& population, std::span<const Eigen::Index> sample,
                                 const DynamicsOptions* options = nullptr);

}  // namespace proxyvote
