#include "proxyvote/proxy.hpp"

#include <cctype>
#include <limits>
#include <string>

#include "proxyvote/strategic.hpp"

namespace proxyvote {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Basic: return "B";
    case Scenario::Proxy: return "P";
    case Scenario::BasicLazy: return "B+L";
    case Scenario::ProxyLazy: return "P+L";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s) {
  std::string u;
  for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "B") return Scenario::Basic;
  if (u == "P") return Scenario::Proxy;
  if (u == "B+L" || u == "BL") return Scenario::BasicLazy;
  if (u == "P+L" || u == "PL") return Scenario::ProxyLazy;
  throw std::invalid_argument("unknown scenario: " + std::string(s));
}

DelegationWeights interval_weights(const Eigen::VectorXd& positions, const DistributionSpec& d) {
  DelegationWeights out;
  out.weights = interval_weights(positions, d.lower(), d.upper(), [&](double x) { return cdf(d, x); });
  out.order.resize(static_cast<std::size_t>(positions.size()));
  std::iota(out.order.begin(), out.order.end(), Eigen::Index{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return positions[a] < positions[b]; });
  return out;
}

Eigen::Index hamming_delegate(const BitVector& voter, const BitMatrix& actives) {
  if (actives.rows() == 0) throw std::invalid_argument("hamming_delegate: no active agents");
  if (voter.size() != actives.cols()) throw std::invalid_argument("hamming_delegate: dimension mismatch");
  Eigen::Index best = 0;
  int best_d = actives.hamming(0, voter);
  for (Eigen::Index j = 1; j < actives.rows(); ++j) {
    const int dj = actives.hamming(j, voter);
    if (dj < best_d) {
      best_d = dj;
      best = j;
    }
  }
  return best;
}

std::vector<Eigen::Index> delegate_rows(const BitMatrix& population, std::span<const Eigen::Index> actives) {
  if (actives.empty()) throw std::invalid_argument("delegation needs at least one active agent");
  for (auto a : actives)
    if (a < 0 || a >= population.rows()) throw std::out_of_range("active index outside the population");
  // Scan actives by ascending population index so strict '<' keeps the lowest on ties.
  std::vector<std::size_t> by_index(actives.size());
  std::iota(by_index.begin(), by_index.end(), std::size_t{0});
  std::sort(by_index.begin(), by_index.end(), [&](std::size_t a, std::size_t b) { return actives[a] < actives[b]; });

  const Eigen::Index words = population.words_per_row();
  std::vector<Eigen::Index> proxy(static_cast<std::size_t>(population.rows()));
  for (Eigen::Index r = 0; r < population.rows(); ++r) {
    const std::uint64_t* row = population.row_data(r);
    int best_d = std::numeric_limits<int>::max();
    std::size_t best = by_index.front();
    for (std::size_t t : by_index) {
      const std::uint64_t* act = population.row_data(actives[t]);
      int dist = 0;
      for (Eigen::Index w = 0; w < words && dist < best_d; ++w) dist += std::popcount(row[w] ^ act[w]);
      if (dist < best_d) {
        best_d = dist;
        best = t;
      }
    }
    proxy[static_cast<std::size_t>(r)] = static_cast<Eigen::Index>(best);
  }
  return proxy;
}

DelegationWeights binary_weights(const BitMatrix& population, std::span<const Eigen::Index> actives) {
  DelegationWeights out;
  out.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(actives.size()));
  for (auto p : delegate_rows(population, actives)) out.weights[p] += 1.0;
  out.order.resize(actives.size());
  std::iota(out.order.begin(), out.order.end(), Eigen::Index{0});
  return out;
}

namespace {

ScenarioOutcome from_equilibrium(EquilibriumResult eq) {
  ScenarioOutcome out;
  out.converged = eq.converged;
  out.steps = eq.steps;
  out.active = std::move(eq.active);
  if (eq.outcome) out.outcome = *eq.outcome;
  return out;
}

}  // namespace

ScenarioOutcome scenario_outcome(Scenario scenario, Mechanism mech, const Eigen::VectorXd& sample,
                                 const DistributionSpec& d, const DynamicsOptions* options) {
  if (mech == Mechanism::Majority) throw std::invalid_argument("majority needs a binary profile");
  if (sample.size() == 0) throw std::invalid_argument("empty sample");
  ScenarioOutcome out;
  switch (scenario) {
    case Scenario::Basic:
      out.outcome.value = apply(mech, sample);
      break;
    case Scenario::Proxy:
      out.outcome.value = apply(mech, sample, interval_weights(sample, d).weights);
      break;
    case Scenario::BasicLazy:
    case Scenario::ProxyLazy: {
      const auto game = make_game(mech, scenario, sample, d);
      return from_equilibrium(best_response_dynamics(*game, options ? *options : DynamicsOptions{}));
    }
  }
  out.active.resize(static_cast<std::size_t>(sample.size()));
  std::iota(out.active.begin(), out.active.end(), Eigen::Index{0});
  return out;
}

ScenarioOutcome scenario_outcome(Scenario scenario, const BitMatrix& population, std::span<const Eigen::Index> sample,
                                 const DynamicsOptions* options) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  ScenarioOutcome out;
  switch (scenario) {
    case Scenario::Basic:
      out.outcome.value = majority(population, sample);
      break;
    case Scenario::Proxy: {
      const auto w = binary_weights(population, sample);
      out.outcome.value = majority(population, sample,
                                   std::span<const double>(w.weights.data(), static_cast<std::size_t>(w.weights.size())));
      break;
    }
    case Scenario::BasicLazy:
    case Scenario::ProxyLazy: {
      const BinaryGame game(scenario == Scenario::ProxyLazy, population,
                            std::vector<Eigen::Index>(sample.begin(), sample.end()));
      return from_equilibrium(best_response_dynamics(game, options ? *options : DynamicsOptions{}));
    }
  }
  out.active.resize(sample.size());
  std::iota(out.active.begin(), out.active.end(), Eigen::Index{0});
  return out;
}

}  // namespace proxyvote
