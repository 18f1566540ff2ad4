#include "proxyvote/strategic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "proxyvote/text.hpp"

namespace proxyvote {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Eigen::Index> members(const ActiveSet& active) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < active.size(); ++i)
    if (active[i]) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

double distance_or_inf(const ParticipationGame& game, Eigen::Index agent, const std::optional<Outcome>& o) {
  return o ? game.distance(agent, *o) : kInf;
}

bool strictly_better(const ParticipationGame& game, double with, double without) {
  return with < without - game.indifference_band();
}

}  // namespace

IntervalGame::IntervalGame(Mechanism mech, bool weighted, Eigen::VectorXd positions, std::optional<DistributionSpec> d)
    : mech_(mech), weighted_(weighted), positions_(std::move(positions)), dist_(std::move(d)) {
  if (mech_ == Mechanism::Majority) throw std::invalid_argument("IntervalGame: majority is not an interval rule");
  if (weighted_ && !dist_) throw std::invalid_argument("IntervalGame: weighted game needs a distribution");
  double scale = 1.0;
  if (dist_) {
    scale = dist_->width();
  } else if (positions_.size() > 0) {
    scale = std::max(1.0, positions_.maxCoeff() - positions_.minCoeff());
  }
  band_ = 1e-12 * scale;
  order_ = ascending_order();
}

std::optional<Outcome> IntervalGame::outcome(const ActiveSet& active) const {
  // Walks the agents in position order, so no per-call sort is needed.
  std::vector<double> s;
  s.reserve(order_.size());
  for (auto i : order_)
    if (active[static_cast<std::size_t>(i)]) s.push_back(positions_[i]);
  if (s.empty()) return std::nullopt;
  const std::size_t m = s.size();
  std::vector<double> w(m, 1.0);
  if (weighted_) {
    double left = cdf(*dist_, dist_->lower());
    for (std::size_t r = 0; r < m;) {
      std::size_t next = r + 1;
      while (next < m && s[next] == s[r]) w[next++] = 0;
      const double right = next < m ? cdf(*dist_, (s[r] + s[next]) / 2) : cdf(*dist_, dist_->upper());
      w[r] = right - left;
      left = right;
      r = next;
    }
  }
  double total = 0;
  for (double x : w) total += x;
  if (mech_ == Mechanism::Mean) {
    double num = 0;
    for (std::size_t r = 0; r < m; ++r) num += w[r] * s[r];
    return Outcome{num / total};
  }
  std::vector<double> above(m + 1, 0.0);
  for (std::size_t r = m; r-- > 0;) above[r] = above[r + 1] + w[r];
  double cumulative = 0;
  for (std::size_t r = 0; r < m;) {
    const double here = s[r];
    while (r < m && s[r] == here) cumulative += w[r++];
    if (!(cumulative < above[r])) return Outcome{here};
  }
  return Outcome{s.back()};
}

double IntervalGame::distance(Eigen::Index agent, const Outcome& o) const {
  return std::fabs(o.point() - positions_[agent]);
}

std::vector<Eigen::Index> IntervalGame::ascending_order() const {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(positions_.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return positions_[a] < positions_[b]; });
  return order;
}

BinaryGame::BinaryGame(bool weighted, const BitMatrix& population, std::vector<Eigen::Index> sample)
    : weighted_(weighted), population_(&population), sample_(std::move(sample)) {
  for (auto r : sample_)
    if (r < 0 || r >= population.rows()) throw std::out_of_range("BinaryGame: sample row outside the population");
}

std::optional<Outcome> BinaryGame::outcome(const ActiveSet& active) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < active.size(); ++i)
    if (active[i]) rows.push_back(sample_[i]);
  if (rows.empty()) return std::nullopt;
  if (!weighted_) return Outcome{majority(*population_, rows)};
  const auto w = binary_weights(*population_, rows);
  return Outcome{majority(*population_, rows,
                          std::span<const double>(w.weights.data(), static_cast<std::size_t>(w.weights.size())))};
}

double BinaryGame::distance(Eigen::Index agent, const Outcome& o) const {
  return population_->hamming(sample_[static_cast<std::size_t>(agent)], o.bits());
}

std::vector<Eigen::Index> BinaryGame::ascending_order() const {
  std::vector<Eigen::Index> order(sample_.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  return order;
}

std::unique_ptr<ParticipationGame> make_game(Mechanism mech, Scenario scenario, const Eigen::VectorXd& sample,
                                             const DistributionSpec& d) {
  return std::make_unique<IntervalGame>(mech, is_weighted(scenario), sample, d);
}

bool prefers_active(const ParticipationGame& game, Eigen::Index agent, const ActiveSet& active) {
  ActiveSet with = active, without = active;
  with[static_cast<std::size_t>(agent)] = true;
  without[static_cast<std::size_t>(agent)] = false;
  return strictly_better(game, distance_or_inf(game, agent, game.outcome(with)),
                         distance_or_inf(game, agent, game.outcome(without)));
}

bool is_equilibrium(const ParticipationGame& game, const ActiveSet& active) {
  if (std::none_of(active.begin(), active.end(), [](bool b) { return b; })) return game.size() == 0;
  for (Eigen::Index i = 0; i < game.size(); ++i)
    if (prefers_active(game, i, active) != active[static_cast<std::size_t>(i)]) return false;
  return true;
}

EquilibriumResult best_response_dynamics(const ParticipationGame& game, const DynamicsOptions& options) {
  const Eigen::Index n = game.size();
  if (n == 0) throw std::invalid_argument("best_response_dynamics: no agents");
  const int cap = options.cap.value_or(static_cast<int>(50 * n));
  if (cap < 1) throw std::invalid_argument("best_response_dynamics: cap must be at least 1");
  ActiveSet active = options.initial.value_or(ActiveSet(static_cast<std::size_t>(n), true));
  if (static_cast<Eigen::Index>(active.size()) != n)
    throw std::invalid_argument("best_response_dynamics: initial set has the wrong size");
  const auto order = options.order.value_or(game.ascending_order());

  EquilibriumResult result;
  std::optional<Outcome> current = game.outcome(active);

  // One candidate move for `agent`; returns true and updates state if it is profitable.
  auto try_move = [&](Eigen::Index agent) {
    const auto a = static_cast<std::size_t>(agent);
    ActiveSet flipped = active;
    flipped[a] = !active[a];
    auto other = game.outcome(flipped);
    const double here = distance_or_inf(game, agent, current);
    const double there = distance_or_inf(game, agent, other);
    const bool move = active[a] ? !strictly_better(game, here, there) : strictly_better(game, there, here);
    if (!move) return false;
    active = std::move(flipped);
    current = std::move(other);
    ++result.steps;
    if (options.record_trace) result.trace.push_back({result.steps, agent, static_cast<bool>(active[a]), current});
    return true;
  };

  auto scan = [&](bool leaving) {
    for (auto agent : order)
      if (active[static_cast<std::size_t>(agent)] == leaving && try_move(agent)) return true;
    return false;
  };

  while (true) {
    const bool moved = options.leaves_first ? (scan(true) || scan(false)) : (scan(false) || scan(true));
    if (!moved) {
      result.converged = true;
      break;
    }
    if (result.steps >= cap) {
      // The cap is spent; a last check decides whether the final state happens to be stable.
      result.converged = is_equilibrium(game, active);
      break;
    }
  }
  result.active = members(active);
  result.outcome = std::move(current);
  return result;
}

std::vector<EquilibriumResult> enumerate_equilibria(const ParticipationGame& game, int max_agents) {
  const Eigen::Index n = game.size();
  if (n > max_agents || n > 30)
    throw std::invalid_argument("enumerate_equilibria: " + std::to_string(n) + " agents exceeds the limit of " +
                                std::to_string(max_agents));
  const std::uint32_t count = 1U << n;
  std::vector<std::optional<Outcome>> memo(count);
  ActiveSet set(static_cast<std::size_t>(n));
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    for (Eigen::Index i = 0; i < n; ++i) set[static_cast<std::size_t>(i)] = (mask >> i) & 1U;
    memo[mask] = game.outcome(set);
  }

  std::vector<EquilibriumResult> out;
  for (std::uint32_t mask = 1; mask < count; ++mask) {
    bool stable = true;
    for (Eigen::Index i = 0; i < n && stable; ++i) {
      const std::uint32_t with = mask | (1U << i), without = mask & ~(1U << i);
      const bool wants = strictly_better(game, distance_or_inf(game, i, memo[with]),
                                         distance_or_inf(game, i, memo[without]));
      stable = wants == static_cast<bool>((mask >> i) & 1U);
    }
    if (!stable) continue;
    EquilibriumResult eq;
    for (Eigen::Index i = 0; i < n; ++i)
      if ((mask >> i) & 1U) eq.active.push_back(i);
    eq.outcome = memo[mask];
    eq.converged = true;
    out.push_back(std::move(eq));
  }
  return out;
}

void write_trace_csv(std::ostream& os, const EquilibriumResult& result, const Outcome& optimum) {
  os << "sweep,agent,move,outcome,error\n";
  for (const auto& m : result.trace) {
    os << m.step << ',' << m.agent << ',' << (m.joined ? "join" : "leave") << ',';
    if (!m.outcome) {
      os << "NA,NA\n";
      continue;
    }
    os << (m.outcome->is_point() ? text::format_double(m.outcome->point()) : m.outcome->bits().to_string()) << ','
       << text::format_double(error(*m.outcome, optimum)) << '\n';
  }
}

double mean_triple_delta(double s1, double s2, double s3, const DistributionSpec& d) {
  if (!(s1 < s2 && s2 < s3)) throw std::invalid_argument("mean_triple_delta: need s1 < s2 < s3");
  if (s1 < d.lower() || s3 > d.upper()) throw std::invalid_argument("mean_triple_delta: outside the support");
  const double alpha = (s1 + s2) / 2, beta = (s1 + s3) / 2, gamma = (s2 + s3) / 2;
  return (s2 - s1) * (cdf(d, beta) - cdf(d, alpha)) + (s2 - s3) * (cdf(d, gamma) - cdf(d, beta));
}

bool is_equitable_partition(const Eigen::VectorXd& sample, const DistributionSpec& d) {
  const auto flags = classify(d);
  if (!flags.single_peaked) throw std::invalid_argument("is_equitable_partition: distribution is not single-peaked");
  if (sample.size() == 0) throw std::invalid_argument("is_equitable_partition: empty sample");
  const double peak = flags.turning_point;
  double lo = -kInf, hi = kInf;
  for (double s : sample) {
    if (s <= peak) lo = std::max(lo, s);
    if (s >= peak) hi = std::min(hi, s);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) return false;
  const double s_plus = pdf(d, lo) >= pdf(d, hi) ? hi : lo;
  const double m = apply(Mechanism::Mean, sample, interval_weights(sample, d).weights);
  return lo <= m && m <= hi && pdf(d, m) >= pdf(d, s_plus);
}

std::pair<int, int> single_dip_side_counts(const EquilibriumResult& eq, const Eigen::VectorXd& sample) {
  if (!eq.outcome) return {0, 0};
  const double x = eq.outcome->point();
  int left = 0, right = 0;
  for (auto i : eq.active) (sample[i] <= x ? left : right)++;
  return {left, right};
}

std::pair<int, int> single_dip_region_counts(const EquilibriumResult& eq, const Eigen::VectorXd& sample, double dip) {
  if (!eq.outcome || sample.size() == 0) return {0, 0};
  const double x = eq.outcome->point();
  const double lo = sample.minCoeff(), hi = sample.maxCoeff();
  const double left_end = x <= dip ? x : dip;
  const double right_start = x <= dip ? dip : x;
  int left = 0, right = 0;
  for (auto i : eq.active) {
    if (lo <= sample[i] && sample[i] <= left_end) ++left;
    if (right_start <= sample[i] && sample[i] <= hi) ++right;
  }
  return {left, right};
}

std::optional<std::vector<Eigen::Index>> predicted_equilibrium(Mechanism mech, Scenario scenario,
                                                               const Eigen::VectorXd& sample,
                                                               const std::optional<DistributionSpec>& d) {
  const Eigen::Index n = sample.size();
  if (n == 0 || !is_strategic(scenario)) return std::nullopt;
  auto first_at = [&](auto better) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (better(i, best)) best = i;
    return best;
  };
  const Eigen::Index lowest = first_at([&](Eigen::Index i, Eigen::Index b) { return sample[i] < sample[b]; });
  const Eigen::Index highest = first_at([&](Eigen::Index i, Eigen::Index b) { return sample[i] > sample[b]; });

  if (mech == Mechanism::Median && scenario == Scenario::BasicLazy) return std::vector<Eigen::Index>{lowest};
  if (mech == Mechanism::Mean && scenario == Scenario::BasicLazy) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    return all;
  }
  if (!d) return std::nullopt;
  if (mech == Mechanism::Median && scenario == Scenario::ProxyLazy) {
    const double x = distribution_median(*d);
    const Eigen::Index j = first_at([&](Eigen::Index i, Eigen::Index b) {
      const double di = std::fabs(sample[i] - x), db = std::fabs(sample[b] - x);
      return di < db || (di == db && sample[i] < sample[b]);
    });
    return std::vector<Eigen::Index>{j};
  }
  if (mech == Mechanism::Mean && scenario == Scenario::ProxyLazy && std::holds_alternative<Uniform>(d->variant())) {
    if (lowest == highest) return std::vector<Eigen::Index>{lowest};
    return std::vector<Eigen::Index>{std::min(lowest, highest), std::max(lowest, highest)};
  }
  return std::nullopt;
}

std::optional<std::vector<Eigen::Index>> predicted_equilibrium(Scenario scenario, const BitMatrix& population,
                                                               std::span<const Eigen::Index> sample) {
  const auto n = static_cast<Eigen::Index>(sample.size());
  if (n == 0 || n > 40 || !is_strategic(scenario)) return std::nullopt;
  if (static_cast<double>(population.cols()) < static_cast<double>(n) * std::ldexp(1.0, static_cast<int>(n) + 1))
    return std::nullopt;
  if (scenario == Scenario::BasicLazy) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    return all;
  }
  const BitVector truth = majority(population);
  Eigen::Index best = 0;
  int best_d = population.hamming(sample[0], truth);
  for (Eigen::Index i = 1; i < n; ++i) {
    const int di = population.hamming(sample[static_cast<std::size_t>(i)], truth);
    if (di < best_d) {
      best_d = di;
      best = i;
    }
  }
  return std::vector<Eigen::Index>{best};
}

}  // namespace proxyvote
