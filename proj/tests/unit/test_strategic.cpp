#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "proxyvote/binary.hpp"
#include "proxyvote/strategic.hpp"
#include "support.hpp"

using namespace proxyvote;

namespace {

using Idx = std::vector<Eigen::Index>;

const Eigen::Vector4d kFig(1, 3, 6, 7);

std::vector<DistributionSpec> families() {
  return {Uniform{-1, 1}, TruncatedNormal{0, 0.3, -1, 1}, Triangular{-1, 0, 1},
          BimodalMixture{{-1.2, 0.4, -1, 1}, {1.2, 0.4, -1, 1}, 0.5}, ScaledBeta{2, 5, -1, 1}};
}

ActiveSet as_set(Eigen::Index n, const Idx& members) {
  ActiveSet a(static_cast<std::size_t>(n), false);
  for (auto i : members) a[static_cast<std::size_t>(i)] = true;
  return a;
}

Eigen::Index argmin(const Eigen::VectorXd& s) {
  Eigen::Index i;
  s.minCoeff(&i);
  return i;
}

Eigen::Index argmax(const Eigen::VectorXd& s) {
  Eigen::Index i;
  s.maxCoeff(&i);
  return i;
}

}  // namespace

TEST_SUITE("strategic") {
  TEST_CASE("pivotality examples") {
    const IntervalGame pl(Mechanism::Median, true, kFig, DistributionSpec(Uniform{0, 10}));
    // With agents at 1, 6, 7 active the agent at 3 cannot move the weighted median.
    CHECK_FALSE(prefers_active(pl, 1, as_set(4, {0, 2, 3})));

    Stream rng(1);
    for (int t = 0; t < 200; ++t) {
      const Eigen::VectorXd s = testing::uniform_vector(rng, 2 + static_cast<Eigen::Index>(rng.below(8)), -1, 1);
      const IntervalGame bl(Mechanism::Median, false, s, std::nullopt);
      const Eigen::Index low = argmin(s);
      for (Eigen::Index i = 0; i < s.size(); ++i)
        if (i != low) REQUIRE_FALSE(prefers_active(bl, i, as_set(s.size(), {low})));

      const IntervalGame mean_bl(Mechanism::Mean, false, s, std::nullopt);
      ActiveSet m(static_cast<std::size_t>(s.size()));
      for (auto&& b : m) b = rng.below(2) == 1;
      const Eigen::Index i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(s.size())));
      m[static_cast<std::size_t>(i)] = false;
      if (std::none_of(m.begin(), m.end(), [](bool b) { return b; })) continue;
      REQUIRE(prefers_active(mean_bl, i, m));
    }
  }

  TEST_CASE("a lone active agent never leaves") {
    Eigen::VectorXd one(1);
    one << 0.4;
    const IntervalGame g(Mechanism::Median, false, one, std::nullopt);
    CHECK(prefers_active(g, 0, as_set(1, {0})));
    const auto eq = best_response_dynamics(g);
    CHECK(eq.converged);
    CHECK(eq.active == Idx{0});
  }

  TEST_CASE("dynamics on the worked example") {
    const DistributionSpec d = Uniform{0, 10};
    const auto bl = best_response_dynamics(*make_game(Mechanism::Median, Scenario::BasicLazy, kFig, d));
    CHECK(bl.converged);
    CHECK(bl.active == Idx{0});
    CHECK(bl.outcome->point() == 1);

    const auto pl = best_response_dynamics(*make_game(Mechanism::Median, Scenario::ProxyLazy, kFig, d));
    CHECK(pl.active == Idx{2});
    CHECK(pl.outcome->point() == 6);

    const auto mean_pl = best_response_dynamics(*make_game(Mechanism::Mean, Scenario::ProxyLazy, kFig, d));
    CHECK(mean_pl.active == Idx{0, 3});
    CHECK(mean_pl.outcome->point() == doctest::Approx(4.6).epsilon(1e-14));
  }

  TEST_CASE("joins-first sweeps cycle on the worked example") {
    DynamicsOptions opt;
    opt.leaves_first = false;
    opt.initial = as_set(4, {1, 3});
    opt.cap = 200;
    const auto eq = best_response_dynamics(*make_game(Mechanism::Median, Scenario::BasicLazy, kFig, Uniform{0, 10}), opt);
    CHECK_FALSE(eq.converged);
    CHECK(eq.steps == 200);
  }

  TEST_CASE("the step cap marks non-convergence") {
    DynamicsOptions opt;
    opt.cap = 1;
    const auto eq = best_response_dynamics(*make_game(Mechanism::Median, Scenario::BasicLazy, kFig, Uniform{0, 10}), opt);
    CHECK_FALSE(eq.converged);
    CHECK(eq.steps == 1);
  }

  TEST_CASE("enumeration finds the unique equilibria") {
    Stream rng(2);
    for (int t = 0; t < 200; ++t) {
      const auto n = 1 + static_cast<Eigen::Index>(rng.below(10));
      const DistributionSpec d = Uniform{-1, 1};
      const Eigen::VectorXd s = sample(d, n, rng);

      const auto bl = enumerate_equilibria(*make_game(Mechanism::Median, Scenario::BasicLazy, s, d));
      REQUIRE(bl.size() == 1);
      REQUIRE(bl[0].active == Idx{argmin(s)});

      const auto pl = enumerate_equilibria(*make_game(Mechanism::Median, Scenario::ProxyLazy, s, d));
      REQUIRE(pl.size() == 1);
      REQUIRE(pl[0].active == *predicted_equilibrium(Mechanism::Median, Scenario::ProxyLazy, s, d));

      const auto mean_pl = enumerate_equilibria(*make_game(Mechanism::Mean, Scenario::ProxyLazy, s, d));
      REQUIRE(mean_pl.size() == 1);
      Idx ends{argmin(s), argmax(s)};
      std::sort(ends.begin(), ends.end());
      ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
      REQUIRE(mean_pl[0].active == ends);
    }
    CHECK_THROWS(enumerate_equilibria(*make_game(Mechanism::Mean, Scenario::BasicLazy, Eigen::VectorXd::Zero(16),
                                                 Uniform{-1, 1})));
  }

  TEST_CASE("dynamics reach every closed-form prediction") {
    Stream rng(3);
    const std::vector<std::pair<Mechanism, Scenario>> combos{{Mechanism::Median, Scenario::BasicLazy},
                                                             {Mechanism::Median, Scenario::ProxyLazy},
                                                             {Mechanism::Mean, Scenario::BasicLazy},
                                                             {Mechanism::Mean, Scenario::ProxyLazy}};
    for (const auto& [mech, scen] : combos)
      for (const auto& d : families()) {
        int applicable = 0;
        for (int t = 0; t < 1000; ++t) {
          const auto n = 1 + static_cast<Eigen::Index>(rng.below(12));
          const Eigen::VectorXd s = sample(d, n, rng);
          const auto pred = predicted_equilibrium(mech, scen, s, d);
          if (!pred) continue;
          ++applicable;
          const auto eq = best_response_dynamics(*make_game(mech, scen, s, d));
          REQUIRE(eq.converged);
          REQUIRE(eq.active == *pred);
        }
        const bool expect = !(mech == Mechanism::Mean && scen == Scenario::ProxyLazy) ||
                            std::holds_alternative<Uniform>(d.variant());
        CHECK((applicable > 0) == expect);
      }
  }

  TEST_CASE("dynamics stop at an enumerated equilibrium from any start") {
    Stream rng(4);
    for (int t = 0; t < 600; ++t) {
      const auto d = families()[static_cast<std::size_t>(t % 5)];
      const Mechanism mech = t % 2 ? Mechanism::Mean : Mechanism::Median;
      const Scenario scen = (t / 2) % 2 ? Scenario::ProxyLazy : Scenario::BasicLazy;
      const auto n = 1 + static_cast<Eigen::Index>(rng.below(10));
      const Eigen::VectorXd s = sample(d, n, rng);
      const auto game = make_game(mech, scen, s, d);
      const auto all = enumerate_equilibria(*game);
      for (const auto& e : all) REQUIRE(is_equilibrium(*game, as_set(n, e.active)));

      DynamicsOptions opt;
      if (t % 3 == 0) {
        ActiveSet start(static_cast<std::size_t>(n));
        for (auto&& b : start) b = rng.below(2) == 1;
        opt.initial = start;
      }
      const auto eq = best_response_dynamics(*game, opt);
      if (!eq.converged) continue;
      REQUIRE(std::any_of(all.begin(), all.end(), [&](const EquilibriumResult& e) { return e.active == eq.active; }));
    }
  }

  TEST_CASE("both extreme agents are active in every proxy-mean equilibrium") {
    Stream rng(5);
    for (int t = 0; t < 300; ++t) {
      const auto d = families()[static_cast<std::size_t>(t % 5)];
      const auto n = 2 + static_cast<Eigen::Index>(rng.below(8));
      const Eigen::VectorXd s = sample(d, n, rng);
      for (const auto& e : enumerate_equilibria(*make_game(Mechanism::Mean, Scenario::ProxyLazy, s, d))) {
        REQUIRE(std::find(e.active.begin(), e.active.end(), argmin(s)) != e.active.end());
        REQUIRE(std::find(e.active.begin(), e.active.end(), argmax(s)) != e.active.end());
      }
    }
  }

  TEST_CASE("strategic proxy median loses nothing against the proxy median") {
    Stream rng(6);
    for (int t = 0; t < 1000; ++t) {
      const auto d = families()[static_cast<std::size_t>(t % 5)];
      const Eigen::VectorXd s = sample(d, 1 + static_cast<Eigen::Index>(rng.below(30)), rng);
      const double x = distribution_median(d);
      const double p = scenario_outcome(Scenario::Proxy, Mechanism::Median, s, d).outcome.point();
      const double pl = scenario_outcome(Scenario::ProxyLazy, Mechanism::Median, s, d).outcome.point();
      REQUIRE(std::fabs(pl - x) == std::fabs(p - x));
    }
  }

  TEST_CASE("mean triple delta") {
    CHECK(std::fabs(mean_triple_delta(-0.5, 0.1, 0.7, Uniform{-1, 1})) < 1e-15);
    CHECK(mean_triple_delta(0.1, 0.3, 0.8, TruncatedNormal{0, 0.3, -1, 1}) > 0);
    CHECK(mean_triple_delta(-0.8, -0.3, -0.1, TruncatedNormal{0, 0.3, -1, 1}) < 0);
    CHECK_THROWS(mean_triple_delta(0.3, 0.1, 0.8, Uniform{-1, 1}));

    Stream rng(7);
    for (int t = 0; t < 2000; ++t) {
      const auto d = families()[static_cast<std::size_t>(t % 5)];
      Eigen::VectorXd s = sample(d, 3, rng);
      std::sort(s.data(), s.data() + 3);
      if (!(s[0] < s[1] && s[1] < s[2])) continue;
      // Extra agents outside [s1, s3] do not change the cells involved.
      std::vector<double> outside;
      for (int e = 0; e < 3; ++e) {
        const double x = draw(d, rng);
        if (x < s[0] || x > s[2]) outside.push_back(x);
      }
      Eigen::VectorXd without(2 + static_cast<Eigen::Index>(outside.size()));
      Eigen::VectorXd with(3 + static_cast<Eigen::Index>(outside.size()));
      without << s[0], s[2], Eigen::Map<Eigen::VectorXd>(outside.data(), static_cast<Eigen::Index>(outside.size()));
      with << s[0], s[1], s[2], Eigen::Map<Eigen::VectorXd>(outside.data(), static_cast<Eigen::Index>(outside.size()));
      const double brute = mean(with, interval_weights(with, d).weights) - mean(without, interval_weights(without, d).weights);
      REQUIRE(mean_triple_delta(s[0], s[1], s[2], d) == doctest::Approx(brute).epsilon(1e-9).scale(1));
    }
  }

  TEST_CASE("equitable partitions") {
    const DistributionSpec d = TruncatedNormal{0, 0.3, -1, 1};
    Stream rng(8);
    for (int t = 0; t < 100; ++t) {
      const auto half = 1 + static_cast<Eigen::Index>(rng.below(4));
      Eigen::VectorXd s(2 * half);
      for (Eigen::Index i = 0; i < half; ++i) {
        const double x = 0.01 + 0.9 * rng.uniform();
        s[2 * i] = -x;
        s[2 * i + 1] = x;
      }
      REQUIRE(is_equitable_partition(s, d));
      const auto eq = best_response_dynamics(*make_game(Mechanism::Mean, Scenario::ProxyLazy, s, d));
      REQUIRE(eq.converged);
      REQUIRE(eq.active.size() == static_cast<std::size_t>(s.size()));
    }
    CHECK_FALSE(is_equitable_partition(Eigen::Vector3d(0.6, 0.7, 0.9), d));
    CHECK_FALSE(is_equitable_partition(Eigen::Vector3d(-0.95, 0.001, 0.3), d));
    CHECK_THROWS(is_equitable_partition(Eigen::Vector2d(-0.5, 0.5), BimodalMixture{{-0.5, 0.15, -1, 1}, {0.5, 0.15, -1, 1}, 0.5}));
  }

  TEST_CASE("single-dip counts") {
    EquilibriumResult ends;
    ends.active = {0, 2};
    ends.outcome = Outcome{0.1};
    const Eigen::Vector3d s(-0.8, 0.0, 0.9);
    CHECK(single_dip_side_counts(ends, s) == std::pair{1, 1});

    EquilibriumResult lone;
    lone.active = {1};
    lone.outcome = Outcome{0.0};
    const auto c = single_dip_side_counts(lone, s);
    CHECK(c.first + c.second == 1);

    // Outcome left of the dip: agents in [min, outcome] and in [dip, max].
    EquilibriumResult mixed;
    mixed.active = {0, 1, 2, 3};
    mixed.outcome = Outcome{-0.2};
    const Eigen::Vector4d t(-0.9, -0.5, -0.1, 0.6);
    CHECK(single_dip_side_counts(mixed, t) == std::pair{2, 2});
    CHECK(single_dip_region_counts(mixed, t, 0.0) == std::pair{2, 1});
  }

  TEST_CASE("proxy-mean equilibria under a single-dipped density stay sparse near the dip") {
    const DistributionSpec d = parse_distribution("bimodal:-1.2,0.4,1.2,0.4,0.5");
    const double dip = classify(d).turning_point;
    Stream rng(9);
    for (int t = 0; t < 200; ++t) {
      const Eigen::VectorXd s = sample(d, 2 + static_cast<Eigen::Index>(rng.below(7)), rng);
      for (const auto& e : enumerate_equilibria(*make_game(Mechanism::Mean, Scenario::ProxyLazy, s, d))) {
        const auto [left, right] = single_dip_region_counts(e, s, dip);
        REQUIRE(left <= 2);
        REQUIRE(right <= 2);
      }
    }
  }

  TEST_CASE("binary participation with many issues") {
    // Fraction of trials ending at the predicted set.
    auto hit_rate = [](Scenario scen, int n, int k, int trials) {
      const BinaryPopulationModel model{UniformOn{0.66}, k};
      int hits = 0;
      for (int t = 0; t < trials; ++t) {
        Stream rng = Stream::derive(10, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(t));
        const auto pop = generate(model, 500, rng);
        const auto sample = sample_indices(500, n, rng);
        const BinaryGame game(is_weighted(scen), pop.bits, sample);
        const auto pred = predicted_equilibrium(scen, pop.bits, sample);
        REQUIRE(pred);
        if (best_response_dynamics(game).active == *pred) ++hits;
      }
      return static_cast<double>(hits) / trials;
    };
    CHECK(hit_rate(Scenario::BasicLazy, 4, 2048, 200) >= 0.99);
    const double few = hit_rate(Scenario::ProxyLazy, 3, 48, 300);
    const double many = hit_rate(Scenario::ProxyLazy, 3, 768, 300);
    CHECK(many > few);
    CHECK(many >= 0.95);
    CHECK_FALSE(predicted_equilibrium(Scenario::ProxyLazy, BitMatrix(10, 47), std::vector<Eigen::Index>{0, 1, 2}));
    CHECK(predicted_equilibrium(Scenario::BasicLazy, BitMatrix(10, 48), std::vector<Eigen::Index>{0, 1, 2}) ==
          std::vector<Eigen::Index>{0, 1, 2});
  }

  TEST_CASE("trace export") {
    DynamicsOptions opt;
    opt.record_trace = true;
    const auto eq = best_response_dynamics(*make_game(Mechanism::Median, Scenario::ProxyLazy, kFig, Uniform{0, 10}), opt);
    std::ostringstream os;
    write_trace_csv(os, eq, Outcome{5.0});
    const std::string out = os.str();
    CHECK(out.rfind("sweep,agent,move,outcome,error\n", 0) == 0);
    CHECK(eq.trace.size() == static_cast<std::size_t>(eq.steps));
    CHECK(out.find("leave") != std::string::npos);
    CHECK(out.substr(out.size() - 4) == "6,1\n");
  }
}
