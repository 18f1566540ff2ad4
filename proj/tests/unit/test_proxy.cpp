#include <doctest.h>

#include <cmath>
#include <limits>

#include "proxyvote/proxy.hpp"
#include "support.hpp"

using namespace proxyvote;

namespace {

std::vector<DistributionSpec> families() {
  return {Uniform{-1, 1}, TruncatedNormal{0, 0.3, -1, 1}, Triangular{-1, 0, 1},
          BimodalMixture{{-1.2, 0.4, -1, 1}, {1.2, 0.4, -1, 1}, 0.5}, ScaledBeta{2, 5, -1, 1}};
}

// Mass of the set of x whose nearest agent (lowest index on ties) is j, by
// quadrature of the density.
double cell_mass(const Eigen::VectorXd& s, Eigen::Index j, const DistributionSpec& d) {
  auto owner = [&](double x) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < s.size(); ++i)
      if (std::fabs(x - s[i]) < std::fabs(x - s[best])) best = i;
    return best;
  };
  std::vector<double> cuts{d.lower(), d.upper()};
  for (Eigen::Index a = 0; a < s.size(); ++a)
    for (Eigen::Index b = a + 1; b < s.size(); ++b) cuts.push_back((s[a] + s[b]) / 2);
  std::sort(cuts.begin(), cuts.end());
  double total = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double lo = std::max(cuts[c], d.lower()), hi = std::min(cuts[c + 1], d.upper());
    if (!(lo < hi)) continue;
    if (owner((lo + hi) / 2) != j) continue;
    total += testing::integrate([&](double x) { return pdf(d, x); }, lo, hi, {classify(d).turning_point}, 1e-12);
  }
  return total;
}

}  // namespace

TEST_SUITE("proxy") {
  TEST_CASE("interval weights examples") {
    Eigen::Vector4d s(1, 3, 6, 7);
    const auto w = interval_weights(s, Uniform{0, 10}).weights;
    CHECK(w[0] == doctest::Approx(0.2));
    CHECK(w[1] == doctest::Approx(0.25));
    CHECK(w[2] == doctest::Approx(0.2));
    CHECK(w[3] == doctest::Approx(0.35));

    const auto w2 = interval_weights(Eigen::Vector3d(0.25, 0.25, 1), Uniform{0, 1}).weights;
    CHECK(w2[0] == doctest::Approx(0.625));
    CHECK(w2[1] == 0.0);
    CHECK(w2[2] == doctest::Approx(0.375));

    Eigen::VectorXd one(1);
    one << 0.3;
    CHECK(interval_weights(one, TruncatedNormal{0, 0.3, -1, 1}).weights[0] == doctest::Approx(1.0));
    CHECK_THROWS(interval_weights(Eigen::Vector2d(0.5, 2.0), Uniform{0, 1}));
    CHECK_THROWS(interval_weights(Eigen::VectorXd(), Uniform{0, 1}));
  }

  TEST_CASE("exact interval weights over rationals") {
    VectorX<Rational> s(4);
    s << Rational(1), Rational(3), Rational(6), Rational(7);
    auto F = [](const Rational& x) { return x / Rational(10); };
    const auto w = interval_weights(s, Rational(0), Rational(10), F);
    CHECK(w[0] == Rational(1, 5));
    CHECK(w[1] == Rational(1, 4));
    CHECK(w[2] == Rational(1, 5));
    CHECK(w[3] == Rational(7, 20));
  }

  TEST_CASE("interval weights sum to one") {
    Stream rng(7);
    for (int t = 0; t < 10000; ++t) {
      const auto d = families()[static_cast<std::size_t>(t % 5)];
      const auto n = 1 + static_cast<Eigen::Index>(rng.below(30));
      const Eigen::VectorXd s = sample(d, n, rng);
      const auto w = interval_weights(s, d).weights;
      REQUIRE(std::fabs(w.sum() - 1.0) < 1e-12);
      REQUIRE(w.minCoeff() >= 0);
    }
  }

  TEST_CASE("interval weights equal the Voronoi cell mass") {
    Stream rng(8);
    for (int t = 0; t < 300; ++t) {
      const auto d = families()[static_cast<std::size_t>(t % 5)];
      const auto n = 1 + static_cast<Eigen::Index>(rng.below(8));
      const Eigen::VectorXd s = sample(d, n, rng);
      const auto w = interval_weights(s, d).weights;
      for (Eigen::Index j = 0; j < n; ++j) REQUIRE(std::fabs(w[j] - cell_mass(s, j, d)) < 1e-7);
    }
  }

  TEST_CASE("the proxy median is the sample point nearest the population median") {
    Stream rng(9);
    for (int t = 0; t < 100000; ++t) {
      const auto d = families()[static_cast<std::size_t>(t % 5)];
      const double x = distribution_median(d);
      const auto n = 1 + static_cast<Eigen::Index>(rng.below(25));
      const Eigen::VectorXd s = sample(d, n, rng);
      const double p = scenario_outcome(Scenario::Proxy, Mechanism::Median, s, d).outcome.point();
      const double b = scenario_outcome(Scenario::Basic, Mechanism::Median, s, d).outcome.point();
      REQUIRE(std::fabs(p - x) == (s.array() - x).abs().minCoeff());
      REQUIRE(std::fabs(p - x) <= std::fabs(b - x));
    }
  }

  TEST_CASE("two-agent proxy mean against the plain mean") {
    Stream rng(10);
    const std::vector<DistributionSpec> sym{Uniform{-1, 1}, Triangular{-1, 0, 1}, TruncatedNormal{0, 1, -1, 1}};
    for (int t = 0; t < 100000; ++t) {
      const auto d = sym[static_cast<std::size_t>(t % 3)];
      const Eigen::VectorXd s = sample(d, 2, rng);
      const double p = scenario_outcome(Scenario::Proxy, Mechanism::Mean, s, d).outcome.point();
      const double b = scenario_outcome(Scenario::Basic, Mechanism::Mean, s, d).outcome.point();
      REQUIRE(std::fabs(p) <= std::fabs(b) + 1e-12);
    }

    // A sharp peak breaks the claim: the far agent's cell overshoots x* = 0
    // once (s2 - s1) f(0) exceeds 2.
    const DistributionSpec peaked = TruncatedNormal{0, 0.3, -1, 1};
    const Eigen::Vector2d s(-0.9, 0.95);
    const double p = scenario_outcome(Scenario::Proxy, Mechanism::Mean, s, peaked).outcome.point();
    CHECK(p < 0);
    CHECK(std::fabs(p) > 0.025);
    CHECK(std::fabs(p) > std::fabs(scenario_outcome(Scenario::Basic, Mechanism::Mean, s, peaked).outcome.point()));
  }

  TEST_CASE("hamming delegate") {
    const auto actives = BitMatrix::from_strings({"001", "111"});
    CHECK(hamming_delegate(BitVector::from_string("000"), actives) == 0);
    CHECK(hamming_delegate(BitVector::from_string("111"), actives) == 1);
    const auto six = BitMatrix::from_strings({"1111", "0000", "0011", "1110", "1101", "1100"});
    // 0001 is one bit away from both row 1 and row 2.
    CHECK(hamming_delegate(BitVector::from_string("0001"), six) == 1);
    CHECK(hamming_delegate(BitVector::from_string("0111"), BitMatrix::from_strings({"1111", "0011"})) == 0);
    CHECK_THROWS(hamming_delegate(BitVector::from_string("0"), BitMatrix(0, 1)));
    CHECK_THROWS(hamming_delegate(BitVector::from_string("01"), actives));
  }

  TEST_CASE("binary weights") {
    const auto pop = BitMatrix::from_strings({"000", "011", "110", "111"});
    const std::vector<Eigen::Index> all{0, 1, 2, 3};
    CHECK(binary_weights(pop, all).weights == Eigen::Vector4d::Ones());
    const std::vector<Eigen::Index> one{2};
    CHECK(binary_weights(pop, one).weights[0] == 4);
    CHECK_THROWS(binary_weights(pop, std::vector<Eigen::Index>{}));

    Stream rng(11);
    for (int t = 0; t < 500; ++t) {
      BitMatrix p(10, 9);
      for (Eigen::Index i = 0; i < 10; ++i)
        for (int j = 0; j < 9; ++j) p.set(i, j, rng.below(2) == 1);
      std::vector<Eigen::Index> act;
      while (act.size() < 3) {
        const auto c = static_cast<Eigen::Index>(rng.below(10));
        if (std::find(act.begin(), act.end(), c) == act.end()) act.push_back(c);
      }
      Eigen::Vector3d expect = Eigen::Vector3d::Zero();
      for (Eigen::Index r = 0; r < 10; ++r) {
        int best_d = 1 << 30;
        Eigen::Index best_row = -1;
        std::size_t best = 0;
        for (std::size_t a = 0; a < 3; ++a) {
          const int dist = p.hamming(r, p, act[a]);
          if (dist < best_d || (dist == best_d && act[a] < best_row)) {
            best_d = dist;
            best_row = act[a];
            best = a;
          }
        }
        expect[static_cast<Eigen::Index>(best)] += 1;
      }
      const auto w = binary_weights(p, act).weights;
      REQUIRE(w == expect);
      REQUIRE(w.sum() == 10);
    }
  }

  TEST_CASE("scenario outcomes") {
    const Eigen::Vector4d s(1, 3, 6, 7);
    const DistributionSpec d = Uniform{0, 10};
    CHECK(scenario_outcome(Scenario::Proxy, Mechanism::Median, s, d).outcome.point() == 6);
    const auto pl = scenario_outcome(Scenario::ProxyLazy, Mechanism::Median, s, d);
    CHECK(pl.outcome.point() == 6);
    CHECK(pl.active == std::vector<Eigen::Index>{2});
    CHECK(scenario_outcome(Scenario::Basic, Mechanism::Mean, s, d).outcome.point() == doctest::Approx(4.25));
    CHECK_THROWS(scenario_outcome(Scenario::Basic, Mechanism::Majority, s, d));

    const auto pop = BitMatrix::from_strings({"000", "001", "011", "111", "110"});
    const std::vector<Eigen::Index> sample{0, 3};
    CHECK(scenario_outcome(Scenario::Basic, pop, sample).outcome.bits().to_string() == "000");
    // Row 1 -> 0; row 2 -> 3; row 4 -> 3: weights (2, 3).
    CHECK(scenario_outcome(Scenario::Proxy, pop, sample).outcome.bits().to_string() == "111");
  }

  TEST_CASE("scenario names") {
    CHECK(parse_scenario("P+L") == Scenario::ProxyLazy);
    CHECK(parse_scenario("b+l") == Scenario::BasicLazy);
    CHECK(to_string(Scenario::Proxy) == "P");
    CHECK_THROWS(parse_scenario("Q"));
  }
}
