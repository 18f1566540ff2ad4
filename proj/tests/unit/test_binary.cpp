#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "proxyvote/analytics.hpp"
#include "proxyvote/binary.hpp"
#include "support.hpp"

using namespace proxyvote;

TEST_SUITE("binary") {
  TEST_CASE("model literals") {
    const auto m = parse_binary_model("binary:uniform,0.66,k=15");
    CHECK(m.k == 15);
    CHECK(m.mu() == doctest::Approx(0.33));
    CHECK(m.dictator_side());
    CHECK(to_literal(parse_binary_model(to_literal(m))) == to_literal(m));
    CHECK(parse_binary_model("tnorm,0.33,0.3,k=2000").k == 2000);
    CHECK_FALSE(parse_binary_model("uniform,1,k=3").dictator_side());
    CHECK_THROWS(parse_binary_model("uniform,0.66"));
    CHECK_THROWS(parse_binary_model("uniform,0.66,k=0"));
  }

  TEST_CASE("degenerate competences") {
    BitMatrix b(3, 130);
    Stream rng(1);
    fill_bernoulli_row(b, 0, 0.0, rng);
    fill_bernoulli_row(b, 1, 1.0, rng);
    fill_bernoulli_row(b, 2, 0.5, rng);
    CHECK(b.row(0).count() == 0);
    CHECK(b.row(1).count() == 130);
    CHECK_THROWS(fill_bernoulli_row(b, 0, 1.5, rng));

    Stream r2(2);
    const auto pop = generate({PointMassAt{0.0}, 20}, 50, r2);
    for (Eigen::Index i = 0; i < 50; ++i) CHECK(pop.bits.row(i).count() == 0);
  }

  TEST_CASE("Bernoulli bit frequencies") {
    for (double p : {0.5, 0.1, 1.0 / 3, 0.999, 1e-3, 0.33}) {
      BitMatrix b(1, 200000);
      Stream rng(3);
      fill_bernoulli_row(b, 0, p, rng);
      const double freq = b.row(0).count() / 200000.0;
      CHECK(std::fabs(freq - p) < 4 * std::sqrt(p * (1 - p) / 200000));
    }
  }

  TEST_CASE("population moments and determinism") {
    const BinaryPopulationModel m{UniformOn{0.66}, 40};
    Stream a(4), b(4);
    const auto pa = generate(m, 5000, a);
    const auto pb = generate(m, 5000, b);
    CHECK(pa.bits.words() == pb.bits.words());
    CHECK(pa.competence == pb.competence);
    double ones = 0;
    for (Eigen::Index i = 0; i < 5000; ++i) ones += pa.bits.row(i).count();
    const double freq = ones / (5000.0 * 40);
    CHECK(std::fabs(freq - 0.33) < 0.01);
    CHECK(pa.competence.maxCoeff() <= 0.66);
    CHECK(pa.competence.minCoeff() >= 0);
  }

  TEST_CASE("index sampling") {
    Stream rng(5);
    for (int t = 0; t < 200; ++t) {
      const auto s = sample_indices(30, 10, rng);
      CHECK(std::set<Eigen::Index>(s.begin(), s.end()).size() == 10);
      CHECK(*std::max_element(s.begin(), s.end()) < 30);
    }
    std::vector<int> hits(5, 0);
    for (int t = 0; t < 50000; ++t) ++hits[static_cast<std::size_t>(sample_indices(5, 1, rng)[0])];
    for (int h : hits) CHECK(std::abs(h - 10000) < 400);
    CHECK_THROWS(sample_indices(3, 4, rng));
  }

  TEST_CASE("empirical competence on a hand matrix") {
    // Majority is 001; distances 0, 1, 2, 1, 0.
    const auto pop = BitMatrix::from_strings({"001", "011", "100", "000", "001"});
    const Eigen::VectorXd c = empirical_competence(pop);
    CHECK(c[0] == 0);
    CHECK(c[1] == doctest::Approx(1.0 / 3));
    CHECK(c[2] == doctest::Approx(2.0 / 3));
    CHECK(c[3] == doctest::Approx(1.0 / 3));
  }

  TEST_CASE("relabeling") {
    Stream rng(6);
    for (int t = 0; t < 300; ++t) {
      const auto rows = 1 + static_cast<Eigen::Index>(rng.below(15));
      const int k = 1 + static_cast<int>(rng.below(100));
      BitMatrix pop(rows, k);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (int j = 0; j < k; ++j) pop.set(i, j, rng.below(2) == 1);
      const auto [relabeled, mask] = relabel_majority_to_zero(pop);
      REQUIRE(majority(relabeled).count() == 0);
      REQUIRE(flip_columns(relabeled, mask).words() == pop.words());
      REQUIRE(flip_columns(flip_columns(pop, mask), mask).words() == pop.words());
      // Competence after relabeling is the row mean of ones.
      const Eigen::VectorXd c = empirical_competence(relabeled);
      for (Eigen::Index i = 0; i < rows; ++i)
        REQUIRE(c[i] == doctest::Approx(static_cast<double>(relabeled.row(i).count()) / k));
      REQUIRE(empirical_competence(pop) == c);
    }
  }

  TEST_CASE("finite-k proxy majority") {
    // Rows 1, 2 follow row 0 (weights 3, 2): the weighted vote takes row 0's bits.
    const auto pop = BitMatrix::from_strings({"110", "111", "100", "001", "000"});
    const std::vector<Eigen::Index> sample{0, 4};
    CHECK(proxy_majority_finite_k(pop, sample).to_string() == "110");
    const std::vector<Eigen::Index> one{3};
    CHECK(proxy_majority_finite_k(pop, one).to_string() == "001");
  }

  TEST_CASE("homogeneous juries follow the binomial tail") {
    const BinaryPopulationModel m{PointMassAt{0.3}, 20};
    const std::vector<long> ns{1, 5, 11};
    const auto rows = basic_vs_proxy_crossover(m, ns, 4000, 11, 7);
    for (const auto& r : rows) {
      CHECK(std::fabs(r.basic_loss - condorcet_loss(r.n, 0.3, 20)) < 4 * r.basic_stderr + 1e-12);
      CHECK(r.basic_analytic == doctest::Approx(condorcet_loss(r.n, 0.3, 20)));
      CHECK(r.proxy_analytic == doctest::Approx(6.0));
    }
  }

  TEST_CASE("few competent agents favour the plain majority") {
    // With mean competence 0.05 the jury of 101 is almost never wrong, while
    // the best of 101 draws still errs.
    const CompetenceDistribution h = UniformOn{0.1};
    CHECK(condorcet_loss(101, h.mean(), 15) < dictator_loss(h, 101, 15));
  }
}
