#pragma once

// Multi-issue binary domain. Voter i has competence P_i drawn from h and votes
// 1 on each of k issues independently with probability P_i; the population
// majority is the all-zeros vector.

#include <Eigen/Core>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proxyvote/bits.hpp"
#include "proxyvote/distributions.hpp"
#include "proxyvote/mechanisms.hpp"
#include "proxyvote/rng.hpp"

namespace proxyvote {

struct BinaryPopulationModel {
  CompetenceDistribution h;
  int k = 1;

  double mu() const { return h.mean(); }
  /// Median of h below 1/2, so the most competent sampled agent ends up a dictator for large k.
  bool dictator_side() const { return h.median() < 0.5; }
};

/// `binary:uniform,0.66,k=15`, `binary:tnorm,0.33,0.3,k=15`, `binary:point,0.2,k=15`.
/// The `binary:` prefix is optional.
BinaryPopulationModel parse_binary_model(std::string_view literal);
std::string to_literal(const BinaryPopulationModel& m);

struct GeneratedPopulation {
  BitMatrix bits;
  Eigen::VectorXd competence;
};

/// n rows of k Bernoulli(P_i) bits with P_i drawn from h.
GeneratedPopulation generate(const BinaryPopulationModel& model, Eigen::Index n, Stream& rng);

/// Fills row i of `bits` with independent Bernoulli(p) bits. Exact for the
/// double p: a uniform byte stream is compared against the binary expansion
/// of p, reading further bytes only on a tie.
void fill_bernoulli_row(BitMatrix& bits, Eigen::Index i, double p, Stream& rng);

/// n distinct indices from [0, population), uniformly, in draw order.
std::vector<Eigen::Index> sample_indices(Eigen::Index population, Eigen::Index n, Stream& rng);

/// Per-row fraction of issues that disagree with the population majority.
Eigen::VectorXd empirical_competence(const BitMatrix& pop);

/// Complements every column whose majority is 1. Returns the relabeled matrix
/// and the mask of flipped columns.
std::pair<BitMatrix, BitVector> relabel_majority_to_zero(const BitMatrix& pop);

/// XORs every row with `mask`; undoes relabel_majority_to_zero.
BitMatrix flip_columns(const BitMatrix& pop, const BitVector& mask);

/// Weighted majority of the sampled rows with follower counts from the whole
/// population.
BitVector proxy_majority_finite_k(const BitMatrix& pop, std::span<const Eigen::Index> sample);

struct CrossoverRow {
  long n = 0;
  double basic_loss = 0, basic_stderr = 0;
  double proxy_loss = 0, proxy_stderr = 0;
  double basic_analytic = 0;
  double proxy_analytic = 0;  ///< NaN when h is not on the dictator side
};

/// Monte Carlo basic and proxy losses against the all-zeros truth, beside
/// the jury and dictator formulas, for each n.
std::vector<CrossoverRow> basic_vs_proxy_crossover(const BinaryPopulationModel& model, std::span<const long> ns,
                                                   long trials, Eigen::Index population_size, std::uint64_t seed);

}  // namespace proxyvote
