#include "proxyvote/binary.hpp"

#include <cmath>
#include <stdexcept>

#include "proxyvote/analytics.hpp"
#include "proxyvote/proxy.hpp"
#include "proxyvote/text.hpp"

namespace proxyvote {

BinaryPopulationModel parse_binary_model(std::string_view literal) {
  std::string_view body = text::trim(literal);
  if (body.starts_with("binary:")) body.remove_prefix(7);
  const auto at = body.rfind(",k=");
  if (at == std::string_view::npos) throw std::invalid_argument("binary model needs a ,k=<issues> suffix");
  const long long k = text::to_int(body.substr(at + 3));
  if (k < 1) throw std::invalid_argument("binary model: k must be positive");
  return {parse_competence(body.substr(0, at)), static_cast<int>(k)};
}

std::string to_literal(const BinaryPopulationModel& m) {
  return "binary:" + to_literal(m.h) + ",k=" + std::to_string(m.k);
}

namespace {

// Base-256 digits of p in [0,1), most significant first, trailing zeros dropped.
std::vector<std::uint8_t> byte_expansion(double p) {
  std::vector<std::uint8_t> digits;
  double frac = p;
  while (frac > 0 && digits.size() < 160) {
    frac *= 256.0;
    const double d = std::floor(frac);
    digits.push_back(static_cast<std::uint8_t>(d));
    frac -= d;
  }
  while (!digits.empty() && digits.back() == 0) digits.pop_back();
  return digits;
}

class ByteSource {
 public:
  explicit ByteSource(Stream& rng) : rng_(rng) {}
  std::uint8_t next() {
    if (left_ == 0) {
      word_ = rng_();
      left_ = 8;
    }
    const auto b = static_cast<std::uint8_t>(word_);
    word_ >>= 8;
    --left_;
    return b;
  }

 private:
  Stream& rng_;
  std::uint64_t word_ = 0;
  int left_ = 0;
};

}  // namespace

void fill_bernoulli_row(BitMatrix& bits, Eigen::Index i, double p, Stream& rng) {
  if (!(0 <= p && p <= 1)) throw std::invalid_argument("fill_bernoulli_row: p outside [0,1]");
  std::uint64_t* row = bits.row_data(i);
  const int k = bits.cols();
  for (Eigen::Index w = 0; w < bits.words_per_row(); ++w) row[w] = 0;
  if (p == 0) return;
  if (p == 1) {
    for (int j = 0; j < k; ++j) row[j >> 6] |= std::uint64_t{1} << (j & 63);
    return;
  }
  const auto digits = byte_expansion(p);
  ByteSource src(rng);
  for (int j = 0; j < k; ++j) {
    bool one = false;
    for (std::size_t t = 0; t < digits.size(); ++t) {
      const std::uint8_t c = src.next();
      if (c != digits[t]) {
        one = c < digits[t];
        break;
      }
    }
    if (one) row[j >> 6] |= std::uint64_t{1} << (j & 63);
  }
}

GeneratedPopulation generate(const BinaryPopulationModel& model, Eigen::Index n, Stream& rng) {
  if (n < 1) throw std::invalid_argument("generate: n must be positive");
  GeneratedPopulation out{BitMatrix(n, model.k), model.h.sample(n, rng)};
  for (Eigen::Index i = 0; i < n; ++i) fill_bernoulli_row(out.bits, i, out.competence[i], rng);
  return out;
}

std::vector<Eigen::Index> sample_indices(Eigen::Index population, Eigen::Index n, Stream& rng) {
  if (n < 0 || n > population) throw std::invalid_argument("sample_indices: n outside [0, population]");
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(population));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto j = t + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(population - t)));
    std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(n));
  return pool;
}

Eigen::VectorXd empirical_competence(const BitMatrix& pop) {
  if (pop.rows() == 0) throw std::invalid_argument("empirical_competence: empty population");
  const BitVector m = majority(pop);
  Eigen::VectorXd out(pop.rows());
  for (Eigen::Index i = 0; i < pop.rows(); ++i) out[i] = static_cast<double>(pop.hamming(i, m)) / pop.cols();
  return out;
}

BitMatrix flip_columns(const BitMatrix& pop, const BitVector& mask) {
  if (mask.size() != pop.cols()) throw std::invalid_argument("flip_columns: mask length differs from k");
  BitMatrix out = pop;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    std::uint64_t* row = out.row_data(i);
    for (Eigen::Index w = 0; w < out.words_per_row(); ++w) row[w] ^= mask.words()[static_cast<std::size_t>(w)];
  }
  return out;
}

std::pair<BitMatrix, BitVector> relabel_majority_to_zero(const BitMatrix& pop) {
  BitVector mask = majority(pop);
  return {flip_columns(pop, mask), std::move(mask)};
}

BitVector proxy_majority_finite_k(const BitMatrix& pop, std::span<const Eigen::Index> sample) {
  const auto w = binary_weights(pop, sample);
  return majority(pop, sample, std::span<const double>(w.weights.data(), static_cast<std::size_t>(w.weights.size())));
}

std::vector<CrossoverRow> basic_vs_proxy_crossover(const BinaryPopulationModel& model, std::span<const long> ns,
                                                   long trials, Eigen::Index population_size, std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("basic_vs_proxy_crossover: need at least two trials");
  std::vector<CrossoverRow> rows;
  for (std::size_t point = 0; point < ns.size(); ++point) {
    const long n = ns[point];
    if (n < 1 || n > population_size) throw std::invalid_argument("basic_vs_proxy_crossover: n outside the population");
    std::vector<double> lb, lp;
    for (long t = 0; t < trials; ++t) {
      Stream rng = Stream::derive(seed, point, static_cast<std::uint64_t>(t));
      const auto pop = generate(model, population_size, rng);
      const auto sample = sample_indices(population_size, n, rng);
      lb.push_back(majority(pop.bits, sample).count());
      lp.push_back(proxy_majority_finite_k(pop.bits, sample).count());
    }
    CrossoverRow row;
    row.n = n;
    std::tie(row.basic_loss, row.basic_stderr) = mean_and_stderr(lb);
    std::tie(row.proxy_loss, row.proxy_stderr) = mean_and_stderr(lp);
    row.basic_analytic = condorcet_loss(n, model.mu(), model.k);
    row.proxy_analytic = model.dictator_side() ? dictator_loss(model.h, n, model.k) : std::nan("");
    rows.push_back(row);
  }
  return rows;
}

}  // namespace proxyvote
