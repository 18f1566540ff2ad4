#include "proxyvote/harness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "proxyvote/strategic.hpp"
#include "proxyvote/text.hpp"

namespace proxyvote {

void validate(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw std::invalid_argument("a seed is required");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (cfg.ns.empty()) throw std::invalid_argument("the n grid is empty");
  if (cfg.scenarios.empty()) throw std::invalid_argument("no scenarios given");
  for (long n : cfg.ns)
    if (n < 1) throw std::invalid_argument("every n must be positive");
  if (cfg.cap && *cfg.cap < 1) throw std::invalid_argument("cap must be at least 1");
  if (cfg.workers < 0) throw std::invalid_argument("workers must be nonnegative");
  switch (cfg.kind) {
    case SourceKind::Distribution:
      if (!cfg.distribution) throw std::invalid_argument("interval experiments need a distribution");
      if (cfg.mechanism == Mechanism::Majority) throw std::invalid_argument("majority needs binary data");
      break;
    case SourceKind::BinaryModel:
      if (!cfg.model) throw std::invalid_argument("binary experiments need a model");
      if (cfg.mechanism != Mechanism::Majority) throw std::invalid_argument("binary data only supports majority");
      for (long n : cfg.ns)
        if (n > cfg.population) throw std::invalid_argument("n exceeds the population size");
      break;
    case SourceKind::Dataset:
      if (!cfg.dataset) throw std::invalid_argument("dataset experiments need a dataset");
      if (cfg.mechanism != Mechanism::Majority) throw std::invalid_argument("binary data only supports majority");
      if (cfg.k_sub < 1 || cfg.k_sub > cfg.dataset->matrix.cols())
        throw std::invalid_argument("ksub must lie in [1, number of issues]");
      for (long n : cfg.ns)
        if (n > cfg.dataset->matrix.rows()) throw std::invalid_argument("n exceeds the number of voters");
      break;
  }
}

namespace {

struct TrialResult {
  double outcome = std::nan("");
  double loss = std::nan("");
  bool converged = true;
};

// Runs trials [begin, end) of one point into `out` (row-major trial x scenario).
void run_trials(const ExperimentConfig& cfg, std::size_t point, long n, long begin, long end,
                std::vector<TrialResult>& out) {
  const std::size_t ns = cfg.scenarios.size();
  DynamicsOptions options;
  options.cap = cfg.cap;

  if (cfg.kind == SourceKind::Distribution) {
    const DistributionSpec& d = *cfg.distribution;
    const double optimum = cfg.mechanism == Mechanism::Median ? distribution_median(d) : distribution_mean(d);
    for (long t = begin; t < end; ++t) {
      Stream rng = Stream::derive(*cfg.seed, point, static_cast<std::uint64_t>(t));
      const Eigen::VectorXd s = sample(d, n, rng);
      if (cfg.mechanism == Mechanism::Median && cfg.check_median_dominance) {
        const double eb = std::fabs(median(s) - optimum);
        const double ep = std::fabs(median(s, interval_weights(s, d).weights) - optimum);
        if (ep > eb)
          throw std::logic_error("proxy median lost to the basic median at n=" + std::to_string(n) + ", trial " +
                                 std::to_string(t));
      }
      for (std::size_t q = 0; q < ns; ++q) {
        const auto r = scenario_outcome(cfg.scenarios[q], cfg.mechanism, s, d, &options);
        TrialResult& tr = out[static_cast<std::size_t>(t) * ns + q];
        tr.converged = r.converged;
        tr.outcome = r.outcome.point();
        tr.loss = (tr.outcome - optimum) * (tr.outcome - optimum);
      }
    }
    return;
  }

  std::optional<BitVector> dataset_truth;
  if (cfg.kind == SourceKind::Dataset) dataset_truth = majority(cfg.dataset->matrix);
  for (long t = begin; t < end; ++t) {
    Stream rng = Stream::derive(*cfg.seed, point, static_cast<std::uint64_t>(t));
    BitMatrix pop;
    BitVector truth;
    if (cfg.kind == SourceKind::BinaryModel) {
      pop = generate(*cfg.model, cfg.population, rng).bits;
      truth = BitVector(cfg.model->k);
    } else {
      const int k = cfg.dataset->matrix.cols();
      const auto picked = sample_indices(k, cfg.k_sub, rng);
      const std::vector<int> cols(picked.begin(), picked.end());
      pop = cfg.dataset->matrix.select_columns(cols);
      truth = BitVector(cfg.k_sub);
      for (int j = 0; j < cfg.k_sub; ++j) truth.set(j, dataset_truth->get(cols[static_cast<std::size_t>(j)]));
    }
    const auto sample_rows = sample_indices(pop.rows(), n, rng);
    for (std::size_t q = 0; q < ns; ++q) {
      const auto r = scenario_outcome(cfg.scenarios[q], pop, sample_rows, &options);
      TrialResult& tr = out[static_cast<std::size_t>(t) * ns + q];
      tr.converged = r.converged;
      tr.loss = hamming(r.outcome.bits(), truth);
    }
  }
}

}  // namespace

std::vector<LossEstimate> estimate_loss(const ExperimentConfig& cfg, std::size_t point, long n) {
  validate(cfg);
  const std::size_t ns = cfg.scenarios.size();
  std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials) * ns);

  unsigned workers = cfg.workers == 0 ? std::max(1U, std::thread::hardware_concurrency())
                                      : static_cast<unsigned>(cfg.workers);
  workers = static_cast<unsigned>(std::min<long>(workers, cfg.trials));
  if (workers <= 1) {
    run_trials(cfg, point, n, 0, cfg.trials, results);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const long chunk = (cfg.trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const long begin = std::min(cfg.trials, static_cast<long>(w) * chunk);
      const long end = std::min(cfg.trials, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run_trials(cfg, point, n, begin, end, results);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const bool interval = cfg.kind == SourceKind::Distribution;
  const double optimum = !interval ? 0.0
                         : cfg.mechanism == Mechanism::Median ? distribution_median(*cfg.distribution)
                                                              : distribution_mean(*cfg.distribution);
  std::vector<LossEstimate> out;
  for (std::size_t q = 0; q < ns; ++q) {
    LossEstimate e;
    e.scenario = std::string(to_string(cfg.scenarios[q]));
    e.mechanism = std::string(to_string(cfg.mechanism));
    e.source = cfg.source;
    e.n = n;
    std::vector<double> losses, outcomes;
    for (long t = 0; t < cfg.trials; ++t) {
      const TrialResult& tr = results[static_cast<std::size_t>(t) * ns + q];
      if (!tr.converged) {
        ++e.nonconverged;
        continue;
      }
      losses.push_back(tr.loss);
      outcomes.push_back(tr.outcome);
    }
    e.trials = static_cast<long>(losses.size());
    std::tie(e.mean_loss, e.std_error) = mean_and_stderr(losses);
    e.bias_sq = e.variance = std::nan("");
    if (interval && outcomes.size() >= 2) {
      const auto dec = decompose(outcomes, optimum);
      e.bias_sq = dec.bias_sq;
      e.variance = dec.variance;
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<ResultRow> rows;
  for (std::size_t p = 0; p < cfg.ns.size(); ++p)
    for (auto& e : estimate_loss(cfg, p, cfg.ns[p])) rows.push_back({std::move(e), cfg.trials, *cfg.seed});
  return rows;
}

namespace {

std::string cell(double v) { return std::isfinite(v) ? text::format_double(v) : "NA"; }

double parse_cell(std::string_view s) { return s == "NA" ? std::nan("") : text::to_double(s); }

// RFC 4180 quoting for fields holding commas or quotes.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + '"';
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kResultHeader << '\n';
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    os << e.mechanism << ',' << e.scenario << ',' << quoted(e.source) << ',' << e.n << ',' << r.trials << ','
       << cell(e.mean_loss) << ',' << cell(e.std_error) << ',' << cell(e.bias_sq) << ',' << cell(e.variance) << ','
       << e.nonconverged << ',' << r.seed << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || text::trim(line) != kResultHeader)
    throw std::invalid_argument("results CSV: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (text::trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11) throw std::invalid_argument("results CSV: expected 11 fields");
    ResultRow r;
    auto& e = r.estimate;
    e.mechanism = f[0];
    e.scenario = f[1];
    e.source = f[2];
    e.n = static_cast<long>(text::to_int(f[3]));
    r.trials = static_cast<long>(text::to_int(f[4]));
    e.mean_loss = parse_cell(f[5]);
    e.std_error = parse_cell(f[6]);
    e.bias_sq = parse_cell(f[7]);
    e.variance = parse_cell(f[8]);
    e.nonconverged = static_cast<long>(text::to_int(f[9]));
    e.trials = r.trials - e.nonconverged;
    r.seed = std::stoull(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

SlopeFit slope_fit(const std::vector<ResultRow>& rows, Scenario scenario, Mechanism mechanism) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    if (e.scenario != to_string(scenario) || e.mechanism != to_string(mechanism)) continue;
    if (!(e.mean_loss > 0) || e.n < 1) continue;
    x.push_back(std::log(static_cast<double>(e.n)));
    y.push_back(std::log(e.mean_loss));
  }
  if (x.size() < 4) throw std::invalid_argument("slope_fit: need at least 4 grid points with positive loss");
  if (std::set<double>(x.begin(), x.end()).size() < 2) throw std::invalid_argument("slope_fit: degenerate grid");
  const auto m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[static_cast<std::size_t>(i)];
    b[i] = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd resid = b - A * coef;
  const double ss_tot = (b.array() - b.mean()).square().sum();
  SlopeFit fit;
  fit.intercept = coef[0];
  fit.slope = coef[1];
  fit.r2 = ss_tot > 0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
  fit.points = static_cast<int>(m);
  return fit;
}

std::vector<RatioRow> ratio_table(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<std::string, std::string, long, std::string>, double> loss;
  for (const auto& r : rows)
    loss[{r.estimate.mechanism, r.estimate.source, r.estimate.n, r.estimate.scenario}] = r.estimate.mean_loss;
  std::vector<RatioRow> out;
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    std::string partner;
    if (e.scenario == "B") partner = "P";
    else if (e.scenario == "B+L") partner = "P+L";
    else continue;
    const auto it = loss.find({e.mechanism, e.source, e.n, partner});
    if (it == loss.end()) continue;
    RatioRow row{e.mechanism, e.source, e.n, e.mean_loss, it->second, e.mean_loss / it->second};
    out.push_back(std::move(row));
  }
  return out;
}

void write_ratio_csv(std::ostream& os, const std::vector<RatioRow>& rows) {
  os << "mechanism,source,n,loss_basic,loss_proxy,ratio\n";
  for (const auto& r : rows)
    os << r.mechanism << ',' << quoted(r.source) << ',' << r.n << ',' << cell(r.basic) << ',' << cell(r.proxy) << ','
       << cell(r.ratio) << '\n';
}

std::vector<long> parse_n_grid(const std::string& grid) {
  std::vector<long> out;
  const std::string_view s = text::trim(grid);
  if (s.find(':') != std::string_view::npos) {
    const auto parts = text::split(s, ':');
    if (parts.size() != 3) throw std::invalid_argument("n grid range must be lo:hi:count");
    const double lo = static_cast<double>(text::to_int(parts[0]));
    const double hi = static_cast<double>(text::to_int(parts[1]));
    const long count = static_cast<long>(text::to_int(parts[2]));
    if (lo < 1 || hi < lo || count < 1) throw std::invalid_argument("bad n grid range");
    for (long i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      const long v = std::lround(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
      if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
  }
  for (auto tok : text::split(s, ',')) {
    if (text::trim(tok).empty()) continue;
    out.push_back(static_cast<long>(text::to_int(text::trim(tok))));
  }
  if (out.empty()) throw std::invalid_argument("empty n grid");
  return out;
}

}  // namespace proxyvote
