// proxyvote: command-line front end for the simulation engine.
//
//   proxyvote simulate    --mech median --dist uniform:-1,1 --n 10,32,100 --seed 1
//   proxyvote binary-sim  --dist binary:uniform,0.66,k=15 --n 5,10,20 --seed 1
//   proxyvote dataset     --data sushi.soc --n 10,20,50 --ksub 15 --seed 1
//   proxyvote equilibrium --mech mean --scenario P+L --positions 1,3,6,7 --dist uniform:0,10
//   proxyvote oracle      --dist uniform:-1,1 --n 10,100
//
// Every subcommand accepts --config FILE with one `flag=value` per line;
// flags given on the command line take precedence.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>

#include "proxyvote/analytics.hpp"
#include "proxyvote/binary.hpp"
#include "proxyvote/harness.hpp"
#include "proxyvote/preflib.hpp"
#include "proxyvote/strategic.hpp"
#include "proxyvote/text.hpp"

namespace pv = proxyvote;

namespace {

struct Flags {
  std::string mech = "median";
  std::string scenario = "B,P";
  std::string dist;
  std::string data;
  std::string n = "10,32,100,316,1000";
  long trials = 1000;
  std::uint64_t seed = 0;
  std::string out;
  int ksub = 15;
  int cap = 0;
  int workers = 1;
  long population = 2000;
  std::string ratio_out;
  std::string profile_out;
  long profile_n = 10;
  std::string positions;
  bool enumerate = false;
};

void add_common(CLI::App* cmd, Flags& f, bool seed_required) {
  cmd->add_option("--config", "flat key=value file, one flag per line");
  cmd->add_option("--mech", f.mech, "median, mean or majority")->capture_default_str();
  cmd->add_option("--scenario", f.scenario, "comma list of B, P, B+L, P+L")->capture_default_str();
  cmd->add_option("--n", f.n, "comma list, or lo:hi:count log-spaced")->capture_default_str();
  cmd->add_option("--trials", f.trials, "trials per grid point")->capture_default_str()->check(CLI::PositiveNumber);
  auto* seed = cmd->add_option("--seed", f.seed, "master seed");
  if (seed_required) seed->required();
  cmd->add_option("--out", f.out, "output CSV (stdout when omitted)");
  cmd->add_option("--cap", f.cap, "dynamics step cap (default 50 n)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--workers", f.workers, "worker threads, 0 for all cores")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

// Arguments with the entries of any --config file spliced in right after the
// subcommand, so that later command-line flags override them.
std::vector<std::string> with_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::vector<std::string> entries;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--" || item.inputs.empty()) continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    entries.push_back("--" + item.name + "=" + value);
  }
  args.insert(args.begin() + 1, entries.begin(), entries.end());
  return args;
}

std::vector<pv::Scenario> scenarios(const std::string& list) {
  std::vector<pv::Scenario> out;
  for (auto tok : pv::text::split(list, ','))
    if (!pv::text::trim(tok).empty()) out.push_back(pv::parse_scenario(pv::text::trim(tok)));
  return out;
}

// Writes to --out, or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

pv::ExperimentConfig base_config(const Flags& f) {
  pv::ExperimentConfig cfg;
  cfg.mechanism = pv::parse_mechanism(f.mech);
  cfg.scenarios = scenarios(f.scenario);
  cfg.ns = pv::parse_n_grid(f.n);
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  if (f.cap > 0) cfg.cap = f.cap;
  cfg.workers = f.workers;
  cfg.k_sub = f.ksub;
  cfg.population = f.population;
  return cfg;
}

void emit(const Flags& f, const pv::ExperimentConfig& cfg) {
  const auto rows = pv::run_experiment(cfg);
  Output out(f.out);
  pv::write_results_csv(out.stream(), rows);
  if (!f.ratio_out.empty()) {
    std::ofstream r(f.ratio_out);
    if (!r) throw std::runtime_error("cannot write " + f.ratio_out);
    pv::write_ratio_csv(r, pv::ratio_table(rows));
  }
}

int run_simulate(const Flags& f) {
  auto cfg = base_config(f);
  cfg.kind = pv::SourceKind::Distribution;
  cfg.distribution = pv::parse_distribution(f.dist);
  cfg.source = pv::to_literal(*cfg.distribution);
  emit(f, cfg);
  return 0;
}

int run_binary(const Flags& f) {
  auto cfg = base_config(f);
  cfg.mechanism = pv::Mechanism::Majority;
  cfg.kind = pv::SourceKind::BinaryModel;
  cfg.model = pv::parse_binary_model(f.dist);
  cfg.source = pv::to_literal(*cfg.model);
  emit(f, cfg);
  return 0;
}

int run_dataset(const Flags& f) {
  const auto ds = pv::load_dataset(f.data);
  auto cfg = base_config(f);
  cfg.mechanism = pv::Mechanism::Majority;
  cfg.kind = pv::SourceKind::Dataset;
  cfg.dataset = &ds;
  cfg.source = ds.source + ":ksub=" + std::to_string(f.ksub);
  if (ds.dropped > 0) std::cerr << "dropped " << ds.dropped << " incomplete ballots\n";
  emit(f, cfg);
  if (!f.profile_out.empty()) {
    const auto profile = pv::weight_profile(ds, f.profile_n, f.trials, f.seed);
    std::ofstream p(f.profile_out);
    if (!p) throw std::runtime_error("cannot write " + f.profile_out);
    p << "rank,mean_weight\n";
    for (Eigen::Index r = 0; r < profile.mean_weight.size(); ++r)
      p << (r + 1) << ',' << pv::text::format_double(profile.mean_weight[r]) << '\n';
    std::cerr << "weight/competence-rank spearman: " << pv::text::format_double(profile.spearman) << '\n';
  }
  return 0;
}

void print_equilibrium(std::ostream& os, const pv::EquilibriumResult& eq, const std::string& label) {
  os << "# " << label << ": active";
  for (auto i : eq.active) os << ' ' << i;
  os << "; outcome ";
  if (!eq.outcome) os << "none";
  else if (eq.outcome->is_point()) os << pv::text::format_double(eq.outcome->point());
  else os << eq.outcome->bits().to_string();
  os << "; converged " << (eq.converged ? "yes" : "no") << "; steps " << eq.steps << '\n';
}

int run_equilibrium(const Flags& f) {
  const auto scen = scenarios(f.scenario);
  if (scen.size() != 1 || !pv::is_strategic(scen.front()))
    throw std::invalid_argument("equilibrium needs exactly one of B+L, P+L");
  const auto scenario = scen.front();
  pv::DynamicsOptions opt;
  opt.record_trace = true;
  if (f.cap > 0) opt.cap = f.cap;
  pv::Stream rng(f.seed);
  Output out(f.out);

  const auto grid = pv::parse_n_grid(f.n);
  if (pv::text::trim(f.dist).starts_with("binary:")) {
    const auto model = pv::parse_binary_model(f.dist);
    const auto pop = pv::generate(model, f.population, rng);
    const auto sample = pv::sample_indices(f.population, grid.front(), rng);
    const pv::BinaryGame game(scenario == pv::Scenario::ProxyLazy, pop.bits, sample);
    const auto eq = pv::best_response_dynamics(game, opt);
    pv::write_trace_csv(out.stream(), eq, pv::Outcome{pv::BitVector(model.k)});
    print_equilibrium(std::cerr, eq, "dynamics");
    if (f.enumerate)
      for (const auto& e : pv::enumerate_equilibria(game)) print_equilibrium(std::cerr, e, "equilibrium");
    return 0;
  }

  const auto mech = pv::parse_mechanism(f.mech);
  const auto d = pv::parse_distribution(f.dist);
  Eigen::VectorXd positions;
  if (!f.positions.empty()) {
    const auto toks = pv::text::split(f.positions, ',');
    positions.resize(static_cast<Eigen::Index>(toks.size()));
    for (std::size_t i = 0; i < toks.size(); ++i) positions[static_cast<Eigen::Index>(i)] = pv::text::to_double(toks[i]);
  } else {
    positions = pv::sample(d, grid.front(), rng);
  }
  const auto game = pv::make_game(mech, scenario, positions, d);
  const auto eq = pv::best_response_dynamics(*game, opt);
  const double optimum = mech == pv::Mechanism::Median ? pv::distribution_median(d) : pv::distribution_mean(d);
  pv::write_trace_csv(out.stream(), eq, pv::Outcome{optimum});
  print_equilibrium(std::cerr, eq, "dynamics");
  if (const auto pred = pv::predicted_equilibrium(mech, scenario, positions, d)) {
    std::cerr << "# predicted:";
    for (auto i : *pred) std::cerr << ' ' << i;
    std::cerr << '\n';
  }
  if (f.enumerate)
    for (const auto& e : pv::enumerate_equilibria(*game)) print_equilibrium(std::cerr, e, "equilibrium");
  return 0;
}

int run_oracle(const Flags& f) {
  Output out(f.out);
  auto& os = out.stream();
  os << "formula,params,value\n";
  auto row = [&](const std::string& formula, const std::string& params, auto&& compute) {
    try {
      os << formula << ",\"" << params << "\"," << pv::text::format_double(compute()) << '\n';
    } catch (const std::exception&) {
      // Formula does not apply to these parameters.
    }
  };
  const auto grid = pv::parse_n_grid(f.n);
  const std::string lit(pv::text::trim(f.dist));
  if (lit.starts_with("binary:")) {
    const auto m = pv::parse_binary_model(lit);
    for (long n : grid) {
      const std::string p = lit + ";n=" + std::to_string(n);
      row("condorcet_loss", p, [&] { return pv::condorcet_loss(n, m.mu(), m.k); });
      row("dictator_loss", p, [&] { return pv::dictator_loss(m.h, n, m.k); });
    }
    return 0;
  }
  const auto d = pv::parse_distribution(lit.empty() ? "uniform:-1,1" : lit);
  const std::string dl = pv::to_literal(d);
  const double half = d.width() / 2;
  const bool uniform = std::holds_alternative<pv::Uniform>(d.variant());
  for (long n : grid) {
    const std::string p = dl + ";n=" + std::to_string(n);
    row("median_basic_loss_approx", p, [&] { return pv::median_basic_loss_approx(n, d); });
    row("median_proxy_bound", p, [&] { return pv::median_proxy_bound(n, d); });
    if (!uniform) continue;
    row("mean_basic_loss_uniform", p, [&] { return pv::mean_basic_loss_uniform(n, d.lower(), d.upper()); });
    row("mean_proxy_loss_uniform_exact", p, [&] { return half * half * pv::mean_proxy_loss_uniform_exact(n); });
    row("mean_proxy_loss_uniform_order_statistics", p,
        [&] { return half * half * pv::mean_proxy_loss_uniform_order_statistics(n); });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proxy voting simulation and analysis"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "Monte Carlo losses for interval distributions");
  add_common(sim, f, true);
  sim->add_option("--dist", f.dist, "distribution literal, e.g. uniform:-1,1")->required();
  sim->add_option("--ratio-out", f.ratio_out, "also write the basic/proxy loss ratio table");

  auto* bin = app.add_subcommand("binary-sim", "Monte Carlo losses for the binary competence model");
  add_common(bin, f, true);
  bin->add_option("--dist", f.dist, "model literal, e.g. binary:uniform,0.66,k=15")->required();
  bin->add_option("--population", f.population, "voters per trial")->capture_default_str();
  bin->add_option("--ratio-out", f.ratio_out, "also write the basic/proxy loss ratio table");

  auto* data = app.add_subcommand("dataset", "Monte Carlo losses on a PrefLib dataset");
  add_common(data, f, true);
  data->add_option("--data", f.data, "dataset file (.soc, .soi, .toc, .toi, .cat, .csv)")
      ->required()
      ->check(CLI::ExistingFile);
  data->add_option("--ksub", f.ksub, "issues sampled per trial")->capture_default_str();
  data->add_option("--ratio-out", f.ratio_out, "also write the basic/proxy loss ratio table");
  data->add_option("--profile-out", f.profile_out, "write mean weight by competence rank");
  data->add_option("--profile-n", f.profile_n, "sample size for the weight profile")->capture_default_str();

  auto* eq = app.add_subcommand("equilibrium", "Best-response dynamics trace for one sample");
  add_common(eq, f, false);
  eq->add_option("--dist", f.dist, "distribution or binary model literal")->required();
  eq->add_option("--positions", f.positions, "explicit agent positions instead of sampling");
  eq->add_option("--population", f.population, "voters in the binary population")->capture_default_str();
  eq->add_flag("--enumerate", f.enumerate, "also list every equilibrium (n <= 15)");

  auto* orc = app.add_subcommand("oracle", "Closed-form losses as CSV");
  orc->add_option("--config", "flat key=value file, one flag per line");
  orc->add_option("--dist", f.dist, "distribution or binary model literal");
  orc->add_option("--n", f.n, "comma list, or lo:hi:count")->capture_default_str();
  orc->add_option("--out", f.out, "output CSV (stdout when omitted)");

  try {
    auto args = with_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (eq->parsed() && f.scenario == "B,P") f.scenario = "P+L";
    if (sim->parsed()) return run_simulate(f);
    if (bin->parsed()) return run_binary(f);
    if (data->parsed()) return run_dataset(f);
    if (eq->parsed()) return run_equilibrium(f);
    if (orc->parsed()) return run_oracle(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
