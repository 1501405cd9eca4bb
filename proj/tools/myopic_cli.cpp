// Command-line front end: curve sweeps, simulation, DMT, floors, multi-branch,
// split optimization, state dumps and the acceptance suite.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "myopic/myopic.hpp"
#include "myopic/acceptance.hpp"

namespace {

using namespace myopic;

struct Common {
  std::vector<std::string> configs;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> slots;
  std::string method;
  std::string splits;
  double power_db = 20.0;
};

class Output {
public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

ExperimentConfig load(const Common& c, std::size_t index = 0) {
  if (c.configs.size() <= index) throw ConfigError("--config is required");
  ExperimentConfig exp = load_experiment(c.configs[index]);
  if (c.seed) exp.seed = *c.seed;
  if (c.slots) exp.slots = *c.slots;
  if (!c.method.empty()) exp.method = parse_method(c.method);
  if (c.splits == "equal") {
    exp.splits_mode = SplitsMode::kEqual;
    exp.network.splits.reset();
  } else if (c.splits == "optimized") {
    exp.splits_mode = SplitsMode::kOptimized;
  } else if (c.splits == "file") {
    if (!exp.network.splits) throw ConfigError("--splits file needs an explicit splits table in the config");
    exp.splits_mode = SplitsMode::kExplicit;
  }
  return exp;
}

AnalysisOptions analysis_for(const ExperimentConfig& exp) {
  AnalysisOptions a;
  a.method = exp.method;
  return a;
}

// Branch as analysed: optimized splits are computed at the given power.
NetworkConfig branch_at(const ExperimentConfig& exp, double power) {
  NetworkConfig cfg(exp.network);
  if (exp.splits_mode == SplitsMode::kOptimized) {
    OptimizerOptions o;
    o.analysis = analysis_for(exp);
    cfg = cfg.with_q(0.0).with_splits(optimize_splits(cfg, power, o).splits);
  }
  return cfg;
}

std::string dual_list(const NetworkConfig& cfg) {
  std::string s;
  for (std::size_t i = 0; i < cfg.dual_mode().size(); ++i) {
    s += (i ? ";" : "") + std::to_string(cfg.dual_mode()[i]);
  }
  return s;
}

int cmd_analyze(const Common& c, bool simulate_flag) {
  ExperimentConfig exp = load(c);
  if (simulate_flag) exp.simulate = true;
  const OutageCurve curve = run_sweep(exp);
  Output out(c.out);
  write_curve_csv(out.stream(), curve);
  return 0;
}

int cmd_simulate(const Common& c) {
  const ExperimentConfig exp = load(c);
  if (exp.power_grid_db.empty()) throw ConfigError("power_grid_db is empty");
  std::vector<SimResult> rows(exp.power_grid_db.size());
  parallel_for(rows.size(), default_workers(), [&](std::size_t i) {
    const double power = power_from_db(exp.power_grid_db[i], exp.network.sigma2);
    SimOptions so;
    so.slots = exp.slots;
    so.seed = exp.seed;
    so.workers = 1;
    rows[i] = simulate(branch_at(exp, power), power, so);
  });
  Output out(c.out);
  auto& os = out.stream();
  os << "P_dB,outage_sim,ci_low,ci_high,slots\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << format_number(exp.power_grid_db[i]) << ',' << format_probability(rows[i].outage) << ','
       << format_probability(rows[i].ci_low) << ',' << format_probability(rows[i].ci_high) << ','
       << rows[i].slots << '\n';
  }
  return 0;
}

int cmd_dmt(const Common& c, double rho) {
  const ExperimentConfig exp = load(c);
  const NetworkConfig cfg(exp.network);
  const DmtCurve d = dmt(cfg);
  std::vector<double> p, o;
  for (double db = 25.0; db <= 35.0 + 1e-9; db += 1.0) {
    p.push_back(db);
    o.push_back(system_outage(cfg, power_from_db(db, cfg.sigma2()), analysis_for(exp)));
  }
  Output out(c.out);
  out.stream() << "n_relays,k_hops,dual_mode,diversity_order,rho,dmt,slope_25_35\n"
               << cfg.n_relays() << ',' << cfg.k_hops() << ',' << dual_list(cfg) << ',' << d.diversity
               << ',' << format_number(rho) << ',' << format_number(d(rho)) << ','
               << format_number(estimate_slope(p, o, 25.0, 35.0)) << '\n';
  return 0;
}

int cmd_floor(const Common& c) {
  const ExperimentConfig exp = load(c);
  const NetworkConfig cfg(exp.network);
  if (cfg.nu() != cfg.n_relays()) throw ConfigError("the outage floor assumes every relay is dual-mode");
  Output out(c.out);
  out.stream() << "n_relays,k_hops,q,floor\n"
               << cfg.n_relays() << ',' << cfg.k_hops() << ',' << format_number(cfg.q_silent()) << ','
               << format_probability(outage_floor(cfg.n_relays(), cfg.k_hops(), cfg.q_silent())) << '\n';
  return 0;
}

int cmd_multibranch(const Common& c) {
  std::vector<NetworkConfig> branches;
  for (std::size_t i = 0; i < c.configs.size(); ++i) {
    const ExperimentConfig exp = load(c, i);
    const NetworkConfig b = branch_at(exp, power_from_db(c.power_db, exp.network.sigma2));
    for (int z = 0; z < exp.branches; ++z) branches.push_back(b);
  }
  if (branches.empty()) throw ConfigError("--config is required");
  const ExperimentConfig first = load(c, 0);
  const double power = power_from_db(c.power_db, branches.front().sigma2());
  Output out(c.out);
  out.stream() << "branches,P_dB,outage,diversity_order\n"
               << branches.size() << ',' << format_number(c.power_db) << ','
               << format_probability(multi_branch_outage(branches, power, analysis_for(first))) << ','
               << multi_branch_dmt(branches).diversity << '\n';
  return 0;
}

int cmd_optimize(const Common& c) {
  const ExperimentConfig exp = load(c);
  const NetworkConfig cfg(exp.network);
  const double power = power_from_db(c.power_db, cfg.sigma2());
  OptimizerOptions o;
  o.analysis = analysis_for(exp);
  const SplitSolution sol = optimize_splits(cfg, power, o);
  Output out(c.out);
  auto& os = out.stream();
  os << "P_dB,transmitter,receiver,weight,outage_optimized,outage_equal,converged\n";
  for (std::size_t i = 0; i < sol.splits.rows.size(); ++i) {
    for (std::size_t j = 0; j < sol.splits.rows[i].size(); ++j) {
      os << format_number(c.power_db) << ',' << i << ',' << i + j + 1 << ','
         << format_probability(sol.splits.rows[i][j]) << ',' << format_probability(sol.outage) << ','
         << format_probability(sol.equal_outage) << ',' << (sol.converged ? "true" : "false") << '\n';
    }
  }
  return 0;
}

int cmd_states(const Common& c) {
  const ExperimentConfig exp = load(c);
  const double power = power_from_db(c.power_db, exp.network.sigma2);
  const NetworkConfig cfg = branch_at(exp, power);
  const StateLayout layout(cfg);
  const OutageCalculator calc(cfg, exp.method);
  const TransitionMatrix a = build_matrix(layout, calc, power);
  Output out(c.out);
  auto& os = out.stream();
  os << "from_index,to_index,probability\n";
  for (std::uint64_t m = 1; m <= a.dim(); ++m) {
    for (const auto& e : a.column(m)) os << m << ',' << e.to << ',' << format_probability(e.p) << '\n';
  }
  return 0;
}

int cmd_acceptance(const Common& c, const std::vector<std::string>& tols, const std::vector<int>& only) {
  AcceptanceOptions opt;
  if (c.seed) opt.seed = *c.seed;
  if (c.slots) opt.slots = *c.slots;
  for (const auto& t : tols) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("--tol expects id=value");
    const std::string key = t.substr(0, eq);
    if (!opt.tol.count(key)) throw ConfigError("unknown tolerance id " + key);
    opt.tol[key] = std::stod(t.substr(eq + 1));
  }
  opt.only.insert(only.begin(), only.end());
  Output out(c.out);
  bool ok = true;
  run_acceptance(opt, [&](const CriterionResult& r) {
    out.stream() << format_criterion(r) << std::endl;
    ok = ok && r.pass;
  });
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-hop myopic decode-and-forward relaying: analysis and simulation"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.configs, "Experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "Write CSV here instead of stdout");
    sub->add_option("--seed", c.seed, "Master RNG seed");
    sub->add_option("--slots", c.slots, "Simulated slots per power point");
    sub->add_option("--method", c.method, "Per-node outage method")
        ->check(CLI::IsMember({"exact", "saa", "gil-pelaez"}));
    sub->add_option("--splits", c.splits, "Power splits: equal, optimized, or the table in the config file")
        ->check(CLI::IsMember({"equal", "optimized", "file"}));
  };

  bool sim_flag = false;
  double rho = 0.0;
  std::vector<std::string> tols;
  std::vector<int> only;

  auto* analyze = app.add_subcommand("analyze", "Outage curve over the power grid (CSV)");
  add_common(analyze);
  analyze->add_flag("--simulate", sim_flag, "Add simulated outage with 99% CI");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo outage over the power grid (CSV)");
  add_common(simulate);
  auto* dmt_cmd = app.add_subcommand("dmt", "Diversity order and DMT (single CSV row)");
  add_common(dmt_cmd);
  dmt_cmd->add_option("--rho", rho, "Multiplexing gain in [0,1]")->check(CLI::Range(0.0, 1.0));
  auto* floor_cmd = app.add_subcommand("floor", "High-power outage floor (single CSV row)");
  add_common(floor_cmd);
  auto* multi = app.add_subcommand("multibranch", "Outage of parallel branches (single CSV row)");
  add_common(multi);
  multi->add_option("--power-db", c.power_db, "Transmit power P/sigma^2 in dB");
  auto* optimize = app.add_subcommand("optimize", "Optimize the power splits at one power (CSV)");
  add_common(optimize);
  optimize->add_option("--power-db", c.power_db, "Transmit power P/sigma^2 in dB");
  auto* states = app.add_subcommand("states", "Dump transition matrix entries (CSV)");
  add_common(states);
  states->add_option("--power-db", c.power_db, "Transmit power P/sigma^2 in dB");
  auto* accept = app.add_subcommand("acceptance", "Run the acceptance suite");
  accept->add_option("--out", c.out, "Write the report here instead of stdout");
  accept->add_option("--seed", c.seed, "Master RNG seed");
  accept->add_option("--slots", c.slots, "Simulated slots per point");
  accept->add_option("--tol", tols, "Override a threshold, e.g. --tol c7.slope=0.1");
  accept->add_option("--only", only, "Run only these criterion ids");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*analyze) return cmd_analyze(c, sim_flag);
    if (*simulate) return cmd_simulate(c);
    if (*dmt_cmd) return cmd_dmt(c, rho);
    if (*floor_cmd) return cmd_floor(c);
    if (*multi) return cmd_multibranch(c);
    if (*optimize) return cmd_optimize(c);
    if (*states) return cmd_states(c);
    if (*accept) return cmd_acceptance(c, tols, only);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
