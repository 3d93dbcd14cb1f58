#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "joap/config.hpp"
#include "joap/ctmc_oracle.hpp"
#include "joap/errors.hpp"
#include "joap/experiments.hpp"
#include "joap/optimizer.hpp"
#include "joap/queueing.hpp"
#include "joap/simulator.hpp"
#include "joap/special_functions.hpp"

namespace joap {
namespace {

using nlohmann::ordered_json;

struct CommonArgs {
  std::string config;
  std::size_t scenario = 0;
  std::optional<double> penalty;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<unsigned> threads;
  std::string out;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

ordered_json policy_json(const JoapPolicy& p) {
  return ordered_json{{"n_star", p.n_star},
                      {"d_star", p.d_star},
                      {"r_star", p.r_star},
                      {"t_v", p.t_v},
                      {"tau", p.tau},
                      {"predicted_profit", p.predicted_profit},
                      {"predicted_admit", p.predicted_admit},
                      {"predicted_wait", p.predicted_wait}};
}

ordered_json estimate_json(const Estimate& e) {
  return ordered_json{{"mean", e.mean}, {"half_width_95", e.half_width_95}};
}

ordered_json metrics_json(const SimMetrics& m) {
  return ordered_json{{"admission_rate", estimate_json(m.admission_rate)},
                      {"mean_wait", estimate_json(m.mean_wait)},
                      {"profit_per_hour", estimate_json(m.profit_per_hour)},
                      {"profit_per_admitted", estimate_json(m.profit_per_admitted)},
                      {"replication_count", m.replication_count},
                      {"arrivals", m.arrivals},
                      {"admitted", m.admitted}};
}

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ExperimentConfig load(const CommonArgs& args) {
  if (args.config.empty()) throw UsageError("--config is required");
  ExperimentConfig cfg = load_config(args.config);
  if (args.penalty) {
    if (!(*args.penalty >= 0.0)) throw UsageError("--penalty must be >= 0");
    for (auto& s : cfg.scenarios) s.econ = s.econ.with_penalty_rate(*args.penalty);
    cfg.econ = cfg.econ.with_penalty_rate(*args.penalty);
  }
  if (args.seed) cfg.run.seed = *args.seed;
  if (args.reps) cfg.run.reps = *args.reps;
  if (args.threads) cfg.run.threads = *args.threads;
  return cfg;
}

const Scenario& pick(const ExperimentConfig& cfg, const CommonArgs& args) {
  if (args.scenario >= cfg.scenarios.size())
    throw UsageError(fmt::format("--scenario {} out of range (config has {})",
                                 args.scenario, cfg.scenarios.size()));
  return cfg.scenarios[args.scenario];
}

void add_common(CLI::App* cmd, CommonArgs& args, bool scenario) {
  cmd->add_option("--config", args.config, "JSON experiment configuration");
  if (scenario)
    cmd->add_option("--scenario", args.scenario, "Scenario index (0-based)");
  cmd->add_option("--penalty", args.penalty, "Waiting penalty rate, $/min");
}

void add_run(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--seed", args.seed, "Base RNG seed");
  cmd->add_option("--reps", args.reps, "Replications")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", args.threads, "Worker threads (0: all cores)");
}

int cmd_analyze(const CommonArgs& args, int n, double d, std::ostream& out) {
  const ExperimentConfig cfg = load(args);
  const Scenario& s = pick(cfg, args);
  const AdmissionAnalysis a = analyze_admission(n, d, s.station);
  ordered_json j{{"scenario", s.name},
                 {"n", a.n},
                 {"d", d},
                 {"t_v", a.t_v},
                 {"offered_load", a.offered_load},
                 {"service_time", a.service_time},
                 {"state_probs", a.state_probs},
                 {"p_admit", a.p_admit}};
  const double rho = load_density(a, s.station);
  j["rho"] = rho;
  if (a.state_probs.front() < 1.0) {
    const ArrivalMoments mom = admitted_interarrival_moments(a, s.station.m);
    j["moments"] = ordered_json{{"mean_x", mom.mean_x},
                                {"second_x", mom.second_x},
                                {"mu_y", mom.mu_y},
                                {"var_y", mom.var_y}};
    if (rho < 1.0) {
      j["mean_wait"] = mean_wait_theorem1(a, mom, s.station);
      const PhaseFit fit = fit_mixture_exponential(
          mom.mu_y, phase_fit_target(mom, SecondMomentTarget::kVarianceAsStated));
      j["ph_wait"] = fit.feasible
                         ? number_or_null(mean_wait_ph_d1(fit, a.service_time, rho))
                         : ordered_json(nullptr);
    } else {
      j["mean_wait"] = nullptr;
      j["ph_wait"] = nullptr;
    }
  }
  j["profit_per_ev"] = number_or_null(profit_s(n, d, {s.station, s.econ}));
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_optimize(const CommonArgs& args, bool tau, std::ostream& out) {
  const ExperimentConfig cfg = load(args);
  const Scenario& s = pick(cfg, args);
  const ProblemParams params{s.station, s.econ};
  ordered_json j;
  if (tau) {
    const TauResult r = optimize_tau(params, cfg.tau_grid);
    j = policy_json(r.policy);
    j["tau_star"] = r.tau_star;
    ordered_json grid = ordered_json::array();
    for (const auto& p : r.by_tau) grid.push_back(policy_json(p));
    j["by_tau"] = grid;
  } else {
    j = policy_json(optimize_joap(params));
  }
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_simulate(const CommonArgs& args, const std::string& policy_name,
                 std::ostream& out) {
  const ExperimentConfig cfg = load(args);
  const Scenario& s = pick(cfg, args);
  const auto kind = parse_policy_kind(policy_name);
  if (!kind) throw UsageError("unknown policy: " + policy_name);
  const double d_b = congestion_free_demand(s.econ);
  Policy policy;
  std::optional<JoapPolicy> joap;
  switch (*kind) {
    case PolicyKind::kJoap:
      joap = optimize_joap({s.station, s.econ});
      policy = Policy::joap(*joap);
      break;
    case PolicyKind::kQba:
      policy = Policy::qba(d_b, s.station.parking_capacity);
      break;
    case PolicyKind::kGreedy:
      policy = Policy::greedy(d_b);
      break;
  }
  const double horizon = cfg.run.horizon.value_or(s.duration);
  ReplicationOptions rep{cfg.run.reps, cfg.run.seed, 0, cfg.run.threads};
  const SimMetrics m = replicate(s, policy, horizon, rep);
  if (!args.out.empty()) {
    const SimulationRun run = run_simulation(s, policy, horizon, {cfg.run.seed, 0});
    std::ofstream trace(args.out, std::ios::binary | std::ios::trunc);
    if (!trace) throw std::runtime_error("cannot write " + args.out);
    write_trace_csv(trace, run.records);
  }
  ordered_json j{{"scenario", s.name},
                 {"policy", std::string(to_string(*kind))},
                 {"demand", policy.demand},
                 {"horizon", horizon}};
  if (joap) j["joap_policy"] = policy_json(*joap);
  j["metrics"] = metrics_json(m);
  out << j.dump(2) << '\n';
  return 0;
}

std::vector<PolicyKind> parse_policies(const std::vector<std::string>& names) {
  std::vector<PolicyKind> kinds;
  for (const auto& n : names) {
    const auto k = parse_policy_kind(n);
    if (!k) throw UsageError("unknown policy: " + n);
    kinds.push_back(*k);
  }
  return kinds;
}

std::filesystem::path out_dir(const CommonArgs& args) {
  return args.out.empty() ? std::filesystem::path("results")
                          : std::filesystem::path(args.out);
}

std::ofstream open_in(const std::filesystem::path& dir, const char* name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

int cmd_daily(const CommonArgs& args, const std::vector<std::string>& names,
              std::ostream& out) {
  const ExperimentConfig cfg = load(args);
  DailyOptions opt;
  opt.penalty = args.penalty.value_or(cfg.econ.c());
  if (!names.empty()) opt.policies = parse_policies(names);
  opt.reps = cfg.run.reps;
  opt.seed = cfg.run.seed;
  opt.threads = cfg.run.threads;
  const DailyReport report = run_daily_experiment(cfg, opt);
  const auto dir = out_dir(args);
  write_daily_report(report, dir);
  write_daily_aggregate_csv(out, report);
  out << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_admission(const CommonArgs& args, std::ostream& out) {
  const ExperimentConfig cfg = load(args);
  const auto rows = run_admission_validation(cfg, cfg.run.seed, cfg.run.threads);
  auto f = open_in(out_dir(args), "admission_validation.csv");
  write_admission_csv(f, rows);
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.gap);
  out << fmt::format("points {} max_gap {}\n", rows.size(), worst);
  return 0;
}

int cmd_wait(const CommonArgs& args, std::ostream& out) {
  const ExperimentConfig cfg = load(args);
  const auto rows =
      run_wait_validation(cfg, cfg.run.reps, cfg.run.seed, cfg.run.threads);
  auto f = open_in(out_dir(args), "wait_validation.csv");
  write_wait_csv(f, rows);
  write_wait_csv(out, rows);
  return 0;
}

int cmd_tau(const CommonArgs& args, std::ostream& out) {
  const ExperimentConfig cfg = load(args);
  const double c = args.penalty.value_or(cfg.econ.c());
  const TauReport report =
      run_tau_study(cfg, c, cfg.run.reps, cfg.run.seed, cfg.run.threads);
  auto f = open_in(out_dir(args), "tau_study.csv");
  write_tau_csv(f, report);
  out << fmt::format("aggregate_gain {} reference_gain {}\n",
                     report.aggregate_gain, kTauReferenceGain);
  return 0;
}

int cmd_ctmc(int n, double lambda, double t_v, bool dump, std::ostream& out) {
  const TwoPhaseChain chain = build_generator(n, lambda, t_v);
  const double chain_blocking = blocking_probability(chain);
  const double erlang = erlang_b(n, lambda * t_v);
  ordered_json j{{"n", n},
                 {"lambda", lambda},
                 {"t_v", t_v},
                 {"kappa", chain.kappa},
                 {"state_count", chain.states.size()},
                 {"occupancy", occupancy_marginal(chain, steady_state(chain))},
                 {"blocking_ctmc", chain_blocking},
                 {"blocking_erlang", erlang},
                 {"abs_diff", std::abs(chain_blocking - erlang)}};
  if (dump) {
    ordered_json states = ordered_json::array();
    for (const auto& s : chain.states) states.push_back({s.s1, s.s2});
    j["states"] = states;
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < chain.generator.rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index c = 0; c < chain.generator.cols(); ++c)
        row.push_back(chain.generator(r, c));
      rows.push_back(row);
    }
    j["generator"] = rows;
  }
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"Joint admission and pricing for an EV charging station", "joap"};
  app.require_subcommand(1);

  CommonArgs args;
  int n = 4;
  double d = 10.0;
  bool optimize_tau_flag = false;
  std::string policy = "joap";
  std::vector<std::string> policies;
  double lambda = 1.0;
  double t_v = 1.0;
  bool dump = true;

  auto* analyze = app.add_subcommand("analyze", "Admission analysis for given n and d");
  add_common(analyze, args, true);
  analyze->add_option("--n", n, "Sub-process count")->check(CLI::PositiveNumber);
  analyze->add_option("--d", d, "Demand, kWh")->check(CLI::PositiveNumber);

  auto* optimize = app.add_subcommand("optimize", "Optimal JoAP policy as JSON");
  add_common(optimize, args, true);
  optimize->add_flag("--optimize-tau", optimize_tau_flag,
                     "Also search the tau grid");

  auto* simulate = app.add_subcommand("simulate", "Simulate one policy on one scenario");
  add_common(simulate, args, true);
  add_run(simulate, args);
  simulate->add_option("--policy", policy, "joap, qba or greedy");
  simulate->add_option("--out", args.out, "Write the first replication's trace CSV");

  auto* experiment = app.add_subcommand("experiment", "Canned experiments");
  experiment->require_subcommand(1);
  auto* daily = experiment->add_subcommand("daily", "Three-policy daily comparison");
  auto* admission = experiment->add_subcommand("admission", "Admission probability validation");
  auto* wait = experiment->add_subcommand("wait", "Mean waiting time validation");
  auto* tau = experiment->add_subcommand("tau", "Profit gain from optimizing tau");
  for (auto* cmd : {daily, admission, wait, tau}) {
    add_common(cmd, args, false);
    add_run(cmd, args);
    cmd->add_option("--out", args.out, "Output directory (default: results)");
  }
  daily->add_option("--policies", policies, "Subset of joap, qba, greedy")->delimiter(',');

  auto* oracle = app.add_subcommand("oracle", "Independent checks");
  oracle->require_subcommand(1);
  auto* ctmc = oracle->add_subcommand("ctmc", "Two-phase chain vs Erlang blocking");
  ctmc->add_option("--n", n, "Sub-process count")->check(CLI::PositiveNumber);
  ctmc->add_option("--lambda", lambda, "Arrival rate, 1/min")->check(CLI::PositiveNumber);
  ctmc->add_option("--tv", t_v, "Threshold T_v, min")->check(CLI::PositiveNumber);
  ctmc->add_flag("!--no-generator", dump, "Omit the generator dump");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze) return cmd_analyze(args, n, d, out);
    if (*optimize) return cmd_optimize(args, optimize_tau_flag, out);
    if (*simulate) return cmd_simulate(args, policy, out);
    if (*daily) return cmd_daily(args, policies, out);
    if (*admission) return cmd_admission(args, out);
    if (*wait) return cmd_wait(args, out);
    if (*tau) return cmd_tau(args, out);
    if (*ctmc) return cmd_ctmc(n, lambda, t_v, dump, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace joap
