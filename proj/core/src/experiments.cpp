#include "joap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "joap/errors.hpp"
#include "joap/parallel.hpp"
#include "joap/queueing.hpp"

namespace joap {
namespace {

using nlohmann::ordered_json;

double horizon_for(const ExperimentConfig& config, const Scenario& scenario) {
  return config.run.horizon.value_or(scenario.duration);
}

Scenario with_penalty(const Scenario& s, double c) {
  Scenario out = s;
  out.econ = s.econ.with_penalty_rate(c);
  return out;
}

Policy build_policy(PolicyKind kind, const JoapPolicy& joap, double d_b,
                    const StationParams& station) {
  switch (kind) {
    case PolicyKind::kJoap:
      return Policy::joap(joap);
    case PolicyKind::kQba:
      return Policy::qba(d_b, station.parking_capacity);
    case PolicyKind::kGreedy:
      return Policy::greedy(d_b);
  }
  return Policy::joap(joap);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

ordered_json to_json(const JoapPolicy& p) {
  return ordered_json{{"n_star", p.n_star},
                      {"d_star", p.d_star},
                      {"r_star", p.r_star},
                      {"t_v", p.t_v},
                      {"tau", p.tau},
                      {"predicted_profit", p.predicted_profit},
                      {"predicted_admit", p.predicted_admit},
                      {"predicted_wait", p.predicted_wait}};
}

ordered_json to_json(const Estimate& e) {
  return ordered_json{{"mean", e.mean}, {"half_width_95", e.half_width_95}};
}

ordered_json to_json(const SimMetrics& m) {
  return ordered_json{{"admission_rate", to_json(m.admission_rate)},
                      {"mean_wait", to_json(m.mean_wait)},
                      {"profit_per_hour", to_json(m.profit_per_hour)},
                      {"profit_per_admitted", to_json(m.profit_per_admitted)},
                      {"replication_count", m.replication_count},
                      {"arrivals", m.arrivals},
                      {"admitted", m.admitted}};
}

}  // namespace

const PolicyTotals* DailyReport::find(PolicyKind kind) const {
  for (const auto& t : totals)
    if (t.kind == kind) return &t;
  return nullptr;
}

DailyReport run_daily_experiment(const ExperimentConfig& config,
                                 const DailyOptions& options) {
  if (config.scenarios.empty())
    throw DomainError("run_daily_experiment: no scenarios");
  if (options.policies.empty())
    throw DomainError("run_daily_experiment: no policies requested");
  if (options.reps < 1) throw DomainError("run_daily_experiment: reps must be >= 1");

  DailyReport report;
  report.penalty = options.penalty;
  report.reps = options.reps;
  report.seed = options.seed;
  report.policies = options.policies;

  for (std::size_t i = 0; i < config.scenarios.size(); ++i) {
    const Scenario scenario = with_penalty(config.scenarios[i], options.penalty);
    ScenarioOutcome outcome;
    outcome.name = scenario.name;
    outcome.lambda = scenario.lambda();
    outcome.p_e = scenario.p_e();
    outcome.duration = scenario.duration;
    outcome.joap = optimize_joap({scenario.station, scenario.econ});
    outcome.benchmark_demand = congestion_free_demand(scenario.econ);

    ReplicationOptions rep;
    rep.reps = options.reps;
    rep.seed = options.seed;
    rep.stream_base = static_cast<std::uint64_t>(i) << 32;
    rep.threads = options.threads;
    const double horizon = horizon_for(config, scenario);
    for (PolicyKind kind : options.policies) {
      PolicyOutcome po;
      po.kind = kind;
      po.policy = build_policy(kind, outcome.joap, outcome.benchmark_demand,
                               scenario.station);
      po.metrics = replicate(scenario, po.policy, horizon, rep);
      po.block_profit = po.metrics.profit_per_hour.mean * scenario.duration / 60.0;
      outcome.policies.push_back(po);
    }
    report.scenarios.push_back(std::move(outcome));
  }

  for (std::size_t k = 0; k < options.policies.size(); ++k) {
    PolicyTotals t;
    t.kind = options.policies[k];
    double weight = 0.0;
    double admitted = 0.0;
    for (const auto& s : report.scenarios) {
      const auto& po = s.policies[k];
      t.daily_profit += po.block_profit;
      const double w = s.lambda * s.duration;
      t.admission_rate += w * po.metrics.admission_rate.mean;
      weight += w;
      const double adm = static_cast<double>(po.metrics.admitted);
      t.mean_wait += adm * po.metrics.mean_wait.mean;
      admitted += adm;
    }
    t.admission_rate /= weight;
    t.mean_wait = admitted > 0.0 ? t.mean_wait / admitted : 0.0;
    report.totals.push_back(t);
  }

  const PolicyTotals* joap = report.find(PolicyKind::kJoap);
  if (joap) {
    if (const PolicyTotals* g = report.find(PolicyKind::kGreedy))
      report.joap_vs_greedy = joap->daily_profit / g->daily_profit;
    if (const PolicyTotals* q = report.find(PolicyKind::kQba))
      report.joap_vs_qba = joap->daily_profit / q->daily_profit;
  }
  return report;
}

void write_daily_scenarios_csv(std::ostream& out, const DailyReport& report) {
  out << "scenario,lambda,p_e,duration,policy,demand,n,t_v,admission_rate,"
         "admission_rate_hw,mean_wait,mean_wait_hw,profit_per_hour,"
         "profit_per_hour_hw,profit_per_admitted,block_profit\n";
  for (const auto& s : report.scenarios) {
    for (const auto& po : s.policies) {
      const bool joap = po.kind == PolicyKind::kJoap;
      out << fmt::format("{},{},{},{},{},{},", s.name, s.lambda, s.p_e,
                         s.duration, to_string(po.kind), po.policy.demand);
      if (joap) out << fmt::format("{},{}", po.policy.sub_processes, po.policy.t_v);
      else out << ',';
      const auto& m = po.metrics;
      out << fmt::format(",{},{},{},{},{},{},{},{}\n", m.admission_rate.mean,
                         m.admission_rate.half_width_95, m.mean_wait.mean,
                         m.mean_wait.half_width_95, m.profit_per_hour.mean,
                         m.profit_per_hour.half_width_95,
                         m.profit_per_admitted.mean, po.block_profit);
    }
  }
}

void write_daily_aggregate_csv(std::ostream& out, const DailyReport& report) {
  out << "policy,daily_profit,admission_rate,mean_wait\n";
  for (const auto& t : report.totals)
    out << fmt::format("{},{},{},{}\n", to_string(t.kind), t.daily_profit,
                       t.admission_rate, t.mean_wait);
}

void write_daily_report(const DailyReport& report,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "daily_scenarios.csv");
    write_daily_scenarios_csv(out, report);
  }
  {
    auto out = open_output(dir / "daily_aggregate.csv");
    write_daily_aggregate_csv(out, report);
  }
  {
    auto out = open_output(dir / "daily_ratios.csv");
    out << "comparison,ratio\n";
    if (report.joap_vs_greedy)
      out << fmt::format("joap_vs_greedy,{}\n", *report.joap_vs_greedy);
    if (report.joap_vs_qba)
      out << fmt::format("joap_vs_qba,{}\n", *report.joap_vs_qba);
  }

  ordered_json summary;
  summary["penalty"] = report.penalty;
  summary["reps"] = report.reps;
  summary["seed"] = report.seed;
  ordered_json scenarios = ordered_json::array();
  for (const auto& s : report.scenarios) {
    ordered_json js{{"name", s.name},
                    {"lambda", s.lambda},
                    {"p_e", s.p_e},
                    {"duration", s.duration},
                    {"joap_policy", to_json(s.joap)},
                    {"benchmark_demand", s.benchmark_demand}};
    ordered_json metrics = ordered_json::object();
    for (const auto& po : s.policies)
      metrics[std::string(to_string(po.kind))] = to_json(po.metrics);
    js["metrics"] = metrics;
    scenarios.push_back(js);
  }
  summary["scenarios"] = scenarios;
  ordered_json totals = ordered_json::object();
  for (const auto& t : report.totals)
    totals[std::string(to_string(t.kind))] =
        ordered_json{{"daily_profit", t.daily_profit},
                     {"admission_rate", t.admission_rate},
                     {"mean_wait", t.mean_wait}};
  summary["aggregate"] = totals;
  ordered_json ratios = ordered_json::object();
  if (report.joap_vs_greedy) ratios["joap_vs_greedy"] = *report.joap_vs_greedy;
  if (report.joap_vs_qba) ratios["joap_vs_qba"] = *report.joap_vs_qba;
  summary["ratios"] = ratios;

  auto out = open_output(dir / "daily_summary.json");
  out << summary.dump(2) << '\n';
}

std::vector<AdmissionRow> run_admission_validation(
    const ExperimentConfig& config, std::uint64_t seed, unsigned threads) {
  const auto& grid = config.admission;
  std::vector<AdmissionRow> rows;
  for (int n : grid.sub_processes)
    for (double lambda : grid.arrival_rates)
      for (double d : grid.demands) rows.push_back({n, lambda, d, 0, 0, 0});

  parallel_for(rows.size(), threads, [&](std::size_t i) {
    AdmissionRow& row = rows[i];
    StationParams st = config.station;
    st.lambda = row.lambda;
    const AdmissionAnalysis a = analyze_admission(row.n, row.d, st);
    row.analytic = a.p_admit;
    row.simulated = run_loss_mode(row.n, a.t_v, row.lambda,
                                  grid.arrivals_per_point, {seed, i})
                        .admission_rate();
    row.gap = std::abs(row.simulated - row.analytic);
  });
  return rows;
}

void write_admission_csv(std::ostream& out, std::span<const AdmissionRow> rows) {
  out << "n,lambda,d,analytic,simulated,gap\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{}\n", r.n, r.lambda, r.d, r.analytic,
                       r.simulated, r.gap);
}

std::vector<WaitRow> run_wait_validation(const ExperimentConfig& config,
                                         int reps, std::uint64_t seed,
                                         unsigned threads) {
  if (reps < 1) throw DomainError("run_wait_validation: reps must be >= 1");
  const auto& grid = config.wait;
  std::vector<WaitRow> rows;
  for (int n : grid.sub_processes)
    for (double lambda : grid.arrival_rates)
      for (double d : grid.demands) {
        WaitRow row;
        row.n = n;
        row.lambda = lambda;
        row.d = d;
        rows.push_back(row);
      }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    WaitRow& row = rows[i];
    Scenario scenario{"wait", config.station, config.econ, grid.horizon};
    scenario.station.lambda = row.lambda;
    scenario.station.parking_capacity = std::numeric_limits<int>::max();
    const AdmissionAnalysis a = analyze_admission(row.n, row.d, scenario.station);
    row.rho = load_density(a, scenario.station);
    row.stable = row.rho < 1.0;
    if (!row.stable) continue;

    const ArrivalMoments mom =
        admitted_interarrival_moments(a, scenario.station.m);
    row.analytic_wait = mean_wait_theorem1(a, mom, scenario.station);
    const PhaseFit fit = fit_mixture_exponential(
        mom.mu_y, phase_fit_target(mom, grid.second_moment));
    if (fit.feasible) row.ph_wait = mean_wait_ph_d1(fit, a.service_time, row.rho);

    Policy policy;
    policy.kind = PolicyKind::kJoap;
    policy.demand = row.d;
    policy.sub_processes = row.n;
    policy.t_v = a.t_v;
    ReplicationOptions rep{reps, seed, static_cast<std::uint64_t>(i) << 32,
                           threads};
    const SimMetrics m = replicate(scenario, policy, grid.horizon, rep);
    row.simulated_wait = m.mean_wait.mean;
    row.simulated_half_width = m.mean_wait.half_width_95;
    row.relative_gap = row.simulated_wait > 0.0
                           ? (row.analytic_wait - row.simulated_wait) /
                                 row.simulated_wait
                           : std::numeric_limits<double>::quiet_NaN();
  }
  return rows;
}

void write_wait_csv(std::ostream& out, std::span<const WaitRow> rows) {
  out << "n,lambda,d,rho,status,analytic_wait,ph_wait,simulated_wait,"
         "relative_gap\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},", r.n, r.lambda, r.d, r.rho);
    if (!r.stable) {
      out << "unstable,,,,\n";
      continue;
    }
    out << fmt::format("ok,{},", r.analytic_wait);
    if (r.ph_wait) out << fmt::format("{}", *r.ph_wait);
    out << fmt::format(",{},{}\n", r.simulated_wait, r.relative_gap);
  }
}

TauReport run_tau_study(const ExperimentConfig& config, double penalty,
                        int reps, std::uint64_t seed, unsigned threads) {
  if (reps < 1) throw DomainError("run_tau_study: reps must be >= 1");
  std::vector<double> grid{kTauBaseline};
  for (double tau : config.tau_grid)
    if (tau != kTauBaseline) grid.push_back(tau);

  TauReport report;
  for (std::size_t i = 0; i < config.scenarios.size(); ++i) {
    const Scenario base = with_penalty(config.scenarios[i], penalty);
    const double horizon = horizon_for(config, base);
    ReplicationOptions rep{reps, seed, static_cast<std::uint64_t>(i) << 32,
                           threads};
    TauScenario summary;
    summary.name = base.name;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      Scenario scenario = base;
      scenario.station.tau = grid[k];
      TauRow row;
      row.scenario = base.name;
      row.tau = grid[k];
      row.policy = optimize_joap({scenario.station, scenario.econ});
      row.predicted_block_profit = row.policy.predicted_profit *
                                   scenario.lambda() * scenario.duration;
      const SimMetrics m =
          replicate(scenario, Policy::joap(row.policy), horizon, rep);
      row.simulated_block_profit =
          m.profit_per_hour.mean * scenario.duration / 60.0;
      row.half_width = m.profit_per_hour.half_width_95 * scenario.duration / 60.0;
      if (k == 0) {
        summary.base_profit = summary.best_profit = row.simulated_block_profit;
        summary.best_tau = row.tau;
      } else if (row.simulated_block_profit > summary.best_profit) {
        summary.best_profit = row.simulated_block_profit;
        summary.best_tau = row.tau;
      }
      report.rows.push_back(row);
    }
    summary.gain = summary.base_profit != 0.0
                       ? (summary.best_profit - summary.base_profit) /
                             std::abs(summary.base_profit)
                       : 0.0;
    report.base_daily_profit += summary.base_profit;
    report.best_daily_profit += summary.best_profit;
    report.scenarios.push_back(summary);
  }
  report.aggregate_gain =
      report.base_daily_profit != 0.0
          ? (report.best_daily_profit - report.base_daily_profit) /
                std::abs(report.base_daily_profit)
          : 0.0;
  return report;
}

void write_tau_csv(std::ostream& out, const TauReport& report) {
  out << "scenario,tau,n,d,predicted_block_profit,simulated_block_profit,"
         "half_width\n";
  for (const auto& r : report.rows)
    out << fmt::format("{},{},{},{},{},{},{}\n", r.scenario, r.tau,
                       r.policy.n_star, r.policy.d_star,
                       r.predicted_block_profit, r.simulated_block_profit,
                       r.half_width);
  out << "\nscenario,base_profit,best_tau,best_profit,gain\n";
  for (const auto& s : report.scenarios)
    out << fmt::format("{},{},{},{},{}\n", s.name, s.base_profit, s.best_tau,
                       s.best_profit, s.gain);
  out << fmt::format("aggregate,{},,{},{}\n", report.base_daily_profit,
                     report.best_daily_profit, report.aggregate_gain);
  out << fmt::format("reference_gain,{}\n", kTauReferenceGain);
}

}  // namespace joap
