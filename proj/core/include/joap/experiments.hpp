#pragma once

// Canned experiments over an ExperimentConfig: the daily three-policy
// comparison, the admission and waiting-time validations, and the tau study.
// Every CSV writer formats numbers with the shortest round-trip
// representation, so equal inputs give byte-identical files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "joap/config.hpp"
#include "joap/optimizer.hpp"
#include "joap/simulator.hpp"

namespace joap {

struct PolicyOutcome {
  PolicyKind kind = PolicyKind::kJoap;
  Policy policy;
  SimMetrics metrics;
  double block_profit = 0.0;  // profit_per_hour * duration / 60
};

struct ScenarioOutcome {
  std::string name;
  double lambda = 0.0;
  double p_e = 0.0;
  double duration = 0.0;
  JoapPolicy joap;
  double benchmark_demand = 0.0;
  std::vector<PolicyOutcome> policies;  // request order
};

struct PolicyTotals {
  PolicyKind kind = PolicyKind::kJoap;
  double daily_profit = 0.0;
  double admission_rate = 0.0;  // weighted by lambda * duration
  double mean_wait = 0.0;       // weighted by admitted EVs
};

struct DailyReport {
  double penalty = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::vector<PolicyKind> policies;
  std::vector<ScenarioOutcome> scenarios;
  std::vector<PolicyTotals> totals;  // request order
  std::optional<double> joap_vs_greedy;  // ratio of daily profits
  std::optional<double> joap_vs_qba;

  const PolicyTotals* find(PolicyKind kind) const;
};

struct DailyOptions {
  double penalty = 0.4;
  std::vector<PolicyKind> policies{PolicyKind::kJoap, PolicyKind::kQba,
                                   PolicyKind::kGreedy};
  int reps = 200;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Per scenario: optimize JoAP, then simulate each policy on the same
/// arrival streams. Benchmarks price at the congestion-free demand.
DailyReport run_daily_experiment(const ExperimentConfig& config,
                                 const DailyOptions& options);

/// daily_scenarios.csv, daily_aggregate.csv, daily_ratios.csv and
/// daily_summary.json.
void write_daily_report(const DailyReport& report,
                        const std::filesystem::path& dir);
void write_daily_scenarios_csv(std::ostream& out, const DailyReport& report);
void write_daily_aggregate_csv(std::ostream& out, const DailyReport& report);

struct AdmissionRow {
  int n = 0;
  double lambda = 0.0;
  double d = 0.0;
  double analytic = 0.0;
  double simulated = 0.0;
  double gap = 0.0;  // |simulated - analytic|
};

std::vector<AdmissionRow> run_admission_validation(
    const ExperimentConfig& config, std::uint64_t seed, unsigned threads = 0);
void write_admission_csv(std::ostream& out, std::span<const AdmissionRow> rows);

struct WaitRow {
  int n = 0;
  double lambda = 0.0;
  double d = 0.0;
  double rho = 0.0;
  bool stable = true;
  double analytic_wait = 0.0;
  std::optional<double> ph_wait;  // absent when the phase fit is infeasible
  double simulated_wait = 0.0;
  double simulated_half_width = 0.0;
  double relative_gap = 0.0;  // (analytic - simulated) / simulated
};

/// Each grid point simulates `reps` replications of the configured horizon
/// with an unlimited lot.
std::vector<WaitRow> run_wait_validation(const ExperimentConfig& config,
                                         int reps, std::uint64_t seed,
                                         unsigned threads = 0);
void write_wait_csv(std::ostream& out, std::span<const WaitRow> rows);

struct TauRow {
  std::string scenario;
  double tau = 0.0;
  JoapPolicy policy;
  double predicted_block_profit = 0.0;
  double simulated_block_profit = 0.0;
  double half_width = 0.0;
};

struct TauScenario {
  std::string name;
  double base_profit = 0.0;  // simulated, tau = 1.01
  double best_profit = 0.0;  // simulated, best tau on the grid
  double best_tau = 1.01;
  double gain = 0.0;         // relative to base_profit
};

inline constexpr double kTauBaseline = 1.01;
inline constexpr double kTauReferenceGain = 0.059;

struct TauReport {
  std::vector<TauRow> rows;
  std::vector<TauScenario> scenarios;
  double base_daily_profit = 0.0;
  double best_daily_profit = 0.0;
  double aggregate_gain = 0.0;
};

/// The baseline tau = 1.01 is always evaluated. All tau values in one
/// scenario share arrival streams, and the best tau is picked by simulated
/// profit.
TauReport run_tau_study(const ExperimentConfig& config, double penalty,
                        int reps, std::uint64_t seed, unsigned threads = 0);
void write_tau_csv(std::ostream& out, const TauReport& report);

}  // namespace joap
