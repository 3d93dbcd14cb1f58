#pragma once

// Discrete-event simulation of the station: Poisson arrivals, an online
// admission rule, and m ports serving admitted EVs first come first served.
//
// Conventions: an arrival at exactly a sub-process free time is admissible;
// departures at time t are processed before an arrival at t; arrivals stop
// at the horizon and the backlog drains with its waits counted.

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "joap/model.hpp"
#include "joap/optimizer.hpp"
#include "joap/scenario.hpp"

namespace joap {

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// 64-bit Mersenne Twister seeded from (seed, stream_id) through seed_seq;
/// variates are produced by explicit inverse transforms so traces do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(const RngStream& stream);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

std::vector<double> gen_poisson_arrivals(double lambda, double horizon,
                                         Rng& rng);

struct EvRecord {
  double arrival_time = 0.0;
  double demand = 0.0;
  bool admitted = false;
  std::optional<int> sub_process;
  std::optional<double> service_start;
  double wait = 0.0;
  double profit = 0.0;
};

struct JoapDecision {
  bool admitted = false;
  std::optional<int> sub_process;
};

/// Lowest-index sub-process whose next free time is <= t takes the EV and
/// becomes free again at t + t_v.
JoapDecision admit_joap(std::span<double> free_times, double t, double t_v);

/// Admit while fewer than `threshold` EVs are parked (waiting or charging).
bool admit_qba(int system_count, int threshold);

/// m ports with a common deterministic service time. Departure times are
/// non-decreasing in admission order, so a deque tracks occupancy.
class ChargingQueue {
 public:
  ChargingQueue(int m, double service);

  /// Releases every EV whose charge completes at or before t.
  void advance_to(double t);
  int in_system() const noexcept { return static_cast<int>(departures_.size()); }
  double wait_if_admitted(double t) const;
  /// Returns the service start time.
  double admit(double t);

 private:
  double service_;
  std::priority_queue<double, std::vector<double>, std::greater<>> free_at_;
  std::deque<double> departures_;
};

/// Admit iff the EV's own margin exceeds its exact FIFO waiting penalty
/// given the EVs already in the station.
bool admit_greedy(const ChargingQueue& queue, double t, double d,
                  const EconomicParams& econ);

/// FIFO schedule for already-admitted arrivals. Arrivals finding
/// `capacity` EVs in the lot are turned away.
std::vector<EvRecord> run_fifo_queue(
    std::span<const double> arrivals, int m, double service,
    int capacity = std::numeric_limits<int>::max());

enum class PolicyKind { kJoap, kQba, kGreedy };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

struct Policy {
  PolicyKind kind = PolicyKind::kJoap;
  double demand = 0.0;       // kWh requested by every EV under this price
  int sub_processes = 1;     // JoAP n
  double t_v = 0.0;          // JoAP threshold, min
  int qba_threshold = 40;

  static Policy joap(const JoapPolicy& optimized);
  static Policy qba(double demand, int threshold);
  static Policy greedy(double demand);
};

struct RunTotals {
  std::uint64_t arrivals = 0;
  std::uint64_t admitted = 0;
  double total_wait = 0.0;
  double total_profit = 0.0;
  double horizon = 0.0;

  double admission_rate() const;
  double mean_wait() const;
  double profit_per_hour() const;
  double profit_per_admitted() const;
};

struct SimulationRun {
  std::vector<EvRecord> records;
  RunTotals totals;
};

SimulationRun run_simulation(const Scenario& scenario, const Policy& policy,
                             double horizon, const RngStream& stream,
                             bool keep_records = true);

struct LossModeResult {
  std::uint64_t offered = 0;
  std::uint64_t admitted = 0;
  double admission_rate() const;
};

/// Sub-process admission with charging disabled: an n-server loss system
/// with deterministic holding time t_v fed by `arrivals` Poisson arrivals.
LossModeResult run_loss_mode(int n, double t_v, double lambda,
                             std::uint64_t arrivals, const RngStream& stream);

struct Estimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
};

struct SimMetrics {
  Estimate admission_rate;
  Estimate mean_wait;          // over admitted EVs, min
  Estimate profit_per_hour;    // wall-clock hours of the horizon
  Estimate profit_per_admitted;
  int replication_count = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t admitted = 0;
};

struct ReplicationOptions {
  int reps = 1;
  std::uint64_t seed = 1;
  std::uint64_t stream_base = 0;  // replication k uses stream_base + k
  unsigned threads = 0;           // 0: hardware concurrency
};

/// Student-t 95% half-widths; zero for a single replication.
Estimate estimate(std::span<const double> samples);

SimMetrics aggregate(std::span<const RunTotals> runs);

SimMetrics replicate(const Scenario& scenario, const Policy& policy,
                     double horizon, const ReplicationOptions& options);

/// Header plus one row per EV: arrival_time, demand, admitted, sub_process,
/// service_start, wait, profit. Rejected EVs leave sub_process,
/// service_start and wait empty and book a profit of 0.
void write_trace_csv(std::ostream& out, std::span<const EvRecord> records);

}  // namespace joap
