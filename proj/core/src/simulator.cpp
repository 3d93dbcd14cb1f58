#include "joap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "joap/errors.hpp"
#include "joap/parallel.hpp"

namespace joap {

Rng::Rng(const RngStream& stream) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(stream.seed),
      static_cast<std::uint32_t>(stream.seed >> 32),
      static_cast<std::uint32_t>(stream.stream_id),
      static_cast<std::uint32_t>(stream.stream_id >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() {
  // 52 random mantissa bits, shifted off both endpoints.
  return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

std::vector<double> gen_poisson_arrivals(double lambda, double horizon,
                                         Rng& rng) {
  if (!(lambda > 0.0))
    throw DomainError("gen_poisson_arrivals: lambda must be > 0");
  std::vector<double> times;
  if (!(horizon > 0.0)) return times;
  times.reserve(static_cast<std::size_t>(lambda * horizon * 1.2) + 8);
  double t = rng.exponential(lambda);
  while (t <= horizon) {
    times.push_back(t);
    t += rng.exponential(lambda);
  }
  return times;
}

JoapDecision admit_joap(std::span<double> free_times, double t, double t_v) {
  for (std::size_t i = 0; i < free_times.size(); ++i) {
    if (free_times[i] <= t) {
      free_times[i] = t + t_v;
      return {true, static_cast<int>(i)};
    }
  }
  return {false, std::nullopt};
}

bool admit_qba(int system_count, int threshold) {
  return system_count < threshold;
}

ChargingQueue::ChargingQueue(int m, double service) : service_(service) {
  if (m < 1) throw DomainError("ChargingQueue: m must be >= 1");
  if (!(service >= 0.0))
    throw DomainError("ChargingQueue: service time must be >= 0");
  for (int i = 0; i < m; ++i) free_at_.push(0.0);
}

void ChargingQueue::advance_to(double t) {
  while (!departures_.empty() && departures_.front() <= t)
    departures_.pop_front();
}

double ChargingQueue::wait_if_admitted(double t) const {
  return std::max(0.0, free_at_.top() - t);
}

double ChargingQueue::admit(double t) {
  const double start = std::max(t, free_at_.top());
  free_at_.pop();
  free_at_.push(start + service_);
  departures_.push_back(start + service_);
  return start;
}

bool admit_greedy(const ChargingQueue& queue, double t, double d,
                  const EconomicParams& econ) {
  const double wait = queue.wait_if_admitted(t);
  return revenue_margin(d, econ) - econ.c() * wait > 0.0;
}

std::vector<EvRecord> run_fifo_queue(std::span<const double> arrivals, int m,
                                     double service, int capacity) {
  ChargingQueue queue(m, service);
  std::vector<EvRecord> out;
  out.reserve(arrivals.size());
  for (double t : arrivals) {
    queue.advance_to(t);
    EvRecord rec;
    rec.arrival_time = t;
    if (queue.in_system() < capacity) {
      rec.admitted = true;
      rec.service_start = queue.admit(t);
      rec.wait = *rec.service_start - t;
    }
    out.push_back(rec);
  }
  return out;
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kJoap:
      return "joap";
    case PolicyKind::kQba:
      return "qba";
    case PolicyKind::kGreedy:
      return "greedy";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  if (name == "joap") return PolicyKind::kJoap;
  if (name == "qba") return PolicyKind::kQba;
  if (name == "greedy") return PolicyKind::kGreedy;
  return std::nullopt;
}

Policy Policy::joap(const JoapPolicy& optimized) {
  Policy p;
  p.kind = PolicyKind::kJoap;
  p.demand = optimized.d_star;
  p.sub_processes = optimized.n_star;
  p.t_v = optimized.t_v;
  return p;
}

Policy Policy::qba(double demand, int threshold) {
  Policy p;
  p.kind = PolicyKind::kQba;
  p.demand = demand;
  p.qba_threshold = threshold;
  return p;
}

Policy Policy::greedy(double demand) {
  Policy p;
  p.kind = PolicyKind::kGreedy;
  p.demand = demand;
  return p;
}

double RunTotals::admission_rate() const {
  return arrivals == 0 ? 1.0 : static_cast<double>(admitted) / arrivals;
}

double RunTotals::mean_wait() const {
  return admitted == 0 ? 0.0 : total_wait / admitted;
}

double RunTotals::profit_per_hour() const {
  return horizon > 0.0 ? total_profit / (horizon / 60.0) : 0.0;
}

double RunTotals::profit_per_admitted() const {
  return admitted == 0 ? 0.0 : total_profit / admitted;
}

SimulationRun run_simulation(const Scenario& scenario, const Policy& policy,
                             double horizon, const RngStream& stream,
                             bool keep_records) {
  const auto& st = scenario.station;
  st.validate();
  if (!(horizon > 0.0)) throw DomainError("run_simulation: horizon must be > 0");
  if (!(policy.demand >= 0.0 && policy.demand <= scenario.econ.phi()))
    throw DomainError("run_simulation: policy demand outside [0, phi]");
  if (policy.kind == PolicyKind::kJoap &&
      (policy.sub_processes < 1 || !(policy.t_v >= 0.0)))
    throw DomainError("run_simulation: JoAP needs n >= 1 and T_v >= 0");

  Rng rng(stream);
  const std::vector<double> arrivals =
      gen_poisson_arrivals(scenario.lambda(), horizon, rng);

  ChargingQueue queue(st.m, st.service_time(policy.demand));
  std::vector<double> sub_free(
      static_cast<std::size_t>(std::max(policy.sub_processes, 1)), 0.0);
  // First arrival finds every sub-process free.
  std::fill(sub_free.begin(), sub_free.end(),
            -std::numeric_limits<double>::infinity());

  SimulationRun run;
  run.totals.horizon = horizon;
  if (keep_records) run.records.reserve(arrivals.size());
  for (double t : arrivals) {
    queue.advance_to(t);
    EvRecord rec;
    rec.arrival_time = t;
    rec.demand = policy.demand;
    const bool room = queue.in_system() < st.parking_capacity;
    switch (policy.kind) {
      case PolicyKind::kJoap:
        if (room) {
          const JoapDecision decision = admit_joap(sub_free, t, policy.t_v);
          rec.admitted = decision.admitted;
          rec.sub_process = decision.sub_process;
        }
        break;
      case PolicyKind::kQba:
        rec.admitted = room && admit_qba(queue.in_system(), policy.qba_threshold);
        break;
      case PolicyKind::kGreedy:
        rec.admitted = room && admit_greedy(queue, t, policy.demand, scenario.econ);
        break;
    }
    ++run.totals.arrivals;
    if (rec.admitted) {
      rec.service_start = queue.admit(t);
      rec.wait = *rec.service_start - t;
      rec.profit = per_ev_profit(policy.demand, rec.wait, true, scenario.econ);
      ++run.totals.admitted;
      run.totals.total_wait += rec.wait;
      run.totals.total_profit += rec.profit;
    }
    if (keep_records) run.records.push_back(rec);
  }
  return run;
}

double LossModeResult::admission_rate() const {
  return offered == 0 ? 1.0 : static_cast<double>(admitted) / offered;
}

LossModeResult run_loss_mode(int n, double t_v, double lambda,
                             std::uint64_t arrivals, const RngStream& stream) {
  if (n < 1) throw DomainError("run_loss_mode: n must be >= 1");
  if (!(lambda > 0.0)) throw DomainError("run_loss_mode: lambda must be > 0");
  Rng rng(stream);
  std::vector<double> free_times(static_cast<std::size_t>(n),
                                 -std::numeric_limits<double>::infinity());
  LossModeResult out;
  double t = 0.0;
  for (std::uint64_t k = 0; k < arrivals; ++k) {
    t += rng.exponential(lambda);
    ++out.offered;
    if (admit_joap(free_times, t, t_v).admitted) ++out.admitted;
  }
  return out;
}

Estimate estimate(std::span<const double> samples) {
  Estimate e;
  const auto count = samples.size();
  if (count == 0) return e;
  double sum = 0.0;
  for (double v : samples) sum += v;
  e.mean = sum / count;
  if (count < 2) return e;
  double ss = 0.0;
  for (double v : samples) ss += (v - e.mean) * (v - e.mean);
  const double sd = std::sqrt(ss / (count - 1));
  const boost::math::students_t dist(static_cast<double>(count - 1));
  e.half_width_95 = boost::math::quantile(dist, 0.975) * sd / std::sqrt(count);
  return e;
}

SimMetrics aggregate(std::span<const RunTotals> runs) {
  std::vector<double> admit, wait, per_hour, per_admitted;
  SimMetrics m;
  for (const auto& r : runs) {
    admit.push_back(r.admission_rate());
    wait.push_back(r.mean_wait());
    per_hour.push_back(r.profit_per_hour());
    per_admitted.push_back(r.profit_per_admitted());
    m.arrivals += r.arrivals;
    m.admitted += r.admitted;
  }
  m.admission_rate = estimate(admit);
  m.mean_wait = estimate(wait);
  m.profit_per_hour = estimate(per_hour);
  m.profit_per_admitted = estimate(per_admitted);
  m.replication_count = static_cast<int>(runs.size());
  return m;
}

SimMetrics replicate(const Scenario& scenario, const Policy& policy,
                     double horizon, const ReplicationOptions& options) {
  if (options.reps < 1) throw DomainError("replicate: reps must be >= 1");
  std::vector<RunTotals> runs(static_cast<std::size_t>(options.reps));
  parallel_for(runs.size(), options.threads, [&](std::size_t k) {
    const RngStream stream{options.seed, options.stream_base + k};
    runs[k] = run_simulation(scenario, policy, horizon, stream, false).totals;
  });
  return aggregate(runs);
}

void write_trace_csv(std::ostream& out, std::span<const EvRecord> records) {
  out << "arrival_time,demand,admitted,sub_process,service_start,wait,profit\n";
  for (const auto& r : records) {
    out << fmt::format("{},{},{},", r.arrival_time, r.demand,
                       r.admitted ? 1 : 0);
    if (r.sub_process) out << *r.sub_process;
    out << ',';
    if (r.service_start) out << fmt::format("{}", *r.service_start);
    out << ',';
    if (r.admitted) out << fmt::format("{}", r.wait);
    out << fmt::format(",{}\n", r.profit);
  }
}

}  // namespace joap
