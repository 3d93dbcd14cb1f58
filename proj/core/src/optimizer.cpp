#include "joap/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "joap/errors.hpp"

namespace joap {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxRecoveredN = 65536.0;
constexpr double kInvPhi = 0.6180339887498948482;

void check_demand(double d, const EconomicParams& econ, const char* where) {
  if (!(d >= 0.0 && d <= econ.phi()))
    throw DomainError(std::string(where) + ": demand outside [0, phi]: " +
                      std::to_string(d));
}

// Search coordinates (-ln(1 - p), ln d): admission probabilities close to 1
// and demands far below phi both get room to move.
using Point = std::array<double, 2>;

constexpr double kMinDemandFraction = 1e-9;

double to_p(double u) { return -std::expm1(-u); }
double to_u(double p) { return -std::log1p(-p); }

class RelaxedAscent {
 public:
  RelaxedAscent(const ProblemParams& params, const RelaxedOptions& options)
      : params_(params),
        options_(options),
        lo_{to_u(options.p_min), std::log(kMinDemandFraction * params.econ.phi())},
        hi_{to_u(options.p_max), std::log(params.econ.phi())} {}

  Point to_point(double p, double d) const {
    return project({to_u(std::clamp(p, options_.p_min, options_.p_max)),
                    std::log(std::max(d, kMinDemandFraction * params_.econ.phi()))});
  }

  double p_of(const Point& y) const {
    return std::clamp(to_p(y[0]), options_.p_min, options_.p_max);
  }
  double d_of(const Point& y) const {
    return std::min(std::exp(y[1]), params_.econ.phi());
  }

  double value(const Point& y) const {
    return profit_relaxed(p_of(y), d_of(y), params_);
  }

  Point project(Point y) const {
    for (int k = 0; k < 2; ++k) y[k] = std::clamp(y[k], lo_[k], hi_[k]);
    return y;
  }

  Point gradient(const Point& y, double fy) const {
    Point g{0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
      Point up = y;
      Point down = y;
      up[k] = std::min(y[k] + options_.fd_step, hi_[k]);
      down[k] = std::max(y[k] - options_.fd_step, lo_[k]);
      const double f_up = up[k] > y[k] ? value(up) : kNegInf;
      const double f_down = down[k] < y[k] ? value(down) : kNegInf;
      const bool ok_up = std::isfinite(f_up);
      const bool ok_down = std::isfinite(f_down);
      if (ok_up && ok_down) {
        g[k] = (f_up - f_down) / (up[k] - down[k]);
      } else if (ok_up) {
        g[k] = (f_up - fy) / (up[k] - y[k]);
      } else if (ok_down) {
        g[k] = (fy - f_down) / (y[k] - down[k]);
      }
    }
    return g;
  }

  RelaxedSolution run(Point y) const {
    y = project(y);
    double fy = value(y);
    RelaxedSolution out;
    double step = 1.0;
    int it = 0;
    for (; it < options_.max_iterations; ++it) {
      const Point g = gradient(y, fy);
      const Point unit = project({y[0] + g[0], y[1] + g[1]});
      const double pg_norm =
          std::max(std::abs(unit[0] - y[0]), std::abs(unit[1] - y[1]));
      if (pg_norm < options_.tolerance) {
        out.converged = true;
        break;
      }
      bool accepted = false;
      while (step > 1e-16) {
        const Point trial = project({y[0] + step * g[0], y[1] + step * g[1]});
        const double f_trial = value(trial);
        const double decrease =
            g[0] * (trial[0] - y[0]) + g[1] * (trial[1] - y[1]);
        if (std::isfinite(f_trial) && f_trial >= fy + 1e-4 * decrease) {
          accepted = trial != y;
          y = trial;
          fy = f_trial;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      step = std::min(step * 2.0, 1e6);
    }
    out.p_v = p_of(y);
    out.d_v = d_of(y);
    out.objective = fy;
    out.iterations = it;
    out.n_v = out.d_v > 0.0 ? recover_n(out.p_v, out.d_v, params_.station).n
                            : 1.0;
    return out;
  }

  std::vector<Point> seeds() const {
    struct Scored {
      double f;
      Point y;
    };
    std::vector<Scored> scored;
    const int g = std::max(options_.seed_grid, 2);
    for (int i = 0; i < g; ++i) {
      const double u = lo_[0] + (hi_[0] - lo_[0]) * i / (g - 1);
      for (int j = 0; j < g; ++j) {
        const Point y{u, lo_[1] + (hi_[1] - lo_[1]) * j / (g - 1)};
        const double f = value(y);
        if (std::isfinite(f)) scored.push_back({f, y});
      }
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.f > b.f; });
    std::vector<Point> out;
    for (const auto& s : scored) {
      if (static_cast<int>(out.size()) >= options_.starts) break;
      out.push_back(s.y);
    }
    if (out.empty()) out.push_back({0.5 * (lo_[0] + hi_[0]), lo_[1]});
    return out;
  }

 private:
  const ProblemParams& params_;
  RelaxedOptions options_;
  Point lo_;
  Point hi_;
};

double load_at(int n, double d, const StationParams& station) {
  if (d <= 0.0) return 0.0;
  return load_density(analyze_admission(n, d, station), station);
}

}  // namespace

double profit_s(int n, double d, const ProblemParams& params) {
  if (n < 1) throw DomainError("profit_s: n must be >= 1");
  check_demand(d, params.econ, "profit_s");
  if (d == 0.0) return 0.0;
  const auto analysis = analyze_admission(n, d, params.station);
  const double rho = load_density(analysis, params.station);
  if (!(rho < 1.0)) return kNegInf;
  const auto moments =
      admitted_interarrival_moments(analysis, params.station.m);
  const double omega =
      mean_wait_theorem1(rho, analysis.service_time, moments);
  return analysis.p_admit * revenue_margin(d, params.econ) -
         penalty(omega, params.econ);
}

ArrivalMoments blended_moments(double n, double d,
                               const StationParams& station) {
  const double clamped = std::max(n, 1.0);
  const int lo = static_cast<int>(std::floor(clamped));
  const int hi = static_cast<int>(std::ceil(clamped));
  const auto at = [&](int k) {
    return admitted_interarrival_moments(analyze_admission(k, d, station),
                                         station.m);
  };
  const ArrivalMoments m_lo = at(lo);
  if (hi == lo) return m_lo;
  const ArrivalMoments m_hi = at(hi);
  const double w = clamped - lo;
  const auto mix = [w](double a, double b) { return (1.0 - w) * a + w * b; };
  return {mix(m_lo.mean_x, m_hi.mean_x), mix(m_lo.second_x, m_hi.second_x),
          mix(m_lo.mu_y, m_hi.mu_y), mix(m_lo.var_y, m_hi.var_y)};
}

double profit_relaxed(double p, double d, const ProblemParams& params) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("profit_relaxed: p must lie in (0, 1)");
  check_demand(d, params.econ, "profit_relaxed");
  if (d == 0.0) return 0.0;
  const auto& st = params.station;
  const double service = st.service_time(d);
  const double rho = st.lambda * p * service / st.m;
  if (!(rho < 1.0)) return kNegInf;
  const NRecovery n = recover_n(p, d, st);
  const ArrivalMoments moments = blended_moments(n.n, d, st);
  const double omega = mean_wait_theorem1(rho, service, moments);
  return p * revenue_margin(d, params.econ) - penalty(omega, params.econ);
}

NRecovery recover_n(double p, double d, const StationParams& station) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("recover_n: p must lie in (0, 1)");
  if (!(d > 0.0)) throw DomainError("recover_n: demand must be > 0");
  const auto admit = [&](double n) {
    return admission_probability_gamma(n, d, station);
  };
  const double at_one = admit(1.0);
  if (p <= at_one) return {1.0, true, at_one - p};
  double lo = 1.0;
  double hi = 2.0;
  while (admit(hi) < p && hi < kMaxRecoveredN) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (admit(mid) < p ? lo : hi) = mid;
  }
  const double n = 0.5 * (lo + hi);
  return {n, false, admit(n) - p};
}

RelaxedSolution solve_relaxed_from(const ProblemParams& params, double p0,
                                   double d0, const RelaxedOptions& options) {
  const RelaxedAscent ascent(params, options);
  return ascent.run(ascent.to_point(p0, d0));
}

RelaxedSolution solve_relaxed(const ProblemParams& params,
                              const RelaxedOptions& options) {
  const RelaxedAscent ascent(params, options);
  RelaxedSolution best;
  best.objective = kNegInf;
  for (const Point& seed : ascent.seeds()) {
    RelaxedSolution sol = ascent.run(seed);
    if (sol.objective > best.objective) best = sol;
  }
  return best;
}

double inner_search_limit(int n, const ProblemParams& params) {
  const auto& st = params.station;
  // Non-negative marginal revenue holds on [0, d_cf].
  double limit = congestion_free_demand(params.econ);
  if (limit <= 0.0) return 0.0;
  // n <= m keeps rho below n^2 / (tau m^2) < 1.
  if (n <= st.m || load_at(n, limit, st) < 1.0) return limit;
  constexpr int kScan = 256;
  double stable = 0.0;
  double unstable = limit;
  for (int k = 1; k <= kScan; ++k) {
    const double d = limit * k / kScan;
    if (load_at(n, d, st) >= 1.0) {
      unstable = d;
      break;
    }
    stable = d;
  }
  for (int it = 0; it < 100 && unstable - stable > 1e-12 * unstable; ++it) {
    const double mid = 0.5 * (stable + unstable);
    (load_at(n, mid, st) < 1.0 ? stable : unstable) = mid;
  }
  return stable;
}

InnerOptimum inner_demand_opt(int n, const ProblemParams& params) {
  if (n < 1) throw DomainError("inner_demand_opt: n must be >= 1");
  const double limit = inner_search_limit(n, params);
  if (limit <= 0.0) return {0.0, 0.0};
  const auto f = [&](double d) { return profit_s(n, d, params); };
  double a = 0.0;
  double b = limit;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-8) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  InnerOptimum best{0.0, 0.0};
  for (double d : {x1, x2, limit}) {
    const double v = f(d);
    if (v > best.profit) best = {d, v};
  }
  return best;
}

JoapPolicy make_policy(int n, double d, const ProblemParams& params) {
  JoapPolicy policy;
  policy.n_star = n;
  policy.d_star = d;
  policy.tau = params.station.tau;
  policy.r_star = d > 0.0 ? price_for_demand(d, params.econ)
                          : 1.0 / params.econ.xi();
  const double service = params.station.service_time(d);
  policy.t_v = params.station.tau * params.station.m * service / n;
  policy.predicted_profit = profit_s(n, d, params);
  if (d > 0.0) {
    const auto analysis = analyze_admission(n, d, params.station);
    policy.predicted_admit = analysis.p_admit;
    const double rho = load_density(analysis, params.station);
    policy.predicted_wait =
        rho < 1.0
            ? mean_wait_theorem1(
                  rho, service,
                  admitted_interarrival_moments(analysis, params.station.m))
            : std::numeric_limits<double>::infinity();
  }
  return policy;
}

JoapPolicy optimize_joap(const ProblemParams& params) {
  params.station.validate();
  const RelaxedSolution relaxed = solve_relaxed(params);
  const double n_v = relaxed.d_v > 0.0 ? relaxed.n_v : 1.0;
  const int lower = std::max(1, static_cast<int>(std::floor(n_v)));
  const int upper = std::max(1, static_cast<int>(std::ceil(n_v)));
  const InnerOptimum at_lower = inner_demand_opt(lower, params);
  if (upper == lower) return make_policy(lower, at_lower.demand, params);
  const InnerOptimum at_upper = inner_demand_opt(upper, params);
  // Ties go to the smaller n.
  if (at_upper.profit > at_lower.profit)
    return make_policy(upper, at_upper.demand, params);
  return make_policy(lower, at_lower.demand, params);
}

BruteForceResult brute_force_oracle(const ProblemParams& params, int n_max) {
  if (n_max < 1) throw DomainError("brute_force_oracle: n_max must be >= 1");
  params.station.validate();
  BruteForceResult out;
  int best_n = 1;
  InnerOptimum best{0.0, kNegInf};
  for (int n = 1; n <= n_max; ++n) {
    const InnerOptimum opt = inner_demand_opt(n, params);
    out.profit_by_n.push_back(opt.profit);
    if (opt.profit > best.profit) {
      best = opt;
      best_n = n;
    }
  }
  out.best = make_policy(best_n, best.demand, params);
  return out;
}

std::vector<double> default_tau_grid() {
  return {1.01, 1.05, 1.1, 1.2, 1.5, 2.0};
}

TauResult optimize_tau(const ProblemParams& params,
                       std::span<const double> tau_grid) {
  if (tau_grid.empty()) throw DomainError("optimize_tau: empty tau grid");
  TauResult out;
  bool first = true;
  for (double tau : tau_grid) {
    if (!(tau > 1.0)) throw DomainError("optimize_tau: every tau must be > 1");
    ProblemParams at = params;
    at.station.tau = tau;
    JoapPolicy policy = optimize_joap(at);
    if (first || policy.predicted_profit > out.policy.predicted_profit) {
      out.policy = policy;
      out.tau_star = tau;
      first = false;
    }
    out.by_tau.push_back(policy);
  }
  return out;
}

}  // namespace joap
