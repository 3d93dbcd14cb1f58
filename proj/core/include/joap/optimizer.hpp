#pragma once

// Profit maximization over the sub-process count n and the demand d (which
// fixes the price through the demand curve).

#include <span>
#include <vector>

#include "joap/model.hpp"
#include "joap/queueing.hpp"

namespace joap {

struct ProblemParams {
  StationParams station;
  EconomicParams econ;
};

struct RelaxedSolution {
  double p_v = 0.0;        // admission probability
  double d_v = 0.0;        // demand, kWh
  double n_v = 1.0;        // continuous sub-process count
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct RelaxedOptions {
  double p_min = 1e-6;
  double p_max = 1.0 - 1e-9;
  int max_iterations = 10000;
  double tolerance = 1e-8;   // projected-gradient infinity norm
  double fd_step = 1e-6;     // central-difference step in (-ln(1 - p), ln d)
  int seed_grid = 16;        // coarse scan per axis used to pick starts
  int starts = 3;
};

struct NRecovery {
  double n = 1.0;
  bool clamped = false;    // p was below the n = 1 admission probability
  double residual = 0.0;   // admission_probability_gamma(n, d) - p
};

struct InnerOptimum {
  double demand = 0.0;
  double profit = 0.0;
};

struct JoapPolicy {
  int n_star = 1;
  double d_star = 0.0;
  double r_star = 0.0;   // $/kWh
  double t_v = 0.0;      // min
  double tau = 1.01;
  double predicted_profit = 0.0;  // per arriving EV, $
  double predicted_admit = 1.0;
  double predicted_wait = 0.0;    // min
};

struct BruteForceResult {
  JoapPolicy best;
  std::vector<double> profit_by_n;  // index k holds s(k + 1, d*_{k+1})
};

struct TauResult {
  double tau_star = 1.01;
  JoapPolicy policy;
  std::vector<JoapPolicy> by_tau;  // grid order
};

/// s(n, d) = P (d e^{-beta d}/xi - d p_e) - c omega. Negative infinity when
/// the admitted load is unstable.
double profit_s(int n, double d, const ProblemParams& params);

/// Moments at a real sub-process count: linear blend of the neighbouring
/// integer analyses at the same demand.
ArrivalMoments blended_moments(double n, double d, const StationParams& station);

/// The recast objective in (P, d); n follows from P through recover_n.
double profit_relaxed(double p, double d, const ProblemParams& params);

/// Real n >= 1 with admission_probability_gamma(n, d) == p, by bisection.
NRecovery recover_n(double p, double d, const StationParams& station);

RelaxedSolution solve_relaxed(const ProblemParams& params,
                              const RelaxedOptions& options = {});

/// Single projected-gradient run from (p0, d0).
RelaxedSolution solve_relaxed_from(const ProblemParams& params, double p0,
                                   double d0, const RelaxedOptions& options = {});

/// Golden-section search for d*_n inside the region where the marginal
/// revenue is non-negative and the admitted load is stable.
InnerOptimum inner_demand_opt(int n, const ProblemParams& params);

/// Largest demand of the inner search region for n.
double inner_search_limit(int n, const ProblemParams& params);

/// Assemble a policy at (n, d) with all predicted quantities recomputed.
JoapPolicy make_policy(int n, double d, const ProblemParams& params);

/// Relaxed solve, recover n^v, then compare floor(n^v) and ceil(n^v).
JoapPolicy optimize_joap(const ProblemParams& params);

BruteForceResult brute_force_oracle(const ProblemParams& params,
                                    int n_max = 64);

std::vector<double> default_tau_grid();

TauResult optimize_tau(const ProblemParams& params,
                       std::span<const double> tau_grid);

}  // namespace joap
