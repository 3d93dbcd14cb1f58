#pragma once

// Closed-form analytics of the two-stage station model: a virtual loss
// system that regulates admissions (n sub-processes, holding time T_v)
// feeding the m-port FIFO charging queue.

#include <vector>

#include "joap/model.hpp"

namespace joap {

struct AdmissionAnalysis {
  int n = 1;
  double t_v = 0.0;            // sub-process threshold, min
  double offered_load = 0.0;   // lambda * T_v
  std::vector<double> state_probs;  // P_0 .. P_n
  double p_admit = 1.0;        // 1 - P_n
  double service_time = 0.0;   // d / alpha, min
};

struct ArrivalMoments {
  double mean_x = 0.0;    // E(X), min
  double second_x = 0.0;  // E(X^2), min^2
  double mu_y = 0.0;      // m E(X)
  double var_y = 0.0;     // m (E(X^2) - E(X)^2)
};

/// Which second moment the two-branch fit is asked to reproduce.
enum class SecondMomentTarget {
  kVarianceAsStated,  // 1/l1^2 + 1/l2^2 = sigma_Y^2
  kTrueSecondMoment,  // 1/l1^2 + 1/l2^2 = sigma_Y^2 + mu_Y^2
};

/// Equal-weight mixture of Exp(lambda1) and Exp(lambda2).
struct PhaseFit {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gamma_w = 0.5;
  bool feasible = false;

  double mean() const { return 0.5 / lambda1 + 0.5 / lambda2; }
  double second_moment() const {
    return 1.0 / (lambda1 * lambda1) + 1.0 / (lambda2 * lambda2);
  }
};

/// Stationary occupancy of an n-server loss system at offered load a.
std::vector<double> erlang_steady_state(int n, double a);

/// a = lambda * tau * m * s / n for real n > 0.
double offered_load(double n, double d, const StationParams& station);

AdmissionAnalysis analyze_admission(int n, double d,
                                    const StationParams& station);

/// 1 - P_n from the occupancy distribution.
double admission_probability(int n, double d, const StationParams& station);

/// Same quantity through the incomplete-gamma form; accepts real n > 0.
double admission_probability_gamma(double n, double d,
                                   const StationParams& station);

/// Density and distribution of the admitted inter-arrival time as given by
/// the occupancy mixture. Both are defective: total mass is 1 - P_0.
double interarrival_pdf(double x, const AdmissionAnalysis& analysis);
double interarrival_cdf(double x, const AdmissionAnalysis& analysis);

/// Moments conditioned on a non-empty virtual system.
ArrivalMoments admitted_interarrival_moments(const AdmissionAnalysis& analysis,
                                             int m);

double phase_fit_target(const ArrivalMoments& moments,
                        SecondMomentTarget target);

/// Solves 1/l1 + 1/l2 = 2 mu_y and 1/l1^2 + 1/l2^2 = second_y.
/// feasible == false when no positive pair exists.
PhaseFit fit_mixture_exponential(double mu_y, double second_y);

/// rho = lambda * p_admit * s / m.
double load_density(const AdmissionAnalysis& analysis,
                    const StationParams& station);

/// rho s / (2 (1 - rho)) * [s^2 + 2 s mu_Y + sigma_Y^2].
/// Throws StabilityError when rho >= 1.
double mean_wait_theorem1(const AdmissionAnalysis& analysis,
                          const ArrivalMoments& moments,
                          const StationParams& station);
double mean_wait_theorem1(double rho, double service,
                          const ArrivalMoments& moments);

/// Ph/D/1 mean-wait approximation for the fitted mixture arrival process
/// with deterministic service. Evaluated with time measured in units of the
/// service time and rescaled to minutes. A degenerate fit (l1 == l2) is
/// reduced to the single-exponential transform first.
double mean_wait_ph_d1(const PhaseFit& fit, double service, double rho);

}  // namespace joap
