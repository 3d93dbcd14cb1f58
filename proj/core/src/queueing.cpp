#include "joap/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "joap/errors.hpp"
#include "joap/special_functions.hpp"

namespace joap {

std::vector<double> erlang_steady_state(int n, double a) {
  if (n < 1) throw DomainError("erlang_steady_state: n must be >= 1");
  if (!(a >= 0.0))
    throw DomainError("erlang_steady_state: offered load must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(n) + 1, 0.0);
  if (a == 0.0) {
    p[0] = 1.0;
    return p;
  }
  // Anchor at the mode so every unnormalized term is <= 1; neighbours follow
  // from the ratio P_{i+1} / P_i = a / (i + 1).
  const int mode = std::min(n, static_cast<int>(std::floor(a)));
  p[mode] = 1.0;
  for (int i = mode; i < n; ++i) p[i + 1] = p[i] * a / (i + 1);
  for (int i = mode; i > 0; --i) p[i - 1] = p[i] * i / a;
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

double offered_load(double n, double d, const StationParams& station) {
  return station.lambda * station.tau * station.m * station.service_time(d) / n;
}

AdmissionAnalysis analyze_admission(int n, double d,
                                    const StationParams& station) {
  if (n < 1) throw DomainError("analyze_admission: n must be >= 1");
  if (!(d > 0.0)) throw DomainError("analyze_admission: demand must be > 0");
  AdmissionAnalysis out;
  out.n = n;
  out.service_time = station.service_time(d);
  out.t_v = station.tau * station.m * out.service_time / n;
  out.offered_load = station.lambda * out.t_v;
  out.state_probs = erlang_steady_state(n, out.offered_load);
  out.p_admit = 1.0 - out.state_probs.back();
  return out;
}

double admission_probability(int n, double d, const StationParams& station) {
  return analyze_admission(n, d, station).p_admit;
}

double admission_probability_gamma(double n, double d,
                                   const StationParams& station) {
  if (!(n > 0.0)) throw DomainError("admission_probability_gamma: n must be > 0");
  if (!(d > 0.0))
    throw DomainError("admission_probability_gamma: demand must be > 0");
  return 1.0 - erlang_b_gamma(n, offered_load(n, d, station));
}

double interarrival_pdf(double x, const AdmissionAnalysis& analysis) {
  const double tv = analysis.t_v;
  if (x < 0.0 || x > tv) return 0.0;
  const double q = (tv - x) / tv;
  double density = 0.0;
  double q_pow = 1.0;  // q^{i-1}
  for (int i = 1; i <= analysis.n; ++i) {
    density += i / tv * q_pow * analysis.state_probs[i];
    q_pow *= q;
  }
  return density;
}

double interarrival_cdf(double x, const AdmissionAnalysis& analysis) {
  if (x <= 0.0) return 0.0;
  const double q = x >= analysis.t_v ? 0.0 : (analysis.t_v - x) / analysis.t_v;
  double mass = 0.0;
  double q_pow = 1.0;
  for (int i = 1; i <= analysis.n; ++i) {
    q_pow *= q;
    mass += (1.0 - q_pow) * analysis.state_probs[i];
  }
  return mass;
}

ArrivalMoments admitted_interarrival_moments(const AdmissionAnalysis& analysis,
                                             int m) {
  double busy = 0.0;
  for (int i = 1; i <= analysis.n; ++i) busy += analysis.state_probs[i];
  if (!(busy > 0.0))
    throw DomainError(
        "admitted_interarrival_moments: virtual system is never occupied");
  const double tv = analysis.t_v;
  ArrivalMoments out;
  for (int i = 1; i <= analysis.n; ++i) {
    const double w = analysis.state_probs[i] / busy;
    out.mean_x += w * tv / (i + 1);
    out.second_x += w * 2.0 * tv * tv / ((i + 1.0) * (i + 2.0));
  }
  out.mu_y = m * out.mean_x;
  out.var_y = m * std::max(0.0, out.second_x - out.mean_x * out.mean_x);
  return out;
}

double phase_fit_target(const ArrivalMoments& moments,
                        SecondMomentTarget target) {
  switch (target) {
    case SecondMomentTarget::kVarianceAsStated:
      return moments.var_y;
    case SecondMomentTarget::kTrueSecondMoment:
      return moments.var_y + moments.mu_y * moments.mu_y;
  }
  return moments.var_y;
}

PhaseFit fit_mixture_exponential(double mu_y, double second_y) {
  if (!(mu_y > 0.0))
    throw DomainError("fit_mixture_exponential: mean must be > 0");
  if (!(second_y > 0.0))
    throw DomainError("fit_mixture_exponential: second moment must be > 0");
  // 1/l1 and 1/l2 are the roots of t^2 - 2 mu t + (4 mu^2 - S) / 2.
  PhaseFit fit;
  const double disc = 0.5 * second_y - mu_y * mu_y;
  const double product = 0.5 * (4.0 * mu_y * mu_y - second_y);
  if (disc < 0.0 || !(product > 0.0)) return fit;
  const double root = std::sqrt(disc);
  const double mean1 = mu_y + root;
  // Vieta's product avoids cancellation in mu - root.
  const double mean2 = product / mean1;
  fit.lambda1 = 1.0 / mean1;
  fit.lambda2 = 1.0 / mean2;
  fit.feasible = true;
  return fit;
}

double load_density(const AdmissionAnalysis& analysis,
                    const StationParams& station) {
  return station.lambda * analysis.p_admit * analysis.service_time / station.m;
}

double mean_wait_theorem1(double rho, double service,
                          const ArrivalMoments& moments) {
  if (!(rho < 1.0))
    throw StabilityError("mean_wait_theorem1: load density " +
                         std::to_string(rho) + " >= 1");
  const double bracket = service * service +
                         2.0 * service * moments.mu_y + moments.var_y;
  return rho * service / (2.0 * (1.0 - rho)) * bracket;
}

double mean_wait_theorem1(const AdmissionAnalysis& analysis,
                          const ArrivalMoments& moments,
                          const StationParams& station) {
  return mean_wait_theorem1(load_density(analysis, station),
                            analysis.service_time, moments);
}

double mean_wait_ph_d1(const PhaseFit& fit, double service, double rho) {
  if (!fit.feasible)
    throw InfeasibleFitError("mean_wait_ph_d1: phase fit is infeasible");
  if (!(rho < 1.0))
    throw StabilityError("mean_wait_ph_d1: load density >= 1");
  if (!(service > 0.0)) throw DomainError("mean_wait_ph_d1: service must be > 0");
  // Unit service time: E(S) = E(S^2) = 1, rates scale by the service time.
  const double l1 = fit.lambda1 * service;
  const double l2 = fit.lambda2 * service;
  const double second_a = 1.0 / (l1 * l1) + 1.0 / (l2 * l2);
  double a1_ratio;  // a1'(0) / a1(0)
  double a2_ratio;  // a2'(0) / a2(0)
  double psi;
  if (std::abs(l1 - l2) <= 1e-12 * std::max(l1, l2)) {
    // a*(s) = l / (s + l)
    const double l = 0.5 * (l1 + l2);
    a1_ratio = 0.0;
    a2_ratio = 1.0 / l;
    psi = 1.0 / l;
  } else {
    // a*(s) = (l1 l2 + (l1 + l2) s / 2) / ((s + l1)(s + l2))
    const double a0 = l1 * l2;
    a1_ratio = 0.5 * (l1 + l2) / a0;
    a2_ratio = (l1 + l2) / a0;
    psi = ((l1 + l2) - 0.5 * (l1 + l2)) / a0;
  }
  const double bracket = 1.0 + second_a + 2.0 * a1_ratio - 2.0 * psi * a2_ratio;
  return service * rho / (2.0 * (1.0 - rho)) * bracket;
}

}  // namespace joap
