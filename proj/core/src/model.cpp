#include "joap/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "joap/errors.hpp"

namespace joap {

EconomicParams::EconomicParams(double beta, double phi, double u_phi,
                               double p_e, double c)
    : beta_(beta), phi_(phi), u_phi_(u_phi), p_e_(p_e), c_(c) {
  if (!(beta > 0.0)) throw DomainError("beta must be > 0");
  if (!(phi > 0.0)) throw DomainError("battery capacity phi must be > 0");
  if (!(u_phi > 0.0)) throw DomainError("maximum utility U(phi) must be > 0");
  if (!(p_e >= 0.0)) throw DomainError("electricity price must be >= 0");
  if (!(c >= 0.0)) throw DomainError("penalty rate must be >= 0");
  xi_ = -std::expm1(-beta_ * phi_) / (u_phi_ * beta_);
}

EconomicParams EconomicParams::with_electricity_price(double p_e) const {
  return {beta_, phi_, u_phi_, p_e, c_};
}

EconomicParams EconomicParams::with_penalty_rate(double c) const {
  return {beta_, phi_, u_phi_, p_e_, c};
}

void StationParams::validate() const {
  if (m < 1) throw DomainError("port count m must be >= 1");
  if (!(alpha > 0.0)) throw DomainError("charging power alpha must be > 0");
  if (parking_capacity < m)
    throw DomainError("parking capacity must be >= port count");
  if (!(lambda > 0.0)) throw DomainError("arrival rate lambda must be > 0");
  if (!(tau > 1.0)) throw DomainError("tau must be > 1");
}

double utility(double d, const EconomicParams& econ) {
  if (!(d >= 0.0 && d <= econ.phi()))
    throw DomainError("utility: demand outside [0, phi]: " + std::to_string(d));
  return econ.u_phi() * std::expm1(-econ.beta() * d) /
         std::expm1(-econ.beta() * econ.phi());
}

double demand_response(double r, const EconomicParams& econ) {
  if (!(r >= 0.0)) throw DomainError("demand_response: price must be >= 0");
  const double scaled = econ.xi() * r;
  if (scaled <= 0.0) return econ.phi();
  return std::clamp(-std::log(scaled) / econ.beta(), 0.0, econ.phi());
}

double price_for_demand(double d, const EconomicParams& econ) {
  if (!(d > 0.0 && d <= econ.phi()))
    throw DomainError("price_for_demand: demand outside (0, phi]: " +
                      std::to_string(d));
  return std::exp(-econ.beta() * d) / econ.xi();
}

double penalty(double omega, const EconomicParams& econ) {
  if (!(omega >= 0.0)) throw DomainError("penalty: wait must be >= 0");
  return econ.c() * omega;
}

double revenue_margin(double d, const EconomicParams& econ) {
  return d * (std::exp(-econ.beta() * d) / econ.xi() - econ.p_e());
}

double per_ev_profit(double d, double wait, bool admitted,
                     const EconomicParams& econ) {
  if (!admitted) return 0.0;
  return revenue_margin(d, econ) - penalty(wait, econ);
}

double congestion_free_demand(const EconomicParams& econ) {
  // Marginal revenue e^{-beta d}(1 - beta d)/xi - p_e is decreasing on
  // [0, 1/beta] and non-positive at 1/beta.
  const auto marginal = [&](double d) {
    return std::exp(-econ.beta() * d) * (1.0 - econ.beta() * d) / econ.xi() -
           econ.p_e();
  };
  if (marginal(0.0) <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = std::min(1.0 / econ.beta(), econ.phi());
  if (marginal(hi) >= 0.0) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (marginal(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace joap
