#pragma once

// Economic primitives of the charging station: EV utility, the demand curve
// it induces, the inverse price map and the accounting used per admitted EV.
//
// Canonical units: minutes, kWh, dollars. Station power is stored in kW and
// converted where a duration is needed.

namespace joap {

class EconomicParams {
 public:
  /// Throws DomainError unless beta, phi, u_phi > 0 and p_e, c >= 0.
  EconomicParams(double beta, double phi, double u_phi, double p_e, double c);

  double beta() const noexcept { return beta_; }
  double phi() const noexcept { return phi_; }
  double u_phi() const noexcept { return u_phi_; }
  double p_e() const noexcept { return p_e_; }
  double c() const noexcept { return c_; }
  /// (1 - e^{-beta phi}) / (U(phi) beta), in kWh/$. Always derived.
  double xi() const noexcept { return xi_; }

  EconomicParams with_electricity_price(double p_e) const;
  EconomicParams with_penalty_rate(double c) const;

 private:
  double beta_;
  double phi_;
  double u_phi_;
  double p_e_;
  double c_;
  double xi_;
};

struct StationParams {
  int m = 4;                   // charging ports
  double alpha = 11.5;         // per-port power, kW
  int parking_capacity = 40;   // EVs in the lot, charging or waiting
  double lambda = 0.3;         // arrivals per minute
  double tau = 1.01;           // regulation slack, > 1

  /// Throws DomainError listing the first violated invariant.
  void validate() const;

  /// Minutes needed to deliver `demand` kWh through a single port.
  double service_time(double demand) const noexcept {
    return demand * 60.0 / alpha;
  }
};

/// U(d) = U(phi) (1 - e^{-beta d}) / (1 - e^{-beta phi}); d in [0, phi].
double utility(double d, const EconomicParams& econ);

/// Surplus-maximizing demand at price r ($/kWh), clamped to [0, phi].
double demand_response(double r, const EconomicParams& econ);

/// Price at which an EV requests exactly d kWh: e^{-beta d} / xi.
/// Requires 0 < d <= phi.
double price_for_demand(double d, const EconomicParams& econ);

/// Linear waiting penalty c * omega. Requires omega >= 0.
double penalty(double omega, const EconomicParams& econ);

/// Station margin per served EV at demand d, before waiting penalties:
/// d e^{-beta d} / xi - p_e d.
double revenue_margin(double d, const EconomicParams& econ);

/// Profit booked for one EV. Rejected EVs contribute nothing.
double per_ev_profit(double d, double wait, bool admitted,
                     const EconomicParams& econ);

/// argmax_d revenue_margin(d) over [0, phi], i.e. the demand a station
/// would pick if waiting were free. Zero when p_e >= 1/xi.
double congestion_free_demand(const EconomicParams& econ);

}  // namespace joap
