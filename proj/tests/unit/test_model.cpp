#include <doctest.h>

#include <cmath>
#include <random>

#include "joap/errors.hpp"
#include "joap/model.hpp"
#include "oracles.hpp"

using namespace joap;

namespace {

EconomicParams table1(double p_e = 0.06, double c = 0.4) {
  return EconomicParams(0.05, 100.0, 100.0, p_e, c);
}

double surplus(double d, double r, const EconomicParams& e) {
  return utility(d, e) - r * d;
}

}  // namespace

TEST_CASE("economic parameters validate and derive xi") {
  const auto e = table1();
  CHECK(e.xi() == doctest::Approx((1.0 - std::exp(-5.0)) / (100.0 * 0.05)).epsilon(1e-15));
  CHECK_THROWS_AS(EconomicParams(0.0, 100, 100, 0.06, 0.4), DomainError);
  CHECK_THROWS_AS(EconomicParams(0.05, -1, 100, 0.06, 0.4), DomainError);
  CHECK_THROWS_AS(EconomicParams(0.05, 100, 0, 0.06, 0.4), DomainError);
  CHECK_THROWS_AS(EconomicParams(0.05, 100, 100, -0.01, 0.4), DomainError);
  CHECK_THROWS_AS(EconomicParams(0.05, 100, 100, 0.06, -0.4), DomainError);
  const auto moved = e.with_electricity_price(0.1).with_penalty_rate(1.0);
  CHECK(moved.p_e() == 0.1);
  CHECK(moved.c() == 1.0);
  CHECK(moved.xi() == e.xi());
}

TEST_CASE("station parameters validate") {
  StationParams st;
  CHECK_NOTHROW(st.validate());
  CHECK(st.service_time(11.5) == doctest::Approx(60.0));
  st.tau = 1.0;
  CHECK_THROWS_AS(st.validate(), DomainError);
  st = {};
  st.parking_capacity = 3;
  CHECK_THROWS_AS(st.validate(), DomainError);
  st = {};
  st.m = 0;
  CHECK_THROWS_AS(st.validate(), DomainError);
  st = {};
  st.lambda = 0.0;
  CHECK_THROWS_AS(st.validate(), DomainError);
}

TEST_CASE("utility endpoints and a 50-digit evaluation") {
  const auto e = table1();
  CHECK(utility(0.0, e) == 0.0);
  CHECK(utility(100.0, e) == doctest::Approx(100.0).epsilon(1e-14));
  using oracle::big;
  const big want = big(100) * (1 - exp(big(-1.75))) / (1 - exp(big(-5)));
  CHECK(oracle::rel_err(utility(35.0, e), static_cast<double>(want)) < 1e-14);
  CHECK_THROWS_AS(utility(-1e-9, e), DomainError);
  CHECK_THROWS_AS(utility(100.0 + 1e-9, e), DomainError);
}

TEST_CASE("utility is strictly increasing and strictly concave") {
  const auto e = table1();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pick(1.0, 99.0);
  const double h = 1e-3;
  for (int i = 0; i < 100; ++i) {
    const double d = pick(rng);
    const double lo = utility(d - h, e), mid = utility(d, e), hi = utility(d + h, e);
    CHECK(hi > mid);
    CHECK(hi - 2 * mid + lo < 0.0);
  }
}

TEST_CASE("demand response boundaries") {
  const auto e = table1();
  const double top = 100.0 * 0.05 / (1.0 - std::exp(-5.0));
  CHECK(demand_response(top, e) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(demand_response(2.0 * top, e) == 0.0);
  const double floor_price = 100.0 * 0.05 * std::exp(-5.0) / (1.0 - std::exp(-5.0));
  CHECK(demand_response(floor_price, e) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(demand_response(0.0, e) == 100.0);
  CHECK(demand_response(floor_price / 2, e) == 100.0);
}

TEST_CASE("demand response at r = 2 against a 10^6-point surplus grid") {
  const auto e = table1();
  const double closed = std::clamp(-std::log(2.0 * e.xi()) / 0.05, 0.0, 100.0);
  CHECK(demand_response(2.0, e) == doctest::Approx(closed).epsilon(1e-14));
  const int steps = 1000000;
  const double step = 100.0 / steps;
  double best_d = 0.0, best = -1e300;
  for (int i = 0; i <= steps; ++i) {
    const double d = i * step;
    const double v = surplus(d, 2.0, e);
    if (v > best) best = v, best_d = d;
  }
  CHECK(std::abs(best_d - demand_response(2.0, e)) <= step);
}

TEST_CASE("closed-form demand is never beaten by a grid search") {
  const auto e = table1();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pick(0.0, 2.0 / e.xi());
  const int steps = 1000000;
  const double step = 100.0 / steps;
  for (int k = 0; k < 200; ++k) {
    const double r = pick(rng);
    const double d = demand_response(r, e);
    const double at_closed = surplus(d, r, e);
    double best = -1e300;
    for (int i = 0; i <= steps; ++i) best = std::max(best, surplus(i * step, r, e));
    // The surplus slope is bounded by U'(0) + r, so a grid point within
    // step/2 of the optimum is at most that times step/2 lower.
    const double slack = (100.0 * 0.05 / (1.0 - std::exp(-5.0)) + r) * step;
    CHECK(best <= at_closed + slack);
  }
}

TEST_CASE("demand response is non-increasing in price") {
  const auto e = table1();
  double prev = demand_response(0.0, e);
  for (int i = 1; i <= 2000; ++i) {
    const double d = demand_response(i * (2.0 / e.xi()) / 2000.0, e);
    CHECK(d <= prev);
    prev = d;
  }
}

TEST_CASE("price for demand") {
  const auto e = table1();
  CHECK(price_for_demand(100.0, e) == doctest::Approx(std::exp(-5.0) / e.xi()).epsilon(1e-14));
  CHECK(price_for_demand(35.0, e) == doctest::Approx(std::exp(-1.75) / e.xi()).epsilon(1e-14));
  CHECK(demand_response(price_for_demand(50.0, e), e) == doctest::Approx(50.0).epsilon(1e-11));
  CHECK(std::abs(demand_response(price_for_demand(50.0, e), e) - 50.0) < 1e-9);
  for (int i = 1; i < 1000; ++i) {
    const double d = i * 0.1;
    CHECK(std::abs(demand_response(price_for_demand(d, e), e) - d) < 1e-9);
  }
  CHECK_THROWS_AS(price_for_demand(0.0, e), DomainError);
  CHECK_THROWS_AS(price_for_demand(100.5, e), DomainError);
}

TEST_CASE("linear waiting penalty") {
  CHECK(penalty(0.0, table1()) == 0.0);
  CHECK(penalty(12.5, table1(0.06, 1.0)) == 12.5);
  CHECK(penalty(30.0, table1(0.06, 0.4)) == doctest::Approx(12.0));
  CHECK_THROWS_AS(penalty(-1.0, table1()), DomainError);
}

TEST_CASE("per-EV profit") {
  const auto e = table1();
  CHECK(per_ev_profit(0.0, 0.0, true, e) == 0.0);
  CHECK(per_ev_profit(35.0, 10.0, false, e) == 0.0);
  const double want = (std::exp(-1.75) / e.xi() - 0.06) * 35.0 - 4.0;
  CHECK(per_ev_profit(35.0, 10.0, true, e) == doctest::Approx(want).epsilon(1e-13));
  CHECK(revenue_margin(35.0, e) == doctest::Approx(want + 4.0).epsilon(1e-13));
}

TEST_CASE("congestion-free demand maximizes the margin") {
  for (double p_e : {0.06, 0.08, 0.09, 0.1}) {
    const auto e = table1(p_e);
    const double d = congestion_free_demand(e);
    double best_d = 0.0, best = -1e300;
    for (int i = 0; i <= 100000; ++i) {
      const double x = i * 1e-3;
      if (const double v = revenue_margin(x, e); v > best) best = v, best_d = x;
    }
    CHECK(std::abs(d - best_d) <= 1e-3);
  }
  CHECK(congestion_free_demand(table1(0.06)) == doctest::Approx(19.372).epsilon(1e-4));
  CHECK(congestion_free_demand(table1(1.0 / table1().xi())) == 0.0);
}
