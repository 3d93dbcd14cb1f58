#include "joap/special_functions.hpp"

#include <cmath>
#include <limits>

#include "joap/errors.hpp"

namespace joap {
namespace {

constexpr int kMaxTerms = 100000;
constexpr double kEps = 1e-17;
constexpr double kTiny = 1e-300;

// sum_{k>=0} x^k / (s (s+1) ... (s+k)); converges for all x, fast when x < s+1.
double lower_gamma_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double denom = s;
  for (int k = 1; k < kMaxTerms; ++k) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum;
}

// Continued fraction h with Gamma(s, x) = e^{-x} x^s h, used for x >= s.
double upper_gamma_cf(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double erlang_b(int n, double a) {
  if (n < 0) throw DomainError("erlang_b: n must be >= 0");
  if (!(a >= 0.0)) throw DomainError("erlang_b: offered load must be >= 0");
  double b = 1.0;
  for (int k = 1; k <= n; ++k) b = a * b / (k + a * b);
  return b;
}

double erlang_b_gamma(double n, double a) {
  if (!(n > 0.0)) throw DomainError("erlang_b_gamma: n must be > 0");
  if (!(a >= 0.0))
    throw DomainError("erlang_b_gamma: offered load must be >= 0");
  if (a == 0.0) return 0.0;
  const double s = n + 1.0;
  if (a < s) {
    // B = E / (1 - a E S) with E = a^n e^{-a} / Gamma(n+1).
    const double log_e = n * std::log(a) - a - std::lgamma(s);
    const double e = std::exp(log_e);
    return e / (1.0 - a * e * lower_gamma_series(s, a));
  }
  return 1.0 / (a * upper_gamma_cf(s, a));
}

double regularized_gamma_q(double s, double x) {
  if (!(s > 0.0)) throw DomainError("regularized_gamma_q: s must be > 0");
  if (!(x >= 0.0)) throw DomainError("regularized_gamma_q: x must be >= 0");
  if (x == 0.0) return 1.0;
  const double log_prefix = s * std::log(x) - x - std::lgamma(s);
  if (x < s + 1.0)
    return 1.0 - std::exp(log_prefix) * lower_gamma_series(s, x);
  return std::exp(log_prefix) * upper_gamma_cf(s, x);
}

}  // namespace joap
