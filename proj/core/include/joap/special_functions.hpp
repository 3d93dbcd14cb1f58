#pragma once

namespace joap {

/// Erlang loss probability B(n, a) by the recursion
/// B(k) = a B(k-1) / (k + a B(k-1)), B(0) = 1.
double erlang_b(int n, double a);

/// Continuous-n extension of the Erlang loss probability,
/// B(n, a) = a^n e^{-a} / Gamma(n + 1, a), valid for real n > 0 and a >= 0.
/// Uses the power series of the lower incomplete gamma for a < n + 1 and a
/// Lentz continued fraction for the upper tail otherwise.
double erlang_b_gamma(double n, double a);

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
double regularized_gamma_q(double s, double x);

}  // namespace joap
