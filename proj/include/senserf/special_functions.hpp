#pragma once

#include <vector>

namespace senserf {

struct ApproxResult {
  double value = 0.0;
  // Upper bound on |value - exact|: series truncation plus rounding.
  double error_bound = 0.0;
  int terms_used = 0;
};

// Largest number of series terms the extended incomplete gamma series may use.
inline constexpr int kSeriesTermCap = 4000;

double gaussian_q(double x);

// Gamma(a, x) = int_x^inf t^(a-1) e^-t dt, any real a when x > 0.
double upper_inc_gamma(double a, double x);

// gamma(a, x) = Gamma(a) - Gamma(a, x), a > 0.
double lower_inc_gamma(double a, double x);

// Gamma(a, x, b) = int_x^inf t^(a-1) exp(-t - b/t) dt by adaptive quadrature.
// Throws ConvergenceError when the error estimate exceeds
// max(abs_tol, 1e-14 |value|).
double ext_inc_gamma_quadrature(double a, double x, double b, double abs_tol = 1e-12);

// Same integral as sum_n (-b)^n/n! Gamma(a-n, x), extended until the
// truncation bound is <= tol. With b = 0 the single term Gamma(a, x) is
// returned with a zero bound.
ApproxResult ext_inc_gamma_series(double a, double x, double b, double tol);

// The classical tail bound e^b Gamma(a-N-1, x) gamma(N+1, b)/N! for a series
// truncated after n_last = N. Valid as a bound only when x >= 1.
double ext_inc_gamma_classical_bound(double a, double x, double b, int n_last);

// e^x Gamma(a_top - j, x, b) for j = 0..count-1, each to relative accuracy rel_tol.
std::vector<ApproxResult> scaled_ext_inc_gamma_family(double a_top, int count, double x, double b,
                                                      double rel_tol);

}  // namespace senserf
