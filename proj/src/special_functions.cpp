#include "senserf/special_functions.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <mpfr.h>

#include <cmath>
#include <limits>

#include "ext_gamma_mp.hpp"
#include "senserf/errors.hpp"

namespace senserf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double half_ulp(double v) {
  v = std::fabs(v);
  return 0.5 * (std::nextafter(v, kInf) - v);
}

// Correctly rounded Gamma(a, x) for a <= 0, x > 0.
double upper_gamma_nonpositive_order(double a, double x) {
  mpfr_t r, ma, mx;
  mpfr_inits2(53, r, ma, mx, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(ma, a, MPFR_RNDN);
  mpfr_set_d(mx, x, MPFR_RNDN);
  mpfr_gamma_inc(r, ma, mx, MPFR_RNDN);
  const double v = mpfr_get_d(r, MPFR_RNDN);
  mpfr_clears(r, ma, mx, static_cast<mpfr_ptr>(nullptr));
  return v;
}

}  // namespace

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double upper_inc_gamma(double a, double x) {
  if (std::isnan(a) || std::isnan(x) || x < 0.0) throw DomainError("upper_inc_gamma: need x >= 0");
  if (x == 0.0) {
    if (a <= 0.0) throw DomainError("upper_inc_gamma: Gamma(a, 0) diverges for a <= 0");
    return boost::math::tgamma(a);
  }
  if (std::isinf(x)) return 0.0;
  if (a > 0.0) return boost::math::tgamma(a, x);
  return upper_gamma_nonpositive_order(a, x);
}

double lower_inc_gamma(double a, double x) {
  if (!(a > 0.0)) throw DomainError("lower_inc_gamma: need a > 0");
  if (std::isnan(x) || x < 0.0) throw DomainError("lower_inc_gamma: need x >= 0");
  if (std::isinf(x)) return boost::math::tgamma(a);
  return boost::math::tgamma_lower(a, x);
}

double ext_inc_gamma_quadrature(double a, double x, double b, double abs_tol) {
  using Real = long double;
  if (std::isnan(a) || std::isnan(x) || std::isnan(b) || x < 0.0 || b < 0.0 || std::isinf(x))
    throw DomainError("ext_inc_gamma_quadrature: need finite x >= 0 and b >= 0");
  if (x == 0.0 && b == 0.0 && a <= 0.0)
    throw DomainError("ext_inc_gamma_quadrature: integral diverges at 0");

  const Real am1 = static_cast<Real>(a) - 1;
  const Real bl = b;
  auto f = [am1, bl](Real t) -> Real {
    if (t <= 0) return 0;
    return std::exp(am1 * std::log(t) - t - bl / t);
  };

  // Peak of the integrand, then a geometric partition from x to well past it.
  const double peak = 0.5 * ((a - 1.0) + std::sqrt((a - 1.0) * (a - 1.0) + 4.0 * b));
  const double t_end = std::max(x, std::max(peak, 1.0)) + 60.0 + 2.0 * std::fabs(a);

  std::vector<double> cuts;
  double start = x;
  if (x == 0.0) {
    // b > 0 here: the integrand vanishes faster than any power at 0.
    start = std::min(std::max(peak, 1e-3) / 64.0, 1.0);
    cuts.push_back(0.0);
  }
  for (double t = start; t < t_end; t *= 2.0) cuts.push_back(t);
  cuts.push_back(t_end);

  Real total = 0, err_total = 0, l1_total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Real err = 0, l1 = 0;
    const Real piece = boost::math::quadrature::gauss_kronrod<Real, 61>::integrate(
        f, static_cast<Real>(cuts[i]), static_cast<Real>(cuts[i + 1]), 15, 1e-16L, &err, &l1);
    total += piece;
    err_total += err;
    l1_total += l1;
  }
  {
    boost::math::quadrature::exp_sinh<Real> tail_rule;
    Real err = 0, l1 = 0;
    const Real tail = tail_rule.integrate(f, static_cast<Real>(t_end), std::numeric_limits<Real>::infinity(),
                                          1e-16L, &err, &l1);
    total += tail;
    err_total += err;
  }
  const double value = static_cast<double>(total);
  if (static_cast<double>(err_total) > std::max(abs_tol, 1e-14 * std::fabs(value)))
    throw ConvergenceError("ext_inc_gamma_quadrature: tolerance not reached");
  return value;
}

ApproxResult ext_inc_gamma_series(double a, double x, double b, double tol) {
  if (!(x > 0.0)) throw DomainError("ext_inc_gamma_series: need x > 0");
  if (!(b >= 0.0)) throw DomainError("ext_inc_gamma_series: need b >= 0");
  if (!(tol > 0.0)) throw DomainError("ext_inc_gamma_series: need tol > 0");
  if (b == 0.0) return {upper_inc_gamma(a, x), 0.0, 1};

  detail::FamilyOptions opt;
  opt.tol = tol;
  opt.relative = false;
  opt.scaled = false;
  const auto fam = detail::ext_gamma_family(a, 1, x, b, opt);
  ApproxResult r;
  r.value = fam.values[0].to_double();
  r.error_bound = fam.truncation_bound[0] + fam.rounding_bound[0] + half_ulp(r.value);
  r.terms_used = fam.terms[0];
  return r;
}

double ext_inc_gamma_classical_bound(double a, double x, double b, int n_last) {
  if (n_last < 0) throw DomainError("ext_inc_gamma_classical_bound: need n_last >= 0");
  if (b == 0.0) return 0.0;
  const double n1 = n_last + 1.0;
  return upper_inc_gamma(a - n1, x) * std::exp(b) * boost::math::gamma_p(n1, b);
}

std::vector<ApproxResult> scaled_ext_inc_gamma_family(double a_top, int count, double x, double b,
                                                      double rel_tol) {
  detail::FamilyOptions opt;
  opt.tol = rel_tol;
  opt.relative = true;
  opt.scaled = true;
  const auto fam = detail::ext_gamma_family(a_top, count, x, b, opt);
  std::vector<ApproxResult> out;
  out.reserve(fam.values.size());
  for (std::size_t j = 0; j < fam.values.size(); ++j) {
    ApproxResult r;
    r.value = fam.values[j].to_double();
    r.error_bound = fam.truncation_bound[j] + fam.rounding_bound[j] + half_ulp(r.value);
    r.terms_used = fam.terms[j];
    out.push_back(r);
  }
  return out;
}

}  // namespace senserf
