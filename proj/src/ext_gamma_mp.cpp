#include "ext_gamma_mp.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "senserf/errors.hpp"
#include "senserf/special_functions.hpp"

namespace senserf::detail {

double MpReal::log_abs() const {
  if (mpfr_zero_p(v_)) return -std::numeric_limits<double>::infinity();
  long e = 0;
  const double m = mpfr_get_d_2exp(&e, v_, MPFR_RNDN);
  return std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log of sum_{n >= k} z^n / n!
double log_exp_tail(int k, double z) {
  if (z == 0.0) return k == 0 ? 0.0 : -kInf;
  if (k == 0) return z;
  if (k > z) {
    const double lead = k * std::log(z) - std::lgamma(k + 1.0);
    const double r = z / (k + 1.0);
    return lead - std::log1p(-r);
  }
  return z + std::log(boost::math::gamma_p(static_cast<double>(k), z));
}

// Gamma(s, x) e^{-x} x^{-s} by the Legendre continued fraction (modified Lentz).
void gamma_cf(MpReal& h, const MpReal& s, const MpReal& x) {
  const mpfr_prec_t p = h.precision();
  MpReal b(p), c(p), d(p), del(p), an(p), tiny(p), tmp(p);
  mpfr_set_ui_2exp(tiny.get(), 1, -static_cast<long>(p) - 200, MPFR_RNDN);

  mpfr_add_ui(b.get(), x.get(), 1, MPFR_RNDN);
  mpfr_sub(b.get(), b.get(), s.get(), MPFR_RNDN);
  mpfr_ui_div(c.get(), 1, tiny.get(), MPFR_RNDN);
  mpfr_ui_div(d.get(), 1, b.get(), MPFR_RNDN);
  mpfr_set(h.get(), d.get(), MPFR_RNDN);

  const long max_iter = 2000000;
  for (long i = 1; i <= max_iter; ++i) {
    // an = -i (i - s)
    mpfr_ui_sub(an.get(), static_cast<unsigned long>(i), s.get(), MPFR_RNDN);
    mpfr_mul_si(an.get(), an.get(), -i, MPFR_RNDN);
    mpfr_add_ui(b.get(), b.get(), 2, MPFR_RNDN);
    mpfr_mul(d.get(), d.get(), an.get(), MPFR_RNDN);
    mpfr_add(d.get(), d.get(), b.get(), MPFR_RNDN);
    if (mpfr_zero_p(d.get())) mpfr_set(d.get(), tiny.get(), MPFR_RNDN);
    mpfr_div(tmp.get(), an.get(), c.get(), MPFR_RNDN);
    mpfr_add(c.get(), b.get(), tmp.get(), MPFR_RNDN);
    if (mpfr_zero_p(c.get())) mpfr_set(c.get(), tiny.get(), MPFR_RNDN);
    mpfr_ui_div(d.get(), 1, d.get(), MPFR_RNDN);
    mpfr_mul(del.get(), d.get(), c.get(), MPFR_RNDN);
    mpfr_mul(h.get(), h.get(), del.get(), MPFR_RNDN);
    mpfr_sub_ui(tmp.get(), del.get(), 1, MPFR_RNDN);
    if (mpfr_zero_p(tmp.get()) || mpfr_get_exp(tmp.get()) < -static_cast<long>(p)) return;
  }
  throw ConvergenceError("incomplete gamma continued fraction did not converge");
}

// Gamma(s, x), times e^x when scaled.
void upper_gamma_mp(MpReal& out, const MpReal& s, const MpReal& x, bool scaled) {
  const mpfr_prec_t p = out.precision();
  const double sd = s.to_double();
  const double xd = x.to_double();
  if (xd >= 1.0 && sd <= xd) {
    MpReal h(p + 32), pw(p + 32);
    gamma_cf(h, s, x);
    mpfr_pow(pw.get(), x.get(), s.get(), MPFR_RNDN);
    mpfr_mul(out.get(), h.get(), pw.get(), MPFR_RNDN);
    if (!scaled) {
      MpReal e(p + 32);
      mpfr_neg(e.get(), x.get(), MPFR_RNDN);
      mpfr_exp(e.get(), e.get(), MPFR_RNDN);
      mpfr_mul(out.get(), out.get(), e.get(), MPFR_RNDN);
    }
    return;
  }
  mpfr_gamma_inc(out.get(), s.get(), x.get(), MPFR_RNDN);
  if (scaled) {
    MpReal e(p + 32);
    mpfr_exp(e.get(), x.get(), MPFR_RNDN);
    mpfr_mul(out.get(), out.get(), e.get(), MPFR_RNDN);
  }
}

// table[m] = Gamma(a_top - m, x) (times e^x when scaled), m = 0..last. The
// recurrence runs away from a pivot order near -x, the direction in which it
// is stable on each side.
std::vector<MpReal> gamma_table(double a_top, int last, const MpReal& x, bool scaled,
                                mpfr_prec_t p) {
  const double xd = x.to_double();
  long pivot = std::lround(a_top + xd);
  pivot = std::clamp<long>(pivot, 0, last);

  std::vector<MpReal> g;
  g.reserve(static_cast<std::size_t>(last) + 1);
  for (int m = 0; m <= last; ++m) g.emplace_back(p);

  auto order = [&](long m) {
    MpReal s(p + 64, a_top);
    mpfr_sub_si(s.get(), s.get(), m, MPFR_RNDN);
    return s;
  };

  MpReal sp = order(pivot);
  upper_gamma_mp(g[pivot], sp, x, scaled);

  // pw = x^s for the current order, times e^-x when unscaled.
  MpReal pw0(p);
  mpfr_pow(pw0.get(), x.get(), sp.get(), MPFR_RNDN);
  if (!scaled) {
    MpReal e(p);
    mpfr_neg(e.get(), x.get(), MPFR_RNDN);
    mpfr_exp(e.get(), e.get(), MPFR_RNDN);
    mpfr_mul(pw0.get(), pw0.get(), e.get(), MPFR_RNDN);
  }

  MpReal pw(pw0), tmp(p);
  // Upward in order: Gamma(s+1) = s Gamma(s) + x^s e^-x.
  for (long m = pivot; m > 0; --m) {
    MpReal s = order(m);
    mpfr_mul(tmp.get(), g[m].get(), s.get(), MPFR_RNDN);
    mpfr_add(g[m - 1].get(), tmp.get(), pw.get(), MPFR_RNDN);
    mpfr_mul(pw.get(), pw.get(), x.get(), MPFR_RNDN);
  }
  // Downward: Gamma(s) = (Gamma(s+1) - x^s e^-x) / s.
  pw = pw0;
  for (long m = pivot; m < last; ++m) {
    MpReal s = order(m + 1);
    mpfr_div(pw.get(), pw.get(), x.get(), MPFR_RNDN);
    mpfr_sub(tmp.get(), g[m].get(), pw.get(), MPFR_RNDN);
    mpfr_div(g[m + 1].get(), tmp.get(), s.get(), MPFR_RNDN);
  }
  return g;
}

struct Attempt {
  bool need_terms = false;
  bool need_bits = false;
  double lost_bits = 0.0;
};

}  // namespace

ExtGammaFamily ext_gamma_family(double a_top, int count, double x, double b,
                                const FamilyOptions& options) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("extended incomplete gamma series needs finite x > 0");
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("extended incomplete gamma series needs finite b >= 0");
  if (!std::isfinite(a_top)) throw DomainError("extended incomplete gamma series needs finite a");
  if (count < 1) throw DomainError("family size must be positive");
  if (!(options.tol > 0.0)) throw DomainError("tolerance must be positive");

  const double z = b / x;
  const double log_x = std::log(x);
  const double log_tol = std::log(options.tol);

  int n_max = std::min(kSeriesTermCap - 1, static_cast<int>(8 + std::ceil(2.8 * z + 4.0 * std::sqrt(z))));
  long prec = options.good_bits + 48 + static_cast<long>(std::ceil(2.9 * z));

  for (int attempt = 0; attempt < 12; ++attempt) {
    const mpfr_prec_t p = static_cast<mpfr_prec_t>(prec);
    const int last = count - 1 + n_max + 1;
    MpReal xm(p, x), mb(p, b);
    mpfr_neg(mb.get(), mb.get(), MPFR_RNDN);
    std::vector<MpReal> g = gamma_table(a_top, last, xm, options.scaled, p);

    // c[n] = (-b)^n / n!
    std::vector<MpReal> c;
    c.reserve(static_cast<std::size_t>(n_max) + 1);
    c.emplace_back(p, 1.0);
    for (int n = 1; n <= n_max; ++n) {
      c.emplace_back(c.back());
      mpfr_mul(c.back().get(), c.back().get(), mb.get(), MPFR_RNDN);
      mpfr_div_ui(c.back().get(), c.back().get(), static_cast<unsigned long>(n), MPFR_RNDN);
    }

    ExtGammaFamily out;
    out.precision = p;
    Attempt st;
    MpReal term(p), abs_sum(p);
    for (int j = 0; j < count; ++j) {
      MpReal sum(p);
      mpfr_set_zero(abs_sum.get(), 1);
      int used = -1;
      double log_trunc = -kInf;
      for (int n = 0; n <= n_max; ++n) {
        mpfr_mul(term.get(), c[n].get(), g[j + n].get(), MPFR_RNDN);
        mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
        mpfr_abs(term.get(), term.get(), MPFR_RNDN);
        mpfr_add(abs_sum.get(), abs_sum.get(), term.get(), MPFR_RNDN);

        // Tail after n is at most Gamma(a-n-1, x) x^(n+1) sum_{m>n} (b/x)^m/m!,
        // from Gamma(s-1, x) <= Gamma(s, x)/x.
        log_trunc = g[j + n + 1].log_abs() + (n + 1) * log_x + log_exp_tail(n + 1, z);
        const double target = options.relative ? log_tol + sum.log_abs() : log_tol;
        if (log_trunc <= target) {
          used = n;
          break;
        }
      }
      if (used < 0) {
        st.need_terms = true;
        break;
      }
      if (mpfr_sgn(sum.get()) <= 0) {
        st.need_bits = true;
        st.lost_bits = std::max(st.lost_bits, static_cast<double>(prec));
        break;
      }
      const double lost = (abs_sum.log_abs() - sum.log_abs()) / std::log(2.0) +
                          std::log2(static_cast<double>(last + used + 16));
      if (static_cast<double>(prec) - lost < options.good_bits) {
        st.need_bits = true;
        st.lost_bits = std::max(st.lost_bits, lost);
        break;
      }
      const double rel_round = std::ldexp(4.0 * (last + used + 16), -static_cast<int>(prec));
      out.truncation_bound.push_back(std::exp(log_trunc));
      out.rounding_bound.push_back(std::exp(abs_sum.log_abs()) * rel_round);
      out.terms.push_back(used + 1);
      out.values.push_back(std::move(sum));
    }

    if (st.need_terms) {
      if (n_max >= kSeriesTermCap - 1) {
        throw ConvergenceError("extended incomplete gamma series hit the term cap of " +
                               std::to_string(kSeriesTermCap) + " (a=" + std::to_string(a_top) +
                               ", x=" + std::to_string(x) + ", b=" + std::to_string(b) + ")");
      }
      n_max = std::min(kSeriesTermCap - 1, 2 * n_max + 8);
      continue;
    }
    if (st.need_bits) {
      prec = std::max<long>(2 * prec, static_cast<long>(std::ceil(st.lost_bits)) + options.good_bits + 64);
      continue;
    }
    return out;
  }
  throw ConvergenceError("extended incomplete gamma series: precision escalation failed");
}

}  // namespace senserf::detail
