#include "senserf/detection.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "ext_gamma_mp.hpp"
#include "senserf/errors.hpp"

namespace senserf {

using detail::MpReal;

namespace {

constexpr int kFreeBits[5] = {1, 2, 3, 4, 5};

void check_ns(int n_s) {
  if (n_s < 1) throw DomainError("number of samples must be >= 1");
}

void check_fec(const FrontEndCoefficients& f) {
  const double v[] = {f.a1, f.a2, f.a3, f.a4};
  for (double a : v)
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("front-end coefficients must be finite and non-negative");
  if (!(f.a5 > 0.0) || !std::isfinite(f.a5)) throw DomainError("noise floor a5 must be positive");
  if (!(f.sigma_h2 > 0.0)) throw DomainError("channel power must be positive");
}

// Survival parts of one exponential component of mean A above the floor A5:
//   s1 = sum_k B^k/k! e^X Gamma(1-k, X, B)
//   s2 = sum_k B^k/k! e^X int_X^inf (t-X) t^-k e^{-t-B/t} dt
// with X = A5/A and B = c/A, c = n_s x / 2. Then the conditional CDF of the
// statistic averaged over the component's density e^{-y/A}/A is 1 - s1, and
// over y e^{-y/A}/A^2 it is 1 - s2.
struct ComponentTerms {
  MpReal s1{64};
  MpReal s2{64};
};

// Beyond this value of c / A5 the series needs more terms than the cap.
constexpr double kSeriesRatioLimit = 200.0;

// Integral form of the same terms: summing the series under the integral gives
//   s1 = int_0^inf e^{-u} Q(n_s, B / (X + u)) du
//   s2 = int_0^inf u e^{-u} Q(n_s, B / (X + u)) du
// with Q the regularized upper gamma. Used far above the noise floor, where
// both are tiny and no cancellation is at stake.
ComponentTerms component_terms_quadrature(double X, double B, int n_s, bool second) {
  using Real = long double;
  const Real nl = n_s, Xl = X, Bl = B;
  auto q = [&](Real u) { return boost::math::gamma_q(nl, Bl / (Xl + u)); };
  // Q(n_s, B/(X+u)) turns on near X + u = B / n_s; split there so the rise is resolved.
  const Real knee = std::max<Real>(Bl / nl - Xl, 0);
  auto integrate = [&](auto&& f) {
    Real total = 0;
    Real lo = 0;
    for (Real hi : {knee / 2, knee, knee + 8, knee + 64}) {
      if (hi <= lo) continue;
      total += boost::math::quadrature::gauss_kronrod<Real, 61>::integrate(f, lo, hi, 15, 1e-18L);
      lo = hi;
    }
    boost::math::quadrature::exp_sinh<Real> tail;
    total += tail.integrate(f, lo, std::numeric_limits<Real>::infinity());
    return total;
  };
  ComponentTerms out{MpReal(64), MpReal(64)};
  mpfr_set_ld(out.s1.get(), integrate([&](Real u) { return std::exp(-u) * q(u); }), MPFR_RNDN);
  if (second) mpfr_set_ld(out.s2.get(), integrate([&](Real u) { return u * std::exp(-u) * q(u); }), MPFR_RNDN);
  return out;
}

ComponentTerms component_terms(double A, double A5, double c, int n_s, bool second) {
  const double X = A5 / A;
  const double B = c / A;
  if (c / A5 > kSeriesRatioLimit) return component_terms_quadrature(X, B, n_s, second);
  detail::FamilyOptions opt;
  opt.tol = 1e-20;
  opt.relative = true;
  opt.scaled = true;
  opt.good_bits = 96;
  const int top = second ? 2 : 1;
  const auto fam = detail::ext_gamma_family(top, n_s + (second ? 1 : 0), X, B, opt);
  const mpfr_prec_t p = fam.precision + 32;

  ComponentTerms out{MpReal(p), MpReal(p)};
  MpReal coef(p, 1.0), bm(p, B), xm(p, X), term(p), diff(p);
  for (int k = 0; k < n_s; ++k) {
    if (k > 0) {
      mpfr_mul(coef.get(), coef.get(), bm.get(), MPFR_RNDN);
      mpfr_div_ui(coef.get(), coef.get(), static_cast<unsigned long>(k), MPFR_RNDN);
    }
    const MpReal& g1 = fam.values[second ? k + 1 : k];  // e^X Gamma(1-k, X, B)
    mpfr_mul(term.get(), coef.get(), g1.get(), MPFR_RNDN);
    mpfr_add(out.s1.get(), out.s1.get(), term.get(), MPFR_RNDN);
    if (second) {
      const MpReal& g2 = fam.values[k];  // e^X Gamma(2-k, X, B)
      mpfr_mul(diff.get(), xm.get(), g1.get(), MPFR_RNDN);
      mpfr_sub(diff.get(), g2.get(), diff.get(), MPFR_RNDN);
      mpfr_mul(term.get(), coef.get(), diff.get(), MPFR_RNDN);
      mpfr_add(out.s2.get(), out.s2.get(), term.get(), MPFR_RNDN);
    }
  }
  return out;
}

struct CdfPair {
  double cdf = 0.0;
  double survival = 1.0;
};

// Per-threshold cache of component terms for the four coefficient groups.
class ThresholdTerms {
 public:
  ThresholdTerms(double x, const FrontEndCoefficients& fec, int n_s) : x_(x), fec_(fec), n_s_(n_s) {}

  const ComponentTerms& get(int group, double mean) {
    if (!cache_[group]) {
      const bool second = group == 1 || group == 2;
      cache_[group] = component_terms(mean, fec_.a5, n_s_ * x_ / 2.0, n_s_, second);
    }
    return *cache_[group];
  }

 private:
  double x_;
  const FrontEndCoefficients& fec_;
  int n_s_;
  std::optional<ComponentTerms> cache_[4];
};

struct GroupedComponent {
  int group;
  double mean;
  int mult;
};

std::vector<GroupedComponent> grouped_components(const OccupancyVector& occ, const FrontEndCoefficients& fec) {
  const auto m = occ.m();
  const double a[4] = {fec.a1, fec.a2, fec.a3, fec.a4};
  std::vector<GroupedComponent> out;
  for (int i = 0; i < 4; ++i)
    if (m[i] >= 1 && a[i] > 0.0) out.push_back({i, a[i] * fec.sigma_h2, m[i]});
  return out;
}

bool degenerate(const std::vector<GroupedComponent>& comps) {
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      const double hi = std::max(comps[i].mean, comps[j].mean);
      if (std::fabs(comps[i].mean - comps[j].mean) < kDegenerateGap * hi) return true;
    }
  return false;
}

// Partial-fraction combination of the component terms:
//   F = sum_i W_i (1 - s1_i)                     (m_i = 1)
//   F = sum_i W_i ((1 - s2_i) - R_i (1 - s1_i))  (m_i = 2)
// with W_i = prod_{j != i} (A_i / (A_i - A_j))^{m_j},
//      R_i = sum_{j != i} m_j A_j / (A_i - A_j).
CdfPair closed_form(const std::vector<GroupedComponent>& comps, ThresholdTerms& terms) {
  mpfr_prec_t p = 64;
  std::vector<const ComponentTerms*> t;
  for (const auto& c : comps) {
    t.push_back(&terms.get(c.group, c.mean));
    p = std::max(p, t.back()->s1.precision());
  }
  p += 64;
  MpReal cdf(p), surv(p), w(p), r(p), ratio(p), diff(p), tmp(p), part_c(p), part_s(p);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    mpfr_set_ui(w.get(), 1, MPFR_RNDN);
    mpfr_set_zero(r.get(), 1);
    for (std::size_t j = 0; j < comps.size(); ++j) {
      if (j == i) continue;
      MpReal ai(p, comps[i].mean), aj(p, comps[j].mean);
      mpfr_sub(diff.get(), ai.get(), aj.get(), MPFR_RNDN);
      mpfr_div(ratio.get(), ai.get(), diff.get(), MPFR_RNDN);
      mpfr_pow_ui(ratio.get(), ratio.get(), static_cast<unsigned long>(comps[j].mult), MPFR_RNDN);
      mpfr_mul(w.get(), w.get(), ratio.get(), MPFR_RNDN);
      mpfr_div(tmp.get(), aj.get(), diff.get(), MPFR_RNDN);
      mpfr_mul_ui(tmp.get(), tmp.get(), static_cast<unsigned long>(comps[j].mult), MPFR_RNDN);
      mpfr_add(r.get(), r.get(), tmp.get(), MPFR_RNDN);
    }
    const ComponentTerms& ct = *t[i];
    if (comps[i].mult == 1) {
      mpfr_ui_sub(part_c.get(), 1, ct.s1.get(), MPFR_RNDN);
      mpfr_set(part_s.get(), ct.s1.get(), MPFR_RNDN);
    } else {
      // (1 - s2) - R (1 - s1) and s2 - R s1
      mpfr_ui_sub(tmp.get(), 1, ct.s1.get(), MPFR_RNDN);
      mpfr_mul(tmp.get(), tmp.get(), r.get(), MPFR_RNDN);
      mpfr_ui_sub(part_c.get(), 1, ct.s2.get(), MPFR_RNDN);
      mpfr_sub(part_c.get(), part_c.get(), tmp.get(), MPFR_RNDN);
      mpfr_mul(tmp.get(), ct.s1.get(), r.get(), MPFR_RNDN);
      mpfr_sub(part_s.get(), ct.s2.get(), tmp.get(), MPFR_RNDN);
    }
    mpfr_mul(part_c.get(), part_c.get(), w.get(), MPFR_RNDN);
    mpfr_mul(part_s.get(), part_s.get(), w.get(), MPFR_RNDN);
    mpfr_add(cdf.get(), cdf.get(), part_c.get(), MPFR_RNDN);
    mpfr_add(surv.get(), surv.get(), part_s.get(), MPFR_RNDN);
  }
  CdfPair out{cdf.to_double(), surv.to_double()};
  out.cdf = std::clamp(out.cdf, 0.0, 1.0);
  out.survival = std::clamp(out.survival, 0.0, 1.0);
  return out;
}

// Fallback for (nearly) coincident means: merge them, build the density of
// the power by partial fractions with repeated poles and integrate the
// conditional CDF against it numerically.
CdfPair degenerate_quadrature(const std::vector<GroupedComponent>& comps, double a5, double x, int n_s) {
  struct Group {
    double mean;
    int mult;
  };
  std::vector<Group> groups;
  {
    std::vector<GroupedComponent> sorted = comps;
    std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) { return l.mean < r.mean; });
    for (const auto& c : sorted) {
      if (!groups.empty() && std::fabs(c.mean - groups.back().mean) < kDegenerateGap * c.mean) {
        Group& g = groups.back();
        g.mean = (g.mean * g.mult + c.mean * c.mult) / (g.mult + c.mult);
        g.mult += c.mult;
      } else {
        groups.push_back({c.mean, c.mult});
      }
    }
  }

  // Laplace transform prod_g lam_g^n_g (s + lam_g)^-n_g; coefficient of
  // (s + lam_g)^-r is D^{n_g - r} H_g(-lam_g) / (n_g - r)! with
  // H_g(s) = prod_{h != g} (s + lam_h)^-n_h.
  struct Term {
    double coef;
    int power;  // y^power
    double rate;
  };
  std::vector<Term> density;
  double log_scale = 0.0;
  for (const auto& g : groups) log_scale += g.mult * std::log(1.0 / g.mean);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const double lam = 1.0 / groups[gi].mean;
    const int n = groups[gi].mult;
    // Derivatives of L(s) = sum_h -n_h / (s + lam_h) at s = -lam.
    auto dl = [&](int order) {
      double acc = 0.0;
      for (std::size_t h = 0; h < groups.size(); ++h) {
        if (h == gi) continue;
        const double d = 1.0 / groups[h].mean - lam;
        acc += -groups[h].mult * std::pow(-1.0, order) * boost::math::factorial<double>(order) / std::pow(d, order + 1);
      }
      return acc;
    };
    std::vector<double> hd(static_cast<std::size_t>(n), 0.0);
    double h0 = 1.0;
    for (std::size_t h = 0; h < groups.size(); ++h)
      if (h != gi) h0 *= std::pow(1.0 / groups[h].mean - lam, -groups[h].mult);
    hd[0] = h0;
    for (int k = 0; k + 1 < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j <= k; ++j) acc += boost::math::binomial_coefficient<double>(k, j) * hd[j] * dl(k - j);
      hd[k + 1] = acc;
    }
    for (int r = 1; r <= n; ++r) {
      const double c = hd[n - r] / boost::math::factorial<double>(n - r);
      // inverse transform of (s + lam)^-r is y^{r-1} e^{-lam y} / (r-1)!
      density.push_back({c / boost::math::factorial<double>(r - 1), r - 1, lam});
    }
  }
  const double scale = std::exp(log_scale);
  auto pdf = [&](double y) {
    double acc = 0.0;
    if (!(y > 0.0)) {
      for (const auto& t : density)
        if (t.power == 0) acc += t.coef;
      return scale * acc;
    }
    // Log form: y^p and e^{-rate y} overflow and underflow separately far in the tail.
    const double ly = std::log(y);
    for (const auto& t : density) acc += t.coef * std::exp(t.power * ly - t.rate * y);
    return scale * acc;
  };
  const double c = n_s * x / 2.0;
  auto integrate = [&](auto&& cond) {
    auto f = [&](double y) { return cond(y) * pdf(y); };
    std::vector<double> cuts{0.0};
    double top = 0.0;
    for (const auto& g : groups) top = std::max(top, g.mean * (60.0 + 4.0 * g.mult));
    for (const auto& g : groups)
      for (double k = 0.25; g.mean * k < top; k *= 2.0) cuts.push_back(g.mean * k);
    cuts.push_back(top);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      // Shallow depth: near 0 the partial-fraction density is cancellation noise at the
      // 1e-16 level, which a relative tolerance would chase forever.
      total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 5, 1e-13);
    boost::math::quadrature::exp_sinh<double> tail;
    total += tail.integrate(f, top, std::numeric_limits<double>::infinity());
    return total;
  };
  CdfPair out;
  if (c == 0.0) return {0.0, 1.0};
  out.cdf = integrate([&](double y) { return boost::math::gamma_p(static_cast<double>(n_s), c / (a5 + y)); });
  out.survival = integrate([&](double y) { return boost::math::gamma_q(static_cast<double>(n_s), c / (a5 + y)); });
  out.cdf = std::clamp(out.cdf, 0.0, 1.0);
  out.survival = std::clamp(out.survival, 0.0, 1.0);
  return out;
}

CdfPair occupancy_cdf(double x, const OccupancyVector& occ, const FrontEndCoefficients& fec, int n_s,
                      ThresholdTerms& terms) {
  if (x <= 0.0) return {0.0, 1.0};
  const auto comps = grouped_components(occ, fec);
  if (comps.empty()) {
    const double u = n_s * x / (2.0 * fec.a5);
    return {boost::math::gamma_p(static_cast<double>(n_s), u), boost::math::gamma_q(static_cast<double>(n_s), u)};
  }
  if (degenerate(comps)) return degenerate_quadrature(comps, fec.a5, x, n_s);
  return closed_form(comps, terms);
}

double hypothesis_survival(const DetectorConfig& det, const FrontEndCoefficients& fec, bool edge, int theta_k) {
  check_ns(det.n_s);
  check_fec(fec);
  if (!(det.q >= 0.0 && det.q <= 1.0)) throw DomainError("busy probability q must lie in [0, 1]");
  if (!(det.threshold > 0.0)) throw DomainError("threshold must be positive");
  ThresholdTerms terms(det.threshold, fec, det.n_s);
  long double acc = 0.0L;
  for (const auto& occ : enumerate_occupancies(theta_k, edge)) {
    const double w = occupancy_probability(occ, det.q, edge);
    if (w == 0.0) continue;
    acc += static_cast<long double>(w) * occupancy_cdf(det.threshold, occ, fec, det.n_s, terms).survival;
  }
  return std::clamp(static_cast<double>(acc), 0.0, 1.0);
}

}  // namespace

std::array<int, 4> OccupancyVector::m() const {
  return {theta[0], theta[1] + theta[2], theta[3] + theta[4], theta[5]};
}

bool OccupancyVector::all_idle() const {
  return std::all_of(theta.begin(), theta.end(), [](int t) { return t == 0; });
}

std::vector<OccupancyVector> enumerate_occupancies(int theta_k, bool edge) {
  if (theta_k != 0 && theta_k != 1) throw DomainError("theta_k must be 0 or 1");
  std::vector<OccupancyVector> out;
  for (int bits = 0; bits < 32; ++bits) {
    OccupancyVector occ;
    occ.theta[0] = theta_k;
    for (int i = 0; i < 5; ++i) occ.theta[kFreeBits[i]] = (bits >> i) & 1;
    if (edge && (occ.theta[2] || occ.theta[4])) continue;
    out.push_back(occ);
  }
  return out;
}

double occupancy_probability(const OccupancyVector& occ, double q, bool edge) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("busy probability q must lie in [0, 1]");
  int busy = 0;
  int free = 0;
  for (int i : kFreeBits) {
    if (edge && (i == 2 || i == 4)) {
      if (occ.theta[i]) return 0.0;
      continue;
    }
    ++free;
    busy += occ.theta[i];
  }
  return std::pow(q, busy) * std::pow(1.0 - q, free - busy);
}

std::array<int, 6> occupancy_channels(int k, int K) {
  validate_sensed_channel(k, K);
  return {k, frequency_neighbor(k, -1, K), frequency_neighbor(k, +1, K),
          frequency_neighbor(-k, +1, K), frequency_neighbor(-k, -1, K), -k};
}

double ideal_conditional_cdf(double x, double sigma2, int n_s) {
  check_ns(n_s);
  if (!(sigma2 > 0.0)) throw DomainError("conditional variance must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(n_s), n_s * x / (2.0 * sigma2));
}

double ideal_busy_cdf(double x, const ImpairmentProfile& prof, int n_s) {
  check_ns(n_s);
  const FrontEndCoefficients fec = ideal_coefficients(prof);
  OccupancyVector occ;
  occ.theta[0] = 1;
  ThresholdTerms terms(x, fec, n_s);
  return occupancy_cdf(x, occ, fec, n_s, terms).cdf;
}

double ideal_pfa(double gamma, int n_s, double sigma_w2) {
  check_ns(n_s);
  if (!(sigma_w2 > 0.0)) throw DomainError("noise power must be positive");
  if (gamma <= 0.0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(n_s), n_s * gamma / sigma_w2);
}

double ideal_pd(double gamma, const ImpairmentProfile& prof, int n_s) {
  check_ns(n_s);
  if (gamma <= 0.0) return 1.0;
  const FrontEndCoefficients fec = ideal_coefficients(prof);
  OccupancyVector occ;
  occ.theta[0] = 1;
  ThresholdTerms terms(gamma, fec, n_s);
  return occupancy_cdf(gamma, occ, fec, n_s, terms).survival;
}

double sigma_squared(const OccupancyVector& occ, const std::array<double, 6>& g, const FrontEndCoefficients& fec) {
  const auto& t = occ.theta;
  return fec.a1 * t[0] * g[0] + fec.a2 * (t[1] * g[1] + t[2] * g[2]) + fec.a3 * (t[3] * g[3] + t[4] * g[4]) +
         fec.a4 * t[5] * g[5] + fec.a5;
}

std::vector<PowerComponent> active_components(const OccupancyVector& occ, const FrontEndCoefficients& fec) {
  std::vector<PowerComponent> out;
  for (const auto& c : grouped_components(occ, fec)) out.push_back({c.mean, c.mult});
  return out;
}

CdfPath cdf_path(const OccupancyVector& occ, const FrontEndCoefficients& fec) {
  const auto comps = grouped_components(occ, fec);
  if (comps.empty()) return CdfPath::AllIdle;
  return degenerate(comps) ? CdfPath::DegenerateQuadrature : CdfPath::ClosedForm;
}

double nonideal_cdf_given_occupancy(double x, const OccupancyVector& occ, const FrontEndCoefficients& fec, int n_s) {
  check_ns(n_s);
  check_fec(fec);
  ThresholdTerms terms(x, fec, n_s);
  return occupancy_cdf(x, occ, fec, n_s, terms).cdf;
}

double nonideal_survival_given_occupancy(double x, const OccupancyVector& occ, const FrontEndCoefficients& fec,
                                         int n_s) {
  check_ns(n_s);
  check_fec(fec);
  ThresholdTerms terms(x, fec, n_s);
  return occupancy_cdf(x, occ, fec, n_s, terms).survival;
}

double nonideal_pd(const DetectorConfig& det, const FrontEndCoefficients& fec, bool edge) {
  return hypothesis_survival(det, fec, edge, 1);
}

double nonideal_pfa(const DetectorConfig& det, const FrontEndCoefficients& fec, bool edge) {
  return hypothesis_survival(det, fec, edge, 0);
}

double ideal_threshold_for_pfa(double pfa, int n_s, double sigma_w2) {
  check_ns(n_s);
  if (!(pfa > 0.0 && pfa < 1.0)) throw DomainError("target false-alarm probability must lie in (0, 1)");
  return sigma_w2 / n_s * boost::math::gamma_q_inv(static_cast<double>(n_s), pfa);
}

double nonideal_threshold_for_pfa(double pfa, const DetectorConfig& det, const FrontEndCoefficients& fec, bool edge) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw DomainError("target false-alarm probability must lie in (0, 1)");
  DetectorConfig d = det;
  auto g = [&](double log_gamma) {
    d.threshold = std::exp(log_gamma);
    return nonideal_pfa(d, fec, edge) - pfa;
  };
  // Start from the noise-only threshold and expand until the target is bracketed.
  double lo = std::log(ideal_threshold_for_pfa(pfa, det.n_s, 2.0 * fec.a5));
  double hi = lo;
  double glo = g(lo);
  double ghi = glo;
  for (int i = 0; i < 200 && glo < 0.0; ++i) {
    hi = lo;
    ghi = glo;
    lo -= 0.25;
    glo = g(lo);
  }
  for (int i = 0; i < 200 && ghi > 0.0; ++i) {
    lo = hi;
    glo = ghi;
    hi += 0.25;
    ghi = g(hi);
  }
  if (glo < 0.0 || ghi > 0.0) throw ConvergenceError("could not bracket the threshold for the requested false-alarm probability");
  if (glo == 0.0) return std::exp(lo);
  if (ghi == 0.0) return std::exp(hi);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(45), iters);
  return std::exp(0.5 * (r.first + r.second));
}

}  // namespace senserf
