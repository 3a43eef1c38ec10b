#include "senserf/impairments.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <tuple>

#include "senserf/errors.hpp"
#include "senserf/special_functions.hpp"

namespace senserf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double k1_mag2(const IqiSpec& s) { return (1.0 + 2.0 * s.epsilon * std::cos(s.theta) + s.epsilon * s.epsilon) / 4.0; }
double k2_mag2(const IqiSpec& s) { return (1.0 - 2.0 * s.epsilon * std::cos(s.theta) + s.epsilon * s.epsilon) / 4.0; }

void check_iqi(const IqiSpec& s) {
  if (!(s.epsilon > 0.0) || !std::isfinite(s.epsilon)) throw DomainError("IQ mismatch epsilon must be a positive finite number");
  if (!std::isfinite(s.theta)) throw DomainError("IQ phase mismatch must be finite");
}

double clamp_variance(double v, const char* what) {
  if (v < -1e-12) throw NegativeVarianceError(std::string(what) + " yields negative distortion variance " + std::to_string(v));
  return v < 0.0 ? 0.0 : v;
}

}  // namespace

void validate(const SpectrumConfig& cfg) {
  if (cfg.K < 2 || cfg.K % 2 != 0) throw DomainError("channel count K must be even and >= 2");
  if (!(cfg.W > 0.0) || !std::isfinite(cfg.W)) throw DomainError("sample rate W must be positive");
  if (!(cfg.W_sb > 0.0)) throw DomainError("signal bandwidth W_sb must be positive");
  if (!(cfg.W_gb >= 0.0)) throw DomainError("guard bandwidth W_gb must be non-negative");
  const double L = cfg.W / cfg.W_sb;
  if (std::fabs(L - std::round(L)) > 1e-9 * L) throw DomainError("W / W_sb must be an integer");
  if (std::round(L) < cfg.K) throw DomainError("W / W_sb must be at least K");
}

std::pair<cplx, cplx> iqi_coefficients(const IqiSpec& spec) {
  check_iqi(spec);
  const cplx e_minus = std::polar(spec.epsilon, -spec.theta);
  const cplx e_plus = std::polar(spec.epsilon, spec.theta);
  return {(1.0 + e_minus) / 2.0, (1.0 - e_plus) / 2.0};
}

double irr_db(const IqiSpec& spec) {
  check_iqi(spec);
  const double d = k2_mag2(spec);
  if (d <= 0.0) return kInf;
  return 10.0 * std::log10(k1_mag2(spec) / d);
}

double irr_supremum_db(double theta) {
  const double t = std::tan(theta / 2.0);
  if (t == 0.0) return kInf;
  return 10.0 * std::log10(1.0 / (t * t));
}

double epsilon_from_irr(double irr_db_value, double theta, EpsilonBranch branch) {
  if (std::isnan(irr_db_value) || !std::isfinite(theta)) throw DomainError("epsilon_from_irr: invalid arguments");
  const double sup = irr_supremum_db(theta);
  if (irr_db_value > sup) {
    throw InfeasibleIrrError("IRR of " + std::to_string(irr_db_value) + " dB exceeds the supremum " +
                             std::to_string(sup) + " dB for phase mismatch " + std::to_string(theta) + " rad");
  }
  if (std::isinf(irr_db_value)) return 1.0;
  // |K1|^2 = r |K2|^2 gives eps^2 - 2 p eps + 1 = 0 with p = cos(theta)(r+1)/(r-1).
  const double r = std::pow(10.0, irr_db_value / 10.0);
  if (r == 1.0) throw InfeasibleIrrError("an IRR of 0 dB has no positive epsilon solution");
  const double p = std::cos(theta) * (r + 1.0) / (r - 1.0);
  if (!(p >= 1.0)) throw InfeasibleIrrError("requested IRR has no positive epsilon solution");
  const double big = p + std::sqrt((p - 1.0) * (p + 1.0));
  return branch == EpsilonBranch::AboveUnity ? big : 1.0 / big;
}

double clipping_alpha(double ibo, PaFormula formula) {
  if (!(ibo > 0.0)) throw DomainError("clipping IBO must be positive");
  if (std::isinf(ibo)) return 1.0;
  const double e = std::exp(-ibo);
  switch (formula) {
    case PaFormula::AsPrinted:
      return 1.0 - e + std::sqrt(2.0 * kPi) * ibo * gaussian_q(2.0 * ibo);
    case PaFormula::AlternateReading:
      return 1.0 - e + std::sqrt(2.0 * kPi * ibo) * gaussian_q(std::sqrt(2.0 * ibo));
    case PaFormula::Calibrated:
      break;
  }
  return 1.0 - e + 0.5 * std::sqrt(kPi * ibo) * std::erfc(std::sqrt(ibo));
}

PaOutput clipping_pa(double ibo, double sigma_s2, PaFormula formula) {
  if (!(sigma_s2 > 0.0)) throw DomainError("signal power must be positive");
  const double a = clipping_alpha(ibo, formula);
  if (std::isinf(ibo)) return {cplx(1.0, 0.0), 0.0};
  const double se2 = clamp_variance(sigma_s2 * (1.0 - a * a - std::exp(-ibo)), "clipping amplifier");
  return {cplx(a, 0.0), se2};
}

PaOutput polynomial_pa(const std::vector<cplx>& coeffs, double sigma_s2, PaFormula formula) {
  if (coeffs.empty()) throw DomainError("polynomial amplifier needs at least one coefficient");
  if (!(sigma_s2 > 0.0)) throw DomainError("signal power must be positive");
  if (formula == PaFormula::AlternateReading)
    throw DomainError("the alternate reading applies to the clipping amplifier only");
  const int M = static_cast<int>(coeffs.size());
  const double sigma = std::sqrt(sigma_s2);
  auto beta = [&](int m) { return (m >= 1 && m <= M) ? coeffs[m - 1] : cplx(0.0, 0.0); };

  // gamma_n = sum_{m=1}^{n-1} beta_m conj(beta_{n-m})
  auto conv = [&](int n) {
    cplx g(0.0, 0.0);
    for (int m = 1; m <= n - 1; ++m) g += beta(m) * std::conj(beta(n - m));
    return g.real();
  };

  cplx alpha(0.0, 0.0);
  double power = 0.0;
  if (formula == PaFormula::Calibrated) {
    // E|s|^p = sigma^p Gamma(1 + p/2) for s ~ CN(0, sigma^2).
    for (int m = 1; m <= M; ++m) alpha += beta(m) * std::pow(sigma, m - 1) * std::tgamma(1.0 + (m + 1) / 2.0);
    for (int n = 2; n <= 2 * M; ++n) power += conv(n) * std::pow(sigma, n) * std::tgamma(1.0 + n / 2.0);
  } else {
    for (int n = 0; n <= M - 1; ++n)
      alpha += beta(n + 1) * std::pow(2.0, -n / 2.0) * sigma_s2 * std::tgamma(1.0 + n / 2.0);
    for (int n = 2; n <= 2 * M; ++n) power += conv(n) * std::pow(2.0, -n / 2.0) * sigma_s2 * std::tgamma(1.0 + n / 2.0);
  }
  const double se2 = power - std::norm(alpha) * sigma_s2;
  if (se2 < -1e-12)
    throw ModelInconsistencyError("polynomial amplifier formula yields negative distortion variance " + std::to_string(se2));
  return {alpha, se2 < 0.0 ? 0.0 : se2};
}

PaOutput pa_output(const PaModel& pa, double sigma_s2, PaFormula formula) {
  if (std::holds_alternative<PaClipping>(pa)) return clipping_pa(std::get<PaClipping>(pa).ibo, sigma_s2, formula);
  if (std::holds_alternative<PaPolynomial>(pa)) return polynomial_pa(std::get<PaPolynomial>(pa).coeffs, sigma_s2, formula);
  if (!(sigma_s2 > 0.0)) throw DomainError("signal power must be positive");
  return {cplx(1.0, 0.0), 0.0};
}

BussgangEstimate bussgang_oracle(const PaModel& pa, double sigma_s2, std::uint64_t trials, std::uint64_t seed) {
  if (!(sigma_s2 > 0.0)) throw DomainError("signal power must be positive");
  if (trials < 2) throw DomainError("bussgang_oracle needs at least two trials");

  auto f = [&pa, sigma_s2](cplx s) -> cplx {
    if (const auto* c = std::get_if<PaClipping>(&pa)) {
      const double amp = std::sqrt(c->ibo * sigma_s2);
      const double r = std::abs(s);
      return r <= amp ? s : s * (amp / r);
    }
    if (const auto* p = std::get_if<PaPolynomial>(&pa)) {
      const double r = std::abs(s);
      cplx out(0.0, 0.0);
      double rp = 1.0;
      for (const cplx& b : p->coeffs) {
        out += b * s * rp;
        rp *= r;
      }
      return out;
    }
    return s;
  };

  const double sd = std::sqrt(sigma_s2 / 2.0);
  const double n = static_cast<double>(trials);

  // Least-squares gain sum f s* / sum |s|^2, then the residual power.
  cplx cross(0.0, 0.0);
  double energy = 0.0;
  {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, sd);
    for (std::uint64_t i = 0; i < trials; ++i) {
      const double re = nd(gen);
      const double im = nd(gen);
      const cplx s(re, im);
      cross += f(s) * std::conj(s);
      energy += std::norm(s);
    }
  }
  BussgangEstimate est;
  est.alpha_hat = cross / energy;

  double r_sum = 0.0, r_sq = 0.0, w_sum = 0.0;
  {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, sd);
    for (std::uint64_t i = 0; i < trials; ++i) {
      const double re = nd(gen);
      const double im = nd(gen);
      const cplx s(re, im);
      const double d = std::norm(f(s) - est.alpha_hat * s);
      r_sum += d;
      r_sq += d * d;
      w_sum += std::norm(s) * d;
    }
  }
  est.sigma_e2_hat = r_sum / n;
  const double var = std::max(0.0, r_sq / n - est.sigma_e2_hat * est.sigma_e2_hat);
  est.sigma_e2_stderr = std::sqrt(var / (n - 1.0));
  // Sandwich standard error of the least-squares gain.
  est.alpha_stderr = std::sqrt(w_sum) / energy;
  est.alpha_ci = 1.959963984540054 * est.alpha_stderr;
  est.sigma_e2_ci = 1.959963984540054 * est.sigma_e2_stderr;
  return est;
}

double phn_increment_variance(double beta3db, double W) {
  if (!(beta3db >= 0.0) || !(W > 0.0)) throw DomainError("phase noise needs beta >= 0 and W > 0");
  return 4.0 * kPi * beta3db / W;
}

double phn_delta(double beta3db, double W) {
  if (!(W > 0.0)) throw DomainError("phase noise needs W > 0");
  if (!(beta3db > 0.0)) throw DegenerateDeltaError("phase noise delta is unbounded for a zero oscillator bandwidth");
  const double em = std::expm1(-2.0 * kPi * beta3db / W);
  return (2.0 + em) / em;
}

double channel_center_frequency(int k, int K) {
  if (k == 0 || K <= 0) throw DomainError("channel index must be nonzero");
  const double s = k > 0 ? 1.0 : -1.0;
  return s * (2.0 * std::abs(k) - 1.0) / (2.0 * K);
}

double phn_cutoff_frequency(const SpectrumConfig& cfg) { return cfg.W_sb / (2.0 * cfg.W); }

double phn_leakage_kernel(double f, double f_cut, double delta) {
  const double lo = f_cut - f;
  const double hi = f_cut + f;
  const double t1 = lo * std::atan(delta * std::tan(kPi * lo));
  const double t2 = hi * std::atan(delta * std::tan(-kPi * hi));
  const double t3 = -(hi / std::tan(kPi * hi) - lo / std::tan(kPi * lo)) / delta;
  const double t4 = (std::log(std::fabs(std::sin(kPi * hi))) + std::log(std::fabs(std::sin(kPi * lo)))) / (kPi * delta);
  return t1 + t2 + t3 + t4;
}

int frequency_neighbor(int k, int direction, int K) {
  if (k == 0 || std::abs(k) > K / 2) throw DomainError("channel index out of range");
  int j = k + direction;
  if (j == 0) j += direction;
  if (std::abs(j) > K / 2) return 0;
  return j;
}

double phn_leakage_coefficient(const SpectrumConfig& cfg, const PhnSpec& phn, int from_k, int to_k) {
  validate(cfg);
  if (frequency_neighbor(to_k, -1, cfg.K) != from_k && frequency_neighbor(to_k, +1, cfg.K) != from_k)
    throw DomainError("leakage is modeled between frequency-adjacent channels only");
  const double delta = phn_delta(phn.beta3db, cfg.W);
  const double fc = phn_cutoff_frequency(cfg);
  const double d = channel_center_frequency(from_k, cfg.K) - channel_center_frequency(to_k, cfg.K);
  return std::fabs(phn_leakage_kernel(d + fc, fc, delta) - phn_leakage_kernel(d - fc, fc, delta)) / (2.0 * kPi * fc);
}

bool is_edge_channel(int k, int K) { return std::abs(k) == K / 2; }

void validate_sensed_channel(int k, int K) {
  if (k == 0 || std::abs(k) > K / 2)
    throw DomainError("sensed channel " + std::to_string(k) + " is outside -K/2..K/2 without 0");
  if (std::abs(k) < 2)
    throw DomainError("sensed channel must satisfy |k| >= 2: channels 1 and -1 are adjacent, so the mirror would also be a neighbor");
}

FrontEndCoefficients front_end_coefficients(const SpectrumConfig& cfg, const ImpairmentProfile& prof, int k) {
  validate(cfg);
  validate_sensed_channel(k, cfg.K);
  if (!(prof.sigma_s2 > 0.0) || !(prof.sigma_w2 > 0.0) || !(prof.sigma_h2 > 0.0))
    throw DomainError("signal, noise and channel powers must be positive");
  if (!(prof.phn.gamma0_mag2 > 0.0) || prof.phn.gamma0_mag2 > 1.0) throw DomainError("|gamma0|^2 must lie in (0, 1]");
  if (!(prof.phn.beta3db >= 0.0)) throw DomainError("oscillator bandwidth must be non-negative");

  FrontEndCoefficients c;
  std::tie(c.k1, c.k2) = iqi_coefficients(prof.iqi);
  const PaOutput pa = pa_output(prof.pa, prof.sigma_s2, prof.pa_formula);
  c.alpha = pa.alpha;
  c.sigma_e2 = pa.sigma_e2;

  if (prof.phn.beta3db > 0.0) {
    int nb = frequency_neighbor(k, -1, cfg.K);
    if (nb == 0) nb = frequency_neighbor(k, +1, cfg.K);
    c.a_neighbor = phn_leakage_coefficient(cfg, prof.phn, nb, k);
  }

  const double g2 = prof.phn.gamma0_mag2;
  const double k1m = k1_mag2(prof.iqi);
  const double k2m = k2_mag2(prof.iqi);
  const double half = prof.sigma_s2 / 2.0;
  c.xi = std::sqrt(g2) * c.k1 * c.alpha;
  c.a1 = std::norm(c.xi) * half;
  c.a2 = k1m * c.a_neighbor * half;
  c.a3 = k2m * c.a_neighbor * half;
  c.a4 = g2 * k2m * std::norm(c.alpha) * half;
  c.a5 = prof.sigma_w2 / 2.0 + (g2 / 2.0) * (k1m + k2m) * c.sigma_e2;
  c.sigma_h2 = prof.sigma_h2;
  return c;
}

FrontEndCoefficients ideal_coefficients(const ImpairmentProfile& prof) {
  if (!(prof.sigma_s2 > 0.0) || !(prof.sigma_w2 > 0.0) || !(prof.sigma_h2 > 0.0))
    throw DomainError("signal, noise and channel powers must be positive");
  FrontEndCoefficients c;
  c.a1 = prof.sigma_s2 / 2.0;
  c.a5 = prof.sigma_w2 / 2.0;
  c.sigma_h2 = prof.sigma_h2;
  return c;
}

}  // namespace senserf
