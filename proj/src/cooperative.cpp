#include "senserf/cooperative.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "senserf/errors.hpp"

namespace senserf {

namespace {

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

void check_rule(int n_su, int k_su) {
  if (n_su < 1) throw DomainError("need at least one secondary user");
  if (k_su < 1 || k_su > n_su) throw DomainError("fusion rule needs 1 <= k_su <= n_su");
}

}  // namespace

double bpsk_rayleigh_ber(double gamma_r) {
  if (std::isnan(gamma_r) || gamma_r < 0.0) throw DomainError("reporting SNR must be non-negative");
  if (std::isinf(gamma_r)) return 0.0;
  // 1/2 (1 - sqrt(g/(1+g))) written without cancellation for large g.
  const double s = std::sqrt(gamma_r / (1.0 + gamma_r));
  return 0.5 / ((1.0 + gamma_r) * (1.0 + s));
}

double apply_reporting_error(double p, double pe) {
  check_prob(p, "probability");
  check_prob(pe, "reporting error probability");
  return p * (1.0 - pe) + (1.0 - p) * pe;
}

double fused_prob_homogeneous(double p, int n_su, int k_su) {
  check_prob(p, "probability");
  check_rule(n_su, k_su);
  long double acc = 0.0L;
  for (int i = k_su; i <= n_su; ++i)
    acc += static_cast<long double>(boost::math::binomial_coefficient<double>(n_su, i)) *
           std::pow(static_cast<long double>(p), i) * std::pow(1.0L - p, n_su - i);
  return std::min(1.0, static_cast<double>(acc));
}

double fused_prob_heterogeneous(const std::vector<double>& probs, int k_su) {
  const int n = static_cast<int>(probs.size());
  if (n > kMaxEnumeratedSus)
    throw SizeError("decision-set enumeration supports at most " + std::to_string(kMaxEnumeratedSus) + " users");
  check_rule(n, k_su);
  for (double p : probs) check_prob(p, "probability");
  long double acc = 0.0L;
  const unsigned long sets = 1UL << n;
  for (unsigned long d = 0; d < sets; ++d) {
    if (__builtin_popcountl(d) < k_su) continue;
    long double w = 1.0L;
    for (int j = 0; j < n; ++j) w *= ((d >> j) & 1UL) ? static_cast<long double>(probs[j]) : 1.0L - probs[j];
    acc += w;
  }
  return std::min(1.0, static_cast<double>(acc));
}

double fused_with_errors(const FusionConfig& cfg, FusionTarget which) {
  std::vector<double> eff;
  eff.reserve(cfg.sus.size());
  for (const auto& su : cfg.sus) {
    const double p = which == FusionTarget::FalseAlarm ? su.p_fa : su.p_d;
    eff.push_back(apply_reporting_error(p, bpsk_rayleigh_ber(su.report_snr)));
  }
  return fused_prob_heterogeneous(eff, cfg.k_su);
}

}  // namespace senserf
