#pragma once

#include <limits>
#include <vector>

namespace senserf {

// One secondary user's local decision quality and its reporting link.
struct SuOperatingPoint {
  double p_fa = 0.0;
  double p_d = 0.0;
  // Reporting-link SNR on a linear scale; infinity means an error-free link.
  double report_snr = std::numeric_limits<double>::infinity();
};

struct FusionConfig {
  std::vector<SuOperatingPoint> sus;
  int k_su = 1;
};

enum class FusionTarget { FalseAlarm, Detection };

inline constexpr int kMaxEnumeratedSus = 20;

// BPSK bit error probability over a Rayleigh link, 1/2 (1 - sqrt(g/(1+g))).
double bpsk_rayleigh_ber(double gamma_r);

// Probability that the received report says "busy" after a binary symmetric
// channel with crossover pe.
double apply_reporting_error(double p, double pe);

// P(at least k_su of n_su independent reporters say "busy").
double fused_prob_homogeneous(double p, int n_su, int k_su);

// Same rule for non-identical reporters, by enumeration of all 2^n decision
// sets. Throws SizeError for more than kMaxEnumeratedSus reporters.
double fused_prob_heterogeneous(const std::vector<double>& probs, int k_su);

double fused_with_errors(const FusionConfig& cfg, FusionTarget which);

}  // namespace senserf
