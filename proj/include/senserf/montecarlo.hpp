#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "senserf/detection.hpp"
#include "senserf/impairments.hpp"

namespace senserf {

struct McConfig {
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 1;
  // Trials per work unit handed to a worker.
  std::uint64_t batch = 65536;
  // 0 picks the hardware concurrency.
  unsigned workers = 0;
};

struct McEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
};

// Random stream of one trial, keyed by (seed, trial index), so results do
// not depend on how trials are scheduled. SplitMix64 output function.
class TrialRng {
 public:
  using result_type = std::uint64_t;
  TrialRng(std::uint64_t seed, std::uint64_t trial);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t state_;
};

// One draw of the normalized test statistic (1/N_s) sum |r(n)|^2.
double sample_energy_ideal(int theta_k, const ImpairmentProfile& prof, int n_s, TrialRng& rng);
double sample_energy_nonideal(const OccupancyVector& occ, const FrontEndCoefficients& fec, int n_s, TrialRng& rng);
// Occupancy of the five other channels drawn Bernoulli(q) per trial, with the
// edge rule applied and the sensed channel fixed to theta_k.
double sample_energy_hypothesis(int theta_k, double q, bool edge, const FrontEndCoefficients& fec, int n_s,
                                TrialRng& rng);

using EnergySampler = std::function<double(TrialRng&)>;

// P(T > threshold) for each threshold from one shared sample set.
std::vector<McEstimate> estimate_exceedance(const EnergySampler& sampler, const McConfig& mc,
                                            const std::vector<double>& thresholds);
// P(T <= x) for each x from one shared sample set.
std::vector<McEstimate> empirical_cdf(const EnergySampler& sampler, const McConfig& mc, const std::vector<double>& xs);

enum class CurveKind { PfaIdeal, PdIdeal, PfaNonideal, PdNonideal };

std::vector<McEstimate> estimate(CurveKind curve, const DetectorConfig& det, const ImpairmentProfile& prof,
                                 const FrontEndCoefficients& fec, bool edge, const McConfig& mc,
                                 const std::vector<double>& thresholds);

// Half width of the two-sided DKW band at confidence 1 - alpha.
double dkw_epsilon(std::uint64_t n, double alpha);

}  // namespace senserf
