#pragma once

#include <array>
#include <vector>

#include "senserf/impairments.hpp"

namespace senserf {

struct DetectorConfig {
  int n_s = 5;            // samples per decision
  double threshold = 1.0; // on the normalized statistic (1/N_s) sum |r|^2
  double q = 0.5;         // per-channel busy probability
};

// Busy/idle bits of the six channels that shape the sensed channel's energy,
// ordered [k, k-1, k+1, -k+1, -k-1, -k] (neighbors in frequency order).
struct OccupancyVector {
  std::array<int, 6> theta{};

  // Multiplicities [th_k, th_{k-1}+th_{k+1}, th_{-k+1}+th_{-k-1}, th_{-k}].
  std::array<int, 4> m() const;
  bool all_idle() const;
};

// The 32 (interior) or 8 (edge) occupancy vectors with th_k fixed. Edge
// channels keep th_{k+1} = th_{-k-1} = 0. Order: the free bits count up as a
// binary number, th_{k-1} least significant.
std::vector<OccupancyVector> enumerate_occupancies(int theta_k, bool edge);

// q^busy (1-q)^idle over the free bits.
double occupancy_probability(const OccupancyVector& occ, double q, bool edge);

// Physical channel indices [k, k-1, k+1, -k+1, -k-1, -k] for sensed channel
// k, 0 where the channel does not exist.
std::array<int, 6> occupancy_channels(int k, int K);

double ideal_conditional_cdf(double x, double sigma2, int n_s);
double ideal_busy_cdf(double x, const ImpairmentProfile& prof, int n_s);
double ideal_pfa(double gamma, int n_s, double sigma_w2);
double ideal_pd(double gamma, const ImpairmentProfile& prof, int n_s);

double sigma_squared(const OccupancyVector& occ, const std::array<double, 6>& gains2,
                     const FrontEndCoefficients& fec);

// One exponential group of the received power: sum of mult i.i.d.
// exponentials of the given mean (already scaled by sigma_h2).
struct PowerComponent {
  double mean = 0.0;
  int mult = 0;
};

// Components switched on by occ; zero-mean components are dropped.
std::vector<PowerComponent> active_components(const OccupancyVector& occ, const FrontEndCoefficients& fec);

// Relative gap below which two component means are treated as coincident.
inline constexpr double kDegenerateGap = 1e-6;

enum class CdfPath { AllIdle, ClosedForm, DegenerateQuadrature };
CdfPath cdf_path(const OccupancyVector& occ, const FrontEndCoefficients& fec);

double nonideal_cdf_given_occupancy(double x, const OccupancyVector& occ, const FrontEndCoefficients& fec, int n_s);
// 1 - cdf, evaluated directly so small tail probabilities keep relative accuracy.
double nonideal_survival_given_occupancy(double x, const OccupancyVector& occ, const FrontEndCoefficients& fec,
                                         int n_s);

double nonideal_pd(const DetectorConfig& det, const FrontEndCoefficients& fec, bool edge);
double nonideal_pfa(const DetectorConfig& det, const FrontEndCoefficients& fec, bool edge);

// Threshold giving the requested false-alarm probability.
double ideal_threshold_for_pfa(double pfa, int n_s, double sigma_w2);
double nonideal_threshold_for_pfa(double pfa, const DetectorConfig& det, const FrontEndCoefficients& fec, bool edge);

}  // namespace senserf
