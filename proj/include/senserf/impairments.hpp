#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

namespace senserf {

using cplx = std::complex<double>;

// Wideband channelization: K channels of W_sb signal band plus W_gb guard
// band inside a band of W (all in Hz).
struct SpectrumConfig {
  int K = 8;
  double W = 9e6;
  double W_sb = 1e6;
  double W_gb = 125e3;
};

void validate(const SpectrumConfig& cfg);

struct PaIdeal {};
// Soft envelope limiter; ibo = A_o^2 / sigma_s^2 on a linear scale.
struct PaClipping {
  double ibo = 1.0;
};
// f(s) = sum_m beta_m s |s|^(m-1), m = 1..M.
struct PaPolynomial {
  std::vector<cplx> coeffs;
};
using PaModel = std::variant<PaIdeal, PaClipping, PaPolynomial>;

// Which closed form is used for the amplifier's Bussgang gain and distortion.
enum class PaFormula {
  // Exact Bussgang decomposition of the amplifier model above.
  Calibrated,
  // The classical expressions read literally.
  AsPrinted,
  // Clipping only: the sqrt(2 pi IBO) Q(sqrt(2 IBO)) reading.
  AlternateReading,
};

struct IqiSpec {
  double epsilon = 1.0;  // amplitude mismatch, > 0
  double theta = 0.0;    // phase mismatch, radians
};

struct PhnSpec {
  double beta3db = 0.0;      // oscillator 3 dB bandwidth, Hz
  double gamma0_mag2 = 1.0;  // common phase error power |gamma_0|^2
};

struct ImpairmentProfile {
  PaModel pa = PaIdeal{};
  PaFormula pa_formula = PaFormula::Calibrated;
  IqiSpec iqi;
  PhnSpec phn;
  double sigma_s2 = 1.0;
  double sigma_w2 = 1.0;
  double sigma_h2 = 1.0;
};

// Per-channel constants of the impaired energy model. The received power
// given occupancy and gains is
//   a1 th_k |h_k|^2 + a2 (th_{k-1}|h_{k-1}|^2 + th_{k+1}|h_{k+1}|^2)
//   + a3 (th_{-k+1}|h_{-k+1}|^2 + th_{-k-1}|h_{-k-1}|^2) + a4 th_{-k}|h_{-k}|^2 + a5
// with |h_j|^2 exponential of mean sigma_h2.
struct FrontEndCoefficients {
  cplx k1{1.0, 0.0};
  cplx k2{0.0, 0.0};
  cplx alpha{1.0, 0.0};
  double sigma_e2 = 0.0;
  double a_neighbor = 0.0;
  cplx xi{1.0, 0.0};
  double a1 = 0.5;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  double a5 = 0.5;
  double sigma_h2 = 1.0;
};

std::pair<cplx, cplx> iqi_coefficients(const IqiSpec& spec);

// 10 log10 |K1/K2|^2, +inf for a perfectly matched receiver.
double irr_db(const IqiSpec& spec);

// Supremum of irr_db over epsilon at fixed theta: 10 log10 cot^2(theta/2).
double irr_supremum_db(double theta);

// The two epsilon solving irr_db = v are reciprocal. BelowUnity picks the
// root with |K1| <= 1 (the mismatch never amplifies the wanted signal).
enum class EpsilonBranch { BelowUnity, AboveUnity };

double epsilon_from_irr(double irr_db_value, double theta, EpsilonBranch branch = EpsilonBranch::BelowUnity);

struct PaOutput {
  cplx alpha{1.0, 0.0};
  double sigma_e2 = 0.0;
};

// Bussgang gain of the clipping amplifier alone; defined even where the
// matching distortion variance would be negative.
double clipping_alpha(double ibo, PaFormula formula = PaFormula::Calibrated);
PaOutput clipping_pa(double ibo, double sigma_s2, PaFormula formula = PaFormula::Calibrated);
PaOutput polynomial_pa(const std::vector<cplx>& coeffs, double sigma_s2,
                       PaFormula formula = PaFormula::Calibrated);
PaOutput pa_output(const PaModel& pa, double sigma_s2, PaFormula formula);

// Monte Carlo estimate of alpha = E[f(s) s*]/sigma_s2 and
// sigma_e2 = E|f(s) - alpha s|^2 for s ~ CN(0, sigma_s2).
struct BussgangEstimate {
  cplx alpha_hat{1.0, 0.0};
  double alpha_stderr = 0.0;
  double sigma_e2_hat = 0.0;
  double sigma_e2_stderr = 0.0;
  // 95% normal-approximation half widths.
  double alpha_ci = 0.0;
  double sigma_e2_ci = 0.0;
};

BussgangEstimate bussgang_oracle(const PaModel& pa, double sigma_s2, std::uint64_t trials, std::uint64_t seed);

// Variance of the phase increment, 4 pi beta / W.
double phn_increment_variance(double beta3db, double W);
// (e^{-2 pi beta/W} + 1) / (e^{-2 pi beta/W} - 1)
double phn_delta(double beta3db, double W);
// Normalized center frequency sign(k)(2|k|-1)/(2K).
double channel_center_frequency(int k, int K);
double phn_cutoff_frequency(const SpectrumConfig& cfg);
// The leakage kernel I(f).
double phn_leakage_kernel(double f, double f_cut, double delta);

// Index of the channel adjacent in frequency (direction -1 lower, +1 upper),
// 0 when it does not exist. Channel indices skip 0, so 1 and -1 are adjacent.
int frequency_neighbor(int k, int direction, int K);

// Power fraction leaking from channel from_k into the adjacent channel to_k.
double phn_leakage_coefficient(const SpectrumConfig& cfg, const PhnSpec& phn, int from_k, int to_k);

bool is_edge_channel(int k, int K);

// Throws DomainError unless k is a valid sensed channel for the six-channel
// model (|k| in 2..K/2 so the mirror is not a neighbor).
void validate_sensed_channel(int k, int K);

FrontEndCoefficients front_end_coefficients(const SpectrumConfig& cfg, const ImpairmentProfile& prof, int k);

// Coefficients of an impairment-free receiver with the profile's powers.
FrontEndCoefficients ideal_coefficients(const ImpairmentProfile& prof);

}  // namespace senserf
