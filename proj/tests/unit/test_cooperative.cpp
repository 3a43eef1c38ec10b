#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "senserf/cooperative.hpp"
#include "senserf/errors.hpp"

using namespace senserf;

TEST_CASE("BPSK over Rayleigh") {
  CHECK(bpsk_rayleigh_ber(0.0) == 0.5);
  CHECK(bpsk_rayleigh_ber(std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(bpsk_rayleigh_ber(10.0) == doctest::Approx(0.5 * (1 - std::sqrt(10.0 / 11.0))).epsilon(1e-14));
  CHECK(bpsk_rayleigh_ber(10.0) == doctest::Approx(0.023269).epsilon(1e-4));
  double prev = 0.5;
  for (double g = 0.1; g < 1e4; g *= 1.7) {
    CHECK(bpsk_rayleigh_ber(g) < prev);
    prev = bpsk_rayleigh_ber(g);
  }
  CHECK_THROWS_AS(bpsk_rayleigh_ber(-1.0), DomainError);
}

TEST_CASE("BPSK over Rayleigh against simulation") {
  // Coherent BPSK, unit-power Rayleigh gain, SNR 10.
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  const int n = 2000000;
  int errors = 0;
  const double g = 10.0;
  for (int i = 0; i < n; ++i) {
    const double hr = nd(gen) / std::sqrt(2.0), hi = nd(gen) / std::sqrt(2.0);
    const double amp2 = hr * hr + hi * hi;
    const double noise = nd(gen) / std::sqrt(2.0 * g);
    if (std::sqrt(amp2) + noise < 0.0) ++errors;
  }
  const double p = static_cast<double>(errors) / n;
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::fabs(p - bpsk_rayleigh_ber(g)) < 4 * se);
}

TEST_CASE("reporting errors") {
  CHECK(apply_reporting_error(0.37, 0.0) == 0.37);
  for (double p : {0.0, 0.2, 1.0}) CHECK(apply_reporting_error(p, 0.5) == 0.5);
  CHECK(apply_reporting_error(0.9, 0.1) == doctest::Approx(0.82).epsilon(1e-15));
  for (double p : {0.0, 0.3, 1.0}) {
    const double v = apply_reporting_error(p, 0.1);
    CHECK(v >= 0.1 - 1e-16);
    CHECK(v <= 0.9 + 1e-16);
  }
  CHECK_THROWS_AS(apply_reporting_error(1.2, 0.1), DomainError);
}

TEST_CASE("homogeneous k-out-of-n") {
  CHECK(fused_prob_homogeneous(0.1, 5, 1) == doctest::Approx(1 - std::pow(0.9, 5)).epsilon(1e-15));
  CHECK(fused_prob_homogeneous(0.1, 5, 1) == doctest::Approx(0.40951).epsilon(1e-14));
  CHECK(fused_prob_homogeneous(0.3, 4, 4) == doctest::Approx(std::pow(0.3, 4)).epsilon(1e-15));
  CHECK_THROWS_AS(fused_prob_homogeneous(0.3, 4, 5), DomainError);
  CHECK_THROWS_AS(fused_prob_homogeneous(0.3, 4, 0), DomainError);
}

TEST_CASE("heterogeneous enumeration") {
  CHECK(fused_prob_heterogeneous({0.1, 0.2}, 1) == doctest::Approx(0.28).epsilon(1e-15));
  CHECK(fused_prob_heterogeneous({0.1, 1.0, 0.4}, 1) == 1.0);
  for (int n = 1; n <= 10; ++n)
    for (int k = 1; k <= n; ++k)
      for (double p : {0.03, 0.5, 0.91}) {
        const std::vector<double> probs(static_cast<std::size_t>(n), p);
        CHECK(std::fabs(fused_prob_heterogeneous(probs, k) - fused_prob_homogeneous(p, n, k)) <= 1e-15);
      }
  const std::vector<double> probs{0.1, 0.35, 0.6, 0.82, 0.05};
  double or_rule = 1.0, and_rule = 1.0;
  for (double p : probs) {
    or_rule *= 1 - p;
    and_rule *= p;
  }
  CHECK(fused_prob_heterogeneous(probs, 1) == doctest::Approx(1 - or_rule).epsilon(1e-15));
  CHECK(fused_prob_heterogeneous(probs, 5) == doctest::Approx(and_rule).epsilon(1e-15));
  // Duality and coordinate-wise monotonicity.
  std::vector<double> comp;
  for (double p : probs) comp.push_back(1 - p);
  for (int k = 1; k <= 5; ++k) {
    CHECK(fused_prob_heterogeneous(probs, k) + fused_prob_heterogeneous(comp, 5 - k + 1) ==
          doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t j = 0; j < probs.size(); ++j) {
      auto up = probs;
      up[j] += 0.01;
      CHECK(fused_prob_heterogeneous(up, k) >= fused_prob_heterogeneous(probs, k));
    }
  }
  CHECK_THROWS_AS(fused_prob_heterogeneous(std::vector<double>(21, 0.1), 1), SizeError);
  CHECK_NOTHROW(fused_prob_heterogeneous(std::vector<double>(20, 0.1), 3));
}

TEST_CASE("fusion with reporting errors") {
  FusionConfig cfg;
  cfg.k_su = 3;
  for (int i = 0; i < 5; ++i) cfg.sus.push_back({0.1, 0.8, std::numeric_limits<double>::infinity()});
  CHECK(fused_with_errors(cfg, FusionTarget::FalseAlarm) == fused_prob_homogeneous(0.1, 5, 3));
  CHECK(fused_with_errors(cfg, FusionTarget::Detection) == fused_prob_homogeneous(0.8, 5, 3));

  for (auto& su : cfg.sus) su.report_snr = 10.0;
  const double pe = bpsk_rayleigh_ber(10.0);
  const double eff = 0.1 * (1 - pe) + 0.9 * pe;
  CHECK(fused_with_errors(cfg, FusionTarget::FalseAlarm) ==
        doctest::Approx(fused_prob_homogeneous(eff, 5, 3)).epsilon(1e-15));

  for (auto& su : cfg.sus) su.report_snr = 0.0;
  CHECK(fused_with_errors(cfg, FusionTarget::Detection) ==
        doctest::Approx(fused_prob_homogeneous(0.5, 5, 3)).epsilon(1e-15));
}
