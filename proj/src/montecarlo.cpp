#include "senserf/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "senserf/errors.hpp"

namespace senserf {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

double scaled_chi_square(double sigma2, int n_s, TrialRng& rng) {
  std::normal_distribution<double> nd;
  double acc = 0.0;
  for (int i = 0; i < 2 * n_s; ++i) {
    const double z = nd(rng);
    acc += z * z;
  }
  return sigma2 / n_s * acc;
}

void check_mc(const McConfig& mc) {
  if (mc.trials == 0) throw DomainError("Monte Carlo needs at least one trial");
  if (mc.batch == 0) throw DomainError("Monte Carlo batch size must be positive");
}

// Counts of samples falling in each of the thresholds.size() + 1 cells cut by
// the sorted thresholds; cell j holds samples with t_{j-1} < T <= t_j.
std::vector<std::uint64_t> histogram(const EnergySampler& sampler, const McConfig& mc,
                                     const std::vector<double>& thresholds) {
  check_mc(mc);
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw DomainError("thresholds must be sorted ascending");
  const std::uint64_t blocks = (mc.trials + mc.batch - 1) / mc.batch;
  unsigned workers = mc.workers ? mc.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));

  std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(thresholds.size() + 1, 0));
  std::atomic<std::uint64_t> next{0};
  auto work = [&](unsigned w) {
    auto& counts = partial[w];
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      const std::uint64_t end = std::min(mc.trials, (b + 1) * mc.batch);
      for (std::uint64_t i = b * mc.batch; i < end; ++i) {
        TrialRng rng(mc.seed, i);
        const double t = sampler(rng);
        const auto cell = std::lower_bound(thresholds.begin(), thresholds.end(), t) - thresholds.begin();
        ++counts[static_cast<std::size_t>(cell)];
      }
    }
  };
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
  try {
    work(0);
  } catch (...) {
    failure = std::current_exception();
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<std::uint64_t> total(thresholds.size() + 1, 0);
  for (const auto& c : partial)
    for (std::size_t j = 0; j < c.size(); ++j) total[j] += c[j];
  return total;
}

McEstimate make_estimate(std::uint64_t hits, std::uint64_t n) {
  McEstimate e;
  e.trials = n;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(n);
  e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(n));
  return e;
}

}  // namespace

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial) : state_(mix64(mix64(seed + kGolden) ^ (trial * kGolden))) {}

TrialRng::result_type TrialRng::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

double sample_energy_ideal(int theta_k, const ImpairmentProfile& prof, int n_s, TrialRng& rng) {
  double sigma2 = prof.sigma_w2 / 2.0;
  if (theta_k) {
    std::exponential_distribution<double> gain(1.0 / prof.sigma_h2);
    sigma2 += gain(rng) * prof.sigma_s2 / 2.0;
  }
  return scaled_chi_square(sigma2, n_s, rng);
}

double sample_energy_nonideal(const OccupancyVector& occ, const FrontEndCoefficients& fec, int n_s, TrialRng& rng) {
  std::exponential_distribution<double> gain(1.0 / fec.sigma_h2);
  std::array<double, 6> g{};
  for (auto& v : g) v = gain(rng);
  return scaled_chi_square(sigma_squared(occ, g, fec), n_s, rng);
}

double sample_energy_hypothesis(int theta_k, double q, bool edge, const FrontEndCoefficients& fec, int n_s,
                                TrialRng& rng) {
  std::bernoulli_distribution busy(q);
  OccupancyVector occ;
  occ.theta[0] = theta_k;
  for (int i = 1; i < 6; ++i) {
    const bool b = busy(rng);
    occ.theta[i] = (edge && (i == 2 || i == 4)) ? 0 : static_cast<int>(b);
  }
  return sample_energy_nonideal(occ, fec, n_s, rng);
}

std::vector<McEstimate> estimate_exceedance(const EnergySampler& sampler, const McConfig& mc,
                                            const std::vector<double>& thresholds) {
  const auto h = histogram(sampler, mc, thresholds);
  std::vector<McEstimate> out(thresholds.size());
  std::uint64_t above = 0;
  for (std::size_t j = thresholds.size(); j-- > 0;) {
    above += h[j + 1];
    out[j] = make_estimate(above, mc.trials);
  }
  return out;
}

std::vector<McEstimate> empirical_cdf(const EnergySampler& sampler, const McConfig& mc, const std::vector<double>& xs) {
  const auto h = histogram(sampler, mc, xs);
  std::vector<McEstimate> out(xs.size());
  std::uint64_t below = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    below += h[j];
    out[j] = make_estimate(below, mc.trials);
  }
  return out;
}

std::vector<McEstimate> estimate(CurveKind curve, const DetectorConfig& det, const ImpairmentProfile& prof,
                                 const FrontEndCoefficients& fec, bool edge, const McConfig& mc,
                                 const std::vector<double>& thresholds) {
  if (det.n_s < 1) throw DomainError("number of samples must be >= 1");
  EnergySampler s;
  switch (curve) {
    case CurveKind::PfaIdeal:
      s = [&](TrialRng& r) { return sample_energy_ideal(0, prof, det.n_s, r); };
      break;
    case CurveKind::PdIdeal:
      s = [&](TrialRng& r) { return sample_energy_ideal(1, prof, det.n_s, r); };
      break;
    case CurveKind::PfaNonideal:
      s = [&](TrialRng& r) { return sample_energy_hypothesis(0, det.q, edge, fec, det.n_s, r); };
      break;
    case CurveKind::PdNonideal:
      s = [&](TrialRng& r) { return sample_energy_hypothesis(1, det.q, edge, fec, det.n_s, r); };
      break;
  }
  return estimate_exceedance(s, mc, thresholds);
}

double dkw_epsilon(std::uint64_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw DomainError("DKW band needs n > 0 and alpha in (0, 1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

}  // namespace senserf
