#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "senserf/errors.hpp"
#include "senserf/experiment.hpp"

namespace senserf {

namespace {

// Minimal RFC 4180 writer: fields are quoted when they contain a separator,
// quote or line break.
class CsvWriter {
 public:
  void comment(const std::string& line) { out_ << "# " << line << '\n'; }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string quote(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
    std::string q = "\"";
    for (char c : f) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  std::ostringstream out_;
};

std::string num(double v) { return format_number(v); }

// Root of f(log gamma) = 0 for f decreasing in gamma, starting near gamma0.
template <class F>
double solve_decreasing(F f, double gamma0) {
  double lo = std::log(gamma0);
  double hi = lo;
  double flo = f(lo);
  double fhi = flo;
  for (int i = 0; i < 400 && flo < 0.0; ++i) {
    hi = lo;
    fhi = flo;
    lo -= 0.25;
    flo = f(lo);
  }
  for (int i = 0; i < 400 && fhi > 0.0; ++i) {
    lo = hi;
    flo = fhi;
    hi += 0.25;
    fhi = f(hi);
  }
  if (flo < 0.0 || fhi > 0.0) throw ConvergenceError("could not bracket the threshold");
  if (flo == 0.0) return std::exp(lo);
  if (fhi == 0.0) return std::exp(hi);
  std::uintmax_t iters = 200;
  const auto r =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(45), iters);
  return std::exp(0.5 * (r.first + r.second));
}

const ProfileSpec& find_profile(const ExperimentSpec& spec, const std::string& name) {
  for (const auto& p : spec.profiles)
    if (p.name == name) return p;
  throw ConfigError("unknown profile '" + name + "'");
}

void metadata(CsvWriter& csv, const ExperimentSpec& spec, const std::vector<std::pair<std::string, FrontEndCoefficients>>& fecs) {
  csv.comment("sense-rf kind=" + kind_name(spec.kind));
  csv.comment("spectrum K=" + std::to_string(spec.spectrum.K) + " channel=" + std::to_string(spec.channel) +
              " W_hz=" + num(spec.spectrum.W) + " W_sb_hz=" + num(spec.spectrum.W_sb) +
              " W_gb_hz=" + num(spec.spectrum.W_gb));
  csv.comment("detector n_s=" + std::to_string(spec.detector.n_s) + " q=" + num(spec.detector.q));
  for (const auto& p : spec.profiles) {
    std::string line = "profile " + p.name + ": pa=" + p.pa_label;
    if (std::isfinite(p.ibo_db)) line += " ibo_db=" + num(p.ibo_db);
    line += " irr_db=" + (std::isfinite(p.irr_db) ? num(p.irr_db) : std::string("inf"));
    line += " phase_deg=" + num(p.phase_deg) + " epsilon=" + num(p.profile.iqi.epsilon);
    line += " beta_hz=" + num(p.profile.phn.beta3db) + " snr_db=" + num(p.snr_db);
    line += " sigma_h2=" + num(p.profile.sigma_h2) + " sigma_w2=" + num(p.profile.sigma_w2);
    csv.comment(line);
  }
  for (const auto& [name, f] : fecs)
    csv.comment("coefficients " + name + ": a1=" + num(f.a1) + " a2=" + num(f.a2) + " a3=" + num(f.a3) +
                " a4=" + num(f.a4) + " a5=" + num(f.a5));
  if (spec.mc) csv.comment("mc trials=" + std::to_string(spec.mc->trials) + " seed=" + std::to_string(spec.mc->seed));
}

struct CurveModel {
  const ProfileSpec* spec;
  FrontEndCoefficients fec;
};

std::vector<CurveModel> curve_models(const ExperimentSpec& spec) {
  std::vector<CurveModel> out;
  for (const auto& p : spec.profiles) out.push_back({&p, front_end_coefficients(spec.spectrum, p.profile, spec.channel)});
  return out;
}

std::vector<std::pair<std::string, FrontEndCoefficients>> named(const std::vector<CurveModel>& models) {
  std::vector<std::pair<std::string, FrontEndCoefficients>> out;
  for (const auto& m : models) out.emplace_back(m.spec->name, m.fec);
  return out;
}

RunResult run_fa_vs_threshold(const ExperimentSpec& spec) {
  const auto models = curve_models(spec);
  const bool edge = is_edge_channel(spec.channel, spec.spectrum.K);
  CsvWriter csv;
  metadata(csv, spec, named(models));
  std::vector<std::string> header{"curve", "threshold", "pfa_ideal", "pfa_nonideal"};
  if (spec.mc) header.insert(header.end(), {"pfa_mc", "mc_stderr"});
  csv.row(header);
  RunResult res;
  for (const auto& m : models) {
    std::vector<McEstimate> mc;
    DetectorConfig det = spec.detector;
    if (spec.mc) mc = estimate(CurveKind::PfaNonideal, det, m.spec->profile, m.fec, edge, *spec.mc, spec.thresholds);
    for (std::size_t i = 0; i < spec.thresholds.size(); ++i) {
      det.threshold = spec.thresholds[i];
      std::vector<std::string> row{m.spec->name, num(det.threshold),
                                   num(ideal_pfa(det.threshold, det.n_s, m.spec->profile.sigma_w2)),
                                   num(nonideal_pfa(det, m.fec, edge))};
      if (spec.mc) row.insert(row.end(), {num(mc[i].p_hat), num(mc[i].std_error)});
      csv.row(row);
      ++res.points;
    }
  }
  res.csv = csv.str();
  return res;
}

RunResult run_roc(const ExperimentSpec& spec) {
  const auto models = curve_models(spec);
  const bool edge = is_edge_channel(spec.channel, spec.spectrum.K);
  CsvWriter csv;
  metadata(csv, spec, named(models));
  std::vector<std::string> header{"curve", "pfa", "threshold_ideal", "pd_ideal", "threshold_nonideal", "pd_nonideal"};
  if (spec.mc) header.insert(header.end(), {"pfa_mc", "pfa_mc_stderr", "pd_mc", "pd_mc_stderr"});
  csv.row(header);
  RunResult res;
  for (const auto& m : models) {
    DetectorConfig det = spec.detector;
    std::vector<double> thr_ideal, thr_nonideal;
    for (double pfa : spec.pfa_grid) {
      thr_ideal.push_back(ideal_threshold_for_pfa(pfa, det.n_s, m.spec->profile.sigma_w2));
      thr_nonideal.push_back(nonideal_threshold_for_pfa(pfa, det, m.fec, edge));
    }
    std::vector<McEstimate> mc_fa, mc_d;
    if (spec.mc) {
      // Thresholds fall as pfa rises; the estimator wants them ascending.
      std::vector<double> asc(thr_nonideal.rbegin(), thr_nonideal.rend());
      mc_fa = estimate(CurveKind::PfaNonideal, det, m.spec->profile, m.fec, edge, *spec.mc, asc);
      mc_d = estimate(CurveKind::PdNonideal, det, m.spec->profile, m.fec, edge, *spec.mc, asc);
      std::reverse(mc_fa.begin(), mc_fa.end());
      std::reverse(mc_d.begin(), mc_d.end());
    }
    for (std::size_t i = 0; i < spec.pfa_grid.size(); ++i) {
      det.threshold = thr_nonideal[i];
      std::vector<std::string> row{m.spec->name,
                                   num(spec.pfa_grid[i]),
                                   num(thr_ideal[i]),
                                   num(ideal_pd(thr_ideal[i], m.spec->profile, det.n_s)),
                                   num(thr_nonideal[i]),
                                   num(nonideal_pd(det, m.fec, edge))};
      if (spec.mc)
        row.insert(row.end(), {num(mc_fa[i].p_hat), num(mc_fa[i].std_error), num(mc_d[i].p_hat), num(mc_d[i].std_error)});
      csv.row(row);
      ++res.points;
    }
  }
  res.csv = csv.str();
  return res;
}

RunResult run_coop_roc(const ExperimentSpec& spec) {
  const auto models = curve_models(spec);
  CsvWriter csv;
  metadata(csv, spec, named(models));
  for (const auto& net : spec.networks) {
    std::string line = "network " + net.name + ": sus=";
    for (std::size_t i = 0; i < net.su_profiles.size(); ++i) line += (i ? "|" : "") + net.su_profiles[i];
    line += " report_snr_db=" + (std::isfinite(net.report_snr_db) ? num(net.report_snr_db) : std::string("inf"));
    csv.comment(line);
  }
  csv.row({"curve", "rule", "k_su", "pfa_fc", "threshold_ideal", "pd_fc_ideal", "threshold_nonideal", "pd_fc_nonideal"});
  RunResult res;
  for (const auto& net : spec.networks) {
    const auto sus = network_users(spec, net);
    const int n = static_cast<int>(sus.size());
    for (const auto& rule : spec.rules) {
      const int k = rule_k(rule, n);
      for (double pfa : spec.pfa_grid) {
        const double gi = network_threshold_for_pfa(sus, spec.detector, pfa, k, true);
        const double gn = network_threshold_for_pfa(sus, spec.detector, pfa, k, false);
        csv.row({net.name, rule, std::to_string(k), num(pfa), num(gi),
                 num(network_fused(sus, spec.detector, gi, k, true, FusionTarget::Detection)), num(gn),
                 num(network_fused(sus, spec.detector, gn, k, false, FusionTarget::Detection))});
        ++res.points;
      }
    }
  }
  res.csv = csv.str();
  return res;
}

RunResult run_validate(const ExperimentSpec& spec) {
  const auto models = curve_models(spec);
  const bool edge = is_edge_channel(spec.channel, spec.spectrum.K);
  const McConfig mc = spec.mc.value_or(McConfig{});
  CsvWriter csv;
  metadata(csv, spec, named(models));
  csv.comment("pass rule: |analytic - mc| <= 3 max(stderr, sqrt(analytic (1 - analytic) / trials))");
  csv.row({"curve", "quantity", "threshold", "analytic", "mc", "stderr", "pass"});
  RunResult res;
  for (const auto& m : models) {
    const struct {
      CurveKind kind;
      const char* name;
    } quantities[] = {{CurveKind::PfaIdeal, "pfa_ideal"},
                      {CurveKind::PdIdeal, "pd_ideal"},
                      {CurveKind::PfaNonideal, "pfa_nonideal"},
                      {CurveKind::PdNonideal, "pd_nonideal"}};
    for (const auto& q : quantities) {
      DetectorConfig det = spec.detector;
      const auto est = estimate(q.kind, det, m.spec->profile, m.fec, edge, mc, spec.thresholds);
      for (std::size_t i = 0; i < spec.thresholds.size(); ++i) {
        det.threshold = spec.thresholds[i];
        double a = 0.0;
        switch (q.kind) {
          case CurveKind::PfaIdeal:
            a = ideal_pfa(det.threshold, det.n_s, m.spec->profile.sigma_w2);
            break;
          case CurveKind::PdIdeal:
            a = ideal_pd(det.threshold, m.spec->profile, det.n_s);
            break;
          case CurveKind::PfaNonideal:
            a = nonideal_pfa(det, m.fec, edge);
            break;
          case CurveKind::PdNonideal:
            a = nonideal_pd(det, m.fec, edge);
            break;
        }
        const double scale =
            std::max(est[i].std_error, std::sqrt(a * (1.0 - a) / static_cast<double>(est[i].trials)));
        const bool pass = std::fabs(a - est[i].p_hat) <= 3.0 * scale;
        csv.row({m.spec->name, q.name, num(det.threshold), num(a), num(est[i].p_hat), num(est[i].std_error),
                 pass ? "1" : "0"});
        ++res.points;
        if (!pass) ++res.failures;
      }
    }
  }
  csv.comment("summary points=" + std::to_string(res.points) + " failures=" + std::to_string(res.failures));
  res.exit_code = res.failures * 20 > res.points ? 1 : 0;
  res.csv = csv.str();
  return res;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[512];
  // Round to 12 significant digits first so the decimal exponent is exact.
  std::snprintf(buf, sizeof buf, "%.11e", v);
  const double r = std::strtod(buf, nullptr);
  const int exp10 = static_cast<int>(std::floor(std::log10(std::fabs(r))));
  const int decimals = std::max(0, 11 - exp10);
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

std::vector<SuModel> network_users(const ExperimentSpec& spec, const NetworkSpec& net) {
  const bool edge = is_edge_channel(spec.channel, spec.spectrum.K);
  const double report = std::isinf(net.report_snr_db) && net.report_snr_db > 0
                            ? std::numeric_limits<double>::infinity()
                            : std::pow(10.0, net.report_snr_db / 10.0);
  std::map<std::string, FrontEndCoefficients> cache;
  std::vector<SuModel> out;
  for (const auto& name : net.su_profiles) {
    const ProfileSpec& p = find_profile(spec, name);
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, front_end_coefficients(spec.spectrum, p.profile, spec.channel)).first;
    out.push_back({p.profile, it->second, edge, report});
  }
  return out;
}

double network_fused(const std::vector<SuModel>& sus, const DetectorConfig& det, double gamma, int k_su, bool ideal,
                     FusionTarget which) {
  FusionConfig cfg;
  cfg.k_su = k_su;
  DetectorConfig d = det;
  d.threshold = gamma;
  // Users sharing a front end share their local probabilities.
  std::vector<std::pair<const SuModel*, SuOperatingPoint>> seen;
  for (const auto& su : sus) {
    SuOperatingPoint op;
    bool reused = false;
    for (const auto& [m, o] : seen)
      if (m->fec.a1 == su.fec.a1 && m->fec.a2 == su.fec.a2 && m->fec.a3 == su.fec.a3 && m->fec.a4 == su.fec.a4 &&
          m->fec.a5 == su.fec.a5 && m->fec.sigma_h2 == su.fec.sigma_h2 && m->edge == su.edge &&
          m->profile.sigma_s2 == su.profile.sigma_s2 && m->profile.sigma_w2 == su.profile.sigma_w2 &&
          m->profile.sigma_h2 == su.profile.sigma_h2) {
        op = o;
        reused = true;
        break;
      }
    if (!reused) {
      if (ideal) {
        op.p_fa = ideal_pfa(gamma, d.n_s, su.profile.sigma_w2);
        op.p_d = ideal_pd(gamma, su.profile, d.n_s);
      } else {
        op.p_fa = nonideal_pfa(d, su.fec, su.edge);
        op.p_d = nonideal_pd(d, su.fec, su.edge);
      }
      seen.emplace_back(&su, op);
    }
    op.report_snr = su.report_snr;
    cfg.sus.push_back(op);
  }
  return fused_with_errors(cfg, which);
}

double network_threshold_for_pfa(const std::vector<SuModel>& sus, const DetectorConfig& det, double pfa, int k_su,
                                 bool ideal) {
  if (sus.empty()) throw DomainError("network has no users");
  if (!(pfa > 0.0 && pfa < 1.0)) throw DomainError("target false-alarm probability must lie in (0, 1)");
  // With reporting errors the fused value is confined to a sub-interval of [0, 1].
  auto limit = [&](double local) {
    FusionConfig cfg;
    cfg.k_su = k_su;
    for (const auto& su : sus) cfg.sus.push_back({local, local, su.report_snr});
    return fused_with_errors(cfg, FusionTarget::FalseAlarm);
  };
  const double lo_limit = limit(0.0);
  const double hi_limit = limit(1.0);
  if (!(pfa > lo_limit && pfa < hi_limit))
    throw DomainError("fused false-alarm target " + format_number(pfa) + " is outside the reachable range [" +
                      format_number(lo_limit) + ", " + format_number(hi_limit) + "]");
  auto f = [&](double log_gamma) {
    return network_fused(sus, det, std::exp(log_gamma), k_su, ideal, FusionTarget::FalseAlarm) - pfa;
  };
  return solve_decreasing(f, sus.front().profile.sigma_w2);
}

RunResult run_experiment(const ExperimentSpec& spec) {
  if (spec.profiles.empty()) throw ConfigError("experiment needs at least one profile");
  switch (spec.kind) {
    case ExperimentKind::FaVsThreshold:
      return run_fa_vs_threshold(spec);
    case ExperimentKind::Roc:
      return run_roc(spec);
    case ExperimentKind::CoopRoc:
      return run_coop_roc(spec);
    case ExperimentKind::Validate:
      return run_validate(spec);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace senserf
