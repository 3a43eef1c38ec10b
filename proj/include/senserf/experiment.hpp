#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "senserf/cooperative.hpp"
#include "senserf/detection.hpp"
#include "senserf/impairments.hpp"
#include "senserf/montecarlo.hpp"

namespace senserf {

enum class ExperimentKind { FaVsThreshold, Roc, CoopRoc, Validate };

// One named front end, with the user-facing (dB) knobs kept for reporting.
struct ProfileSpec {
  std::string name;
  ImpairmentProfile profile;
  std::string pa_label = "ideal";
  double ibo_db = std::numeric_limits<double>::infinity();
  double irr_db = std::numeric_limits<double>::infinity();
  double phase_deg = 0.0;
  double snr_db = 0.0;
};

// A cooperative network: the profile name of every secondary user.
struct NetworkSpec {
  std::string name;
  std::vector<std::string> su_profiles;
  double report_snr_db = std::numeric_limits<double>::infinity();
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::FaVsThreshold;
  SpectrumConfig spectrum;
  int channel = 2;
  DetectorConfig detector;
  std::vector<double> thresholds;
  std::vector<double> pfa_grid;
  std::vector<ProfileSpec> profiles;
  std::vector<NetworkSpec> networks;
  // Fusion rules as written: "or", "and", "majority" or an integer k.
  std::vector<std::string> rules;
  std::optional<McConfig> mc;
  std::string output;
};

// Parses the INI-style experiment description. Throws ConfigError with the
// offending line or section/key.
ExperimentSpec parse_experiment(std::istream& in);
ExperimentSpec load_experiment(const std::string& path);

std::string kind_name(ExperimentKind kind);

// Resolves a fusion rule name to k for a network of n users.
int rule_k(const std::string& rule, int n_su);

// A secondary user as seen by the fusion center.
struct SuModel {
  ImpairmentProfile profile;
  FrontEndCoefficients fec;
  bool edge = false;
  double report_snr = std::numeric_limits<double>::infinity();
};

// Fused probability when every user applies the common threshold gamma. With
// ideal = true every user runs an impairment-free front end of the same powers.
double network_fused(const std::vector<SuModel>& sus, const DetectorConfig& det, double gamma, int k_su, bool ideal,
                     FusionTarget which);
// Common threshold giving the requested fused false-alarm probability.
double network_threshold_for_pfa(const std::vector<SuModel>& sus, const DetectorConfig& det, double pfa, int k_su,
                                 bool ideal);

std::vector<SuModel> network_users(const ExperimentSpec& spec, const NetworkSpec& net);

struct RunResult {
  std::string csv;
  std::size_t points = 0;
  std::size_t failures = 0;
  // 0, or 1 when validation failed on more than 5% of points.
  int exit_code = 0;
};

RunResult run_experiment(const ExperimentSpec& spec);

// Formats v with 12 significant digits in plain decimal notation.
std::string format_number(double v);

}  // namespace senserf
