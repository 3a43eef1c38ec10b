#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "senserf/errors.hpp"
#include "senserf/experiment.hpp"

namespace senserf {

namespace {

namespace pt = boost::property_tree;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Source line of every (section, key), for diagnostics.
using LineMap = std::map<std::pair<std::string, std::string>, int>;

LineMap scan_lines(const std::string& text) {
  LineMap out;
  std::istringstream in(text);
  std::string line, section;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      out[{section, ""}] = n;
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos) out[{section, trim(t.substr(0, eq))}] = n;
  }
  return out;
}

class Section {
 public:
  Section(std::string name, const pt::ptree& tree, const LineMap& lines)
      : name_(std::move(name)), tree_(tree), lines_(lines) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::string where = "[" + name_ + "]";
    if (!key.empty()) where += " " + key;
    const auto it = lines_.find({name_, key});
    if (it != lines_.end()) where = "line " + std::to_string(it->second) + ": " + where;
    throw ConfigError(where + ": " + msg);
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : tree_) {
      if (!v.empty()) fail(k, "nested keys are not supported");
      if (!ok.count(k)) fail(k, "unknown key");
    }
  }

  std::optional<std::string> raw(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string text(const std::string& key, const std::string& def) const { return raw(key).value_or(def); }

  double number(const std::string& key, double def) const {
    const auto v = raw(key);
    return v ? parse_double(key, *v) : def;
  }

  int integer(const std::string& key, int def) const {
    const auto v = raw(key);
    if (!v) return def;
    int out = 0;
    const auto r = std::from_chars(v->data(), v->data() + v->size(), out);
    if (r.ec != std::errc() || r.ptr != v->data() + v->size()) fail(key, "expected an integer, got '" + *v + "'");
    return out;
  }

  std::uint64_t count(const std::string& key, std::uint64_t def) const {
    const auto v = raw(key);
    if (!v) return def;
    std::uint64_t out = 0;
    const auto r = std::from_chars(v->data(), v->data() + v->size(), out);
    if (r.ec != std::errc() || r.ptr != v->data() + v->size())
      fail(key, "expected a non-negative integer, got '" + *v + "'");
    return out;
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    const auto v = raw(key);
    if (!v) return out;
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list entry");
      out.push_back(item);
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) out.push_back(parse_double(key, s));
    return out;
  }

  double parse_double(const std::string& key, const std::string& s) const {
    const std::string l = lower(s);
    if (l == "inf" || l == "+inf") return kInf;
    if (l == "-inf") return -kInf;
    double out = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || std::isnan(out))
      fail(key, "expected a number, got '" + s + "'");
    return out;
  }

  bool has(const std::string& key) const { return raw(key).has_value(); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const pt::ptree& tree_;
  const LineMap& lines_;
};

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return g;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return g;
}

void check_increasing(const Section& s, const std::string& key, const std::vector<double>& g) {
  if (g.empty()) s.fail(key, "grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) s.fail(key, "grid must be strictly increasing");
}

ProfileSpec parse_profile(const Section& s, const std::string& name) {
  s.allow({"pa", "ibo_db", "poly_coeffs", "poly_coeffs_imag", "pa_formula", "irr_db", "epsilon", "phase_deg",
           "epsilon_branch", "beta_hz", "gamma0_mag2", "snr_db", "sigma_h2", "sigma_w2"});
  ProfileSpec p;
  p.name = name;
  ImpairmentProfile& prof = p.profile;
  prof.sigma_h2 = s.number("sigma_h2", 1.0);
  prof.sigma_w2 = s.number("sigma_w2", 1.0);
  if (!(prof.sigma_h2 > 0.0)) s.fail("sigma_h2", "must be positive");
  if (!(prof.sigma_w2 > 0.0)) s.fail("sigma_w2", "must be positive");
  p.snr_db = s.number("snr_db", 0.0);
  if (!std::isfinite(p.snr_db)) s.fail("snr_db", "must be finite");
  prof.sigma_s2 = std::pow(10.0, p.snr_db / 10.0) * prof.sigma_w2 / prof.sigma_h2;

  p.pa_label = lower(s.text("pa", "ideal"));
  if (p.pa_label == "ideal") {
    prof.pa = PaIdeal{};
  } else if (p.pa_label == "clipping") {
    if (!s.has("ibo_db")) s.fail("ibo_db", "clipping amplifier needs ibo_db");
    p.ibo_db = s.number("ibo_db", 0.0);
    if (!std::isfinite(p.ibo_db)) s.fail("ibo_db", "must be finite");
    prof.pa = PaClipping{std::pow(10.0, p.ibo_db / 10.0)};
  } else if (p.pa_label == "polynomial") {
    const auto re = s.numbers("poly_coeffs");
    auto im = s.numbers("poly_coeffs_imag");
    if (re.empty()) s.fail("poly_coeffs", "polynomial amplifier needs poly_coeffs");
    if (im.empty()) im.assign(re.size(), 0.0);
    if (im.size() != re.size()) s.fail("poly_coeffs_imag", "must have as many entries as poly_coeffs");
    PaPolynomial poly;
    for (std::size_t i = 0; i < re.size(); ++i) poly.coeffs.emplace_back(re[i], im[i]);
    prof.pa = poly;
  } else {
    s.fail("pa", "expected ideal, clipping or polynomial");
  }
  const std::string formula = lower(s.text("pa_formula", "calibrated"));
  if (formula == "calibrated") prof.pa_formula = PaFormula::Calibrated;
  else if (formula == "as_printed") prof.pa_formula = PaFormula::AsPrinted;
  else if (formula == "alternate") prof.pa_formula = PaFormula::AlternateReading;
  else s.fail("pa_formula", "expected calibrated, as_printed or alternate");

  p.phase_deg = s.number("phase_deg", 0.0);
  prof.iqi.theta = p.phase_deg * std::numbers::pi / 180.0;
  const std::string branch_name = lower(s.text("epsilon_branch", "below_unity"));
  EpsilonBranch branch = EpsilonBranch::BelowUnity;
  if (branch_name == "above_unity") branch = EpsilonBranch::AboveUnity;
  else if (branch_name != "below_unity") s.fail("epsilon_branch", "expected below_unity or above_unity");
  if (s.has("epsilon") && s.has("irr_db")) s.fail("epsilon", "give either epsilon or irr_db, not both");
  if (s.has("epsilon")) {
    prof.iqi.epsilon = s.number("epsilon", 1.0);
    if (!(prof.iqi.epsilon > 0.0)) s.fail("epsilon", "must be positive");
    p.irr_db = irr_db(prof.iqi);
  } else {
    p.irr_db = s.number("irr_db", kInf);
    prof.iqi.epsilon = std::isinf(p.irr_db) && p.irr_db > 0.0 ? 1.0 : epsilon_from_irr(p.irr_db, prof.iqi.theta, branch);
    if (std::isinf(p.irr_db)) p.irr_db = irr_db(prof.iqi);
  }
  prof.phn.beta3db = s.number("beta_hz", 0.0);
  prof.phn.gamma0_mag2 = s.number("gamma0_mag2", 1.0);
  return p;
}

ExperimentKind parse_kind(const Section& s) {
  const std::string k = lower(s.text("kind", ""));
  if (k == "fa_vs_threshold") return ExperimentKind::FaVsThreshold;
  if (k == "roc") return ExperimentKind::Roc;
  if (k == "coop_roc") return ExperimentKind::CoopRoc;
  if (k == "validate") return ExperimentKind::Validate;
  s.fail("kind", "expected fa_vs_threshold, roc, coop_roc or validate");
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::FaVsThreshold:
      return "fa_vs_threshold";
    case ExperimentKind::Roc:
      return "roc";
    case ExperimentKind::CoopRoc:
      return "coop_roc";
    case ExperimentKind::Validate:
      return "validate";
  }
  return "";
}

int rule_k(const std::string& rule, int n_su) {
  const std::string r = lower(rule);
  if (r == "or") return 1;
  if (r == "and") return n_su;
  if (r == "majority") return n_su / 2 + 1;
  int k = 0;
  const auto res = std::from_chars(r.data(), r.data() + r.size(), k);
  if (res.ec != std::errc() || res.ptr != r.data() + r.size())
    throw ConfigError("unknown fusion rule '" + rule + "' (expected or, and, majority or an integer)");
  if (k < 1 || k > n_su) throw ConfigError("fusion rule " + rule + " needs 1 <= k <= " + std::to_string(n_su));
  return k;
}

ExperimentSpec parse_experiment(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  pt::ptree tree;
  try {
    std::istringstream ss(text);
    pt::ini_parser::read_ini(ss, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  const LineMap lines = scan_lines(text);
  static const pt::ptree empty;
  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? empty : it->second, lines);
  };
  for (const auto& [name, sub] : tree) {
    if (sub.empty() && !sub.data().empty())
      throw ConfigError("key '" + name + "' must appear inside a section");
    static const std::set<std::string> fixed{"experiment", "spectrum", "detector", "profile", "fusion", "mc"};
    if (!fixed.count(name) && name.rfind("profile.", 0) != 0 && name.rfind("network.", 0) != 0)
      Section(name, sub, lines).fail("", "unknown section");
  }

  ExperimentSpec spec;
  const Section ex = section("experiment");
  ex.allow({"kind", "output"});
  spec.kind = parse_kind(ex);
  spec.output = ex.text("output", "");

  const Section sp = section("spectrum");
  sp.allow({"K", "W_hz", "W_sb_hz", "W_gb_hz", "channel"});
  spec.spectrum.K = sp.integer("K", 8);
  spec.spectrum.W = sp.number("W_hz", 9e6);
  spec.spectrum.W_sb = sp.number("W_sb_hz", 1e6);
  spec.spectrum.W_gb = sp.number("W_gb_hz", 125e3);
  spec.channel = sp.integer("channel", 2);
  try {
    validate(spec.spectrum);
    validate_sensed_channel(spec.channel, spec.spectrum.K);
  } catch (const DomainError& e) {
    sp.fail("", e.what());
  }

  const Section det = section("detector");
  det.allow({"n_s", "q", "thresholds", "threshold_min", "threshold_max", "threshold_points", "pfa_min", "pfa_max",
             "pfa_points", "pfa_spacing"});
  spec.detector.n_s = det.integer("n_s", 5);
  if (spec.detector.n_s < 1) det.fail("n_s", "must be >= 1");
  spec.detector.q = det.number("q", 0.5);
  if (!(spec.detector.q >= 0.0 && spec.detector.q <= 1.0)) det.fail("q", "must lie in [0, 1]");
  if (det.has("thresholds")) {
    spec.thresholds = det.numbers("thresholds");
  } else {
    const int n = det.integer("threshold_points", 50);
    if (n < 1) det.fail("threshold_points", "must be >= 1");
    spec.thresholds = linear_grid(det.number("threshold_min", 0.1), det.number("threshold_max", 5.0), n);
  }
  check_increasing(det, "thresholds", spec.thresholds);
  if (!(spec.thresholds.front() > 0.0)) det.fail("thresholds", "thresholds must be positive");
  {
    const double lo = det.number("pfa_min", 0.01);
    const double hi = det.number("pfa_max", 0.99);
    const int n = det.integer("pfa_points", 50);
    if (!(lo > 0.0 && hi < 1.0)) det.fail("pfa_min", "false-alarm grid must lie in (0, 1)");
    if (n < 1) det.fail("pfa_points", "must be >= 1");
    const std::string spacing = lower(det.text("pfa_spacing", "linear"));
    if (spacing == "linear") spec.pfa_grid = linear_grid(lo, hi, n);
    else if (spacing == "log") spec.pfa_grid = log_grid(lo, hi, n);
    else det.fail("pfa_spacing", "expected linear or log");
    check_increasing(det, "pfa_min", spec.pfa_grid);
  }

  for (const auto& [name, sub] : tree) {
    if (name == "profile") spec.profiles.push_back(parse_profile(Section(name, sub, lines), "default"));
    else if (name.rfind("profile.", 0) == 0) {
      const std::string pname = name.substr(8);
      if (pname.empty()) Section(name, sub, lines).fail("", "profile name is empty");
      spec.profiles.push_back(parse_profile(Section(name, sub, lines), pname));
    }
  }
  if (spec.profiles.empty()) spec.profiles.push_back(parse_profile(section("profile"), "default"));
  {
    std::set<std::string> seen;
    for (const auto& p : spec.profiles)
      if (!seen.insert(p.name).second) throw ConfigError("duplicate profile '" + p.name + "'");
  }

  const Section fu = section("fusion");
  fu.allow({"n_su", "rules", "report_snr_db", "sus"});
  spec.rules = fu.list("rules");
  if (spec.rules.empty()) spec.rules = {"or", "and"};
  const double report_db = fu.number("report_snr_db", kInf);
  for (const auto& [name, sub] : tree) {
    if (name.rfind("network.", 0) != 0) continue;
    const Section ns(name, sub, lines);
    ns.allow({"sus", "report_snr_db"});
    NetworkSpec net;
    net.name = name.substr(8);
    net.su_profiles = ns.list("sus");
    if (net.su_profiles.empty()) ns.fail("sus", "network needs at least one user");
    net.report_snr_db = ns.number("report_snr_db", report_db);
    spec.networks.push_back(net);
  }
  if (spec.networks.empty()) {
    NetworkSpec net;
    net.name = "network";
    net.su_profiles = fu.list("sus");
    if (net.su_profiles.empty()) {
      const int n = fu.integer("n_su", 5);
      if (n < 1) fu.fail("n_su", "must be >= 1");
      net.su_profiles.assign(static_cast<std::size_t>(n), spec.profiles.front().name);
    }
    net.report_snr_db = report_db;
    spec.networks.push_back(net);
  }
  for (const auto& net : spec.networks) {
    if (static_cast<int>(net.su_profiles.size()) > kMaxEnumeratedSus)
      throw ConfigError("network '" + net.name + "' has more than " + std::to_string(kMaxEnumeratedSus) + " users");
    for (const auto& su : net.su_profiles) {
      bool found = false;
      for (const auto& p : spec.profiles) found = found || p.name == su;
      if (!found) throw ConfigError("network '" + net.name + "' refers to unknown profile '" + su + "'");
    }
    for (const auto& r : spec.rules) rule_k(r, static_cast<int>(net.su_profiles.size()));
  }

  if (tree.find("mc") != tree.not_found()) {
    const Section mc = section("mc");
    mc.allow({"trials", "seed", "batch", "workers"});
    McConfig m;
    m.trials = mc.count("trials", m.trials);
    m.seed = mc.count("seed", m.seed);
    m.batch = mc.count("batch", m.batch);
    m.workers = static_cast<unsigned>(mc.count("workers", 0));
    if (m.trials == 0) mc.fail("trials", "must be positive");
    if (m.batch == 0) mc.fail("batch", "must be positive");
    spec.mc = m;
  }
  if (spec.kind == ExperimentKind::Validate && !spec.mc) spec.mc = McConfig{};
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_experiment(in);
}

}  // namespace senserf
