#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "senserf/errors.hpp"
#include "senserf/experiment.hpp"

using namespace senserf;
namespace fs = std::filesystem;

namespace {

ExperimentSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment(in);
}

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / ("senserf_cli_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SENSE_RF_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(2.0 / 3.0 * 1e-5) == "0.00000666666666667");
  CHECK(format_number(123456789.123456) == "123456789.123");
  CHECK(format_number(-2.5) == "-2.5");
  CHECK(format_number(9e6) == "9000000");
}

TEST_CASE("scenario defaults are accepted without overrides") {
  const auto s = parse("[experiment]\nkind = roc\n");
  CHECK(s.spectrum.K == 8);
  CHECK(s.channel == 2);
  CHECK(s.spectrum.W == 9e6);
  CHECK(s.spectrum.W_sb == 1e6);
  CHECK(s.spectrum.W_gb == 125e3);
  CHECK(s.detector.q == 0.5);
  CHECK(s.detector.n_s == 5);
  REQUIRE(s.profiles.size() == 1);
  CHECK(s.profiles[0].profile.sigma_h2 == 1.0);
  CHECK(s.profiles[0].profile.sigma_w2 == 1.0);
}

TEST_CASE("profile parsing converts dB once") {
  const auto s = parse(
      "[experiment]\nkind = fa_vs_threshold\n[profile.a]\npa = clipping\nibo_db = 3\nirr_db = 25\nphase_deg = 3\n"
      "beta_hz = 100\nsnr_db = 5\n");
  const auto& p = s.profiles.at(0);
  CHECK(p.name == "a");
  CHECK(std::get<PaClipping>(p.profile.pa).ibo == doctest::Approx(std::pow(10.0, 0.3)).epsilon(1e-15));
  CHECK(p.profile.sigma_s2 == doctest::Approx(std::pow(10.0, 0.5)).epsilon(1e-15));
  CHECK(irr_db(p.profile.iqi) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(p.profile.iqi.epsilon < 1.0);
}

TEST_CASE("config errors carry line and field") {
  auto message = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("[experiment]\nkind = bogus\n").find("line 2") != std::string::npos);
  CHECK(message("[experiment]\nkind = roc\n[detector]\nn_s = five\n").find("line 4: [detector] n_s") !=
        std::string::npos);
  CHECK(message("[experiment]\nkind = roc\n[detector]\nthresholds = 1, 0.5\n").find("strictly increasing") !=
        std::string::npos);
  CHECK(message("[experiment]\nkind = roc\n[profile]\ncolour = red\n").find("unknown key") != std::string::npos);
  CHECK(message("[experiment]\nkind = roc\n[spectrum]\nchannel = 1\n").find("[spectrum]") != std::string::npos);
  CHECK(message("[experiment\nkind = roc\n").find("line 1") != std::string::npos);
  CHECK_THROWS_AS(parse("[experiment]\nkind = roc\n[profile]\nirr_db = 60\nphase_deg = 3\n"), InfeasibleIrrError);
}

TEST_CASE("fusion rules") {
  CHECK(rule_k("or", 5) == 1);
  CHECK(rule_k("AND", 5) == 5);
  CHECK(rule_k("majority", 5) == 3);
  CHECK(rule_k("2", 5) == 2);
  CHECK_THROWS_AS(rule_k("6", 5), ConfigError);
  CHECK_THROWS_AS(rule_k("xor", 5), ConfigError);
}

TEST_CASE("CLI exit codes and output") {
  const fs::path dir = temp_dir();
  const std::string bad = write(dir / "bad.ini", "[experiment]\nkind = nope\n");
  CHECK(run("run " + bad) == 2);
  CHECK(run("run " + (dir / "missing.ini").string()) == 2);
  CHECK(run("frobnicate") == 2);
  const std::string infeasible =
      write(dir / "infeasible.ini", "[experiment]\nkind = roc\n[profile]\nirr_db = 60\nphase_deg = 3\n");
  CHECK(run("run " + infeasible) == 2);

  const std::string fa = write(dir / "fa.ini",
                               "[experiment]\nkind = fa_vs_threshold\n[detector]\nthreshold_points = 5\n"
                               "[profile.p]\npa = clipping\nibo_db = 3\nirr_db = 25\nphase_deg = 3\nbeta_hz = 100\n"
                               "[mc]\ntrials = 20000\nseed = 3\n");
  const fs::path out1 = dir / "a.csv", out2 = dir / "b.csv";
  REQUIRE(run("run " + fa + " --out " + out1.string() + " --workers 1") == 0);
  REQUIRE(run("run " + fa + " --out " + out2.string() + " --workers 8") == 0);
  const std::string csv = slurp(out1);
  CHECK(csv == slurp(out2));
  std::istringstream lines(csv);
  std::string line;
  int rows = 0;
  bool header = false;
  while (std::getline(lines, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!header) {
      CHECK(line == "curve,threshold,pfa_ideal,pfa_nonideal,pfa_mc,mc_stderr");
      header = true;
      continue;
    }
    ++rows;
  }
  CHECK(rows == 5);

  REQUIRE(run("run " + fa + " --seed 4 --out " + out2.string()) == 0);
  CHECK(csv != slurp(out2));

  const std::string ideal = write(dir / "ideal.ini",
                                  "[experiment]\nkind = validate\n[detector]\nthreshold_points = 10\n"
                                  "[mc]\ntrials = 50000\nseed = 1\n");
  CHECK(run("validate " + ideal + " --out " + (dir / "v.csv").string()) == 0);
  CHECK(slurp(dir / "v.csv").find("pass") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("shipped fixtures parse") {
  for (const auto& entry : fs::directory_iterator(SENSERF_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_experiment(entry.path().string()));
  }
}
