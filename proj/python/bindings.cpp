#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "senserf/cooperative.hpp"
#include "senserf/detection.hpp"
#include "senserf/errors.hpp"
#include "senserf/experiment.hpp"
#include "senserf/impairments.hpp"
#include "senserf/special_functions.hpp"

namespace py = pybind11;
using namespace senserf;

namespace {

ImpairmentProfile make_profile(double ibo_db, double irr, double phase_deg, double beta_hz, double snr_db,
                               double sigma_w2, double sigma_h2) {
  ImpairmentProfile p;
  if (std::isfinite(ibo_db)) p.pa = PaClipping{std::pow(10.0, ibo_db / 10.0)};
  const double theta = phase_deg * M_PI / 180.0;
  p.iqi = {epsilon_from_irr(irr, theta), theta};
  p.phn.beta3db = beta_hz;
  p.sigma_w2 = sigma_w2;
  p.sigma_h2 = sigma_h2;
  p.sigma_s2 = std::pow(10.0, snr_db / 10.0) * sigma_w2 / sigma_h2;
  return p;
}

}  // namespace

PYBIND11_MODULE(_senserf, m) {
  m.doc() = "Energy-detection sensing under RF front-end impairments";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<ApproxResult>(m, "ApproxResult")
      .def_readonly("value", &ApproxResult::value)
      .def_readonly("error_bound", &ApproxResult::error_bound)
      .def_readonly("terms_used", &ApproxResult::terms_used);
  m.def("gaussian_q", &gaussian_q, py::arg("x"));
  m.def("upper_inc_gamma", &upper_inc_gamma, py::arg("a"), py::arg("x"));
  m.def("ext_inc_gamma_series", &ext_inc_gamma_series, py::arg("a"), py::arg("x"), py::arg("b"),
        py::arg("tol") = 1e-12);
  m.def("ext_inc_gamma_quadrature", &ext_inc_gamma_quadrature, py::arg("a"), py::arg("x"), py::arg("b"),
        py::arg("abs_tol") = 1e-12);

  py::class_<ImpairmentProfile>(m, "ImpairmentProfile")
      .def_readwrite("sigma_s2", &ImpairmentProfile::sigma_s2)
      .def_readwrite("sigma_w2", &ImpairmentProfile::sigma_w2)
      .def_readwrite("sigma_h2", &ImpairmentProfile::sigma_h2);
  m.def("make_profile", &make_profile, "Clipping amplifier profile from dB-scale parameters (inf IBO means ideal)",
        py::arg("ibo_db") = std::numeric_limits<double>::infinity(),
        py::arg("irr_db") = std::numeric_limits<double>::infinity(), py::arg("phase_deg") = 0.0,
        py::arg("beta_hz") = 0.0, py::arg("snr_db") = 0.0, py::arg("sigma_w2") = 1.0, py::arg("sigma_h2") = 1.0);

  py::class_<FrontEndCoefficients>(m, "FrontEndCoefficients")
      .def_readonly("a1", &FrontEndCoefficients::a1)
      .def_readonly("a2", &FrontEndCoefficients::a2)
      .def_readonly("a3", &FrontEndCoefficients::a3)
      .def_readonly("a4", &FrontEndCoefficients::a4)
      .def_readonly("a5", &FrontEndCoefficients::a5);
  m.def(
      "front_end_coefficients",
      [](const ImpairmentProfile& p, int k) { return front_end_coefficients(SpectrumConfig{}, p, k); },
      py::arg("profile"), py::arg("k") = 2);

  m.def("ideal_pfa", &ideal_pfa, py::arg("gamma"), py::arg("n_s") = 5, py::arg("sigma_w2") = 1.0);
  m.def("ideal_pd", &ideal_pd, py::arg("gamma"), py::arg("profile"), py::arg("n_s") = 5);
  m.def(
      "nonideal_pfa",
      [](double gamma, const FrontEndCoefficients& f, int n_s, double q, bool edge) {
        return nonideal_pfa(DetectorConfig{n_s, gamma, q}, f, edge);
      },
      py::arg("gamma"), py::arg("fec"), py::arg("n_s") = 5, py::arg("q") = 0.5, py::arg("edge") = false);
  m.def(
      "nonideal_pd",
      [](double gamma, const FrontEndCoefficients& f, int n_s, double q, bool edge) {
        return nonideal_pd(DetectorConfig{n_s, gamma, q}, f, edge);
      },
      py::arg("gamma"), py::arg("fec"), py::arg("n_s") = 5, py::arg("q") = 0.5, py::arg("edge") = false);

  m.def("fused_prob_homogeneous", &fused_prob_homogeneous, py::arg("p"), py::arg("n_su"), py::arg("k_su"));
  m.def("fused_prob_heterogeneous", &fused_prob_heterogeneous, py::arg("probs"), py::arg("k_su"));
  m.def("bpsk_rayleigh_ber", &bpsk_rayleigh_ber, py::arg("gamma_r"));

  m.def(
      "run_config",
      [](const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::uint64_t> trials) {
        ExperimentSpec spec = load_experiment(path);
        if (seed || trials) {
          if (!spec.mc) spec.mc = McConfig{};
          if (seed) spec.mc->seed = *seed;
          if (trials) spec.mc->trials = *trials;
        }
        return run_experiment(spec).csv;
      },
      "Run an experiment config and return its CSV text", py::arg("path"), py::arg("seed") = py::none(),
      py::arg("trials") = py::none());
}
