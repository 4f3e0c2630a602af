#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rigidlab/conditional.hpp"
#include "rigidlab/diagnostics.hpp"
#include "rigidlab/ensembles.hpp"
#include "rigidlab/errors.hpp"
#include "rigidlab/harness.hpp"
#include "rigidlab/symfun.hpp"

namespace py = pybind11;
using namespace rigidlab;

namespace {

std::vector<cplx> sigma_values(const std::vector<cplx>& points) {
  const auto prof = elem_sym(points);
  std::vector<cplx> out;
  for (int k = 0; k <= prof.source_len; ++k) out.push_back(prof.at(k));
  return out;
}

std::vector<double> sigma_log_abs(const std::vector<cplx>& points) {
  const auto prof = elem_sym(points);
  std::vector<double> out;
  for (int k = 0; k <= prof.source_len; ++k) out.push_back(static_cast<double>(prof.log_at(k).log_mag));
  return out;
}

py::dict gaf_dict(const GafInstance& g) {
  py::dict d;
  d["n"] = g.n;
  d["xi"] = g.xi;
  d["roots"] = g.roots;
  d["residual"] = g.residual;
  d["flagged"] = g.flagged;
  d["diagnostic"] = g.diagnostic;
  return d;
}

ExperimentConfig config_from_dict(const py::dict& overrides) {
  // round-trip through JSON so Python and the CLI share one schema
  const auto json_mod = py::module_::import("json");
  const std::string text = py::str(json_mod.attr("dumps")(overrides));
  ExperimentConfig cfg = config_from_json(nlohmann::json::parse(text));
  validate(cfg);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zeros of Gaussian analytic functions: conditional laws and rigidity experiments";
  m.attr("__version__") = kVersion;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConstraintError>(m, "ConstraintError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<MixingError>(m, "MixingError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("tag"), py::arg("a"), py::arg("b") = 0);

  m.def("elem_sym", &sigma_values, py::arg("points"), "sigma_0..sigma_N as complex doubles");
  m.def("elem_sym_log_abs", &sigma_log_abs, py::arg("points"), "log|sigma_k|, k = 0..N");
  m.def("power_sums", [](const std::vector<cplx>& p, int l_max) { return power_sums(p, l_max).s; },
        py::arg("points"), py::arg("l_max"));
  m.def("reciprocal_series_g", [](const std::vector<cplx>& z, int r) { return reciprocal_series_g(z, r); },
        py::arg("zeta"), py::arg("r_max"));
  m.def("expansion_identity_residual",
        [](const std::vector<cplx>& z, const std::vector<cplx>& w) { return expansion_identity_residual(z, w); },
        py::arg("zeta"), py::arg("omega"));

  m.def("sample_gaf", [](int n, std::uint64_t seed) {
    Rng rng(seed);
    return gaf_dict(sample_gaf(n, rng));
  }, py::arg("n"), py::arg("seed"));
  m.def("gaf_from_coefficients", [](std::vector<cplx> xi) { return gaf_dict(gaf_from_coefficients(std::move(xi))); },
        py::arg("xi"));
  m.def("sample_ginibre", [](int n, std::uint64_t seed) {
    Rng rng(seed);
    const auto g = sample_ginibre(n, rng);
    py::dict d;
    d["n"] = g.n;
    d["eigenvalues"] = g.eigenvalues;
    d["trace"] = g.trace;
    d["flagged"] = g.flagged;
    return d;
  }, py::arg("n"), py::arg("seed"));
  m.def("split", [](const std::vector<cplx>& points, double radius, std::uint64_t seed) {
    Rng rng(seed);
    const auto s = split(points, DiskDomain(radius), rng);
    py::dict d;
    d["zeta"] = s.zeta;
    d["omega"] = s.omega;
    d["m"] = s.m;
    d["s"] = s.s;
    return d;
  }, py::arg("points"), py::arg("radius") = 1.0, py::arg("seed") = 0);

  m.def("gaf_cond_logdensity",
        [](const std::vector<cplx>& zeta, const std::vector<cplx>& omega, int n, std::optional<cplx> s) {
          return gaf_cond_logdensity(zeta, omega, n, s);
        },
        py::arg("zeta"), py::arg("omega"), py::arg("n"), py::arg("s") = py::none(),
        "log|Delta(zeta ++ omega)|^2 - (n+1) log D");
  m.def("gaf_log_D",
        [](const std::vector<cplx>& zeta, const std::vector<cplx>& omega, int n) {
          return gaf_log_D(zeta, omega, n).log();
        },
        py::arg("zeta"), py::arg("omega"), py::arg("n"));
  m.def("ginibre_cond_logdensity",
        [](const std::vector<cplx>& zeta, const std::vector<cplx>& omega, int n) {
          return ginibre_cond_logdensity(zeta, omega, n);
        },
        py::arg("zeta"), py::arg("omega"), py::arg("n"));

  m.def("x_n", [](const std::vector<cplx>& omega, double r0) { return x_n(omega, r0); },
        py::arg("omega"), py::arg("r0") = 1.0);

  m.def("experiments", [] {
    std::vector<std::string> out;
    for (const Experiment e : all_experiments()) out.emplace_back(to_string(e));
    return out;
  });
  m.def("default_config", [] {
    const auto json_mod = py::module_::import("json");
    return json_mod.attr("loads")(to_json(ExperimentConfig{}).dump());
  });
  m.def("run_experiment", [](const py::dict& config, const std::string& format) {
    const ExperimentConfig cfg = config_from_dict(config);
    ExperimentReport r;
    {
      py::gil_scoped_release release;
      r = run_experiment(cfg);
    }
    if (format == "csv") return py::object(py::str(to_csv(r)));
    if (format == "json") return py::module_::import("json").attr("loads")(to_json(r).dump());
    throw DomainError("format must be 'csv' or 'json', got '" + format + "'");
  }, py::arg("config"), py::arg("format") = "json",
     "Run one experiment; config keys are those of the CLI config file.");
}
