#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gop/experiment.hpp"

namespace py = pybind11;
using gop::Complex;
using gop::Real;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_text(const std::string& config_text) {
  try {
    return json::parse(config_text);
  } catch (const json::exception& e) {
    throw gop::Error(gop::ErrorCode::ConfigError,
                     std::string("invalid JSON: ") + e.what());
  }
}

gop::ExperimentConfig config_from_text(const std::string& config_text) {
  return gop::parse_config(parse_text(config_text));
}

ordered_json complex_array(const gop::ComplexVector& v) {
  ordered_json a = ordered_json::array();
  for (gop::Index i = 0; i < v.size(); ++i)
    a.push_back(ordered_json::array({v(i).real(), v(i).imag()}));
  return a;
}

std::string run_config(const std::string& config_text,
                       std::optional<std::uint64_t> seed) {
  return gop::run(config_from_text(config_text), seed).report.dump(2);
}

std::string simulate_config(const std::string& config_text,
                            const std::string& out_csv,
                            std::optional<std::uint64_t> seed) {
  return gop::simulate(config_from_text(config_text), out_csv, seed).dump(2);
}

std::string recover_values(const std::string& config_text,
                           const std::map<std::string, Complex>& values) {
  const gop::ExperimentConfig config = config_from_text(config_text);
  const gop::SamplingScheme scheme = gop::build_scheme(config);
  const gop::RecoveryResult res =
      gop::recover(scheme, values, config.recovery);
  ordered_json out{{"params", complex_array(res.params)},
                   {"coefficients", complex_array(res.coefficients)},
                   {"mapped_roots", complex_array(res.mapped_roots)},
                   {"residual", res.diagnostics.residual},
                   {"warnings", res.diagnostics.warnings}};
  if (!res.rounded_params.empty()) {
    out["rounded_params"] = res.rounded_params;
    out["refit_coefficients"] = complex_array(res.refit_coefficients);
  }
  return out.dump(2);
}

std::string scheme_info(const std::string& config_text) {
  const gop::SamplingScheme scheme =
      gop::build_scheme(config_from_text(config_text));
  ordered_json measurements = ordered_json::array();
  for (const auto& m : scheme.measurements())
    measurements.push_back(
        ordered_json{{"id", m.id}, {"what", m.describe()}});
  return ordered_json{{"rows", scheme.rows()},
                      {"order", scheme.order()},
                      {"hankel", scheme.hankel()},
                      {"measurement_count", scheme.measurements().size()},
                      {"measurements", std::move(measurements)}}
      .dump(2);
}

gop::SparseExpansion make_expansion(
    const gop::EigenFamily& family,
    const std::vector<std::pair<Complex, Complex>>& terms) {
  std::vector<gop::ExpansionTerm> t;
  t.reserve(terms.size());
  for (const auto& [lambda, coeff] : terms) t.push_back({lambda, coeff});
  return gop::SparseExpansion(family, std::move(t));
}

}  // namespace

PYBIND11_MODULE(_gop, m) {
  m.doc() =
      "Recovery of sparse eigenfunction expansions from generalized samples";
  m.attr("__version__") = "0.1.0";
  m.attr("report_schema_version") = gop::kReportSchemaVersion;

  static py::exception<gop::Error> gop_error(m, "GopError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const gop::Error& e) {
      py::set_error(gop_error,
                    (std::string(gop::error_code_name(e.code())) + ": " +
                     e.what())
                        .c_str());
    }
  });

  // RealPoly must be registered before EigenFamily: the latter uses a
  // default-constructed RealPoly as a default argument.
  py::class_<gop::RealPoly>(m, "RealPoly")
      .def(py::init([](const std::vector<Real>& ascending) {
             return gop::RealPoly(ascending);
           }),
           py::arg("ascending_coefficients"))
      .def("eval",
           [](const gop::RealPoly& p, Real x) { return p.eval(x); },
           py::arg("x"));

  py::class_<gop::EigenFamily>(m, "EigenFamily")
      .def_static("exponential", &gop::EigenFamily::exponential,
                  py::arg("band") = 1.0)
      .def_static("cosine", &gop::EigenFamily::cosine, py::arg("band"))
      .def_static("generalized_exp_preset",
                  &gop::EigenFamily::generalized_exp_preset,
                  py::arg("chart_name"), py::arg("band"),
                  py::arg("logweight") = gop::RealPoly(),
                  py::arg("exponent") = 2.0)
      .def_static("shifted_gaussian", &gop::EigenFamily::shifted_gaussian,
                  py::arg("alpha"))
      .def_static("chebyshev_like", &gop::EigenFamily::chebyshev_like,
                  py::arg("band"))
      .def_static("legendre", &gop::EigenFamily::legendre)
      .def("eval", &gop::EigenFamily::eval, py::arg("lambda_"), py::arg("x"))
      .def("eval_derivative", &gop::EigenFamily::eval_derivative,
           py::arg("lambda_"), py::arg("x"), py::arg("order"))
      .def("operator_eigenvalue", &gop::EigenFamily::operator_eigenvalue,
           py::arg("lambda_"))
      .def("param_from_operator_eigenvalue",
           &gop::EigenFamily::param_from_operator_eigenvalue, py::arg("mu"))
      .def("in_region", &gop::EigenFamily::in_region, py::arg("lambda_"),
           py::arg("slack") = 1e-9)
      .def("max_iteration_step", &gop::EigenFamily::max_iteration_step)
      .def("band", &gop::EigenFamily::band);

  py::class_<gop::SparseExpansion>(m, "SparseExpansion")
      .def(py::init(&make_expansion), py::arg("family"), py::arg("terms"))
      .def("eval", &gop::SparseExpansion::eval, py::arg("x"))
      .def("eval_derivative", &gop::SparseExpansion::eval_derivative,
           py::arg("x"), py::arg("order"))
      .def("min_separation", &gop::SparseExpansion::min_separation)
      .def("order", &gop::SparseExpansion::order)
      .def("terms", [](const gop::SparseExpansion& f) {
        std::vector<std::pair<Complex, Complex>> out;
        for (const auto& t : f.terms()) out.emplace_back(t.lambda, t.coeff);
        return out;
      });

  m.def("singular_values", &gop::singular_values, py::arg("matrix"),
        "Descending singular values of a complex matrix.");
  m.def("estimate_order", &gop::estimate_order, py::arg("matrix"),
        py::arg("tol") = gop::kDefaultRankTol,
        "Number of singular values above tol times the largest one.");

  m.def("run_config", &run_config, py::arg("config_json"),
        py::arg("seed") = std::nullopt,
        "Full recovery run from a config JSON string; returns the report "
        "JSON string.");
  m.def("simulate_config", &simulate_config, py::arg("config_json"),
        py::arg("out_csv"), py::arg("seed") = std::nullopt,
        "Evaluate a config's measurements, write them as CSV, and return "
        "the simulation report JSON string.");
  m.def("recover_values", &recover_values, py::arg("config_json"),
        py::arg("values"),
        "Recover from explicit measurement values keyed by measurement id; "
        "returns the recovery JSON string.");
  m.def("scheme_info", &scheme_info, py::arg("config_json"),
        "Validate and realize a config's sampling scheme; returns its "
        "summary JSON string.");

  m.def("read_measurements_csv",
        [](const std::string& path) {
          return gop::read_measurements_csv(path);
        },
        py::arg("path"));
  m.def("write_measurements_csv",
        [](const std::string& path,
           const std::vector<std::pair<std::string, Complex>>& rows) {
          gop::write_measurements_csv(path, rows);
        },
        py::arg("path"), py::arg("rows"));
}
