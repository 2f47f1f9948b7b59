#include "gop/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace gop {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr Real kPi = std::numbers::pi_v<Real>;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, "config field '" + field + "': " + msg);
}

const json& get(const json& j, const std::string& field) {
  const auto it = j.find(field);
  if (it == j.end()) fail(field, "is required");
  return *it;
}

Real get_real(const json& j, const std::string& field) {
  const json& v = get(j, field);
  if (!v.is_number()) fail(field, "must be a number");
  return v.get<Real>();
}

Real get_real_or(const json& j, const std::string& field, Real def) {
  return j.contains(field) ? get_real(j, field) : def;
}

int get_int(const json& j, const std::string& field) {
  const json& v = get(j, field);
  if (!v.is_number_integer()) fail(field, "must be an integer");
  return v.get<int>();
}

int get_int_or(const json& j, const std::string& field, int def) {
  return j.contains(field) ? get_int(j, field) : def;
}

bool get_bool_or(const json& j, const std::string& field, bool def) {
  if (!j.contains(field)) return def;
  const json& v = j.at(field);
  if (!v.is_boolean()) fail(field, "must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& field) {
  const json& v = get(j, field);
  if (!v.is_string()) fail(field, "must be a string");
  return v.get<std::string>();
}

Complex parse_complex(const json& v, const std::string& field) {
  if (v.is_number()) return Complex(v.get<Real>(), 0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<Real>(), v[1].get<Real>());
  fail(field, "must be a number or a [real, imag] pair");
}

RealPoly parse_poly(const json& v, const std::string& field) {
  if (!v.is_array()) fail(field, "must be an array of coefficients");
  std::vector<Real> c;
  for (const auto& x : v) {
    if (!x.is_number()) fail(field, "coefficients must be numbers");
    c.push_back(x.get<Real>());
  }
  if (c.empty()) c.push_back(0.0);
  return RealPoly(std::move(c));
}

EigenFamily parse_family(const json& j) {
  const std::string kind = get_string(j, "kind");
  if (kind == "exponential") return EigenFamily::exponential(get_real_or(j, "band", 1.0));
  if (kind == "cosine") return EigenFamily::cosine(get_real_or(j, "band", 10.0));
  if (kind == "generalized_exp") {
    RealPoly logweight;
    if (j.contains("logweight")) logweight = parse_poly(j.at("logweight"), "family.logweight");
    return EigenFamily::generalized_exp_preset(
        get_string(j, "chart"), get_real_or(j, "band", 1.0), logweight,
        get_real_or(j, "exponent", 2.0));
  }
  if (kind == "shifted_gaussian")
    return EigenFamily::shifted_gaussian(get_real(j, "alpha"));
  if (kind == "chebyshev_like")
    return EigenFamily::chebyshev_like(get_real_or(j, "band", 10.0));
  if (kind == "legendre") return EigenFamily::legendre();
  fail("family.kind", "unknown kind '" + kind + "'");
}

IterationAction parse_iteration(const json& j) {
  const std::string kind = get_string(j, "kind");
  if (kind == "plain_power") return IterationAction::plain_power();
  if (kind == "generalized_shift")
    return IterationAction::generalized_shift(get_real(j, "tau"));
  if (kind == "symmetric_shift")
    return IterationAction::symmetric_shift(get_real(j, "tau"));
  if (kind == "half_sum_shift")
    return IterationAction::half_sum_shift(get_real(j, "tau"));
  if (kind == "dilation") return IterationAction::dilation(get_real(j, "ratio"));
  fail("iteration.kind", "unknown kind '" + kind + "'");
}

SpectralMap parse_map(const json& j) {
  const std::string kind = get_string(j, "kind");
  if (kind == "identity") return SpectralMap::identity();
  if (kind == "exp_scale") return SpectralMap::exp_scale(get_real(j, "tau"));
  if (kind == "cos_sqrt") return SpectralMap::cos_sqrt(get_real(j, "tau"));
  if (kind == "reciprocal") return SpectralMap::reciprocal();
  fail("map.kind", "unknown kind '" + kind + "'");
}

SpectralMap infer_map(const IterationAction& a) {
  switch (a.kind()) {
    case IterationAction::Kind::PlainPower:
      return SpectralMap::identity();
    case IterationAction::Kind::GeneralizedShift:
    case IterationAction::Kind::Dilation:
      return SpectralMap::exp_scale(a.tau());
    case IterationAction::Kind::SymmetricShift:
    case IterationAction::Kind::HalfSumShift:
      return SpectralMap::cos_sqrt(a.tau());
  }
  return SpectralMap::identity();
}

KernelExpr parse_kernel(const json& j, const std::string& field) {
  const json& sup = get(j, "support");
  if (!sup.is_array() || sup.size() != 2)
    fail(field + ".support", "must be [a, b]");
  const Interval support{sup[0].get<Real>(), sup[1].get<Real>()};

  RealPoly p = RealPoly::constant(get_real_or(j, "scale", 1.0));
  int mult_a = 0, mult_b = 0;
  if (j.contains("roots")) {
    for (const auto& r : j.at("roots")) {
      const Real at = get_real(r, "at");
      const int mult = get_int(r, "multiplicity");
      if (mult < 1) fail(field + ".roots", "multiplicity must be >= 1");
      RealPoly factor({-at, 1.0});
      for (int i = 0; i < mult; ++i) p = p * factor;
      if (std::abs(at - support.a) < 1e-12) mult_a += mult;
      if (std::abs(at - support.b) < 1e-12) mult_b += mult;
    }
  }
  int vanish = std::min(mult_a, mult_b) - 1;
  if (j.contains("vanish_order")) vanish = get_int(j, "vanish_order");

  if (j.contains("exp_poly"))
    return KernelExpr::poly_exp(p, parse_poly(j.at("exp_poly"), field + ".exp_poly"),
                                support, vanish);
  return KernelExpr::polynomial(p, support, vanish);
}

SamplingFunctional parse_functional(const json& j, const std::string& field) {
  const std::string kind = get_string(j, "kind");
  if (kind == "point_eval")
    return SamplingFunctional::point_eval(get_real_or(j, "x0", 0.0));
  if (kind == "delta_derivative")
    return SamplingFunctional::delta_derivative(get_real_or(j, "x0", 0.0),
                                                get_int(j, "order"));
  if (kind == "weighted_points") {
    std::vector<std::pair<Real, Complex>> pts;
    for (const auto& p : get(j, "points")) {
      if (!p.is_array() || p.size() != 2)
        fail(field + ".points", "each entry must be [x, weight]");
      pts.emplace_back(p[0].get<Real>(), parse_complex(p[1], field + ".points"));
    }
    return SamplingFunctional::weighted_points(std::move(pts));
  }
  if (kind == "moment_kernel")
    return SamplingFunctional::moment_kernel(
        parse_kernel(get(j, "kernel"), field + ".kernel"));
  if (kind == "composed")
    return SamplingFunctional::composed(
        parse_iteration(get(j, "action")), get_int(j, "power"),
        parse_functional(get(j, "base"), field + ".base"));
  fail(field + ".kind", "unknown kind '" + kind + "'");
}

/// Named scheme shapes; each sets iteration, map and the functional rows.
void parse_scheme(const json& j, ExperimentConfig& config) {
  const std::string kind = get_string(j, "kind");
  const int m = config.order;
  auto hankel_rows = [&](const IterationAction& action,
                         const SamplingFunctional& base) {
    config.functionals.clear();
    config.functionals.push_back(base);
    for (int k = 1; k < m; ++k)
      config.functionals.push_back(SamplingFunctional::composed(action, k, base));
  };

  if (kind == "shift_hankel") {
    const Real tau = get_real(j, "tau");
    config.iteration = IterationAction::generalized_shift(tau);
    config.map = SpectralMap::exp_scale(tau);
    hankel_rows(config.iteration,
                SamplingFunctional::point_eval(get_real_or(j, "x0", 0.0)));
    return;
  }
  if (kind == "shift_strided") {
    const Real tau = get_real(j, "tau");
    const int stride = get_int_or(j, "stride", 2);
    if (stride < 1) fail("scheme.stride", "must be >= 1");
    config.iteration = IterationAction::generalized_shift(tau);
    config.map = SpectralMap::exp_scale(tau);
    const auto outer = IterationAction::generalized_shift(stride * tau);
    const auto base = SamplingFunctional::point_eval(get_real_or(j, "x0", 0.0));
    config.functionals.clear();
    config.functionals.push_back(base);
    for (int k = 1; k < m; ++k)
      config.functionals.push_back(SamplingFunctional::composed(outer, k, base));
    return;
  }
  if (kind == "derivative_hankel") {
    config.iteration = IterationAction::plain_power();
    config.map = SpectralMap::identity();
    hankel_rows(config.iteration,
                SamplingFunctional::point_eval(get_real_or(j, "x0", 0.0)));
    return;
  }
  if (kind == "derivative_shift_mixed") {
    const Real tau = get_real(j, "tau");
    config.iteration = IterationAction::plain_power();
    config.map = SpectralMap::identity();
    const auto shift = IterationAction::generalized_shift(tau);
    const auto base = SamplingFunctional::point_eval(get_real_or(j, "x0", 0.0));
    config.functionals.clear();
    config.functionals.push_back(base);
    for (int k = 1; k < m; ++k)
      config.functionals.push_back(SamplingFunctional::composed(shift, k, base));
    return;
  }
  if (kind == "halfsum_hankel") {
    const Real tau = get_real(j, "tau");
    config.iteration = IterationAction::half_sum_shift(tau);
    config.map = SpectralMap::cos_sqrt(tau);
    hankel_rows(config.iteration,
                SamplingFunctional::point_eval(get_real_or(j, "x0", 0.0)));
    return;
  }
  if (kind == "symmetric_shift_hankel") {
    const Real tau = get_real(j, "tau");
    config.iteration = IterationAction::symmetric_shift(tau);
    config.map = SpectralMap::cos_sqrt(tau);
    hankel_rows(config.iteration,
                SamplingFunctional::point_eval(get_real_or(j, "x0", 0.0)));
    return;
  }
  if (kind == "cosine_weighted") {
    const Real tau = get_real(j, "tau");
    config.iteration = IterationAction::half_sum_shift(tau);
    config.map = SpectralMap::cos_sqrt(tau);
    config.functionals.clear();
    config.functionals.push_back(
        SamplingFunctional::weighted_points({{0.0, Complex(2, 0)}}));
    for (int k = 1; k < m; ++k)
      config.functionals.push_back(SamplingFunctional::weighted_points(
          {{k * tau, Complex(1, 0)}, {-k * tau, Complex(1, 0)}}));
    return;
  }
  if (kind == "chebyshev_weighted") {
    const Real tau = get_real(j, "tau");
    config.iteration = IterationAction::symmetric_shift(tau);
    config.map = SpectralMap::cos_sqrt(tau);
    config.functionals.clear();
    for (int k = 0; k < m; ++k)
      config.functionals.push_back(SamplingFunctional::weighted_points(
          {{std::cos(k * tau), Complex(2, 0)}}));
    return;
  }
  if (kind == "moment_power_hankel") {
    config.iteration = IterationAction::plain_power();
    config.map = SpectralMap::identity();
    hankel_rows(config.iteration,
                SamplingFunctional::moment_kernel(
                    parse_kernel(get(j, "kernel"), "scheme.kernel")));
    return;
  }
  if (kind == "moment_shift_mixed") {
    const Real tau = get_real(j, "tau");
    config.iteration = IterationAction::plain_power();
    config.map = SpectralMap::identity();
    const auto shift = IterationAction::generalized_shift(tau);
    const auto base = SamplingFunctional::moment_kernel(
        parse_kernel(get(j, "kernel"), "scheme.kernel"));
    config.functionals.clear();
    config.functionals.push_back(base);
    for (int k = 1; k < m; ++k)
      config.functionals.push_back(SamplingFunctional::composed(shift, k, base));
    return;
  }
  fail("scheme.kind", "unknown kind '" + kind + "'");
}

ordered_json complex_json(Complex z) {
  return ordered_json::array({z.real(), z.imag()});
}

ordered_json complex_vector_json(const ComplexVector& v) {
  ordered_json a = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(complex_json(v(i)));
  return a;
}

ordered_json finite_or_null(Real x) {
  if (std::isfinite(x)) return ordered_json(x);
  return ordered_json(nullptr);
}

ordered_json error_json(const Error& e) {
  return ordered_json{{"code", error_code_name(e.code())},
                      {"message", e.what()}};
}

ordered_json scheme_summary(const SamplingScheme& scheme) {
  ordered_json ids = ordered_json::array();
  for (const auto& m : scheme.measurements())
    ids.push_back(ordered_json{{"id", m.id}, {"what", m.describe()}});
  return ordered_json{{"rows", scheme.rows()},
                      {"order", scheme.order()},
                      {"hankel", scheme.hankel()},
                      {"measurement_count", scheme.measurements().size()},
                      {"measurements", std::move(ids)}};
}

/// Greedy closest-pair matching between true and recovered parameters.
std::vector<int> match_params(const std::vector<ExpansionTerm>& truth,
                              const ComplexVector& recovered) {
  struct Pair {
    Real dist;
    int t, r;
  };
  std::vector<Pair> pairs;
  for (int t = 0; t < static_cast<int>(truth.size()); ++t)
    for (int r = 0; r < recovered.size(); ++r)
      pairs.push_back({std::abs(truth[t].lambda - recovered(r)), t, r});
  std::sort(pairs.begin(), pairs.end(),
            [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
  std::vector<int> match(truth.size(), -1);
  std::vector<bool> used(recovered.size(), false);
  for (const Pair& p : pairs) {
    if (match[p.t] >= 0 || used[p.r]) continue;
    match[p.t] = p.r;
    used[p.r] = true;
  }
  return match;
}

ordered_json truth_comparison(const ExperimentConfig& config,
                              const RecoveryResult& result) {
  const auto& terms = config.truth->terms();
  const auto match = match_params(terms, result.params);
  const bool refit = result.refit_coefficients.size() ==
                     static_cast<Index>(result.params.size()) &&
                     result.refit_coefficients.size() > 0 &&
                     !result.rounded_params.empty();
  const ComplexVector& coeffs =
      refit ? result.refit_coefficients : result.coefficients;

  ordered_json param_errors = ordered_json::array();
  ordered_json coeff_errors = ordered_json::array();
  Real max_param = 0, max_coeff = 0;
  int unmatched = 0;
  for (size_t t = 0; t < terms.size(); ++t) {
    if (match[t] < 0) {
      ++unmatched;
      param_errors.push_back(nullptr);
      coeff_errors.push_back(nullptr);
      continue;
    }
    const Real pe = std::abs(terms[t].lambda - result.params(match[t]));
    const Real ce = std::abs(terms[t].coeff - coeffs(match[t]));
    param_errors.push_back(pe);
    coeff_errors.push_back(ce);
    max_param = std::max(max_param, pe);
    max_coeff = std::max(max_coeff, ce);
  }
  ordered_json out{{"param_errors", std::move(param_errors)},
                   {"coeff_errors", std::move(coeff_errors)},
                   {"max_param_error", max_param},
                   {"max_coeff_error", max_coeff},
                   {"unmatched_terms", unmatched}};
  if (!result.rounded_params.empty()) {
    std::vector<long> want, got = result.rounded_params;
    for (const auto& term : terms) want.push_back(std::lround(term.lambda.real()));
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    out["rounded_params_exact"] = (want == got);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) fail("<root>", "config must be a JSON object");
  ExperimentConfig config;
  config.name = j.contains("name") ? get_string(j, "name") : "unnamed";
  config.family = parse_family(get(j, "family"));
  config.order = get_int(j, "order");
  if (config.order < 1) fail("order", "must be >= 1");

  const bool has_scheme = j.contains("scheme");
  const bool has_functionals = j.contains("functionals");
  if (has_scheme == has_functionals)
    fail("scheme", "exactly one of 'scheme' or 'functionals' is required");
  if (has_scheme) {
    if (j.contains("iteration"))
      fail("iteration", "named schemes fix the iteration; drop this field");
    parse_scheme(j.at("scheme"), config);
  } else {
    config.iteration = parse_iteration(get(j, "iteration"));
    config.map = j.contains("map") ? parse_map(j.at("map"))
                                   : infer_map(config.iteration);
    for (const auto& f : j.at("functionals"))
      config.functionals.push_back(parse_functional(f, "functionals"));
  }

  config.check_admissibility = get_bool_or(j, "check_admissibility", true);

  if (j.contains("recovery")) {
    const json& r = j.at("recovery");
    config.recovery.rank_tol = get_real_or(r, "rank_tol", kDefaultRankTol);
    config.recovery.round_integer_params =
        get_bool_or(r, "round_integer_params", false);
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    config.noise.sigma = get_real_or(n, "sigma", 0.0);
    if (config.noise.sigma < 0) fail("noise.sigma", "must be >= 0");
    config.noise.seed = static_cast<std::uint64_t>(get_int_or(n, "seed", 1));
  }
  if (j.contains("truth")) {
    std::vector<ExpansionTerm> terms;
    for (const auto& t : get(j.at("truth"), "terms"))
      terms.push_back(ExpansionTerm{parse_complex(get(t, "lambda"), "truth.lambda"),
                                    parse_complex(get(t, "coeff"), "truth.coeff")});
    config.truth.emplace(config.family, std::move(terms));
  }
  if (j.contains("measurements_csv"))
    config.measurements_csv = get_string(j, "measurements_csv");
  config.emit_kernel_curves = get_bool_or(j, "emit_kernel_curves", false);
  config.kernel_curve_samples = get_int_or(j, "kernel_curve_samples", 200);
  if (config.kernel_curve_samples < 2)
    fail("kernel_curve_samples", "must be >= 2");
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::ConfigError,
                "cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError,
                "invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

SamplingScheme build_scheme(const ExperimentConfig& config) {
  return SamplingScheme::build(config.family, config.iteration, config.map,
                               config.functionals, config.order,
                               config.check_admissibility);
}

MeasurementMap read_measurements_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::ConfigError,
                "cannot open measurement file " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::ConfigError, "empty measurement file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "measurement_id,real,imag")
    throw Error(ErrorCode::ConfigError,
                "measurement file must start with 'measurement_id,real,imag'");
  MeasurementMap values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(lineno) + ": expected id,real,imag");
    const std::string id = line.substr(0, c1);
    try {
      const Real re = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      const Real im = std::stod(line.substr(c2 + 1));
      values[id] = Complex(re, im);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(lineno) + ": bad number");
    }
  }
  return values;
}

void write_measurements_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, Complex>>& rows) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  out << "measurement_id,real,imag\n";
  char buf[96];
  for (const auto& [id, v] : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", v.real(), v.imag());
    out << id << ',' << buf << '\n';
  }
}

Real GaussianSampler::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on explicitly constructed uniforms so the stream is
  // reproducible across standard library implementations.
  const Real u1 = (static_cast<Real>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  const Real u2 = static_cast<Real>(rng_() >> 11) * 0x1.0p-53;
  const Real r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

void add_noise(std::vector<std::pair<std::string, Complex>>& rows,
               const NoiseSpec& noise) {
  if (noise.sigma <= 0) return;
  GaussianSampler g(noise.seed);
  for (auto& [id, v] : rows)
    v += noise.sigma * Complex(g.next(), g.next());
}

nlohmann::ordered_json simulate(const ExperimentConfig& config,
                                const std::filesystem::path& out_csv,
                                std::optional<std::uint64_t> seed_override) {
  const SamplingScheme scheme = build_scheme(config);
  if (!config.truth)
    throw Error(ErrorCode::ConfigError,
                "simulation needs a 'truth' block in the config");
  auto rows = simulate_measurements(scheme, *config.truth);
  NoiseSpec noise = config.noise;
  if (seed_override) noise.seed = *seed_override;
  add_noise(rows, noise);
  write_measurements_csv(out_csv, rows);

  ordered_json report{{"schema_version", kReportSchemaVersion},
                      {"name", config.name},
                      {"mode", "simulate"},
                      {"status", "ok"},
                      {"measurements_csv", out_csv.string()},
                      {"measurement_count", rows.size()},
                      {"noise", ordered_json{{"sigma", noise.sigma},
                                             {"seed", noise.seed}}},
                      {"scheme", scheme_summary(scheme)}};

  if (config.emit_kernel_curves) {
    std::filesystem::path curves = out_csv;
    curves.replace_extension();
    curves += "_kernels.csv";
    std::ofstream out(curves);
    if (!out)
      throw Error(ErrorCode::ConfigError, "cannot write " + curves.string());
    out << "measurement_id,x,value\n";
    int emitted = 0;
    char buf[96];
    for (const auto& m : scheme.measurements()) {
      if (m.type != MeasurementSpec::Type::KernelMoment) continue;
      const Interval sup = m.kernel->support();
      const int n = config.kernel_curve_samples;
      for (int i = 0; i < n; ++i) {
        const Real x = sup.a + sup.length() * i / (n - 1);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", x, m.kernel->eval(x));
        out << m.id << ',' << buf << '\n';
      }
      ++emitted;
    }
    report["kernel_curves_csv"] = curves.string();
    report["kernel_curve_count"] = emitted;
  }
  return report;
}

RunOutcome run(const ExperimentConfig& config,
               std::optional<std::uint64_t> seed_override) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  ordered_json rep{{"schema_version", kReportSchemaVersion},
                   {"name", config.name},
                   {"mode", "run"}};

  std::optional<SamplingScheme> scheme;
  MeasurementMap values;
  try {
    scheme.emplace(build_scheme(config));
    rep["scheme"] = scheme_summary(*scheme);
    if (config.measurements_csv) {
      values = read_measurements_csv(*config.measurements_csv);
      rep["measurements_csv"] = *config.measurements_csv;
    } else {
      if (!config.truth)
        throw Error(ErrorCode::ConfigError,
                    "config needs either 'measurements_csv' or 'truth'");
      auto rows = simulate_measurements(*scheme, *config.truth);
      NoiseSpec noise = config.noise;
      if (seed_override) noise.seed = *seed_override;
      add_noise(rows, noise);
      for (const auto& [id, v] : rows) values[id] = v;
      rep["noise"] =
          ordered_json{{"sigma", noise.sigma}, {"seed", noise.seed}};
    }
  } catch (const Error& e) {
    rep["status"] = "error";
    rep["error"] = error_json(e);
    out.report = std::move(rep);
    out.config_stage_failure = true;
    return out;
  }

  try {
    out.result = recover(*scheme, values, config.recovery);
  } catch (const Error& e) {
    rep["status"] = "error";
    rep["error"] = error_json(e);
    out.report = std::move(rep);
    return out;
  }

  const RecoveryResult& r = *out.result;
  ordered_json rec{
      {"params", complex_vector_json(r.params)},
      {"coefficients", complex_vector_json(r.coefficients)},
      {"mapped_roots", complex_vector_json(r.mapped_roots)},
      {"prony", complex_vector_json(r.prony)},
      {"residual", r.diagnostics.residual},
      {"min_root_separation",
       finite_or_null(r.diagnostics.min_root_separation)},
      {"min_param_separation",
       finite_or_null(r.diagnostics.min_param_separation)},
      {"warnings", r.diagnostics.warnings}};
  ordered_json sv = ordered_json::array();
  for (Index i = 0; i < r.diagnostics.singular_values.size(); ++i)
    sv.push_back(r.diagnostics.singular_values(i));
  rec["singular_values"] = std::move(sv);
  const auto& s = r.diagnostics.singular_values;
  rec["singular_ratio"] =
      (s.size() > 0 && s(0) > 0) ? ordered_json(s(s.size() - 1) / s(0))
                                 : ordered_json(nullptr);
  if (!r.rounded_params.empty()) {
    rec["rounded_params"] = r.rounded_params;
    rec["refit_coefficients"] = complex_vector_json(r.refit_coefficients);
  }
  rep["recovery"] = std::move(rec);

  if (config.truth) rep["truth_comparison"] = truth_comparison(config, r);

  rep["status"] = "ok";
  rep["wall_time_ms"] =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - start)
          .count();
  out.report = std::move(rep);
  out.ok = true;
  return out;
}

std::vector<BatchItem> run_batch(const std::filesystem::path& dir,
                                 const std::filesystem::path& out_dir,
                                 int jobs) {
  std::vector<std::filesystem::path> configs;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json" &&
        entry.path().string().find(".report.json") == std::string::npos)
      configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());

  std::filesystem::create_directories(out_dir);
  std::vector<BatchItem> items(configs.size());
  if (jobs <= 0)
    jobs = static_cast<int>(
        std::max(1u, std::min(4u, std::thread::hardware_concurrency())));
  jobs = std::min(jobs, static_cast<int>(std::max<size_t>(configs.size(), 1)));

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      BatchItem& item = items[i];
      item.config = configs[i];
      item.report = out_dir / (configs[i].stem().string() + ".report.json");
      try {
        const ExperimentConfig config = load_config(configs[i]);
        RunOutcome outcome = run(config);
        std::ofstream out(item.report);
        out << outcome.report.dump(2) << '\n';
        item.ok = outcome.ok;
        item.config_stage_failure = outcome.config_stage_failure;
      } catch (const Error& e) {
        ordered_json rep{{"schema_version", kReportSchemaVersion},
                         {"name", configs[i].stem().string()},
                         {"mode", "run"},
                         {"status", "error"},
                         {"error", error_json(e)}};
        std::ofstream out(item.report);
        out << rep.dump(2) << '\n';
        item.ok = false;
        item.config_stage_failure = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return items;
}

}  // namespace gop
