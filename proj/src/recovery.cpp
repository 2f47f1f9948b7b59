#include "gop/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gop {
namespace {

Real min_pairwise_distance(const ComplexVector& v) {
  if (v.size() < 2) return std::numeric_limits<Real>::infinity();
  Real best = std::numeric_limits<Real>::infinity();
  for (Index i = 0; i < v.size(); ++i)
    for (Index j = i + 1; j < v.size(); ++j)
      best = std::min(best, std::abs(v(i) - v(j)));
  return best;
}

std::string fmt_complex(Complex z) {
  std::ostringstream os;
  os.precision(6);
  os << z.real();
  if (z.imag() != 0) os << (z.imag() < 0 ? " - " : " + ")
                        << std::abs(z.imag()) << "i";
  return os.str();
}

/// Relative l2 misfit of the model sum against the raw measured values.
Real relative_residual(const SamplingScheme& scheme,
                       const MeasurementMap& values,
                       const ComplexVector& params,
                       const ComplexVector& coeffs) {
  Real num = 0, den = 0;
  for (const MeasurementSpec& spec : scheme.measurements()) {
    const auto it = values.find(spec.id);
    if (it == values.end())
      throw Error(ErrorCode::MissingMeasurement,
                  "measurement '" + spec.id + "' is missing");
    Complex model(0, 0);
    for (Index j = 0; j < params.size(); ++j)
      model += coeffs(j) * measure_basis(spec, scheme.family(), params(j));
    num += std::norm(model - it->second);
    den += std::norm(it->second);
  }
  if (den == 0) return std::sqrt(num);
  return std::sqrt(num / den);
}

// Measurement errors in this pipeline scale with each datum's own magnitude
// (quadrature tolerances are relative, roundoff floors follow the integrand
// mass), so the coefficient equations are equilibrated row-wise before the
// least-squares solve. Without this, data spanning many decades let the
// large equations' absolute errors swamp coefficients whose signal lives in
// the small ones.
void weight_rows(ComplexMatrix& a, ComplexVector& b) {
  Real bmax = 0;
  for (Index r = 0; r < b.size(); ++r) bmax = std::max(bmax, std::abs(b(r)));
  if (bmax == 0) return;
  const Real floor = std::numeric_limits<Real>::epsilon() * bmax;
  for (Index r = 0; r < b.size(); ++r) {
    const Real w = 1.0 / (std::abs(b(r)) + floor);
    a.row(r) *= w;
    b(r) *= w;
  }
}

}  // namespace

int estimate_order(const ComplexMatrix& matrix, Real tol) {
  if (matrix.rows() == 0 || matrix.cols() == 0) return 0;
  const RealVector sv = singular_values(matrix);
  if (sv.size() == 0 || sv(0) <= 0) return 0;
  int count = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++count;
  return count;
}

ComplexVector solve_coefficients(const SamplingScheme& scheme,
                                 const MeasurementMap& values,
                                 const ComplexVector& params) {
  const int n = static_cast<int>(params.size());
  if (n == 0) return ComplexVector();
  const int m = scheme.order();
  const ComplexMatrix data = assemble_matrix(scheme, values);

  ComplexVector sigma(n);
  for (int j = 0; j < n; ++j) sigma(j) = scheme.spectral_value(params(j));

  if (scheme.hankel() && scheme.rows() == m) {
    // Entries repeat along antidiagonals, so the distinct data are the 2M
    // values h_0..h_{2M-1}; the model column for parameter j is
    // B_j sigma_j^i with B_j the base functional on the eigenfunction.
    ComplexVector base(n);
    for (int j = 0; j < n; ++j)
      base(j) = scheme.row_applied_to_basis(0, params(j));
    ComplexMatrix a(2 * m, n);
    ComplexVector b(2 * m);
    for (int i = 0; i < 2 * m; ++i) {
      b(i) = i <= m ? data(0, i) : data(i - m, m);
      for (int j = 0; j < n; ++j)
        a(i, j) = base(j) * std::pow(sigma(j), i);
    }
    weight_rows(a, b);
    return lstsq(a, b);
  }

  const int rows = scheme.rows();
  ComplexMatrix a(rows * (m + 1), n);
  ComplexVector b(rows * (m + 1));
  for (int k = 0; k < rows; ++k) {
    for (int l = 0; l <= m; ++l) {
      const int r = k * (m + 1) + l;
      b(r) = data(k, l);
      for (int j = 0; j < n; ++j)
        a(r, j) = std::pow(sigma(j), l) *
                  scheme.row_applied_to_basis(k, params(j));
    }
  }
  weight_rows(a, b);
  return lstsq(a, b);
}

RecoveryResult recover(const SamplingScheme& scheme,
                       const MeasurementMap& values,
                       const RecoveryOptions& options) {
  if (scheme.rows() != scheme.order())
    throw Error(ErrorCode::ConfigError,
                "recovery needs exactly as many functionals as the order");

  RecoveryResult result;
  const ComplexMatrix a = assemble_matrix(scheme, values);
  result.diagnostics.singular_values = singular_values(a);

  result.prony = null_vector(a, options.rank_tol);
  const ComplexVector roots = poly_roots(ComplexPoly(result.prony));
  result.mapped_roots = roots;

  std::vector<Complex> kept;
  for (Index i = 0; i < roots.size(); ++i) {
    try {
      const Complex arg = scheme.map().inverse(roots(i));
      const Complex param =
          param_from_map_argument(scheme.family(), scheme.map().kind(), arg);
      if (!scheme.family().in_region(param, options.region_slack)) {
        result.diagnostics.warnings.push_back(
            "root " + fmt_complex(roots(i)) +
            " maps outside the parameter region; skipped");
        continue;
      }
      kept.push_back(param);
    } catch (const Error& e) {
      result.diagnostics.warnings.push_back(
          "root " + fmt_complex(roots(i)) + " skipped: " + e.what());
    }
  }
  if (kept.empty())
    throw Error(ErrorCode::BranchViolation,
                "no polynomial root maps back into the parameter region");

  std::sort(kept.begin(), kept.end(), [](Complex x, Complex y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  result.params = Eigen::Map<ComplexVector>(kept.data(), kept.size());

  result.diagnostics.min_root_separation =
      min_pairwise_distance(result.mapped_roots);
  result.diagnostics.min_param_separation = min_pairwise_distance(result.params);

  const bool integer_basis = scheme.family().kind() == FamilyKind::Legendre;
  const bool round_params = options.round_integer_params || integer_basis;
  ComplexVector fit_params = result.params;
  if (round_params) {
    std::vector<long> rounded;
    for (Index j = 0; j < result.params.size(); ++j)
      rounded.push_back(
          std::max(0L, std::lround(result.params(j).real())));
    std::vector<long> sorted = rounded;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      if (integer_basis)
        throw Error(ErrorCode::RankDeficient,
                    "recovered parameters round to colliding degrees");
      result.diagnostics.warnings.push_back(
          "rounded parameters collide; keeping the unrounded fit");
    } else {
      result.rounded_params = rounded;
      ComplexVector ints(result.params.size());
      for (Index j = 0; j < ints.size(); ++j)
        ints(j) = Complex(static_cast<Real>(rounded[j]), 0);
      fit_params = ints;
    }
  }

  // Integer-basis families have no eigenfunctions at fractional parameters,
  // so their coefficient fit is only defined against the rounded degrees.
  ComplexVector fit_coeffs;
  if (!result.rounded_params.empty()) {
    result.refit_coefficients = solve_coefficients(scheme, values, fit_params);
    result.coefficients =
        integer_basis ? result.refit_coefficients
                      : solve_coefficients(scheme, values, result.params);
    fit_coeffs = result.refit_coefficients;
  } else {
    result.coefficients = solve_coefficients(scheme, values, result.params);
    fit_coeffs = result.coefficients;
  }

  result.diagnostics.residual =
      relative_residual(scheme, values, fit_params, fit_coeffs);
  return result;
}

}  // namespace gop
