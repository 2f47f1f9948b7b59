#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gop/numkit.hpp"
#include "gop/taylor.hpp"

namespace gop {

struct Interval {
  Real a = -std::numeric_limits<Real>::infinity();
  Real b = std::numeric_limits<Real>::infinity();

  static Interval whole_line() { return Interval{}; }

  Real length() const { return b - a; }
  bool bounded() const { return std::isfinite(a) && std::isfinite(b); }
  bool contains(Real x, Real margin = 0.0) const {
    return x >= a + margin && x <= b - margin;
  }
};

/// Real scalar function bundled with its exact Taylor jets, so callers can
/// differentiate compositions to arbitrary order without finite differences.
struct SmoothFunc {
  std::function<Real(Real)> value;
  std::function<taylor::RealSeries(Real, int)> series;
  bool identically_zero = false;

  Real derivative(Real x) const { return series(x, 1).derivative(1); }
};

SmoothFunc smooth_zero();
SmoothFunc smooth_from_poly(const RealPoly& p);

/// Strictly monotone chart G on an interval, with closed-form inverse and
/// image. Generalized shifts move points by fixed steps in the chart's
/// image coordinate.
struct CoordinateChart {
  std::string name;
  SmoothFunc map;
  std::function<Real(Real)> inverse;
  Interval domain;
  Interval image;
  bool is_identity = false;
};

CoordinateChart identity_chart();

/// Catalog entry by chart name. Supported names: "linear", "quadratic",
/// "log", "power" (uses the exponent argument), "arccos", "arcsin",
/// "arcosh", "arsinh", "sin", "cos", "sinh", "cosh".
CoordinateChart preset_chart(const std::string& name, Real exponent = 2.0);
const std::vector<std::string>& preset_chart_names();

enum class FamilyKind {
  Exponential,
  Cosine,
  GeneralizedExp,
  ShiftedGaussian,
  ChebyshevLike,
  Legendre,
};

const char* family_kind_name(FamilyKind kind) noexcept;

/// Legendre polynomial values by the three-term recurrence; stable for
/// degrees up to 30 at double precision.
Real legendre_eval(int n, Real x);

/// Exact derivative of any order, via the defining differential equation
/// away from the endpoints and factorial closed forms at x = +-1.
Real legendre_derivative(int n, Real x, int order);

/// One family of operator eigenfunctions v_lambda together with its
/// eigenvalue region and the coordinate structure its shifts act through.
class EigenFamily {
 public:
  static EigenFamily exponential(Real band = 1.0);
  static EigenFamily cosine(Real band);
  static EigenFamily generalized_exp(CoordinateChart chart, SmoothFunc logweight,
                                     Real band);
  static EigenFamily generalized_exp_preset(const std::string& chart_name,
                                            Real band,
                                            const RealPoly& logweight = RealPoly(),
                                            Real exponent = 2.0);
  static EigenFamily shifted_gaussian(Real alpha);
  static EigenFamily chebyshev_like(Real band);
  static EigenFamily legendre();

  FamilyKind kind() const { return kind_; }
  Real band() const { return band_; }
  Real gaussian_width() const { return alpha_; }
  const Interval& domain() const { return domain_; }
  const CoordinateChart& chart() const { return chart_; }
  const SmoothFunc& logweight() const { return logweight_; }

  /// True when v_lambda(G^{-1}(u)) is an even function of the chart
  /// coordinate u, which lets schemes fold negative steps onto positive ones.
  bool even_in_chart() const;

  bool in_region(Complex lambda, Real slack = 1e-9) const;
  void require_in_region(Complex lambda) const;

  /// Eigenvalue of the family's base operator on v_lambda.
  Complex operator_eigenvalue(Complex lambda) const;

  /// Inverse of operator_eigenvalue on the principal branch.
  Complex param_from_operator_eigenvalue(Complex mu) const;

  /// Largest step size for which the paired exponential or cosine spectral
  /// map stays injective on the eigenvalue region. Infinite when the region
  /// puts no constraint on the step.
  Real max_iteration_step() const;

  /// The base operator when it has polynomial coefficients; empty otherwise.
  std::optional<PolyDiffOp> base_operator() const;

  Complex eval(Complex lambda, Real x) const;
  Complex eval_derivative(Complex lambda, Real x, int order) const;

 private:
  EigenFamily() = default;

  FamilyKind kind_ = FamilyKind::Exponential;
  Real band_ = 1.0;
  Real alpha_ = 1.0;
  Interval domain_;
  CoordinateChart chart_;
  SmoothFunc logweight_;
};

struct ExpansionTerm {
  Complex lambda;
  Complex coeff;
};

/// Finite expansion f = sum_j c_j v_{lambda_j} over one family, with
/// pairwise distinct eigenvalue parameters and nonzero coefficients.
class SparseExpansion {
 public:
  SparseExpansion(EigenFamily family, std::vector<ExpansionTerm> terms);

  const EigenFamily& family() const { return family_; }
  const std::vector<ExpansionTerm>& terms() const { return terms_; }
  int order() const { return static_cast<int>(terms_.size()); }

  Complex eval(Real x) const;
  Complex eval_derivative(Real x, int order) const;

  /// Smallest pairwise distance between eigenvalue parameters.
  Real min_separation() const;

 private:
  EigenFamily family_;
  std::vector<ExpansionTerm> terms_;
};

}  // namespace gop
