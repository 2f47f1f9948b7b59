#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gop/operators.hpp"

namespace gop {

/// Tolerances for adaptive integration. Convergence also accepts error
/// estimates at the roundoff floor of the integrand's absolute mass, so
/// heavily cancelling integrands terminate at the best reachable accuracy.
struct QuadratureSpec {
  Real abs_tol = 1e-14;
  Real rel_tol = 1e-12;
  int max_panels = 1 << 14;
};

/// Adaptive Gauss-Kronrod integration over a finite interval.
/// \throws QuadratureFailure when the panel budget is exhausted before the
///   error estimate meets the tolerance.
Complex integrate(const std::function<Complex(Real)>& f, Real a, Real b,
                  const QuadratureSpec& spec = {});

/// Finite sums of p(x) exp(q(x)) with polynomial p, q on a bounded support
/// interval. The class is closed under differentiation, multiplication by
/// polynomials, and translation, so repeated adjoint applications stay exact.
class KernelExpr {
 public:
  struct Term {
    RealPoly p;
    RealPoly q;
  };

  /// vanish_order d declares that derivatives of order 0..d vanish at both
  /// support endpoints; the claim is verified numerically on construction.
  static KernelExpr polynomial(RealPoly p, Interval support, int vanish_order);
  static KernelExpr poly_exp(RealPoly p, RealPoly q, Interval support,
                             int vanish_order);

  const Interval& support() const { return support_; }
  int vanish_order() const { return vanish_order_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool pure_polynomial() const;

  Real eval(Real x) const;
  Real eval_derivative(Real x, int order) const;

  KernelExpr derivative() const;
  KernelExpr multiplied(const RealPoly& g) const;

  /// k(x - c) with support moved by +c.
  KernelExpr translated(Real c) const;

  KernelExpr operator+(const KernelExpr& rhs) const;
  KernelExpr scaled(Real s) const;

  /// Stable content key used for measurement deduplication.
  const std::string& signature() const { return signature_; }

 private:
  KernelExpr(std::vector<Term> terms, Interval support, int vanish_order,
             bool verify);

  std::vector<Term> terms_;
  Interval support_;
  int vanish_order_ = 0;
  std::string signature_;
};

/// Formal adjoint of op applied to the kernel:
///   op* k = sum_n (-1)^n (c_n k)^(n).
/// Integration by parts against the kernel is exact because the boundary
/// contributions vanish.
/// \throws BoundaryViolation when the kernel's vanish order is below
///   op.order() - 1, which would leave boundary terms.
KernelExpr adjoint_apply(const PolyDiffOp& op, const KernelExpr& kernel);

/// One admissible linear measurement functional.
class SamplingFunctional {
 public:
  enum class Kind {
    PointEval,
    DeltaDerivative,
    WeightedPoints,
    MomentKernel,
    ComposedWithAction,
  };

  static SamplingFunctional point_eval(Real x0);
  static SamplingFunctional delta_derivative(Real x0, int order);
  static SamplingFunctional weighted_points(
      std::vector<std::pair<Real, Complex>> points);
  static SamplingFunctional moment_kernel(KernelExpr kernel,
                                          QuadratureSpec quad = {});
  static SamplingFunctional composed(IterationAction action, int power,
                                     SamplingFunctional base);

  Kind kind() const { return kind_; }
  Real point() const { return point_; }
  int order() const { return order_; }
  const std::vector<std::pair<Real, Complex>>& points() const { return points_; }
  const KernelExpr& kernel() const;
  const QuadratureSpec& quad() const { return quad_; }
  const IterationAction& action() const;
  int power() const { return power_; }
  const SamplingFunctional& base() const;

  /// Structural key: equal keys mean the same functional.
  std::string signature() const;

 private:
  SamplingFunctional() = default;

  Kind kind_ = Kind::PointEval;
  Real point_ = 0;
  int order_ = 0;
  std::vector<std::pair<Real, Complex>> points_;
  std::shared_ptr<const KernelExpr> kernel_;
  QuadratureSpec quad_;
  std::shared_ptr<const IterationAction> action_;
  int power_ = 0;
  std::shared_ptr<const SamplingFunctional> base_;
};

/// One raw datum the scheme needs from the signal.
struct MeasurementSpec {
  enum class Type { PointSample, KernelMoment, MonomialMoment };

  Type type = Type::PointSample;
  // PointSample: order-th derivative of f at point.
  Real point = 0;
  int order = 0;
  // KernelMoment: integral of f times kernel over the kernel support.
  std::shared_ptr<const KernelExpr> kernel;
  // MonomialMoment: integral over [0, length] of f(x + offset) x^power.
  Real offset = 0;
  Real length = 0;
  int power = 0;

  QuadratureSpec quad;
  std::string id;
  std::string describe() const;
};

/// Weighted reference from a matrix entry into the measurement list.
struct EntryTerm {
  int measurement;
  Complex weight;
};

using MeasurementMap = std::map<std::string, Complex>;

/// A fully validated sampling plan: functional rows against iteration
/// columns, with every matrix entry realized as weighted raw measurements
/// and the raw measurements deduplicated.
class SamplingScheme {
 public:
  /// Validates pairing, step bounds and admissibility, then realizes all
  /// entries. rows is the number of functionals; columns are always
  /// order + 1 powers of the iteration.
  static SamplingScheme build(EigenFamily family, IterationAction iteration,
                              SpectralMap map,
                              std::vector<SamplingFunctional> functionals,
                              int order, bool check_admissibility = true,
                              std::uint64_t probe_seed = 20240817);

  int order() const { return order_; }
  int rows() const { return static_cast<int>(functionals_.size()); }
  int cols() const { return order_ + 1; }
  const EigenFamily& family() const { return family_; }
  const IterationAction& iteration() const { return iteration_; }
  const SpectralMap& map() const { return map_; }
  const std::vector<SamplingFunctional>& functionals() const {
    return functionals_;
  }
  bool hankel() const { return hankel_; }
  const std::vector<MeasurementSpec>& measurements() const {
    return measurements_;
  }
  const std::vector<EntryTerm>& entry(int k, int l) const;

  /// Row functional applied to a single eigenfunction v_lambda.
  Complex row_applied_to_basis(int k, Complex lambda) const;

  /// Image of the family parameter under the scheme's spectral map; the
  /// Prony roots of exact data sit at these values.
  Complex spectral_value(Complex lambda) const;

 private:
  SamplingScheme() = default;

  void verify_admissibility(std::uint64_t seed) const;
  Complex draw_probe_parameter(std::mt19937_64& rng) const;

  EigenFamily family_ = EigenFamily::exponential();
  IterationAction iteration_ = IterationAction::plain_power();
  SpectralMap map_ = SpectralMap::identity();
  std::vector<SamplingFunctional> functionals_;
  int order_ = 0;
  bool hankel_ = false;
  std::vector<MeasurementSpec> measurements_;
  std::vector<std::vector<std::vector<EntryTerm>>> entries_;
};

/// An interior region parameter suitable for pairing checks and probes.
Complex family_probe_parameter(const EigenFamily& family);

/// Exact (or quadrature-backed) value of one raw measurement of f.
Complex measure(const MeasurementSpec& spec, const SparseExpansion& f);

/// The same measurement applied to a single eigenfunction v_lambda.
Complex measure_basis(const MeasurementSpec& spec, const EigenFamily& family,
                      Complex lambda);

/// F applied to a sparse expansion, with any composed action resolved
/// through its grid rule.
Complex apply_functional(const SamplingFunctional& f, const SparseExpansion& g);

/// F applied to a single eigenfunction.
Complex apply_functional_to_basis(const EigenFamily& family,
                                  const SamplingFunctional& f, Complex lambda);

/// All raw measurements of the scheme evaluated against a known expansion,
/// in scheme order.
std::vector<std::pair<std::string, Complex>> simulate_measurements(
    const SamplingScheme& scheme, const SparseExpansion& f);

/// Assembles the rows x (order+1) sampling matrix from raw measurements.
/// \throws MissingMeasurement when a required id is absent.
ComplexMatrix assemble_matrix(const SamplingScheme& scheme,
                              const MeasurementMap& values);

}  // namespace gop
