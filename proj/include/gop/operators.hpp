#pragma once

#include <string>
#include <vector>

#include "gop/families.hpp"
#include "gop/numkit.hpp"

namespace gop {

/// Scalar substitution applied to operator eigenvalues. The Prony roots of a
/// scheme live in the image of this map; recovery inverts it on a fixed
/// principal branch.
class SpectralMap {
 public:
  enum class Kind { Identity, ExpScale, CosSqrt, Reciprocal };

  static SpectralMap identity();
  static SpectralMap exp_scale(Real tau);
  static SpectralMap cos_sqrt(Real tau);
  static SpectralMap reciprocal();

  Kind kind() const { return kind_; }
  Real tau() const { return tau_; }
  const char* name() const noexcept;

  Complex forward(Complex arg) const;

  /// Principal-branch inverse.
  /// ExpScale: arg(mu) taken in [-pi, pi); zero input is a BranchViolation.
  /// CosSqrt: requires mu within 1e-9 of the real interval [-1, 1]; result
  /// lies in [0, pi/tau].
  Complex inverse(Complex image) const;

 private:
  SpectralMap(Kind kind, Real tau) : kind_(kind), tau_(tau) {}

  Kind kind_;
  Real tau_;
};

/// The value the spectral map acts on for a given family parameter: the
/// first-order generator eigenvalue for exponential-type families, the
/// frequency for cosine-type families, and the base-operator eigenvalue for
/// the identity and reciprocal maps.
Complex map_argument(const EigenFamily& family, SpectralMap::Kind kind,
                     Complex lambda);
Complex param_from_map_argument(const EigenFamily& family,
                                SpectralMap::Kind kind, Complex arg);

/// Region-checked forward application for one family parameter.
Complex apply_spectral_map(const SpectralMap& map, const EigenFamily& family,
                           Complex lambda);
Complex invert_spectral_map(const SpectralMap& map, Complex image);

/// One sampled contribution: weight times the order-th derivative of the
/// target function at the point.
struct GridAtom {
  Real point;
  Complex weight;
  int order;
};

/// How powers of the substituted operator turn an evaluation at x0 into
/// concrete samples of f. Shift-type actions stay single-point, symmetric
/// shifts fan out binomially, operator powers become derivative stencils.
class IterationAction {
 public:
  enum class Kind {
    PlainPower,
    GeneralizedShift,
    SymmetricShift,
    Dilation,
    HalfSumShift,
  };

  static IterationAction plain_power();
  static IterationAction generalized_shift(Real tau);
  static IterationAction symmetric_shift(Real tau);
  static IterationAction dilation(Real ratio);
  static IterationAction half_sum_shift(Real tau);

  Kind kind() const { return kind_; }
  Real tau() const { return tau_; }
  Real ratio() const { return ratio_; }
  const char* name() const noexcept;

  /// True for single-point actions obeying the semigroup law.
  bool is_shift_like() const;

  /// True when the action is a plain translation: identity chart and no
  /// weight factor, so it commutes with constant-coefficient operators.
  bool translation_only(const EigenFamily& family) const;

  /// Samples of f realizing [action^k f](x0).
  /// \throws DomainEscape when a shifted point leaves the chart image.
  std::vector<GridAtom> grid(const EigenFamily& family, Real x0, int k) const;

  /// Generalized shift by a raw offset in the chart image coordinate.
  /// Composed shifts collapse to one call here, so equal total offsets give
  /// bitwise identical sample points.
  static std::vector<GridAtom> chart_shift_grid(const EigenFamily& family,
                                                Real x0, Real offset);

  /// Binomial fan of chart shifts for the k-th symmetric shift power.
  static std::vector<GridAtom> symmetric_chart_grid(const EigenFamily& family,
                                                    Real x0, Real tau, int k);

  /// Eigenvalue of the action on v_lambda.
  Complex symbol(const EigenFamily& family, Complex lambda) const;

 private:
  IterationAction(Kind kind, Real tau, Real ratio)
      : kind_(kind), tau_(tau), ratio_(ratio) {}

  Kind kind_;
  Real tau_;
  Real ratio_;
};

}  // namespace gop
