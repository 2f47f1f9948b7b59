#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gop {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Failure classes surfaced by the library. Every thrown gop::Error carries
/// one of these so callers can branch on the failure kind instead of parsing
/// message text.
enum class ErrorCode {
  RankDeficient,
  DegenerateNormalization,
  ZeroPolynomial,
  DomainViolation,
  RegionViolation,
  BranchViolation,
  DomainEscape,
  QuadratureFailure,
  BoundaryViolation,
  AdmissibilityFailure,
  MissingMeasurement,
  ConfigError,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Default relative threshold separating "numerically zero" singular values
/// from signal, measured against the largest singular value.
inline constexpr Real kDefaultRankTol = 1e-10;

/// Throws DomainViolation if any entry of m is NaN or infinite.
void require_finite(const ComplexMatrix& m, const char* where);
void require_finite(const ComplexVector& v, const char* where);

/// Singular values of m in descending order.
RealVector singular_values(const ComplexMatrix& m);

/// Kernel vector of an M x (M+1) matrix, scaled so its last entry equals 1.
///
/// The vector is the right singular vector of the smallest singular value.
/// \throws RankDeficient when the smallest computed singular value falls
///   below tol times the largest (null space not one-dimensional).
/// \throws DegenerateNormalization when the unit-norm kernel vector has
///   |last entry| < 1e-12 and the rescaling would blow up.
ComplexVector null_vector(const ComplexMatrix& m, Real tol = kDefaultRankTol);

/// Minimum-norm least-squares solution of a x = b with rows >= cols.
/// \throws RankDeficient when the smallest singular value of a falls below
///   tol times the largest.
ComplexVector lstsq(const ComplexMatrix& a, const ComplexVector& b,
                    Real tol = kDefaultRankTol);

/// Dense polynomial with complex coefficients stored in ascending degree
/// order. Trailing zero coefficients are trimmed on construction so the
/// leading coefficient is nonzero unless the polynomial is identically zero.
class ComplexPoly {
 public:
  ComplexPoly() : coeffs_(ComplexVector::Zero(1)) {}
  explicit ComplexPoly(ComplexVector coeffs);

  Index degree() const { return coeffs_.size() - 1; }
  bool is_zero() const;
  const ComplexVector& coeffs() const { return coeffs_; }
  Complex eval(Complex z) const;

 private:
  ComplexVector coeffs_;
};

/// Roots of p as eigenvalues of the balanced companion matrix.
/// \pre p is not identically zero (ZeroPolynomial otherwise). A nonzero
///   constant has no roots and yields an empty vector.
ComplexVector poly_roots(const ComplexPoly& p);

/// Monic polynomial with the given roots.
ComplexPoly poly_from_roots(const ComplexVector& roots);

/// Dense polynomial with real coefficients in ascending degree order.
class RealPoly {
 public:
  RealPoly() : coeffs_{0.0} {}
  RealPoly(std::initializer_list<Real> coeffs)
      : RealPoly(std::vector<Real>(coeffs)) {}
  explicit RealPoly(std::vector<Real> coeffs);

  static RealPoly constant(Real c) { return RealPoly({c}); }
  static RealPoly monomial(int power, Real scale = 1.0);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const;
  const std::vector<Real>& coeffs() const { return coeffs_; }
  Real coeff(int k) const;

  Real eval(Real x) const;
  Complex eval(Complex z) const;
  RealPoly derivative() const;
  RealPoly antiderivative() const;

  /// p(x + c) expanded in powers of x.
  RealPoly shifted_argument(Real c) const;

  RealPoly operator+(const RealPoly& rhs) const;
  RealPoly operator-(const RealPoly& rhs) const;
  RealPoly operator*(const RealPoly& rhs) const;
  RealPoly scaled(Real s) const;

  bool operator==(const RealPoly& rhs) const { return coeffs_ == rhs.coeffs_; }

 private:
  std::vector<Real> coeffs_;
};

/// Linear differential operator sum_n c_n(x) d^n/dx^n with polynomial
/// coefficients. Closed under composition, which is what makes exact
/// power-iteration and adjoint bookkeeping possible.
class PolyDiffOp {
 public:
  PolyDiffOp() : coeffs_{RealPoly::constant(0.0)} {}
  explicit PolyDiffOp(std::vector<RealPoly> coeffs);

  static PolyDiffOp identity();
  static PolyDiffOp derivative(int order = 1, Real scale = 1.0);

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const RealPoly& coeff(int n) const { return coeffs_[static_cast<size_t>(n)]; }
  bool constant_coefficients() const;

  /// Operator composition: (this o rhs) f = this(rhs(f)).
  PolyDiffOp compose(const PolyDiffOp& rhs) const;
  PolyDiffOp power(int k) const;
  PolyDiffOp operator+(const PolyDiffOp& rhs) const;
  PolyDiffOp scaled(Real s) const;

  /// Exact application to a polynomial.
  RealPoly apply(const RealPoly& p) const;

 private:
  std::vector<RealPoly> coeffs_;
};

}  // namespace gop
