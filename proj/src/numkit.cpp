#include "gop/numkit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace gop {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateNormalization: return "DegenerateNormalization";
    case ErrorCode::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::RegionViolation: return "RegionViolation";
    case ErrorCode::BranchViolation: return "BranchViolation";
    case ErrorCode::DomainEscape: return "DomainEscape";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::BoundaryViolation: return "BoundaryViolation";
    case ErrorCode::AdmissibilityFailure: return "AdmissibilityFailure";
    case ErrorCode::MissingMeasurement: return "MissingMeasurement";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

void require_finite(const ComplexMatrix& m, const char* where) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::DomainViolation,
                std::string(where) + ": non-finite matrix entry");
  }
}

void require_finite(const ComplexVector& v, const char* where) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::DomainViolation,
                std::string(where) + ": non-finite vector entry");
  }
}

RealVector singular_values(const ComplexMatrix& m) {
  require_finite(m, "singular_values");
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues();
}

ComplexVector null_vector(const ComplexMatrix& m, Real tol) {
  require_finite(m, "null_vector");
  if (m.cols() != m.rows() + 1 || m.rows() < 1) {
    throw Error(ErrorCode::ConfigError,
                "null_vector expects an M x (M+1) matrix");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const Real smax = sv(0);
  const Real smin = sv(sv.size() - 1);
  if (smax > 0 && smin < tol * smax) {
    throw Error(ErrorCode::RankDeficient,
                "null space is not one-dimensional (sigma_min/sigma_max = " +
                    std::to_string(smin / smax) + ")");
  }
  ComplexVector p = svd.matrixV().col(m.cols() - 1);
  p /= p.norm();
  const Complex last = p(p.size() - 1);
  if (std::abs(last) < 1e-12) {
    throw Error(ErrorCode::DegenerateNormalization,
                "kernel vector has vanishing last entry");
  }
  return p / last;
}

ComplexVector lstsq(const ComplexMatrix& a, const ComplexVector& b, Real tol) {
  require_finite(a, "lstsq");
  require_finite(b, "lstsq");
  if (a.rows() < a.cols()) {
    throw Error(ErrorCode::ConfigError, "lstsq expects rows >= cols");
  }
  if (a.rows() != b.size()) {
    throw Error(ErrorCode::ConfigError, "lstsq shape mismatch");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const Real smax = sv(0);
  const Real smin = sv(sv.size() - 1);
  if (smax <= 0 || smin < tol * smax) {
    throw Error(ErrorCode::RankDeficient,
                "coefficient matrix is numerically rank deficient");
  }
  return svd.solve(b);
}

ComplexPoly::ComplexPoly(ComplexVector coeffs) {
  Index n = coeffs.size();
  while (n > 1 && coeffs(n - 1) == Complex(0, 0)) --n;
  if (n < 1) {
    coeffs_ = ComplexVector::Zero(1);
  } else {
    coeffs_ = coeffs.head(n);
  }
  require_finite(coeffs_, "ComplexPoly");
}

bool ComplexPoly::is_zero() const {
  return coeffs_.size() == 1 && coeffs_(0) == Complex(0, 0);
}

Complex ComplexPoly::eval(Complex z) const {
  Complex acc(0, 0);
  for (Index k = coeffs_.size() - 1; k >= 0; --k) acc = acc * z + coeffs_(k);
  return acc;
}

namespace {

// Parlett-Reinsch balancing by powers of two; leaves eigenvalues unchanged.
void balance_in_place(ComplexMatrix& a) {
  const Index n = a.rows();
  const Real radix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Index i = 0; i < n; ++i) {
      Real row = 0, col = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        row += std::abs(a(i, j));
        col += std::abs(a(j, i));
      }
      if (row == 0 || col == 0) continue;
      Real f = 1.0;
      const Real s = row + col;
      while (col < row / radix) {
        col *= radix;
        row /= radix;
        f *= radix;
      }
      while (col >= row * radix) {
        col /= radix;
        row *= radix;
        f /= radix;
      }
      if (row + col < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace

ComplexVector poly_roots(const ComplexPoly& p) {
  if (p.is_zero()) {
    throw Error(ErrorCode::ZeroPolynomial,
                "root finding on the zero polynomial");
  }
  const Index deg = p.degree();
  if (deg < 1) return ComplexVector(0);
  const ComplexVector& c = p.coeffs();
  ComplexMatrix companion = ComplexMatrix::Zero(deg, deg);
  const Complex lead = c(deg);
  for (Index i = 0; i < deg; ++i) companion(i, deg - 1) = -c(i) / lead;
  for (Index i = 1; i < deg; ++i) companion(i, i - 1) = Complex(1, 0);
  balance_in_place(companion);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(companion, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::RankDeficient,
                "companion eigenvalue iteration failed");
  }
  return es.eigenvalues();
}

ComplexPoly poly_from_roots(const ComplexVector& roots) {
  ComplexVector c = ComplexVector::Zero(roots.size() + 1);
  c(0) = Complex(1, 0);
  for (Index i = 0; i < roots.size(); ++i) {
    for (Index k = i + 1; k >= 1; --k) c(k) = c(k - 1) - roots(i) * c(k);
    c(0) *= -roots(i);
  }
  return ComplexPoly(c);
}

RealPoly::RealPoly(std::vector<Real> coeffs) : coeffs_(std::move(coeffs)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_ = {0.0};
  for (Real c : coeffs_) {
    if (!std::isfinite(c)) {
      throw Error(ErrorCode::DomainViolation, "RealPoly: non-finite coefficient");
    }
  }
}

RealPoly RealPoly::monomial(int power, Real scale) {
  std::vector<Real> c(static_cast<size_t>(power) + 1, 0.0);
  c.back() = scale;
  return RealPoly(std::move(c));
}

bool RealPoly::is_zero() const {
  return coeffs_.size() == 1 && coeffs_[0] == 0.0;
}

Real RealPoly::coeff(int k) const {
  if (k < 0 || k > degree()) return 0.0;
  return coeffs_[static_cast<size_t>(k)];
}

Real RealPoly::eval(Real x) const {
  // Compensated Horner. Repeated kernel adjoints produce polynomials whose
  // coefficients cancel by many orders of magnitude at evaluation; plain
  // Horner noise then dominates quadrature error estimates. Error-free
  // transformations (fma products, TwoSum) restore ~eps relative accuracy.
  auto it = coeffs_.rbegin();
  Real acc = *it;
  Real comp = 0;
  for (++it; it != coeffs_.rend(); ++it) {
    const Real prod = acc * x;
    const Real perr = std::fma(acc, x, -prod);
    acc = prod + *it;
    const Real z = acc - prod;
    const Real serr = (prod - (acc - z)) + (*it - z);
    comp = comp * x + (perr + serr);
  }
  return acc + comp;
}

Complex RealPoly::eval(Complex z) const {
  Complex acc(0, 0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

RealPoly RealPoly::derivative() const {
  if (degree() == 0) return RealPoly::constant(0.0);
  std::vector<Real> c(coeffs_.size() - 1);
  for (size_t k = 1; k < coeffs_.size(); ++k) {
    c[k - 1] = coeffs_[k] * static_cast<Real>(k);
  }
  return RealPoly(std::move(c));
}

RealPoly RealPoly::antiderivative() const {
  std::vector<Real> c(coeffs_.size() + 1, 0.0);
  for (size_t k = 0; k < coeffs_.size(); ++k) {
    c[k + 1] = coeffs_[k] / static_cast<Real>(k + 1);
  }
  return RealPoly(std::move(c));
}

RealPoly RealPoly::shifted_argument(Real c) const {
  // Horner in (x + c): repeatedly multiply by (x + c) and add coefficients.
  std::vector<Real> acc{0.0};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    std::vector<Real> next(acc.size() + 1, 0.0);
    for (size_t k = 0; k < acc.size(); ++k) {
      next[k + 1] += acc[k];
      next[k] += acc[k] * c;
    }
    next[0] += *it;
    acc = std::move(next);
  }
  return RealPoly(std::move(acc));
}

RealPoly RealPoly::operator+(const RealPoly& rhs) const {
  std::vector<Real> c(std::max(coeffs_.size(), rhs.coeffs_.size()), 0.0);
  for (size_t k = 0; k < coeffs_.size(); ++k) c[k] += coeffs_[k];
  for (size_t k = 0; k < rhs.coeffs_.size(); ++k) c[k] += rhs.coeffs_[k];
  return RealPoly(std::move(c));
}

RealPoly RealPoly::operator-(const RealPoly& rhs) const {
  return *this + rhs.scaled(-1.0);
}

RealPoly RealPoly::operator*(const RealPoly& rhs) const {
  std::vector<Real> c(coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    for (size_t j = 0; j < rhs.coeffs_.size(); ++j) {
      c[i + j] += coeffs_[i] * rhs.coeffs_[j];
    }
  }
  return RealPoly(std::move(c));
}

RealPoly RealPoly::scaled(Real s) const {
  std::vector<Real> c = coeffs_;
  for (Real& v : c) v *= s;
  return RealPoly(std::move(c));
}

PolyDiffOp::PolyDiffOp(std::vector<RealPoly> coeffs) : coeffs_(std::move(coeffs)) {
  while (coeffs_.size() > 1 && coeffs_.back().is_zero()) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_ = {RealPoly::constant(0.0)};
}

PolyDiffOp PolyDiffOp::identity() {
  return PolyDiffOp({RealPoly::constant(1.0)});
}

PolyDiffOp PolyDiffOp::derivative(int order, Real scale) {
  std::vector<RealPoly> c(static_cast<size_t>(order) + 1,
                          RealPoly::constant(0.0));
  c.back() = RealPoly::constant(scale);
  return PolyDiffOp(std::move(c));
}

bool PolyDiffOp::constant_coefficients() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const RealPoly& p) { return p.degree() == 0; });
}

PolyDiffOp PolyDiffOp::compose(const PolyDiffOp& rhs) const {
  // g(x) d^n applied to q(x) d^m f expands by Leibniz:
  //   g d^n (q d^m f) = g sum_j C(n,j) q^{(j)} d^{n-j+m} f.
  std::vector<RealPoly> out(
      static_cast<size_t>(order() + rhs.order()) + 1, RealPoly::constant(0.0));
  for (int n = 0; n <= order(); ++n) {
    if (coeffs_[static_cast<size_t>(n)].is_zero()) continue;
    for (int m = 0; m <= rhs.order(); ++m) {
      RealPoly qd = rhs.coeffs_[static_cast<size_t>(m)];
      Real binom = 1.0;
      for (int j = 0; j <= n; ++j) {
        if (!qd.is_zero()) {
          out[static_cast<size_t>(n - j + m)] =
              out[static_cast<size_t>(n - j + m)] +
              coeffs_[static_cast<size_t>(n)] * qd.scaled(binom);
        }
        binom = binom * static_cast<Real>(n - j) / static_cast<Real>(j + 1);
        qd = qd.derivative();
      }
    }
  }
  return PolyDiffOp(std::move(out));
}

PolyDiffOp PolyDiffOp::power(int k) const {
  PolyDiffOp acc = PolyDiffOp::identity();
  for (int i = 0; i < k; ++i) acc = acc.compose(*this);
  return acc;
}

PolyDiffOp PolyDiffOp::operator+(const PolyDiffOp& rhs) const {
  std::vector<RealPoly> out(
      static_cast<size_t>(std::max(order(), rhs.order())) + 1,
      RealPoly::constant(0.0));
  for (int n = 0; n <= order(); ++n) {
    out[static_cast<size_t>(n)] =
        out[static_cast<size_t>(n)] + coeffs_[static_cast<size_t>(n)];
  }
  for (int n = 0; n <= rhs.order(); ++n) {
    out[static_cast<size_t>(n)] =
        out[static_cast<size_t>(n)] + rhs.coeffs_[static_cast<size_t>(n)];
  }
  return PolyDiffOp(std::move(out));
}

PolyDiffOp PolyDiffOp::scaled(Real s) const {
  std::vector<RealPoly> out = coeffs_;
  for (RealPoly& p : out) p = p.scaled(s);
  return PolyDiffOp(std::move(out));
}

RealPoly PolyDiffOp::apply(const RealPoly& p) const {
  RealPoly acc = RealPoly::constant(0.0);
  RealPoly d = p;
  for (int n = 0; n <= order(); ++n) {
    if (!coeffs_[static_cast<size_t>(n)].is_zero()) {
      acc = acc + coeffs_[static_cast<size_t>(n)] * d;
    }
    d = d.derivative();
  }
  return acc;
}

}  // namespace gop
