// Independent reference implementations used only by the tests. These
// deliberately avoid the library's own linear algebra paths (and Eigen's
// decompositions) so the two sides can check each other.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "gop/numkit.hpp"

namespace oracle {

using gop::Complex;
using gop::ComplexMatrix;
using gop::ComplexVector;
using gop::Real;

/// Singular values via one-sided Jacobi: rotate column pairs until all are
/// mutually orthogonal, then read off the column norms.
inline std::vector<Real> jacobi_singular_values(ComplexMatrix a) {
  if (a.rows() < a.cols()) a = ComplexMatrix(a.adjoint());
  const int n = static_cast<int>(a.cols());
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Complex g = a.col(i).dot(a.col(j));  // conj(col_i) . col_j
        const Real na = a.col(i).squaredNorm();
        const Real nb = a.col(j).squaredNorm();
        if (std::abs(g) <= 1e-15 * std::sqrt(na * nb) || std::abs(g) == 0.0)
          continue;
        rotated = true;
        const Complex phase = g / std::abs(g);
        // Align phases, then a real Jacobi rotation kills the coupling.
        const Real tau = (nb - na) / (2 * std::abs(g));
        const Real t = (tau >= 0 ? 1.0 : -1.0) /
                       (std::abs(tau) + std::sqrt(1 + tau * tau));
        const Real c = 1 / std::sqrt(1 + t * t);
        const Real s = c * t;
        for (int r = 0; r < a.rows(); ++r) {
          const Complex u = a(r, i);
          const Complex v = a(r, j) * std::conj(phase);
          a(r, i) = c * u - s * v;
          a(r, j) = (s * u + c * v) * phase;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<Real> sv;
  for (int j = 0; j < n; ++j) sv.push_back(a.col(j).norm());
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

/// Determinant by Gaussian elimination with partial pivoting.
inline Complex determinant(ComplexMatrix m) {
  const int n = static_cast<int>(m.rows());
  Complex det(1, 0);
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(m(r, k)) > std::abs(m(pivot, k))) pivot = r;
    if (std::abs(m(pivot, k)) == 0.0) return Complex(0, 0);
    if (pivot != k) {
      m.row(pivot).swap(m.row(k));
      det = -det;
    }
    det *= m(k, k);
    for (int r = k + 1; r < n; ++r) {
      const Complex f = m(r, k) / m(k, k);
      m.row(r) -= f * m.row(k);
    }
  }
  return det;
}

/// Kernel vector of an M x (M+1) matrix from bordered determinants:
/// p_l = (-1)^l det(A without column l), normalized to p_M = 1.
inline ComplexVector bordered_null_vector(const ComplexMatrix& a) {
  const int m = static_cast<int>(a.rows());
  ComplexVector p(m + 1);
  for (int l = 0; l <= m; ++l) {
    ComplexMatrix sub(m, m);
    int c = 0;
    for (int j = 0; j <= m; ++j) {
      if (j == l) continue;
      sub.col(c++) = a.col(j);
    }
    p(l) = (l % 2 == 0 ? 1.0 : -1.0) * determinant(sub);
  }
  return p / p(m);
}

/// Gaussian elimination solve of a square system.
inline ComplexVector gauss_solve(ComplexMatrix m, ComplexVector b) {
  const int n = static_cast<int>(m.rows());
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(m(r, k)) > std::abs(m(pivot, k))) pivot = r;
    if (pivot != k) {
      m.row(pivot).swap(m.row(k));
      std::swap(b(pivot), b(k));
    }
    for (int r = k + 1; r < n; ++r) {
      const Complex f = m(r, k) / m(k, k);
      m.row(r) -= f * m.row(k);
      b(r) -= f * b(k);
    }
  }
  ComplexVector x(n);
  for (int k = n - 1; k >= 0; --k) {
    Complex acc = b(k);
    for (int j = k + 1; j < n; ++j) acc -= m(k, j) * x(j);
    x(k) = acc / m(k, k);
  }
  return x;
}

/// Least squares through the normal equations (independent of SVD).
inline ComplexVector normal_equation_lstsq(const ComplexMatrix& a,
                                           const ComplexVector& b) {
  return gauss_solve(a.adjoint() * a, a.adjoint() * b);
}

/// Composite Simpson quadrature with a fixed panel count.
inline Complex simpson(const std::function<Complex(Real)>& f, Real a, Real b,
                       int panels = 4096) {
  const Real h = (b - a) / (2 * panels);
  Complex acc = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i)
    acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

/// Degree-9 Legendre polynomial, ascending coefficients (Rodrigues form,
/// computed independently and frozen).
inline const std::vector<Real>& legendre9_coeffs() {
  static const std::vector<Real> c = {
      0.0,         315.0 / 128.0,  0.0, -1155.0 / 32.0, 0.0,
      9009.0 / 64.0, 0.0,          -6435.0 / 32.0, 0.0, 12155.0 / 128.0};
  return c;
}

/// P_9(0.3) exactly representable in double.
inline constexpr Real kLegendre9At03 = 0.0637003817578125;

inline Real eval_poly(const std::vector<Real>& ascending, Real x) {
  Real v = 0;
  for (auto it = ascending.rbegin(); it != ascending.rend(); ++it)
    v = v * x + *it;
  return v;
}

inline std::vector<Real> poly_derivative(const std::vector<Real>& ascending) {
  std::vector<Real> d;
  for (size_t k = 1; k < ascending.size(); ++k)
    d.push_back(static_cast<Real>(k) * ascending[k]);
  if (d.empty()) d.push_back(0);
  return d;
}

/// Naive convolution product of ascending coefficient vectors.
inline std::vector<Real> poly_mul(const std::vector<Real>& a,
                                  const std::vector<Real>& b) {
  std::vector<Real> c(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

/// Central finite difference of a scalar function.
inline Real central_diff(const std::function<Real(Real)>& f, Real x, int order,
                         Real h = 1e-4) {
  if (order == 0) return f(x);
  if (order == 1) return (f(x + h) - f(x - h)) / (2 * h);
  if (order == 2) return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
  // order 3
  return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) /
         (2 * h * h * h);
}

}  // namespace oracle
