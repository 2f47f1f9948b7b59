#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "gop/numkit.hpp"

namespace gop::taylor {

/// Truncated Taylor expansion around a base point: c[k] = f^(k)(x0) / k!.
/// Arithmetic on these jets propagates derivatives exactly (up to floating
/// point), which is how the eigenfunction families provide analytic
/// derivatives of any requested order.
template <class T>
struct Series {
  std::vector<T> c;

  int order() const { return static_cast<int>(c.size()) - 1; }
  T derivative(int m) const {
    T fact(1);
    for (int k = 2; k <= m; ++k) fact *= T(k);
    return c[static_cast<size_t>(m)] * fact;
  }
};

using RealSeries = Series<Real>;
using ComplexSeries = Series<Complex>;

template <class T>
Series<T> constant(T value, int order) {
  Series<T> s;
  s.c.assign(static_cast<size_t>(order) + 1, T(0));
  s.c[0] = value;
  return s;
}

/// The identity function x at base point x0.
inline RealSeries variable(Real x0, int order) {
  RealSeries s = constant(x0, order);
  if (order >= 1) s.c[1] = 1.0;
  return s;
}

template <class T>
Series<T> add(const Series<T>& a, const Series<T>& b) {
  Series<T> s = a;
  for (size_t k = 0; k < s.c.size(); ++k) s.c[k] += b.c[k];
  return s;
}

template <class T>
Series<T> sub(const Series<T>& a, const Series<T>& b) {
  Series<T> s = a;
  for (size_t k = 0; k < s.c.size(); ++k) s.c[k] -= b.c[k];
  return s;
}

template <class T, class S>
Series<T> scale(const Series<T>& a, S factor) {
  Series<T> s = a;
  for (auto& v : s.c) v *= factor;
  return s;
}

template <class T>
Series<T> mul(const Series<T>& a, const Series<T>& b) {
  Series<T> s = constant(T(0), a.order());
  for (size_t i = 0; i < a.c.size(); ++i) {
    for (size_t j = 0; i + j < s.c.size(); ++j) s.c[i + j] += a.c[i] * b.c[j];
  }
  return s;
}

template <class T>
Series<T> div(const Series<T>& a, const Series<T>& b) {
  if (std::abs(b.c[0]) == 0) {
    throw Error(ErrorCode::DomainViolation, "series division by zero value");
  }
  Series<T> s = constant(T(0), a.order());
  for (size_t k = 0; k < s.c.size(); ++k) {
    T acc = a.c[k];
    for (size_t j = 1; j <= k; ++j) acc -= b.c[j] * s.c[k - j];
    s.c[k] = acc / b.c[0];
  }
  return s;
}

template <class T>
Series<T> exp(const Series<T>& u) {
  Series<T> s = constant(T(0), u.order());
  s.c[0] = std::exp(u.c[0]);
  for (int k = 1; k <= u.order(); ++k) {
    T acc(0);
    for (int j = 1; j <= k; ++j) {
      acc += T(j) * u.c[static_cast<size_t>(j)] * s.c[static_cast<size_t>(k - j)];
    }
    s.c[static_cast<size_t>(k)] = acc / T(k);
  }
  return s;
}

namespace detail {

/// Termwise derivative, one order shorter conceptually but kept padded.
inline RealSeries deriv_series(const RealSeries& u) {
  RealSeries d = constant(0.0, u.order());
  for (int j = 1; j <= u.order(); ++j) {
    d.c[static_cast<size_t>(j - 1)] = u.c[static_cast<size_t>(j)] * j;
  }
  return d;
}

/// Antiderivative of du matching value0 at the base point.
inline RealSeries integrate(const RealSeries& du, Real value0, int order) {
  RealSeries s = constant(value0, order);
  for (int k = 1; k <= order; ++k) {
    s.c[static_cast<size_t>(k)] = du.c[static_cast<size_t>(k - 1)] / k;
  }
  return s;
}

}  // namespace detail

inline RealSeries sqrt(const RealSeries& u) {
  if (u.c[0] <= 0) {
    throw Error(ErrorCode::DomainViolation, "series sqrt at nonpositive value");
  }
  RealSeries s = constant(0.0, u.order());
  s.c[0] = std::sqrt(u.c[0]);
  for (int k = 1; k <= u.order(); ++k) {
    Real acc = u.c[static_cast<size_t>(k)];
    for (int j = 1; j < k; ++j) {
      acc -= s.c[static_cast<size_t>(j)] * s.c[static_cast<size_t>(k - j)];
    }
    s.c[static_cast<size_t>(k)] = acc / (2.0 * s.c[0]);
  }
  return s;
}

inline RealSeries log(const RealSeries& u) {
  if (u.c[0] <= 0) {
    throw Error(ErrorCode::DomainViolation, "series log at nonpositive value");
  }
  RealSeries d = div(detail::deriv_series(u), u);
  return detail::integrate(d, std::log(u.c[0]), u.order());
}

/// Joint sine/cosine of a real series.
inline std::pair<RealSeries, RealSeries> sin_cos(const RealSeries& u) {
  RealSeries s = constant(std::sin(u.c[0]), u.order());
  RealSeries c = constant(std::cos(u.c[0]), u.order());
  for (int k = 1; k <= u.order(); ++k) {
    Real sa = 0, ca = 0;
    for (int j = 1; j <= k; ++j) {
      const Real ju = j * u.c[static_cast<size_t>(j)];
      sa += ju * c.c[static_cast<size_t>(k - j)];
      ca -= ju * s.c[static_cast<size_t>(k - j)];
    }
    s.c[static_cast<size_t>(k)] = sa / k;
    c.c[static_cast<size_t>(k)] = ca / k;
  }
  return {s, c};
}

/// Joint hyperbolic sine/cosine of a real series.
inline std::pair<RealSeries, RealSeries> sinh_cosh(const RealSeries& u) {
  RealSeries s = constant(std::sinh(u.c[0]), u.order());
  RealSeries c = constant(std::cosh(u.c[0]), u.order());
  for (int k = 1; k <= u.order(); ++k) {
    Real sa = 0, ca = 0;
    for (int j = 1; j <= k; ++j) {
      const Real ju = j * u.c[static_cast<size_t>(j)];
      sa += ju * c.c[static_cast<size_t>(k - j)];
      ca += ju * s.c[static_cast<size_t>(k - j)];
    }
    s.c[static_cast<size_t>(k)] = sa / k;
    c.c[static_cast<size_t>(k)] = ca / k;
  }
  return {s, c};
}

/// u^p for real exponent p, requiring u > 0 at the base point.
inline RealSeries pow(const RealSeries& u, Real p) {
  return exp(scale(log(u), p));
}

inline RealSeries asin(const RealSeries& u) {
  if (std::abs(u.c[0]) >= 1.0) {
    throw Error(ErrorCode::DomainViolation, "series asin needs |value| < 1");
  }
  RealSeries one = constant(1.0, u.order());
  RealSeries root = sqrt(sub(one, mul(u, u)));
  RealSeries d = div(detail::deriv_series(u), root);
  return detail::integrate(d, std::asin(u.c[0]), u.order());
}

inline RealSeries acos(const RealSeries& u) {
  RealSeries s = scale(asin(u), -1.0);
  s.c[0] = std::acos(u.c[0]);
  return s;
}

inline RealSeries asinh(const RealSeries& u) {
  RealSeries one = constant(1.0, u.order());
  RealSeries root = sqrt(add(one, mul(u, u)));
  RealSeries d = div(detail::deriv_series(u), root);
  return detail::integrate(d, std::asinh(u.c[0]), u.order());
}

inline RealSeries acosh(const RealSeries& u) {
  if (u.c[0] <= 1.0) {
    throw Error(ErrorCode::DomainViolation, "series acosh needs value > 1");
  }
  RealSeries one = constant(1.0, u.order());
  RealSeries root = sqrt(sub(mul(u, u), one));
  RealSeries d = div(detail::deriv_series(u), root);
  return detail::integrate(d, std::acosh(u.c[0]), u.order());
}

/// Lift a real jet into a complex one.
inline ComplexSeries complexify(const RealSeries& u) {
  ComplexSeries s;
  s.c.assign(u.c.begin(), u.c.end());
  return s;
}

}  // namespace gop::taylor
