#include "gop/families.hpp"

#include <cmath>

namespace gop {

namespace {

constexpr Real kPi = 3.14159265358979323846;
constexpr Real kInf = std::numeric_limits<Real>::infinity();
constexpr int kMaxDerivativeOrder = 64;

void check_order(int order) {
  if (order < 0 || order > kMaxDerivativeOrder) {
    throw Error(ErrorCode::ConfigError, "derivative order out of range");
  }
}

Complex complex_cos(Complex z) {
  return std::cos(z);
}

/// cos of a complex jet via the two exponentials.
taylor::ComplexSeries series_cos(const taylor::ComplexSeries& w) {
  const Complex i(0, 1);
  taylor::ComplexSeries e1 = taylor::exp(taylor::scale(w, i));
  taylor::ComplexSeries e2 = taylor::exp(taylor::scale(w, -i));
  return taylor::scale(taylor::add(e1, e2), Complex(0.5, 0));
}

}  // namespace

SmoothFunc smooth_zero() {
  SmoothFunc f;
  f.value = [](Real) { return 0.0; };
  f.series = [](Real, int order) { return taylor::constant(0.0, order); };
  f.identically_zero = true;
  return f;
}

SmoothFunc smooth_from_poly(const RealPoly& p) {
  if (p.is_zero()) return smooth_zero();
  SmoothFunc f;
  f.value = [p](Real x) { return p.eval(x); };
  f.series = [p](Real x, int order) {
    taylor::RealSeries s = taylor::constant(0.0, order);
    RealPoly shifted = p.shifted_argument(x);
    for (int k = 0; k <= order && k <= shifted.degree(); ++k) {
      s.c[static_cast<size_t>(k)] = shifted.coeff(k);
    }
    return s;
  };
  return f;
}

CoordinateChart identity_chart() {
  CoordinateChart c;
  c.name = "identity";
  c.map.value = [](Real x) { return x; };
  c.map.series = [](Real x, int order) { return taylor::variable(x, order); };
  c.inverse = [](Real u) { return u; };
  c.domain = Interval::whole_line();
  c.image = Interval::whole_line();
  c.is_identity = true;
  return c;
}

const std::vector<std::string>& preset_chart_names() {
  static const std::vector<std::string> names = {
      "linear", "quadratic", "log",    "power",  "arccos", "arcsin",
      "arcosh", "arsinh",    "sin",    "cos",    "sinh",   "cosh"};
  return names;
}

CoordinateChart preset_chart(const std::string& name, Real exponent) {
  CoordinateChart c;
  c.name = name;
  if (name == "linear") {
    c = identity_chart();
    c.name = "linear";
    return c;
  }
  if (name == "quadratic") {
    // G(x) = -x^2/2 on (0, inf), decreasing onto (-inf, 0).
    c.map.value = [](Real x) { return -0.5 * x * x; };
    c.map.series = [](Real x, int order) {
      taylor::RealSeries v = taylor::variable(x, order);
      return taylor::scale(taylor::mul(v, v), -0.5);
    };
    c.inverse = [](Real u) { return std::sqrt(-2.0 * u); };
    c.domain = Interval{0.0, kInf};
    c.image = Interval{-kInf, 0.0};
    return c;
  }
  if (name == "log") {
    c.map.value = [](Real x) { return std::log(x); };
    c.map.series = [](Real x, int order) {
      return taylor::log(taylor::variable(x, order));
    };
    c.inverse = [](Real u) { return std::exp(u); };
    c.domain = Interval{0.0, kInf};
    c.image = Interval::whole_line();
    return c;
  }
  if (name == "power") {
    // G(x) = x^(1-p)/(1-p) on (0, inf) for p != 1.
    if (exponent == 1.0) {
      throw Error(ErrorCode::ConfigError,
                  "power chart needs an exponent different from 1");
    }
    const Real q = 1.0 - exponent;
    c.map.value = [q](Real x) { return std::pow(x, q) / q; };
    c.map.series = [q](Real x, int order) {
      return taylor::scale(taylor::pow(taylor::variable(x, order), q), 1.0 / q);
    };
    c.inverse = [q](Real u) { return std::pow(q * u, 1.0 / q); };
    c.domain = Interval{0.0, kInf};
    c.image = q > 0 ? Interval{0.0, kInf} : Interval{-kInf, 0.0};
    return c;
  }
  if (name == "arccos") {
    c.map.value = [](Real x) { return std::acos(x); };
    c.map.series = [](Real x, int order) {
      return taylor::acos(taylor::variable(x, order));
    };
    c.inverse = [](Real u) { return std::cos(u); };
    c.domain = Interval{-1.0, 1.0};
    c.image = Interval{0.0, kPi};
    return c;
  }
  if (name == "arcsin") {
    c.map.value = [](Real x) { return std::asin(x); };
    c.map.series = [](Real x, int order) {
      return taylor::asin(taylor::variable(x, order));
    };
    c.inverse = [](Real u) { return std::sin(u); };
    c.domain = Interval{-1.0, 1.0};
    c.image = Interval{-kPi / 2, kPi / 2};
    return c;
  }
  if (name == "arcosh") {
    c.map.value = [](Real x) { return std::acosh(x); };
    c.map.series = [](Real x, int order) {
      return taylor::acosh(taylor::variable(x, order));
    };
    c.inverse = [](Real u) { return std::cosh(u); };
    c.domain = Interval{1.0, kInf};
    c.image = Interval{0.0, kInf};
    return c;
  }
  if (name == "arsinh") {
    c.map.value = [](Real x) { return std::asinh(x); };
    c.map.series = [](Real x, int order) {
      return taylor::asinh(taylor::variable(x, order));
    };
    c.inverse = [](Real u) { return std::sinh(u); };
    c.domain = Interval::whole_line();
    c.image = Interval::whole_line();
    return c;
  }
  if (name == "sin") {
    c.map.value = [](Real x) { return std::sin(x); };
    c.map.series = [](Real x, int order) {
      return taylor::sin_cos(taylor::variable(x, order)).first;
    };
    c.inverse = [](Real u) { return std::asin(u); };
    c.domain = Interval{-kPi / 2, kPi / 2};
    c.image = Interval{-1.0, 1.0};
    return c;
  }
  if (name == "cos") {
    // Decreasing on (0, pi).
    c.map.value = [](Real x) { return std::cos(x); };
    c.map.series = [](Real x, int order) {
      return taylor::sin_cos(taylor::variable(x, order)).second;
    };
    c.inverse = [](Real u) { return std::acos(u); };
    c.domain = Interval{0.0, kPi};
    c.image = Interval{-1.0, 1.0};
    return c;
  }
  if (name == "sinh") {
    c.map.value = [](Real x) { return std::sinh(x); };
    c.map.series = [](Real x, int order) {
      return taylor::sinh_cosh(taylor::variable(x, order)).first;
    };
    c.inverse = [](Real u) { return std::asinh(u); };
    c.domain = Interval::whole_line();
    c.image = Interval::whole_line();
    return c;
  }
  if (name == "cosh") {
    // Increasing on (0, inf).
    c.map.value = [](Real x) { return std::cosh(x); };
    c.map.series = [](Real x, int order) {
      return taylor::sinh_cosh(taylor::variable(x, order)).second;
    };
    c.inverse = [](Real u) { return std::acosh(u); };
    c.domain = Interval{0.0, kInf};
    c.image = Interval{1.0, kInf};
    return c;
  }
  throw Error(ErrorCode::ConfigError, "unknown chart preset: " + name);
}

const char* family_kind_name(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::Exponential: return "exponential";
    case FamilyKind::Cosine: return "cosine";
    case FamilyKind::GeneralizedExp: return "generalized_exp";
    case FamilyKind::ShiftedGaussian: return "shifted_gaussian";
    case FamilyKind::ChebyshevLike: return "chebyshev";
    case FamilyKind::Legendre: return "legendre";
  }
  return "unknown";
}

Real legendre_eval(int n, Real x) {
  if (n < 0) throw Error(ErrorCode::ConfigError, "legendre degree must be >= 0");
  Real pkm1 = 1.0;
  if (n == 0) return pkm1;
  Real pk = x;
  for (int k = 1; k < n; ++k) {
    const Real pkp1 = ((2 * k + 1) * x * pk - k * pkm1) / (k + 1);
    pkm1 = pk;
    pk = pkp1;
  }
  return pk;
}

Real legendre_derivative(int n, Real x, int order) {
  check_order(order);
  if (n < 0) throw Error(ErrorCode::ConfigError, "legendre degree must be >= 0");
  if (order == 0) return legendre_eval(n, x);
  if (order > n) return 0.0;
  const Real one_minus_x2 = 1.0 - x * x;
  if (one_minus_x2 == 0.0) {
    // d^m P_n (+-1) = (+-1)^(n+m) (n+m)! / (2^m m! (n-m)!).
    Real v = 1.0;
    for (int j = n - order + 1; j <= n + order; ++j) v *= j;
    for (int j = 1; j <= order; ++j) v /= (2.0 * j);
    if (x < 0 && ((n + order) % 2 != 0)) v = -v;
    return v;
  }
  // Taylor coefficients a_k of P_n at x from the differential equation
  // (1-x^2) y'' - 2x y' + n(n+1) y = 0:
  //   (1-x^2)(k+2)(k+1) a_{k+2} = 2x(k+1)^2 a_{k+1} + (k(k+1) - n(n+1)) a_k.
  const Real p0 = legendre_eval(n, x);
  const Real p1 = n * (legendre_eval(n - 1, x) - x * p0) / one_minus_x2;
  if (order == 1) return p1;
  std::vector<Real> a(static_cast<size_t>(order) + 1);
  a[0] = p0;
  a[1] = p1;
  const Real nn1 = static_cast<Real>(n) * (n + 1);
  for (int k = 0; k + 2 <= order; ++k) {
    a[static_cast<size_t>(k + 2)] =
        (2.0 * x * (k + 1) * (k + 1) * a[static_cast<size_t>(k + 1)] +
         (static_cast<Real>(k) * (k + 1) - nn1) * a[static_cast<size_t>(k)]) /
        (one_minus_x2 * (k + 2) * (k + 1));
  }
  Real fact = 1.0;
  for (int k = 2; k <= order; ++k) fact *= k;
  return a[static_cast<size_t>(order)] * fact;
}

EigenFamily EigenFamily::exponential(Real band) {
  if (band <= 0) throw Error(ErrorCode::ConfigError, "band constant must be > 0");
  EigenFamily f;
  f.kind_ = FamilyKind::Exponential;
  f.band_ = band;
  f.domain_ = Interval::whole_line();
  f.chart_ = identity_chart();
  f.logweight_ = smooth_zero();
  return f;
}

EigenFamily EigenFamily::cosine(Real band) {
  if (band <= 0) throw Error(ErrorCode::ConfigError, "band constant must be > 0");
  EigenFamily f;
  f.kind_ = FamilyKind::Cosine;
  f.band_ = band;
  f.domain_ = Interval::whole_line();
  f.chart_ = identity_chart();
  f.logweight_ = smooth_zero();
  return f;
}

EigenFamily EigenFamily::generalized_exp(CoordinateChart chart,
                                         SmoothFunc logweight, Real band) {
  if (band <= 0) throw Error(ErrorCode::ConfigError, "band constant must be > 0");
  EigenFamily f;
  f.kind_ = FamilyKind::GeneralizedExp;
  f.band_ = band;
  f.domain_ = chart.domain;
  f.chart_ = std::move(chart);
  f.logweight_ = std::move(logweight);
  return f;
}

EigenFamily EigenFamily::generalized_exp_preset(const std::string& chart_name,
                                                Real band,
                                                const RealPoly& logweight,
                                                Real exponent) {
  return generalized_exp(preset_chart(chart_name, exponent),
                         smooth_from_poly(logweight), band);
}

EigenFamily EigenFamily::shifted_gaussian(Real alpha) {
  if (alpha <= 0) {
    throw Error(ErrorCode::ConfigError, "gaussian width must be > 0");
  }
  EigenFamily f;
  f.kind_ = FamilyKind::ShiftedGaussian;
  f.alpha_ = alpha;
  f.band_ = kInf;
  f.domain_ = Interval::whole_line();
  // exp(-a(x - lambda)^2) = exp(-a lambda^2) exp(H(x) + lambda G(x)) with
  // G = 2ax and H = -ax^2, so shifts act through the linear chart G.
  CoordinateChart c;
  c.name = "gaussian";
  c.map.value = [alpha](Real x) { return 2.0 * alpha * x; };
  c.map.series = [alpha](Real x, int order) {
    return taylor::scale(taylor::variable(x, order), 2.0 * alpha);
  };
  c.inverse = [alpha](Real u) { return u / (2.0 * alpha); };
  c.domain = Interval::whole_line();
  c.image = Interval::whole_line();
  f.chart_ = std::move(c);
  f.logweight_ = smooth_from_poly(RealPoly({0.0, 0.0, -alpha}));
  return f;
}

EigenFamily EigenFamily::chebyshev_like(Real band) {
  if (band <= 0) throw Error(ErrorCode::ConfigError, "band constant must be > 0");
  EigenFamily f;
  f.kind_ = FamilyKind::ChebyshevLike;
  f.band_ = band;
  f.domain_ = Interval{-1.0, 1.0};
  f.chart_ = preset_chart("arccos");
  f.logweight_ = smooth_zero();
  return f;
}

EigenFamily EigenFamily::legendre() {
  EigenFamily f;
  f.kind_ = FamilyKind::Legendre;
  f.band_ = kInf;
  f.domain_ = Interval{-1.0, 1.0};
  f.chart_ = identity_chart();
  f.logweight_ = smooth_zero();
  return f;
}

bool EigenFamily::even_in_chart() const {
  return kind_ == FamilyKind::Cosine || kind_ == FamilyKind::ChebyshevLike;
}

bool EigenFamily::in_region(Complex lambda, Real slack) const {
  switch (kind_) {
    case FamilyKind::Exponential:
      // Half open: the top edge aliases the bottom one under the map.
      return lambda.imag() >= -band_ * kPi - slack &&
             lambda.imag() < band_ * kPi;
    case FamilyKind::Cosine:
      return std::abs(lambda.imag()) <= slack && lambda.real() >= -slack &&
             lambda.real() < band_;
    case FamilyKind::GeneralizedExp:
      return lambda.imag() >= -band_ - slack && lambda.imag() < band_;
    case FamilyKind::ShiftedGaussian:
      return std::abs(lambda.imag()) <= slack;
    case FamilyKind::ChebyshevLike:
      return std::abs(lambda.imag()) <= slack && lambda.real() >= -slack &&
             lambda.real() < band_;
    case FamilyKind::Legendre: {
      if (std::abs(lambda.imag()) > slack || lambda.real() < -slack) return false;
      const Real nearest = std::round(lambda.real());
      return std::abs(lambda.real() - nearest) <= std::max(slack, 1e-6);
    }
  }
  return false;
}

void EigenFamily::require_in_region(Complex lambda) const {
  if (!in_region(lambda)) {
    throw Error(ErrorCode::RegionViolation,
                std::string("eigenvalue parameter outside the ") +
                    family_kind_name(kind_) + " region");
  }
}

Complex EigenFamily::operator_eigenvalue(Complex lambda) const {
  switch (kind_) {
    case FamilyKind::Exponential:
    case FamilyKind::GeneralizedExp:
    case FamilyKind::ShiftedGaussian:
      return lambda;
    case FamilyKind::Cosine:
      return lambda * lambda;
    case FamilyKind::ChebyshevLike:
      return -lambda * lambda;
    case FamilyKind::Legendre:
      return lambda * (lambda + 1.0);
  }
  return lambda;
}

Complex EigenFamily::param_from_operator_eigenvalue(Complex mu) const {
  switch (kind_) {
    case FamilyKind::Exponential:
    case FamilyKind::GeneralizedExp:
    case FamilyKind::ShiftedGaussian:
      return mu;
    case FamilyKind::Cosine:
      return std::sqrt(mu);
    case FamilyKind::ChebyshevLike:
      return std::sqrt(-mu);
    case FamilyKind::Legendre:
      return (std::sqrt(1.0 + 4.0 * mu) - 1.0) / 2.0;
  }
  return mu;
}

Real EigenFamily::max_iteration_step() const {
  switch (kind_) {
    case FamilyKind::Exponential:
      // Imaginary parts range over [-band*pi, band*pi).
      return 1.0 / band_;
    case FamilyKind::GeneralizedExp:
      return kPi / band_;
    case FamilyKind::Cosine:
    case FamilyKind::ChebyshevLike:
      return kPi / band_;
    case FamilyKind::ShiftedGaussian:
    case FamilyKind::Legendre:
      return kInf;
  }
  return kInf;
}

std::optional<PolyDiffOp> EigenFamily::base_operator() const {
  switch (kind_) {
    case FamilyKind::Exponential:
      return PolyDiffOp::derivative(1);
    case FamilyKind::Cosine:
      return PolyDiffOp::derivative(2, -1.0);
    case FamilyKind::ChebyshevLike:
      return PolyDiffOp({RealPoly::constant(0.0), RealPoly({0.0, -1.0}),
                         RealPoly({1.0, 0.0, -1.0})});
    case FamilyKind::Legendre:
      return PolyDiffOp({RealPoly::constant(0.0), RealPoly({0.0, 2.0}),
                         RealPoly({-1.0, 0.0, 1.0})});
    case FamilyKind::ShiftedGaussian:
      return PolyDiffOp(
          {RealPoly({0.0, 1.0}), RealPoly::constant(1.0 / (2.0 * alpha_))});
    case FamilyKind::GeneralizedExp:
      return std::nullopt;
  }
  return std::nullopt;
}

Complex EigenFamily::eval(Complex lambda, Real x) const {
  switch (kind_) {
    case FamilyKind::Exponential:
      return std::exp(lambda * x);
    case FamilyKind::Cosine:
      return complex_cos(lambda * x);
    case FamilyKind::GeneralizedExp: {
      if (!domain_.contains(x)) {
        throw Error(ErrorCode::DomainViolation, "point outside family domain");
      }
      return std::exp(Complex(logweight_.value(x), 0) +
                      lambda * chart_.map.value(x));
    }
    case FamilyKind::ShiftedGaussian: {
      const Complex d = Complex(x, 0) - lambda;
      return std::exp(-alpha_ * d * d);
    }
    case FamilyKind::ChebyshevLike: {
      if (!domain_.contains(x)) {
        throw Error(ErrorCode::DomainViolation, "point outside family domain");
      }
      return complex_cos(lambda * std::acos(x));
    }
    case FamilyKind::Legendre: {
      const int n = static_cast<int>(std::lround(lambda.real()));
      if (std::abs(lambda - Complex(n, 0)) > 1e-6 || n < 0) {
        throw Error(ErrorCode::ConfigError,
                    "legendre eigenvalue parameter must be a degree");
      }
      return legendre_eval(n, x);
    }
  }
  return Complex(0, 0);
}

Complex EigenFamily::eval_derivative(Complex lambda, Real x, int order) const {
  check_order(order);
  if (order == 0) return eval(lambda, x);
  switch (kind_) {
    case FamilyKind::Exponential:
      return std::pow(lambda, order) * std::exp(lambda * x);
    case FamilyKind::Cosine:
      return std::pow(lambda, order) *
             complex_cos(lambda * x + Complex(order * kPi / 2, 0));
    case FamilyKind::GeneralizedExp: {
      if (!domain_.contains(x)) {
        throw Error(ErrorCode::DomainViolation, "point outside family domain");
      }
      taylor::ComplexSeries w = taylor::add(
          taylor::complexify(logweight_.series(x, order)),
          taylor::scale(taylor::complexify(chart_.map.series(x, order)), lambda));
      return taylor::exp(w).derivative(order);
    }
    case FamilyKind::ShiftedGaussian: {
      taylor::ComplexSeries w = taylor::constant(Complex(0, 0), order);
      const Complex d = Complex(x, 0) - lambda;
      w.c[0] = -alpha_ * d * d;
      if (order >= 1) w.c[1] = -2.0 * alpha_ * d;
      if (order >= 2) w.c[2] = Complex(-alpha_, 0);
      return taylor::exp(w).derivative(order);
    }
    case FamilyKind::ChebyshevLike: {
      if (!domain_.contains(x, 1e-12) || std::abs(x) >= 1.0) {
        throw Error(ErrorCode::DomainViolation,
                    "chebyshev derivatives need an interior point");
      }
      taylor::ComplexSeries w = taylor::scale(
          taylor::complexify(taylor::acos(taylor::variable(x, order))), lambda);
      return series_cos(w).derivative(order);
    }
    case FamilyKind::Legendre: {
      const int n = static_cast<int>(std::lround(lambda.real()));
      if (std::abs(lambda - Complex(n, 0)) > 1e-6 || n < 0) {
        throw Error(ErrorCode::ConfigError,
                    "legendre eigenvalue parameter must be a degree");
      }
      return legendre_derivative(n, x, order);
    }
  }
  return Complex(0, 0);
}

SparseExpansion::SparseExpansion(EigenFamily family,
                                 std::vector<ExpansionTerm> terms)
    : family_(std::move(family)), terms_(std::move(terms)) {
  if (terms_.empty()) {
    throw Error(ErrorCode::ConfigError, "expansion needs at least one term");
  }
  for (const auto& t : terms_) {
    if (t.coeff == Complex(0, 0)) {
      throw Error(ErrorCode::ConfigError, "expansion coefficient is zero");
    }
    family_.require_in_region(t.lambda);
  }
  for (size_t i = 0; i < terms_.size(); ++i) {
    for (size_t j = i + 1; j < terms_.size(); ++j) {
      if (terms_[i].lambda == terms_[j].lambda) {
        throw Error(ErrorCode::ConfigError,
                    "expansion eigenvalue parameters must be distinct");
      }
    }
  }
}

Complex SparseExpansion::eval(Real x) const {
  Complex acc(0, 0);
  for (const auto& t : terms_) acc += t.coeff * family_.eval(t.lambda, x);
  return acc;
}

Complex SparseExpansion::eval_derivative(Real x, int order) const {
  Complex acc(0, 0);
  for (const auto& t : terms_) {
    acc += t.coeff * family_.eval_derivative(t.lambda, x, order);
  }
  return acc;
}

Real SparseExpansion::min_separation() const {
  Real best = std::numeric_limits<Real>::infinity();
  for (size_t i = 0; i < terms_.size(); ++i) {
    for (size_t j = i + 1; j < terms_.size(); ++j) {
      best = std::min(best, std::abs(terms_[i].lambda - terms_[j].lambda));
    }
  }
  return best;
}

}  // namespace gop
