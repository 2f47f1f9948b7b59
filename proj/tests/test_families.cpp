#include <doctest.h>

#include <cmath>
#include <map>

#include "gop/families.hpp"
#include "oracles.hpp"

using namespace gop;

namespace {

constexpr Real kTestPi = 3.14159265358979323846;

/// Interior probe abscissae for every preset chart.
const std::map<std::string, std::pair<Real, Real>>& chart_probe_ranges() {
  static const std::map<std::string, std::pair<Real, Real>> r = {
      {"linear", {-2.0, 2.0}},   {"quadratic", {0.2, 3.0}},
      {"log", {0.2, 5.0}},       {"power", {0.2, 3.0}},
      {"arccos", {-0.9, 0.9}},   {"arcsin", {-0.9, 0.9}},
      {"arcosh", {1.1, 3.0}},    {"arsinh", {-2.0, 2.0}},
      {"sin", {-1.4, 1.4}},      {"cos", {0.2, 2.9}},
      {"sinh", {-2.0, 2.0}},     {"cosh", {0.2, 3.0}},
  };
  return r;
}

}  // namespace

TEST_CASE("legendre_eval matches the frozen degree-9 polynomial") {
  CHECK(legendre_eval(9, 0.3) == doctest::Approx(oracle::kLegendre9At03)
                                     .epsilon(1e-14));
  for (Real x : {-0.8, -0.25, 0.0, 0.6, 1.0})
    CHECK(legendre_eval(9, x) ==
          doctest::Approx(oracle::eval_poly(oracle::legendre9_coeffs(), x))
              .epsilon(1e-12));
  CHECK(legendre_eval(0, 0.4) == doctest::Approx(1.0));
  CHECK(legendre_eval(1, 0.4) == doctest::Approx(0.4));
}

TEST_CASE("legendre_derivative matches polynomial derivatives in the interior") {
  auto coeffs = oracle::legendre9_coeffs();
  for (int order = 1; order <= 3; ++order) {
    coeffs = oracle::poly_derivative(coeffs);
    for (Real x : {-0.5, 0.3, 0.75})
      CHECK(legendre_derivative(9, x, order) ==
            doctest::Approx(oracle::eval_poly(coeffs, x)).epsilon(1e-10));
  }
}

TEST_CASE("legendre_derivative endpoint values use the closed form") {
  // P_n^(m)(1) = (n+m)! / (2^m m! (n-m)!)
  CHECK(legendre_derivative(9, 1.0, 1) == doctest::Approx(45.0));
  CHECK(legendre_derivative(9, -1.0, 1) == doctest::Approx(45.0));
  CHECK(legendre_derivative(4, 1.0, 2) ==
        doctest::Approx(720.0 / (4.0 * 2.0 * 2.0)));  // 6!/(2^2 2! 2!) = 45
  CHECK(legendre_derivative(3, -1.0, 0) == doctest::Approx(-1.0));
  CHECK(legendre_derivative(5, 0.4, 7) == doctest::Approx(0.0));
}

TEST_CASE("preset charts invert and differentiate consistently") {
  for (const std::string& name : preset_chart_names()) {
    CAPTURE(name);
    const CoordinateChart chart = preset_chart(name);
    const auto [lo, hi] = chart_probe_ranges().at(name);
    for (Real t : {0.25, 0.5, 0.75}) {
      const Real x = lo + t * (hi - lo);
      REQUIRE(chart.domain.contains(x, 0.0));
      const Real u = chart.map.value(x);
      REQUIRE(chart.image.contains(u, 1e-12));
      CHECK(chart.inverse(u) == doctest::Approx(x).epsilon(1e-10));
      // First derivative of the jet against a finite difference.
      const Real fd =
          oracle::central_diff([&](Real y) { return chart.map.value(y); }, x,
                               1, 1e-5);
      CHECK(chart.map.series(x, 1).derivative(1) ==
            doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("identity chart round trip") {
  const CoordinateChart chart = identity_chart();
  CHECK(chart.is_identity);
  CHECK(chart.map.value(1.7) == doctest::Approx(1.7));
  CHECK(chart.inverse(-0.3) == doctest::Approx(-0.3));
}

TEST_CASE("exponential family evaluates exactly") {
  const EigenFamily fam = EigenFamily::exponential();
  const Complex lambda(0.3, 1.1);
  const Real x = 0.7;
  const Complex v = std::exp(lambda * x);
  CHECK(std::abs(fam.eval(lambda, x) - v) < 1e-14);
  for (int m : {1, 2, 5})
    CHECK(std::abs(fam.eval_derivative(lambda, x, m) -
                   std::pow(lambda, m) * v) < 1e-12 * std::abs(v));
}

TEST_CASE("cosine family derivatives match closed forms") {
  const EigenFamily fam = EigenFamily::cosine(10.0);
  const Real lambda = 2.5, x = 0.4;
  CHECK(std::abs(fam.eval(lambda, x) - std::cos(lambda * x)) < 1e-14);
  CHECK(std::abs(fam.eval_derivative(lambda, x, 1) -
                 Complex(-lambda * std::sin(lambda * x), 0)) < 1e-13);
  CHECK(std::abs(fam.eval_derivative(lambda, x, 2) -
                 Complex(-lambda * lambda * std::cos(lambda * x), 0)) < 1e-12);
}

TEST_CASE("shifted gaussian family matches closed forms") {
  const Real alpha = 0.8;
  const EigenFamily fam = EigenFamily::shifted_gaussian(alpha);
  const Complex lambda(1.2, 0);
  const Real x = 0.5;
  const Complex v = std::exp(-alpha * (x - lambda) * (x - lambda));
  CHECK(std::abs(fam.eval(lambda, x) - v) < 1e-14);
  CHECK(std::abs(fam.eval_derivative(lambda, x, 1) -
                 (-2.0 * alpha * (x - lambda)) * v) < 1e-13);
  const Complex d2 =
      (-2.0 * alpha + 4.0 * alpha * alpha * (x - lambda) * (x - lambda)) * v;
  CHECK(std::abs(fam.eval_derivative(lambda, x, 2) - d2) < 1e-12);
}

TEST_CASE("generalized exponential over the log chart is a power function") {
  const EigenFamily fam = EigenFamily::generalized_exp_preset("log", 1.0);
  const Complex lambda(0, 0.3);
  const Real x = 1.8;
  const Complex v = std::exp(lambda * std::log(x));
  CHECK(std::abs(fam.eval(lambda, x) - v) < 1e-13);
  CHECK(std::abs(fam.eval_derivative(lambda, x, 1) - lambda / x * v) < 1e-12);
}

TEST_CASE("chebyshev-like family is a cosine in the arccos chart") {
  const EigenFamily fam = EigenFamily::chebyshev_like(10.0);
  const Real lambda = 3.7, theta = 0.8;
  const Real x = std::cos(theta);
  CHECK(std::abs(fam.eval(lambda, x) - std::cos(lambda * theta)) < 1e-13);
  // Integer frequencies reduce to Chebyshev polynomials: T_3(x) = 4x^3 - 3x.
  CHECK(std::abs(fam.eval(3.0, 0.4) - (4 * 0.064 - 1.2)) < 1e-13);
}

TEST_CASE("legendre family evaluates through the recurrence") {
  const EigenFamily fam = EigenFamily::legendre();
  CHECK(std::abs(fam.eval(Complex(9, 0), 0.3) -
                 Complex(oracle::kLegendre9At03, 0)) < 1e-14);
  CHECK(std::abs(fam.eval_derivative(Complex(9, 0), 1.0, 1) -
                 Complex(45, 0)) < 1e-10);
}

TEST_CASE("operator eigenvalue relation holds on the base operator") {
  struct Case {
    EigenFamily fam;
    Complex lambda;
    Real x;
  };
  const std::vector<Case> cases = {
      {EigenFamily::exponential(), Complex(0.3, 1.1), 0.7},
      {EigenFamily::cosine(10.0), Complex(2.5, 0), 0.4},
      {EigenFamily::chebyshev_like(10.0), Complex(3.0, 0), 0.3},
      {EigenFamily::legendre(), Complex(7, 0), 0.25},
      {EigenFamily::shifted_gaussian(0.8), Complex(1.2, 0), 0.5},
  };
  for (const auto& c : cases) {
    CAPTURE(family_kind_name(c.fam.kind()));
    const auto op = c.fam.base_operator();
    REQUIRE(op.has_value());
    Complex applied(0, 0);
    for (int n = 0; n <= op->order(); ++n)
      applied += op->coeff(n).eval(c.x) * c.fam.eval_derivative(c.lambda, c.x, n);
    const Complex want = c.fam.operator_eigenvalue(c.lambda) *
                         c.fam.eval(c.lambda, c.x);
    CHECK(std::abs(applied - want) <=
          1e-8 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("operator eigenvalue maps invert") {
  const EigenFamily leg = EigenFamily::legendre();
  CHECK(std::abs(leg.operator_eigenvalue(Complex(7, 0)) - Complex(56, 0)) <
        1e-12);
  CHECK(std::abs(leg.param_from_operator_eigenvalue(Complex(56, 0)) -
                 Complex(7, 0)) < 1e-12);

  const EigenFamily cosf = EigenFamily::cosine(10.0);
  CHECK(std::abs(cosf.operator_eigenvalue(Complex(2.5, 0)) -
                 Complex(6.25, 0)) < 1e-12);
  CHECK(std::abs(cosf.param_from_operator_eigenvalue(Complex(6.25, 0)) -
                 Complex(2.5, 0)) < 1e-12);

  const EigenFamily cheb = EigenFamily::chebyshev_like(10.0);
  CHECK(std::abs(cheb.operator_eigenvalue(Complex(3, 0)) - Complex(-9, 0)) <
        1e-12);
  CHECK(std::abs(cheb.param_from_operator_eigenvalue(Complex(-9, 0)) -
                 Complex(3, 0)) < 1e-12);

  const EigenFamily expf = EigenFamily::exponential();
  const Complex lam(0.2, -0.9);
  CHECK(std::abs(expf.param_from_operator_eigenvalue(
                     expf.operator_eigenvalue(lam)) -
                 lam) < 1e-14);
}

TEST_CASE("parameter regions are half open bands") {
  const EigenFamily expf = EigenFamily::exponential(1.0);
  CHECK(expf.in_region(Complex(0.5, 0.99 * kTestPi)));
  CHECK(expf.in_region(Complex(0.5, -kTestPi)));
  CHECK_FALSE(expf.in_region(Complex(0.5, kTestPi)));

  const EigenFamily cosf = EigenFamily::cosine(10.0);
  CHECK(cosf.in_region(Complex(0, 0)));
  CHECK(cosf.in_region(Complex(9.99, 0)));
  CHECK_FALSE(cosf.in_region(Complex(10.0, 0)));
  CHECK_FALSE(cosf.in_region(Complex(3, 0.1)));

  const EigenFamily leg = EigenFamily::legendre();
  CHECK(leg.in_region(Complex(4, 0)));
  CHECK_FALSE(leg.in_region(Complex(4.5, 0)));
}

TEST_CASE("max_iteration_step reflects the injectivity bound") {
  CHECK(EigenFamily::exponential(2.0).max_iteration_step() ==
        doctest::Approx(0.5));
  CHECK(EigenFamily::cosine(10.0).max_iteration_step() ==
        doctest::Approx(kTestPi / 10.0));
  CHECK(EigenFamily::chebyshev_like(10.0).max_iteration_step() ==
        doctest::Approx(kTestPi / 10.0));
  CHECK(std::isinf(EigenFamily::shifted_gaussian(1.0).max_iteration_step()));
  CHECK(std::isinf(EigenFamily::legendre().max_iteration_step()));
}

TEST_CASE("sparse expansions evaluate as sums and validate their terms") {
  const EigenFamily fam = EigenFamily::exponential();
  const SparseExpansion f(
      fam, {{Complex(0.5, 1.0), Complex(2, 0)}, {Complex(-0.2, 0), Complex(0, 1)}});
  const Real x = 0.35;
  const Complex want = 2.0 * std::exp(Complex(0.5, 1.0) * x) +
                       Complex(0, 1) * std::exp(Complex(-0.2, 0) * x);
  CHECK(std::abs(f.eval(x) - want) < 1e-13);
  CHECK(f.order() == 2);
  CHECK(f.min_separation() ==
        doctest::Approx(std::abs(Complex(0.5, 1.0) - Complex(-0.2, 0))));

  CHECK_THROWS_AS(SparseExpansion(fam, {{Complex(0, 0), Complex(0, 0)}}),
                  Error);
  CHECK_THROWS_AS(SparseExpansion(fam, {{Complex(0.1, 0), Complex(1, 0)},
                                        {Complex(0.1, 0), Complex(2, 0)}}),
                  Error);
  CHECK_THROWS_AS(SparseExpansion(fam, {{Complex(0, 7.0), Complex(1, 0)}}),
                  Error);
}
