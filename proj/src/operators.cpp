#include "gop/operators.hpp"

#include <algorithm>
#include <cmath>

namespace gop {

namespace {

constexpr Real kPi = 3.14159265358979323846;

Real clamp_to(Real x, const Interval& iv) {
  return std::min(std::max(x, iv.a), iv.b);
}

bool inside_with_slack(Real u, const Interval& iv) {
  const Real slack = 1e-9 * std::max(1.0, std::abs(u));
  return u >= iv.a - slack && u <= iv.b + slack;
}

void merge_atom(std::vector<GridAtom>& atoms, Real point, Complex weight,
                int order) {
  for (GridAtom& a : atoms) {
    if (a.order == order &&
        std::abs(a.point - point) <= 1e-12 * std::max(1.0, std::abs(point))) {
      a.weight += weight;
      return;
    }
  }
  atoms.push_back(GridAtom{point, weight, order});
}

}  // namespace

SpectralMap SpectralMap::identity() { return SpectralMap(Kind::Identity, 0.0); }

SpectralMap SpectralMap::exp_scale(Real tau) {
  if (tau == 0.0) {
    throw Error(ErrorCode::ConfigError, "exponential map needs a nonzero step");
  }
  return SpectralMap(Kind::ExpScale, tau);
}

SpectralMap SpectralMap::cos_sqrt(Real tau) {
  if (tau <= 0.0) {
    throw Error(ErrorCode::ConfigError, "cosine map needs a positive step");
  }
  return SpectralMap(Kind::CosSqrt, tau);
}

SpectralMap SpectralMap::reciprocal() {
  return SpectralMap(Kind::Reciprocal, 0.0);
}

const char* SpectralMap::name() const noexcept {
  switch (kind_) {
    case Kind::Identity: return "identity";
    case Kind::ExpScale: return "exp_scale";
    case Kind::CosSqrt: return "cos_sqrt";
    case Kind::Reciprocal: return "reciprocal";
  }
  return "unknown";
}

Complex SpectralMap::forward(Complex arg) const {
  switch (kind_) {
    case Kind::Identity:
      return arg;
    case Kind::ExpScale:
      return std::exp(tau_ * arg);
    case Kind::CosSqrt:
      return std::cos(tau_ * arg);
    case Kind::Reciprocal:
      if (arg == Complex(0, 0)) {
        throw Error(ErrorCode::BranchViolation, "reciprocal map at zero");
      }
      return 1.0 / arg;
  }
  return arg;
}

Complex SpectralMap::inverse(Complex image) const {
  switch (kind_) {
    case Kind::Identity:
      return image;
    case Kind::ExpScale: {
      if (image == Complex(0, 0)) {
        throw Error(ErrorCode::BranchViolation,
                    "exponential map inverse at zero");
      }
      Real arg = std::atan2(image.imag(), image.real());
      if (arg == kPi) arg = -kPi;
      return Complex(std::log(std::abs(image)), arg) / tau_;
    }
    case Kind::CosSqrt: {
      if (std::abs(image.imag()) > 1e-9) {
        throw Error(ErrorCode::BranchViolation,
                    "cosine map inverse expects a real value");
      }
      Real re = image.real();
      if (std::abs(re) > 1.0 + 1e-9) {
        throw Error(ErrorCode::BranchViolation,
                    "cosine map inverse expects a value in [-1, 1]");
      }
      re = std::min(1.0, std::max(-1.0, re));
      return Complex(std::acos(re) / tau_, 0);
    }
    case Kind::Reciprocal:
      if (image == Complex(0, 0)) {
        throw Error(ErrorCode::BranchViolation, "reciprocal map inverse at zero");
      }
      return 1.0 / image;
  }
  return image;
}

Complex map_argument(const EigenFamily& family, SpectralMap::Kind kind,
                     Complex lambda) {
  switch (kind) {
    case SpectralMap::Kind::ExpScale:
      if (family.kind() == FamilyKind::Cosine ||
          family.kind() == FamilyKind::ChebyshevLike ||
          family.kind() == FamilyKind::Legendre) {
        throw Error(ErrorCode::ConfigError,
                    "exponential map pairs with first-order shift families");
      }
      return lambda;
    case SpectralMap::Kind::CosSqrt:
      if (family.kind() != FamilyKind::Cosine &&
          family.kind() != FamilyKind::ChebyshevLike) {
        throw Error(ErrorCode::ConfigError,
                    "cosine map pairs with cosine-type families");
      }
      return lambda;
    case SpectralMap::Kind::Identity:
    case SpectralMap::Kind::Reciprocal:
      return family.operator_eigenvalue(lambda);
  }
  return lambda;
}

Complex param_from_map_argument(const EigenFamily& family,
                                SpectralMap::Kind kind, Complex arg) {
  switch (kind) {
    case SpectralMap::Kind::ExpScale:
    case SpectralMap::Kind::CosSqrt:
      return arg;
    case SpectralMap::Kind::Identity:
    case SpectralMap::Kind::Reciprocal:
      return family.param_from_operator_eigenvalue(arg);
  }
  return arg;
}

Complex apply_spectral_map(const SpectralMap& map, const EigenFamily& family,
                           Complex lambda) {
  family.require_in_region(lambda);
  return map.forward(map_argument(family, map.kind(), lambda));
}

Complex invert_spectral_map(const SpectralMap& map, Complex image) {
  return map.inverse(image);
}

IterationAction IterationAction::plain_power() {
  return IterationAction(Kind::PlainPower, 0.0, 1.0);
}

IterationAction IterationAction::generalized_shift(Real tau) {
  if (tau == 0.0) {
    throw Error(ErrorCode::ConfigError, "shift needs a nonzero step");
  }
  return IterationAction(Kind::GeneralizedShift, tau, 1.0);
}

IterationAction IterationAction::symmetric_shift(Real tau) {
  if (tau == 0.0) {
    throw Error(ErrorCode::ConfigError, "shift needs a nonzero step");
  }
  return IterationAction(Kind::SymmetricShift, tau, 1.0);
}

IterationAction IterationAction::dilation(Real ratio) {
  if (ratio <= 0.0 || ratio == 1.0) {
    throw Error(ErrorCode::ConfigError,
                "dilation ratio must be positive and different from 1");
  }
  return IterationAction(Kind::Dilation, std::log(ratio), ratio);
}

IterationAction IterationAction::half_sum_shift(Real tau) {
  if (tau == 0.0) {
    throw Error(ErrorCode::ConfigError, "shift needs a nonzero step");
  }
  return IterationAction(Kind::HalfSumShift, tau, 1.0);
}

const char* IterationAction::name() const noexcept {
  switch (kind_) {
    case Kind::PlainPower: return "plain_power";
    case Kind::GeneralizedShift: return "generalized_shift";
    case Kind::SymmetricShift: return "symmetric_shift";
    case Kind::Dilation: return "dilation";
    case Kind::HalfSumShift: return "half_sum_shift";
  }
  return "unknown";
}

bool IterationAction::is_shift_like() const {
  return kind_ == Kind::GeneralizedShift || kind_ == Kind::Dilation;
}

bool IterationAction::translation_only(const EigenFamily& family) const {
  return kind_ == Kind::GeneralizedShift && family.chart().is_identity &&
         family.logweight().identically_zero;
}

std::vector<GridAtom> IterationAction::chart_shift_grid(
    const EigenFamily& family, Real x0, Real offset) {
  if (!family.domain().contains(x0)) {
    throw Error(ErrorCode::DomainViolation, "anchor outside family domain");
  }
  if (offset == 0.0) return {GridAtom{x0, Complex(1, 0), 0}};
  const CoordinateChart& chart = family.chart();
  const Real u = chart.map.value(x0) + offset;
  if (!inside_with_slack(u, chart.image)) {
    throw Error(ErrorCode::DomainEscape,
                "shifted point leaves the chart image");
  }
  const Real y = chart.inverse(clamp_to(u, chart.image));
  Real w = 1.0;
  if (!family.logweight().identically_zero) {
    w = std::exp(family.logweight().value(x0) - family.logweight().value(y));
  }
  return {GridAtom{y, Complex(w, 0), 0}};
}

std::vector<GridAtom> IterationAction::symmetric_chart_grid(
    const EigenFamily& family, Real x0, Real tau, int k) {
  if (!family.domain().contains(x0)) {
    throw Error(ErrorCode::DomainViolation, "anchor outside family domain");
  }
  if (k == 0) return {GridAtom{x0, Complex(1, 0), 0}};
  const CoordinateChart& chart = family.chart();
  const Real u0 = chart.map.value(x0);
  const Real scale = std::pow(0.5, k);
  std::vector<GridAtom> atoms;
  Real binom = 1.0;
  for (int r = 0; r <= k; ++r) {
    Real u = u0 + (k - 2 * r) * tau;
    if (family.even_in_chart()) u = std::abs(u);
    if (!inside_with_slack(u, chart.image)) {
      throw Error(ErrorCode::DomainEscape,
                  "symmetric shift leaves the chart image");
    }
    const Real y = chart.inverse(clamp_to(u, chart.image));
    merge_atom(atoms, y, Complex(binom * scale, 0), 0);
    binom = binom * static_cast<Real>(k - r) / static_cast<Real>(r + 1);
  }
  return atoms;
}

std::vector<GridAtom> IterationAction::grid(const EigenFamily& family, Real x0,
                                            int k) const {
  if (k < 0) throw Error(ErrorCode::ConfigError, "iteration power must be >= 0");
  switch (kind_) {
    case Kind::PlainPower: {
      auto op = family.base_operator();
      if (!op) {
        throw Error(ErrorCode::ConfigError,
                    "operator powers need polynomial coefficients");
      }
      if (k == 0) return {GridAtom{x0, Complex(1, 0), 0}};
      const PolyDiffOp pk = op->power(k);
      std::vector<GridAtom> atoms;
      for (int n = 0; n <= pk.order(); ++n) {
        const Real c = pk.coeff(n).eval(x0);
        if (c != 0.0) atoms.push_back(GridAtom{x0, Complex(c, 0), n});
      }
      if (atoms.empty()) atoms.push_back(GridAtom{x0, Complex(0, 0), 0});
      return atoms;
    }
    case Kind::GeneralizedShift:
      return chart_shift_grid(family, x0, tau_ * k);
    case Kind::SymmetricShift:
      return symmetric_chart_grid(family, x0, tau_, k);
    case Kind::Dilation: {
      const Real point = std::pow(ratio_, k) * x0;
      if (!family.domain().contains(point)) {
        throw Error(ErrorCode::DomainEscape,
                    "dilated point leaves the family domain");
      }
      return {GridAtom{point, Complex(1, 0), 0}};
    }
    case Kind::HalfSumShift: {
      if (k == 0) return {GridAtom{x0, Complex(1, 0), 0}};
      const Real scale = std::pow(0.5, k);
      std::vector<GridAtom> atoms;
      Real binom = 1.0;
      for (int r = 0; r <= k; ++r) {
        Real point = x0 + (k - 2 * r) * tau_;
        if (family.even_in_chart() && family.chart().is_identity) {
          point = std::abs(point);
        }
        if (!family.domain().contains(point)) {
          throw Error(ErrorCode::DomainEscape,
                      "shifted point leaves the family domain");
        }
        merge_atom(atoms, point, Complex(binom * scale, 0), 0);
        binom = binom * static_cast<Real>(k - r) / static_cast<Real>(r + 1);
      }
      return atoms;
    }
  }
  return {};
}

Complex IterationAction::symbol(const EigenFamily& family,
                                Complex lambda) const {
  switch (kind_) {
    case Kind::PlainPower:
      return family.operator_eigenvalue(lambda);
    case Kind::GeneralizedShift:
      return std::exp(lambda * tau_);
    case Kind::SymmetricShift:
    case Kind::HalfSumShift:
      return std::cos(lambda * tau_);
    case Kind::Dilation:
      if (family.chart().name != "log") {
        throw Error(ErrorCode::ConfigError,
                    "dilation acts as a shift through the log chart");
      }
      return std::exp(lambda * tau_);
  }
  return Complex(0, 0);
}

}  // namespace gop
