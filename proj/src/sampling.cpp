#include "gop/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

namespace gop {
namespace {

constexpr Real kPi = std::numbers::pi_v<Real>;

std::string fmt_short(Real x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string fmt_exact(Real x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

bool close_abs_rel(Real a, Real b, Real tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
constexpr Real kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr Real kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr Real kGaussWeights[4] = {0.129484966168870, 0.279705391489277,
                                   0.381830050505119, 0.417959183673469};

struct Panel {
  Real a, b;
  Complex integral;
  Real err;
  Real l1;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel evaluate_panel(const std::function<Complex(Real)>& f, Real a, Real b) {
  const Real mid = 0.5 * (a + b);
  const Real half = 0.5 * (b - a);
  const Complex fmid = f(mid);
  Complex resk = kKronrodWeights[7] * fmid;
  Complex resg = kGaussWeights[3] * fmid;
  Real resabs = kKronrodWeights[7] * std::abs(fmid);
  for (int i = 0; i < 7; ++i) {
    const Real x = half * kKronrodNodes[i];
    const Complex lo = f(mid - x);
    const Complex hi = f(mid + x);
    resk += kKronrodWeights[i] * (lo + hi);
    resabs += kKronrodWeights[i] * (std::abs(lo) + std::abs(hi));
    if (i % 2 == 1) resg += kGaussWeights[i / 2] * (lo + hi);
  }
  resk *= half;
  resg *= half;
  resabs *= half;
  if (!std::isfinite(resk.real()) || !std::isfinite(resk.imag()))
    throw Error(ErrorCode::QuadratureFailure,
                "integrand produced a non-finite value");
  return Panel{a, b, resk, std::abs(resk - resg), resabs};
}

}  // namespace

Complex integrate(const std::function<Complex(Real)>& f, Real a, Real b,
                  const QuadratureSpec& spec) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorCode::ConfigError, "quadrature needs finite bounds");
  if (a == b) return Complex(0, 0);
  if (a > b) return -integrate(f, b, a, spec);

  std::priority_queue<Panel> queue;
  queue.push(evaluate_panel(f, a, b));
  Complex total = queue.top().integral;
  Real total_err = queue.top().err;
  Real total_l1 = queue.top().l1;
  int panels = 1;
  // Estimates below the roundoff mass of the integrand cannot be reduced
  // by subdividing further, so they count as converged.
  const Real noise = 100 * std::numeric_limits<Real>::epsilon();
  while (total_err > std::max({spec.abs_tol, spec.rel_tol * std::abs(total),
                               noise * total_l1})) {
    if (panels >= spec.max_panels)
      throw Error(ErrorCode::QuadratureFailure,
                  "panel budget exhausted at error " +
                      fmt_short(total_err));
    Panel worst = queue.top();
    queue.pop();
    total -= worst.integral;
    total_err -= worst.err;
    total_l1 -= worst.l1;
    const Real mid = 0.5 * (worst.a + worst.b);
    for (const Panel& half :
         {evaluate_panel(f, worst.a, mid), evaluate_panel(f, mid, worst.b)}) {
      total += half.integral;
      total_err += half.err;
      total_l1 += half.l1;
      queue.push(half);
    }
    ++panels;
  }
  return total;
}

// ---------------------------------------------------------------------------
// KernelExpr

KernelExpr::KernelExpr(std::vector<Term> terms, Interval support,
                       int vanish_order, bool verify)
    : support_(support), vanish_order_(vanish_order) {
  if (!support.bounded())
    throw Error(ErrorCode::ConfigError, "kernel support must be bounded");
  if (!(support.b > support.a))
    throw Error(ErrorCode::ConfigError, "kernel support must be nonempty");
  if (vanish_order_ < -1 || vanish_order_ > 64)
    throw Error(ErrorCode::ConfigError, "kernel vanish order out of range");

  // Merge terms sharing the same exponent polynomial; keyed by the exact
  // coefficient pattern so equal construction paths collapse.
  std::map<std::string, RealPoly> merged;
  for (auto& t : terms) {
    if (t.p.is_zero()) continue;
    std::string key;
    for (Real c : t.q.coeffs()) key += fmt_exact(c) + ",";
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, RealPoly());
      terms_.push_back(Term{t.p, t.q});
    } else {
      for (auto& held : terms_) {
        std::string held_key;
        for (Real c : held.q.coeffs()) held_key += fmt_exact(c) + ",";
        if (held_key == key) {
          held.p = held.p + t.p;
          break;
        }
      }
    }
  }
  terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                              [](const Term& t) { return t.p.is_zero(); }),
               terms_.end());

  std::ostringstream sig;
  sig << "[" << fmt_exact(support_.a) << "," << fmt_exact(support_.b) << "]v"
      << vanish_order_;
  for (const auto& t : terms_) {
    sig << "|p:";
    for (Real c : t.p.coeffs()) sig << fmt_exact(c) << ",";
    sig << "q:";
    for (Real c : t.q.coeffs()) sig << fmt_exact(c) << ",";
  }
  signature_ = sig.str();

  if (verify && vanish_order_ >= 0) {
    KernelExpr probe = *this;
    for (int j = 0; j <= vanish_order_; ++j) {
      for (Real x : {support_.a, support_.b}) {
        Real scale = 1;
        for (const auto& t : probe.terms_) {
          Real mag = 0, pw = 1;
          for (Real c : t.p.coeffs()) {
            mag += std::abs(c) * pw;
            pw *= std::abs(x);
          }
          scale += mag * std::exp(t.q.eval(x));
        }
        if (std::abs(probe.eval(x)) > 1e-8 * scale)
          throw Error(ErrorCode::ConfigError,
                      "kernel derivative of order " + std::to_string(j) +
                          " does not vanish at " + fmt_short(x));
      }
      if (j < vanish_order_) probe = probe.derivative();
    }
  }
}

KernelExpr KernelExpr::polynomial(RealPoly p, Interval support,
                                  int vanish_order) {
  return KernelExpr({Term{std::move(p), RealPoly()}}, support, vanish_order,
                    true);
}

KernelExpr KernelExpr::poly_exp(RealPoly p, RealPoly q, Interval support,
                                int vanish_order) {
  return KernelExpr({Term{std::move(p), std::move(q)}}, support, vanish_order,
                    true);
}

bool KernelExpr::pure_polynomial() const {
  for (const auto& t : terms_)
    if (!t.q.is_zero()) return false;
  return true;
}

Real KernelExpr::eval(Real x) const {
  Real v = 0;
  for (const auto& t : terms_) v += t.p.eval(x) * std::exp(t.q.eval(x));
  return v;
}

Real KernelExpr::eval_derivative(Real x, int order) const {
  KernelExpr cur = *this;
  for (int i = 0; i < order; ++i) cur = cur.derivative();
  return cur.eval(x);
}

KernelExpr KernelExpr::derivative() const {
  std::vector<Term> out;
  for (const auto& t : terms_)
    out.push_back(Term{t.p.derivative() + t.p * t.q.derivative(), t.q});
  return KernelExpr(std::move(out), support_, std::max(vanish_order_ - 1, -1),
                    false);
}

KernelExpr KernelExpr::multiplied(const RealPoly& g) const {
  std::vector<Term> out;
  for (const auto& t : terms_) out.push_back(Term{t.p * g, t.q});
  return KernelExpr(std::move(out), support_, vanish_order_, false);
}

KernelExpr KernelExpr::translated(Real c) const {
  std::vector<Term> out;
  for (const auto& t : terms_)
    out.push_back(
        Term{t.p.shifted_argument(-c), t.q.shifted_argument(-c)});
  return KernelExpr(std::move(out),
                    Interval{support_.a + c, support_.b + c}, vanish_order_,
                    false);
}

KernelExpr KernelExpr::operator+(const KernelExpr& rhs) const {
  if (!close_abs_rel(support_.a, rhs.support_.a, 1e-12) ||
      !close_abs_rel(support_.b, rhs.support_.b, 1e-12))
    throw Error(ErrorCode::ConfigError,
                "kernel sum requires matching supports");
  std::vector<Term> out = terms_;
  out.insert(out.end(), rhs.terms_.begin(), rhs.terms_.end());
  return KernelExpr(std::move(out), support_,
                    std::min(vanish_order_, rhs.vanish_order_), false);
}

KernelExpr KernelExpr::scaled(Real s) const {
  std::vector<Term> out;
  for (const auto& t : terms_) out.push_back(Term{t.p.scaled(s), t.q});
  return KernelExpr(std::move(out), support_, vanish_order_, false);
}

KernelExpr adjoint_apply(const PolyDiffOp& op, const KernelExpr& kernel) {
  // Integrating an order-d term by parts d times leaves boundary values of
  // the kernel's derivatives up to order d - 1, so those must vanish.
  if (kernel.vanish_order() < op.order() - 1)
    throw Error(ErrorCode::BoundaryViolation,
                "kernel vanish order " + std::to_string(kernel.vanish_order()) +
                    " cannot absorb the boundary terms of an order " +
                    std::to_string(op.order()) + " operator");
  std::optional<KernelExpr> sum;
  for (int n = 0; n <= op.order(); ++n) {
    if (op.coeff(n).is_zero()) continue;
    KernelExpr t = kernel.multiplied(op.coeff(n));
    for (int i = 0; i < n; ++i) t = t.derivative();
    if (n % 2 == 1) t = t.scaled(-1);
    sum = sum ? (*sum + t) : t;
  }
  if (!sum)
    return KernelExpr::polynomial(
        RealPoly(), kernel.support(),
        std::max(kernel.vanish_order() - op.order(), -1));
  // The sum's tracked order is the worst branch; the true guarantee is v - d.
  return *sum;
}

// ---------------------------------------------------------------------------
// SamplingFunctional

SamplingFunctional SamplingFunctional::point_eval(Real x0) {
  SamplingFunctional f;
  f.kind_ = Kind::PointEval;
  f.point_ = x0;
  return f;
}

SamplingFunctional SamplingFunctional::delta_derivative(Real x0, int order) {
  if (order < 0) throw Error(ErrorCode::ConfigError, "derivative order < 0");
  SamplingFunctional f;
  f.kind_ = Kind::DeltaDerivative;
  f.point_ = x0;
  f.order_ = order;
  return f;
}

SamplingFunctional SamplingFunctional::weighted_points(
    std::vector<std::pair<Real, Complex>> points) {
  if (points.empty())
    throw Error(ErrorCode::ConfigError, "weighted point set is empty");
  SamplingFunctional f;
  f.kind_ = Kind::WeightedPoints;
  f.points_ = std::move(points);
  return f;
}

SamplingFunctional SamplingFunctional::moment_kernel(KernelExpr kernel,
                                                     QuadratureSpec quad) {
  SamplingFunctional f;
  f.kind_ = Kind::MomentKernel;
  f.kernel_ = std::make_shared<KernelExpr>(std::move(kernel));
  f.quad_ = quad;
  return f;
}

SamplingFunctional SamplingFunctional::composed(IterationAction action,
                                                int power,
                                                SamplingFunctional base) {
  if (power < 0) throw Error(ErrorCode::ConfigError, "composition power < 0");
  SamplingFunctional f;
  f.kind_ = Kind::ComposedWithAction;
  f.action_ = std::make_shared<IterationAction>(std::move(action));
  f.power_ = power;
  f.base_ = std::make_shared<SamplingFunctional>(std::move(base));
  return f;
}

const KernelExpr& SamplingFunctional::kernel() const {
  if (!kernel_) throw Error(ErrorCode::ConfigError, "functional has no kernel");
  return *kernel_;
}

const IterationAction& SamplingFunctional::action() const {
  if (!action_) throw Error(ErrorCode::ConfigError, "functional has no action");
  return *action_;
}

const SamplingFunctional& SamplingFunctional::base() const {
  if (!base_) throw Error(ErrorCode::ConfigError, "functional has no base");
  return *base_;
}

namespace {

std::string action_signature(const IterationAction& a) {
  return std::string(a.name()) + ":" + fmt_exact(a.tau());
}

bool same_action(const IterationAction& a, const IterationAction& b) {
  if (a.kind() != b.kind()) return false;
  if (a.kind() == IterationAction::Kind::PlainPower) return true;
  return close_abs_rel(a.tau(), b.tau(), 1e-14);
}

/// Shift actions that compose additively through the family's chart.
bool chart_shift_like(const EigenFamily& family, const IterationAction& a) {
  switch (a.kind()) {
    case IterationAction::Kind::GeneralizedShift:
      return true;
    case IterationAction::Kind::Dilation:
      return family.chart().name == "log";
    default:
      return false;
  }
}

}  // namespace

std::string SamplingFunctional::signature() const {
  switch (kind_) {
    case Kind::PointEval:
      return "pe@" + fmt_exact(point_);
    case Kind::DeltaDerivative:
      return "dd" + std::to_string(order_) + "@" + fmt_exact(point_);
    case Kind::WeightedPoints: {
      std::string s = "wp";
      for (const auto& [x, w] : points_)
        s += "(" + fmt_exact(x) + "," + fmt_exact(w.real()) + "," +
             fmt_exact(w.imag()) + ")";
      return s;
    }
    case Kind::MomentKernel:
      return "mk{" + kernel_->signature() + "}";
    case Kind::ComposedWithAction:
      return "cw{" + action_signature(*action_) + "}^" +
             std::to_string(power_) + "{" + base_->signature() + "}";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Realization of functionals into raw measurement atoms

namespace {

struct RawAtom {
  MeasurementSpec spec;
  Complex weight;
};

MeasurementSpec point_sample(const EigenFamily& family, Real point, int order) {
  MeasurementSpec s;
  s.type = MeasurementSpec::Type::PointSample;
  s.point = point;
  s.order = order;
  // Expansions over an even family are even functions; canonicalizing the
  // sign lets mirrored evaluation points share one measurement.
  if (order == 0 && family.even_in_chart() && family.chart().is_identity &&
      s.point < 0)
    s.point = -s.point;
  return s;
}

MeasurementSpec kernel_moment(const KernelExpr& k, QuadratureSpec quad) {
  MeasurementSpec s;
  s.type = MeasurementSpec::Type::KernelMoment;
  s.kernel = std::make_shared<KernelExpr>(k);
  s.quad = quad;
  return s;
}

bool translation_only_action(const EigenFamily& family,
                             const IterationAction& a) {
  return a.is_shift_like() && a.translation_only(family);
}

std::vector<RawAtom> realize_functional(const EigenFamily& family,
                                        const SamplingFunctional& f,
                                        const IterationAction* iter,
                                        int extra);

/// Applies iter^extra inside a single already-realized measurement.
std::vector<RawAtom> apply_iteration_to_raw(const EigenFamily& family,
                                            const RawAtom& atom,
                                            const IterationAction& iter,
                                            int extra) {
  std::vector<RawAtom> out;
  if (extra == 0) {
    out.push_back(atom);
    return out;
  }
  switch (atom.spec.type) {
    case MeasurementSpec::Type::PointSample: {
      if (atom.spec.order == 0) {
        for (const GridAtom& g : iter.grid(family, atom.spec.point, extra))
          out.push_back(RawAtom{point_sample(family, g.point, g.order),
                                atom.weight * g.weight});
        return out;
      }
      if (translation_only_action(family, iter)) {
        out.push_back(RawAtom{
            point_sample(family, atom.spec.point + extra * iter.tau(),
                         atom.spec.order),
            atom.weight});
        return out;
      }
      if (iter.kind() == IterationAction::Kind::PlainPower) {
        auto op = family.base_operator();
        if (!op)
          throw Error(ErrorCode::ConfigError,
                      "family has no polynomial operator for plain powers");
        PolyDiffOp total = PolyDiffOp::derivative(atom.spec.order)
                               .compose(op->power(extra));
        for (int n = 0; n <= total.order(); ++n) {
          const Real c = total.coeff(n).eval(atom.spec.point);
          if (c == 0) continue;
          out.push_back(RawAtom{point_sample(family, atom.spec.point, n),
                                atom.weight * c});
        }
        return out;
      }
      throw Error(ErrorCode::ConfigError,
                  "derivative data only combines with plain powers or pure "
                  "translations");
    }
    case MeasurementSpec::Type::KernelMoment: {
      if (iter.kind() == IterationAction::Kind::PlainPower) {
        auto op = family.base_operator();
        if (!op)
          throw Error(ErrorCode::ConfigError,
                      "family has no polynomial operator for plain powers");
        KernelExpr k = *atom.spec.kernel;
        for (int i = 0; i < extra; ++i) k = adjoint_apply(*op, k);
        out.push_back(RawAtom{kernel_moment(k, atom.spec.quad), atom.weight});
        return out;
      }
      if (translation_only_action(family, iter)) {
        out.push_back(RawAtom{
            kernel_moment(atom.spec.kernel->translated(extra * iter.tau()),
                          atom.spec.quad),
            atom.weight});
        return out;
      }
      throw Error(ErrorCode::ConfigError,
                  "moment kernels only combine with plain powers or pure "
                  "translations");
    }
    case MeasurementSpec::Type::MonomialMoment:
      throw Error(ErrorCode::ConfigError,
                  "internal: monomial moments appear only after realization");
  }
  return out;
}

/// Shifts realized atoms by one total offset through the family chart.
std::vector<RawAtom> shift_atoms_by_chart_offset(const EigenFamily& family,
                                                 const std::vector<RawAtom>& in,
                                                 Real offset) {
  std::vector<RawAtom> out;
  const bool plain_translation =
      family.chart().is_identity && family.logweight().identically_zero;
  for (const RawAtom& atom : in) {
    switch (atom.spec.type) {
      case MeasurementSpec::Type::PointSample:
        if (atom.spec.order == 0) {
          for (const GridAtom& g :
               IterationAction::chart_shift_grid(family, atom.spec.point,
                                                 offset))
            out.push_back(RawAtom{point_sample(family, g.point, g.order),
                                  atom.weight * g.weight});
        } else if (plain_translation) {
          out.push_back(RawAtom{
              point_sample(family, atom.spec.point + offset, atom.spec.order),
              atom.weight});
        } else {
          throw Error(ErrorCode::ConfigError,
                      "derivative data does not shift through a weighted "
                      "chart");
        }
        break;
      case MeasurementSpec::Type::KernelMoment:
        if (!plain_translation)
          throw Error(ErrorCode::ConfigError,
                      "moment kernels only shift under pure translations");
        out.push_back(
            RawAtom{kernel_moment(atom.spec.kernel->translated(offset),
                                  atom.spec.quad),
                    atom.weight});
        break;
      case MeasurementSpec::Type::MonomialMoment:
        throw Error(ErrorCode::ConfigError,
                    "internal: monomial moments appear only after realization");
    }
  }
  return out;
}

std::vector<RawAtom> realize_functional(const EigenFamily& family,
                                        const SamplingFunctional& f,
                                        const IterationAction* iter,
                                        int extra) {
  std::vector<RawAtom> out;
  switch (f.kind()) {
    case SamplingFunctional::Kind::PointEval: {
      if (extra == 0) {
        out.push_back(RawAtom{point_sample(family, f.point(), 0), 1.0});
        return out;
      }
      for (const GridAtom& g : iter->grid(family, f.point(), extra))
        out.push_back(
            RawAtom{point_sample(family, g.point, g.order), g.weight});
      return out;
    }
    case SamplingFunctional::Kind::DeltaDerivative: {
      RawAtom base{point_sample(family, f.point(), f.order()), 1.0};
      if (extra == 0) return {base};
      return apply_iteration_to_raw(family, base, *iter, extra);
    }
    case SamplingFunctional::Kind::WeightedPoints: {
      for (const auto& [x, w] : f.points()) {
        if (extra == 0) {
          out.push_back(RawAtom{point_sample(family, x, 0), w});
          continue;
        }
        for (const GridAtom& g : iter->grid(family, x, extra))
          out.push_back(
              RawAtom{point_sample(family, g.point, g.order), w * g.weight});
      }
      return out;
    }
    case SamplingFunctional::Kind::MomentKernel: {
      RawAtom base{kernel_moment(f.kernel(), f.quad()), 1.0};
      if (extra == 0) return {base};
      return apply_iteration_to_raw(family, base, *iter, extra);
    }
    case SamplingFunctional::Kind::ComposedWithAction: {
      const IterationAction& own = f.action();
      if (extra == 0)
        return realize_functional(family, f.base(), &own, f.power());
      if (same_action(own, *iter))
        return realize_functional(family, f.base(), iter, f.power() + extra);
      if (chart_shift_like(family, own) && chart_shift_like(family, *iter)) {
        // Same-chart shifts compose additively; one total offset keeps the
        // realized grid points stable for deduplication.
        const Real offset = own.tau() * f.power() + iter->tau() * extra;
        auto atoms = realize_functional(family, f.base(), nullptr, 0);
        return shift_atoms_by_chart_offset(family, atoms, offset);
      }
      auto outer = realize_functional(family, f, nullptr, 0);
      for (const RawAtom& atom : outer) {
        auto inner = apply_iteration_to_raw(family, atom, *iter, extra);
        out.insert(out.end(), inner.begin(), inner.end());
      }
      return out;
    }
  }
  return out;
}

/// Expands bounded-support polynomial moments into monomial moments in
/// local coordinates so schemes share plain power-moment measurements.
std::vector<RawAtom> decompose_monomials(const std::vector<RawAtom>& in) {
  std::vector<RawAtom> out;
  for (const RawAtom& atom : in) {
    if (atom.spec.type != MeasurementSpec::Type::KernelMoment ||
        !atom.spec.kernel->pure_polynomial()) {
      out.push_back(atom);
      continue;
    }
    RealPoly total;
    for (const auto& t : atom.spec.kernel->terms()) total = total + t.p;
    const Interval sup = atom.spec.kernel->support();
    const RealPoly local = total.shifted_argument(sup.a);
    const auto& c = local.coeffs();
    for (int s = 0; s < static_cast<int>(c.size()); ++s) {
      if (c[s] == 0) continue;
      MeasurementSpec m;
      m.type = MeasurementSpec::Type::MonomialMoment;
      m.offset = sup.a;
      m.length = sup.length();
      m.power = s;
      m.quad = atom.spec.quad;
      out.push_back(RawAtom{m, atom.weight * c[s]});
    }
  }
  return out;
}

bool specs_match(const MeasurementSpec& a, const MeasurementSpec& b) {
  if (a.type != b.type) return false;
  switch (a.type) {
    case MeasurementSpec::Type::PointSample:
      return a.order == b.order && close_abs_rel(a.point, b.point, 1e-9);
    case MeasurementSpec::Type::KernelMoment:
      return a.kernel->signature() == b.kernel->signature();
    case MeasurementSpec::Type::MonomialMoment:
      return a.power == b.power && close_abs_rel(a.offset, b.offset, 1e-9) &&
             close_abs_rel(a.length, b.length, 1e-9);
  }
  return false;
}

}  // namespace

std::string MeasurementSpec::describe() const {
  switch (type) {
    case Type::PointSample:
      return order == 0
                 ? "f(" + fmt_short(point) + ")"
                 : "derivative order " + std::to_string(order) + " of f at " +
                       fmt_short(point);
    case Type::KernelMoment:
      return "integral of f against a kernel on [" +
             fmt_short(kernel->support().a) + ", " +
             fmt_short(kernel->support().b) + "]";
    case Type::MonomialMoment:
      return "integral of f(x + " + fmt_short(offset) + ") x^" +
             std::to_string(power) + " over [0, " + fmt_short(length) + "]";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Scheme construction

SamplingScheme SamplingScheme::build(EigenFamily family,
                                     IterationAction iteration,
                                     SpectralMap map,
                                     std::vector<SamplingFunctional> functionals,
                                     int order, bool check_admissibility,
                                     std::uint64_t probe_seed) {
  if (order < 1) throw Error(ErrorCode::ConfigError, "scheme order must be >= 1");
  if (static_cast<int>(functionals.size()) < order)
    throw Error(ErrorCode::ConfigError,
                "a scheme of order " + std::to_string(order) + " needs at least " +
                    std::to_string(order) + " functionals");

  // The spectral map must be the symbol of the iteration action.
  const auto require_map = [&](SpectralMap::Kind kind, Real tau) {
    if (map.kind() != kind || !close_abs_rel(map.tau(), tau, 1e-12))
      throw Error(ErrorCode::ConfigError,
                  std::string("spectral map ") + map.name() +
                      " does not match the iteration action " +
                      iteration.name());
  };
  switch (iteration.kind()) {
    case IterationAction::Kind::PlainPower:
      if (map.kind() != SpectralMap::Kind::Identity)
        throw Error(ErrorCode::ConfigError,
                    "plain powers pair with the identity map");
      break;
    case IterationAction::Kind::GeneralizedShift:
    case IterationAction::Kind::Dilation:
      require_map(SpectralMap::Kind::ExpScale, iteration.tau());
      break;
    case IterationAction::Kind::SymmetricShift:
    case IterationAction::Kind::HalfSumShift:
      require_map(SpectralMap::Kind::CosSqrt, iteration.tau());
      break;
  }

  // Trigger the family/map pairing check with an interior parameter.
  map_argument(family, map.kind(), family_probe_parameter(family));

  if (map.kind() != SpectralMap::Kind::Identity) {
    const Real bound = family.max_iteration_step();
    if (std::isfinite(bound) && std::abs(map.tau()) > bound * (1 + 1e-12))
      throw Error(ErrorCode::ConfigError,
                  "step " + fmt_short(std::abs(map.tau())) +
                      " exceeds the injectivity bound " + fmt_short(bound));
  }

  SamplingScheme s;
  s.family_ = std::move(family);
  s.iteration_ = std::move(iteration);
  s.map_ = std::move(map);
  s.functionals_ = std::move(functionals);
  s.order_ = order;

  const int rows = s.rows();
  s.entries_.assign(rows, std::vector<std::vector<EntryTerm>>(order + 1));
  for (int k = 0; k < rows; ++k) {
    for (int l = 0; l <= order; ++l) {
      auto atoms = decompose_monomials(
          realize_functional(s.family_, s.functionals_[k], &s.iteration_, l));
      std::map<int, Complex> terms;
      for (const RawAtom& atom : atoms) {
        int idx = -1;
        for (int i = 0; i < static_cast<int>(s.measurements_.size()); ++i) {
          if (specs_match(s.measurements_[i], atom.spec)) {
            idx = i;
            break;
          }
        }
        if (idx < 0) {
          idx = static_cast<int>(s.measurements_.size());
          s.measurements_.push_back(atom.spec);
        }
        terms[idx] += atom.weight;
      }
      auto& entry = s.entries_[k][l];
      for (const auto& [idx, w] : terms) entry.push_back(EntryTerm{idx, w});
    }
  }

  int kernel_count = 0;
  for (auto& m : s.measurements_) {
    switch (m.type) {
      case MeasurementSpec::Type::PointSample:
        m.id = "p" + std::to_string(m.order) + "@" + fmt_short(m.point);
        break;
      case MeasurementSpec::Type::KernelMoment:
        m.id = "k" + std::to_string(kernel_count++);
        break;
      case MeasurementSpec::Type::MonomialMoment:
        m.id = "m" + std::to_string(m.power) + "@" + fmt_short(m.offset);
        break;
    }
  }

  // Hankel shape: row k is the shared base functional composed with the
  // k-th power of the scheme iteration.
  s.hankel_ = true;
  std::string base_sig;
  for (int k = 0; k < rows && s.hankel_; ++k) {
    const SamplingFunctional* cur = &s.functionals_[k];
    int total = 0;
    while (cur->kind() == SamplingFunctional::Kind::ComposedWithAction &&
           same_action(cur->action(), s.iteration_)) {
      total += cur->power();
      cur = &cur->base();
    }
    if (cur->kind() == SamplingFunctional::Kind::ComposedWithAction ||
        total != k) {
      s.hankel_ = false;
      break;
    }
    if (k == 0)
      base_sig = cur->signature();
    else if (cur->signature() != base_sig)
      s.hankel_ = false;
  }

  if (check_admissibility) s.verify_admissibility(probe_seed);
  return s;
}

/// An interior region point used for pairing checks and probes.
Complex family_probe_parameter(const EigenFamily& family) {
  switch (family.kind()) {
    case FamilyKind::Exponential:
      return Complex(0.1, 0.2 * family.band());
    case FamilyKind::GeneralizedExp:
      return Complex(0.1, 0.2 * family.band());
    case FamilyKind::Cosine:
    case FamilyKind::ChebyshevLike:
      return Complex(0.3 * family.band(), 0);
    case FamilyKind::ShiftedGaussian:
      return Complex(0.5, 0);
    case FamilyKind::Legendre:
      return Complex(2, 0);
  }
  return Complex(0, 0);
}

void SamplingScheme::verify_admissibility(std::uint64_t seed) const {
  const int m = order_;
  Real best_ratio = 0;
  for (int draw = 0; draw < 3; ++draw) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(draw) * 7919);
    std::vector<Complex> params;
    for (int attempt = 0; attempt < 64 && static_cast<int>(params.size()) < m;
         ++attempt) {
      const Complex cand = draw_probe_parameter(rng);
      const Complex sigma = spectral_value(cand);
      bool ok = true;
      for (const Complex& p : params) {
        if (std::abs(spectral_value(p) - sigma) <
            1e-6 * (1 + std::abs(sigma))) {
          ok = false;
          break;
        }
      }
      if (ok) params.push_back(cand);
    }
    if (static_cast<int>(params.size()) < m) continue;
    ComplexMatrix b(rows(), m);
    for (int k = 0; k < rows(); ++k)
      for (int j = 0; j < m; ++j) b(k, j) = row_applied_to_basis(k, params[j]);
    const RealVector sv = singular_values(b);
    const Real ratio =
        sv(0) > 0 ? sv(sv.size() - 1) / sv(0) : 0.0;
    best_ratio = std::max(best_ratio, ratio);
    if (ratio >= 1e-12) return;
  }
  throw Error(ErrorCode::AdmissibilityFailure,
              "probe matrix is numerically singular (best ratio " +
                  fmt_short(best_ratio) + ")");
}

Complex SamplingScheme::draw_probe_parameter(std::mt19937_64& rng) const {
  std::uniform_real_distribution<Real> unit(0.0, 1.0);
  const Real band = family_.band();
  switch (family_.kind()) {
    case FamilyKind::Exponential:
      return Complex(2 * unit(rng) - 1,
                     (2 * unit(rng) - 1) * 0.9 * kPi * band);
    case FamilyKind::GeneralizedExp:
      return Complex(2 * unit(rng) - 1, (2 * unit(rng) - 1) * 0.9 * band);
    case FamilyKind::Cosine:
    case FamilyKind::ChebyshevLike:
      return Complex((0.05 + 0.9 * unit(rng)) * band, 0);
    case FamilyKind::ShiftedGaussian:
      return Complex(4 * unit(rng) - 2, 0);
    case FamilyKind::Legendre: {
      std::uniform_int_distribution<int> deg(0, std::max(12, 4 * order_));
      return Complex(deg(rng), 0);
    }
  }
  return Complex(0, 0);
}

const std::vector<EntryTerm>& SamplingScheme::entry(int k, int l) const {
  if (k < 0 || k >= rows() || l < 0 || l > order_)
    throw Error(ErrorCode::ConfigError, "entry index out of range");
  return entries_[k][l];
}

Complex SamplingScheme::row_applied_to_basis(int k, Complex lambda) const {
  Complex v(0, 0);
  for (const EntryTerm& t : entry(k, 0))
    v += t.weight * measure_basis(measurements_[t.measurement], family_, lambda);
  return v;
}

Complex SamplingScheme::spectral_value(Complex lambda) const {
  // No region gate here: recovery evaluates the model at parameters that
  // were already filtered with a loose slack, and those may sit slightly
  // off the strict region (e.g. near-integer Legendre degrees).
  return map_.forward(map_argument(family_, map_.kind(), lambda));
}

// ---------------------------------------------------------------------------
// Evaluation of measurements

Complex measure(const MeasurementSpec& spec, const SparseExpansion& f) {
  switch (spec.type) {
    case MeasurementSpec::Type::PointSample:
      return spec.order == 0 ? f.eval(spec.point)
                             : f.eval_derivative(spec.point, spec.order);
    case MeasurementSpec::Type::KernelMoment: {
      const KernelExpr& k = *spec.kernel;
      return integrate(
          [&](Real x) { return f.eval(x) * k.eval(x); }, k.support().a,
          k.support().b, spec.quad);
    }
    case MeasurementSpec::Type::MonomialMoment:
      return integrate(
          [&](Real u) {
            return f.eval(u + spec.offset) * std::pow(u, spec.power);
          },
          0.0, spec.length, spec.quad);
  }
  return Complex(0, 0);
}

Complex measure_basis(const MeasurementSpec& spec, const EigenFamily& family,
                      Complex lambda) {
  switch (spec.type) {
    case MeasurementSpec::Type::PointSample:
      return spec.order == 0
                 ? family.eval(lambda, spec.point)
                 : family.eval_derivative(lambda, spec.point, spec.order);
    case MeasurementSpec::Type::KernelMoment: {
      const KernelExpr& k = *spec.kernel;
      return integrate(
          [&](Real x) { return family.eval(lambda, x) * k.eval(x); },
          k.support().a, k.support().b, spec.quad);
    }
    case MeasurementSpec::Type::MonomialMoment:
      return integrate(
          [&](Real u) {
            return family.eval(lambda, u + spec.offset) *
                   std::pow(u, spec.power);
          },
          0.0, spec.length, spec.quad);
  }
  return Complex(0, 0);
}

Complex apply_functional(const SamplingFunctional& f,
                         const SparseExpansion& g) {
  Complex v(0, 0);
  for (const RawAtom& atom :
       realize_functional(g.family(), f, nullptr, 0))
    v += atom.weight * measure(atom.spec, g);
  return v;
}

Complex apply_functional_to_basis(const EigenFamily& family,
                                  const SamplingFunctional& f, Complex lambda) {
  Complex v(0, 0);
  for (const RawAtom& atom : realize_functional(family, f, nullptr, 0))
    v += atom.weight * measure_basis(atom.spec, family, lambda);
  return v;
}

std::vector<std::pair<std::string, Complex>> simulate_measurements(
    const SamplingScheme& scheme, const SparseExpansion& f) {
  std::vector<std::pair<std::string, Complex>> out;
  out.reserve(scheme.measurements().size());
  for (const MeasurementSpec& spec : scheme.measurements())
    out.emplace_back(spec.id, measure(spec, f));
  return out;
}

ComplexMatrix assemble_matrix(const SamplingScheme& scheme,
                              const MeasurementMap& values) {
  ComplexMatrix m(scheme.rows(), scheme.cols());
  for (int k = 0; k < scheme.rows(); ++k) {
    for (int l = 0; l < scheme.cols(); ++l) {
      Complex v(0, 0);
      for (const EntryTerm& t : scheme.entry(k, l)) {
        const auto it = values.find(scheme.measurements()[t.measurement].id);
        if (it == values.end())
          throw Error(ErrorCode::MissingMeasurement,
                      "measurement '" +
                          scheme.measurements()[t.measurement].id +
                          "' is missing");
        v += t.weight * it->second;
      }
      m(k, l) = v;
    }
  }
  require_finite(m, "assembled sampling matrix");
  return m;
}

}  // namespace gop
