#include "scaleqm/potential.hpp"

#include <cmath>
#include <limits>

#include "scaleqm/errors.hpp"

namespace scaleqm {

namespace {

constexpr Family kFamilies[] = {Family::Box,       Family::Harmonic,       Family::ScaledForm,
                                Family::RectBarrier, Family::Morse,        Family::AhmedBIC,
                                Family::TruncInvSquare, Family::PolyAnharmonic, Family::Custom};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::Box: return "Box";
    case Family::Harmonic: return "Harmonic";
    case Family::ScaledForm: return "ScaledForm";
    case Family::RectBarrier: return "RectBarrier";
    case Family::Morse: return "Morse";
    case Family::AhmedBIC: return "AhmedBIC";
    case Family::TruncInvSquare: return "TruncInvSquare";
    case Family::PolyAnharmonic: return "PolyAnharmonic";
    case Family::Custom: return "Custom";
  }
  return "?";
}

Family family_from_name(std::string_view name) {
  for (Family f : kFamilies)
    if (name == family_name(f)) return f;
  throw LookupError("unknown potential family '" + std::string(name) + "'");
}

Domain Domain::whole_line() {
  return {parse_expr("-inf"), parse_expr("inf"), BoundaryKind::Open, BoundaryKind::Open};
}

Domain Domain::half_line() {
  return {Expr::number(0), parse_expr("inf"), BoundaryKind::Dirichlet, BoundaryKind::Open};
}

ParamDims PotentialSpec::param_dims() const {
  ParamDims out;
  for (const auto& [k, v] : params) out[k] = v.dim;
  return out;
}

ParamValues PotentialSpec::param_values() const {
  ParamValues out;
  for (const auto& [k, v] : params) out[k] = v.magnitude;
  return out;
}

namespace {

void collect_piecewise(const ast::Node& n, std::vector<const ast::Piecewise*>& out) {
  std::visit(overloaded{
                 [&](const ast::Negate& v) { collect_piecewise(*v.operand, out); },
                 [&](const ast::Binary& b) {
                   collect_piecewise(*b.lhs, out);
                   collect_piecewise(*b.rhs, out);
                 },
                 [&](const ast::Power& p) { collect_piecewise(*p.base, out); },
                 [&](const ast::Call& c) { collect_piecewise(*c.arg, out); },
                 [&](const ast::Piecewise& pw) {
                   out.push_back(&pw);
                   for (const auto& piece : pw.pieces) collect_piecewise(*piece.value, out);
                 },
                 [&](const auto&) {},
             },
             n.data);
}

void require_positive(const PotentialSpec& spec, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    const auto it = spec.params.find(name);
    if (it == spec.params.end())
      throw LookupError(std::string(family_name(spec.family)) + " requires parameter '" + name + "'");
    if (!(it->second.magnitude > 0))
      throw DomainError(std::string(family_name(spec.family)) + " requires " + name + " > 0");
  }
}

}  // namespace

void PotentialSpec::validate() const {
  const ParamDims dims = param_dims();
  const auto diags = lint(expr, dims);
  if (!diags.empty()) throw DimensionError("potential fails dimensional lint: " + diags.front().to_string());
  const auto d = infer_dimension(expr, dims);
  if (d && *d != Dimension::energy())
    throw DimensionError("potential has dimension " + d->to_string() + ", expected an energy");

  for (const Expr* bound : {&domain.lo, &domain.hi}) {
    if (!lint(*bound, dims).empty()) throw DimensionError("domain bound fails dimensional lint");
    const auto bd = infer_dimension(*bound, dims);
    if (bd && *bd != Dimension::length())
      throw DimensionError("domain bound '" + bound->to_string() + "' is not a length");
  }
  const ParamValues values = param_values();
  const double lo = domain.lo.eval(0, values);
  const double hi = domain.hi.eval(0, values);
  if (!(lo < hi)) throw DomainError("empty domain [" + domain.lo.to_string() + ", " + domain.hi.to_string() + "]");
  if (std::isinf(lo) && domain.lo_bc == BoundaryKind::Dirichlet) throw DomainError("wall at infinite lower bound");
  if (std::isinf(hi) && domain.hi_bc == BoundaryKind::Dirichlet) throw DomainError("wall at infinite upper bound");

  std::vector<const ast::Piecewise*> pws;
  collect_piecewise(expr.node(), pws);
  for (const auto* pw : pws) {
    const Expr first(pw->pieces.front().lo);
    const Expr last(pw->pieces.back().hi);
    if (!(first == domain.lo) || !(last == domain.hi))
      throw DomainError("piecewise guards [" + first.to_string() + ", " + last.to_string() +
                        "] do not cover the domain [" + domain.lo.to_string() + ", " + domain.hi.to_string() + "]");
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& piece : pw->pieces) {
      const double a = Expr(piece.lo).eval(0, values);
      const double b = Expr(piece.hi).eval(0, values);
      if (!(a < b) || a < prev) throw DomainError("piecewise guards are not ordered for the given parameters");
      prev = b;
    }
  }

  switch (family) {
    case Family::Box: require_positive(*this, {"Lbox"}); break;
    case Family::Harmonic: require_positive(*this, {"k"}); break;
    case Family::ScaledForm:
    case Family::RectBarrier:
    case Family::AhmedBIC: require_positive(*this, {"V0", "a"}); break;
    case Family::Morse: require_positive(*this, {"D", "a"}); break;
    case Family::TruncInvSquare: require_positive(*this, {"alpha", "eps"}); break;
    case Family::PolyAnharmonic: require_positive(*this, {"k2", "k4"}); break;
    case Family::Custom: break;
  }
}

namespace catalog {

namespace {

const Dimension kEnergy = Dimension::energy();
const Dimension kLength = Dimension::length();
const Dimension kSpring = Dimension(1, 0, -2, 0);      // energy / length^2
const Dimension kQuartic = Dimension(1, -2, -2, 0);    // energy / length^4
const Dimension kInvLength = Dimension(0, -1, 0, 0);
const Dimension kEnergyArea = Dimension(1, 4, -2, 0);  // energy * length^2

}  // namespace

std::vector<std::pair<std::string, Dimension>> family_params(Family f) {
  switch (f) {
    case Family::Box: return {{"Lbox", kLength}};
    case Family::Harmonic: return {{"k", kSpring}};
    case Family::ScaledForm:
    case Family::RectBarrier:
    case Family::AhmedBIC: return {{"V0", kEnergy}, {"a", kLength}};
    case Family::Morse: return {{"D", kEnergy}, {"a", kInvLength}};
    case Family::TruncInvSquare: return {{"alpha", kEnergyArea}, {"eps", kLength}};
    case Family::PolyAnharmonic: return {{"k2", kSpring}, {"k4", kQuartic}};
    case Family::Custom: return {};
  }
  return {};
}

Expr family_expr(Family f, const std::optional<Expr>& shape) {
  switch (f) {
    case Family::Box: return Expr::number(0);
    case Family::Harmonic: return parse_expr("0.5*k*x^2");
    case Family::ScaledForm:
      if (!shape) throw LookupError("ScaledForm requires a shape f(x)");
      return Expr::param("V0") * shape->substitute_x(Expr::x() / Expr::param("a"));
    case Family::RectBarrier: return parse_expr("piecewise([-inf, 0]: 0, [0, a]: V0, [a, inf]: 0)");
    case Family::Morse: return parse_expr("D*(1 - exp(-a*x))^2");
    case Family::AhmedBIC: return parse_expr("V0*(1 - exp(2*abs(x)/a))");
    case Family::TruncInvSquare: return parse_expr("piecewise([0, eps]: -alpha/eps^2, [eps, inf]: -alpha/x^2)");
    case Family::PolyAnharmonic: return parse_expr("0.5*k2*x^2 + k4*x^4");
    case Family::Custom: throw LookupError("Custom potentials have no catalog expression");
  }
  return {};
}

PotentialSpec build(Family f, const std::map<std::string, Quantity, std::less<>>& params,
                    const std::optional<Expr>& shape) {
  PotentialSpec spec;
  spec.family = f;
  spec.expr = family_expr(f, shape);
  if (f == Family::ScaledForm) spec.shape = shape;
  for (const auto& [name, dim] : family_params(f)) {
    const auto it = params.find(name);
    if (it == params.end()) throw LookupError(std::string(family_name(f)) + " requires parameter '" + name + "'");
    if (it->second.dim != dim)
      throw DimensionError("parameter '" + name + "' must have dimension " + dim.to_string() + ", got " +
                           it->second.dim.to_string());
    spec.params[name] = it->second;
  }
  switch (f) {
    case Family::Box:
      spec.domain = {Expr::number(0), Expr::param("Lbox"), BoundaryKind::Dirichlet, BoundaryKind::Dirichlet};
      break;
    case Family::TruncInvSquare: spec.domain = Domain::half_line(); break;
    default: spec.domain = Domain::whole_line(); break;
  }
  spec.validate();
  return spec;
}

PotentialSpec box(const Quantity& Lbox) { return build(Family::Box, {{"Lbox", Lbox}}); }
PotentialSpec harmonic(const Quantity& k) { return build(Family::Harmonic, {{"k", k}}); }
PotentialSpec scaled_form(const Quantity& V0, const Quantity& a, const Expr& shape) {
  return build(Family::ScaledForm, {{"V0", V0}, {"a", a}}, shape);
}
PotentialSpec rect_barrier(const Quantity& V0, const Quantity& a) {
  return build(Family::RectBarrier, {{"V0", V0}, {"a", a}});
}
PotentialSpec morse(const Quantity& D, const Quantity& a) { return build(Family::Morse, {{"D", D}, {"a", a}}); }
PotentialSpec ahmed_bic(const Quantity& V0, const Quantity& a) {
  return build(Family::AhmedBIC, {{"V0", V0}, {"a", a}});
}
PotentialSpec trunc_inv_square(const Quantity& alpha, const Quantity& eps) {
  return build(Family::TruncInvSquare, {{"alpha", alpha}, {"eps", eps}});
}
PotentialSpec poly_anharmonic(const Quantity& k2, const Quantity& k4) {
  return build(Family::PolyAnharmonic, {{"k2", k2}, {"k4", k4}});
}

}  // namespace catalog

// ---------------------------------------------------------------- Taylor jets

namespace {

using Jet = std::vector<double>;  // Taylor coefficients c_k = f^(k)/k!

Jet constant(double v, std::size_t n) {
  Jet j(n, 0.0);
  j[0] = v;
  return j;
}

Jet mul(const Jet& a, const Jet& b) {
  Jet c(a.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t j = 0; j <= k; ++j) c[k] += a[j] * b[k - j];
  return c;
}

Jet div(const Jet& a, const Jet& b) {
  if (b[0] == 0) throw DomainError("taylor: division by an expression vanishing at the expansion point");
  Jet c(a.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    double s = a[k];
    for (std::size_t j = 1; j <= k; ++j) s -= b[j] * c[k - j];
    c[k] = s / b[0];
  }
  return c;
}

Jet exp_jet(const Jet& a) {
  Jet e(a.size(), 0.0);
  e[0] = std::exp(a[0]);
  for (std::size_t k = 1; k < a.size(); ++k) {
    double s = 0;
    for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a[j] * e[k - j];
    e[k] = s / static_cast<double>(k);
  }
  return e;
}

std::pair<Jet, Jet> sin_cos_jet(const Jet& a) {
  Jet s(a.size(), 0.0), c(a.size(), 0.0);
  s[0] = std::sin(a[0]);
  c[0] = std::cos(a[0]);
  for (std::size_t k = 1; k < a.size(); ++k) {
    double ss = 0, cc = 0;
    for (std::size_t j = 1; j <= k; ++j) {
      ss += static_cast<double>(j) * a[j] * c[k - j];
      cc += static_cast<double>(j) * a[j] * s[k - j];
    }
    s[k] = ss / static_cast<double>(k);
    c[k] = -cc / static_cast<double>(k);
  }
  return {s, c};
}

Jet pow_jet(const Jet& a, const Rational& r) {
  if (is_integer(r) && r >= 0) {
    long long n = r.convert_to<long long>();
    Jet result = constant(1.0, a.size());
    Jet base = a;
    while (n > 0) {
      if (n & 1) result = mul(result, base);
      base = mul(base, base);
      n >>= 1;
    }
    return result;
  }
  if (a[0] == 0) throw DomainError("taylor: non-smooth power of zero at the expansion point");
  if (a[0] < 0 && !is_integer(r)) throw DomainError("taylor: fractional power of a negative value");
  const double rd = to_double(r);
  Jet y(a.size(), 0.0);
  y[0] = std::pow(a[0], rd);
  for (std::size_t k = 1; k < a.size(); ++k) {
    double s = 0;
    for (std::size_t j = 1; j <= k; ++j)
      s += (rd * static_cast<double>(j) - static_cast<double>(k - j)) * a[j] * y[k - j];
    y[k] = s / (static_cast<double>(k) * a[0]);
  }
  return y;
}

class JetEvaluator {
public:
  JetEvaluator(double x0, std::size_t n, const ParamValues& params) : x0_(x0), n_(n), params_(params) {}

  Jet eval(const ast::Node& node) {
    using namespace ast;
    return std::visit(
        overloaded{
            [&](const Number& v) { return constant(v.value, n_); },
            [&](const Param& p) {
              const auto it = params_.find(p.name);
              if (it == params_.end()) throw LookupError("taylor: unbound parameter '" + p.name + "'");
              return constant(it->second, n_);
            },
            [&](const Coord&) {
              Jet j = constant(x0_, n_);
              if (n_ > 1) j[1] = 1.0;
              return j;
            },
            [&](const Negate& v) {
              Jet j = eval(*v.operand);
              for (auto& c : j) c = -c;
              return j;
            },
            [&](const Binary& b) {
              const Jet l = eval(*b.lhs);
              const Jet r = eval(*b.rhs);
              switch (b.op) {
                case BinOp::Add: {
                  Jet o(l.size());
                  for (std::size_t k = 0; k < l.size(); ++k) o[k] = l[k] + r[k];
                  return o;
                }
                case BinOp::Sub: {
                  Jet o(l.size());
                  for (std::size_t k = 0; k < l.size(); ++k) o[k] = l[k] - r[k];
                  return o;
                }
                case BinOp::Mul: return mul(l, r);
                case BinOp::Div: return div(l, r);
              }
              return l;
            },
            [&](const Power& p) { return pow_jet(eval(*p.base), p.exponent); },
            [&](const Call& c) {
              const Jet a = eval(*c.arg);
              switch (c.fn) {
                case Func::Exp: return exp_jet(a);
                case Func::Sin: return sin_cos_jet(a).first;
                case Func::Cos: return sin_cos_jet(a).second;
                case Func::Sinh: {
                  Jet neg = a;
                  for (auto& v : neg) v = -v;
                  const Jet ep = exp_jet(a), em = exp_jet(neg);
                  Jet o(a.size());
                  for (std::size_t k = 0; k < a.size(); ++k) o[k] = 0.5 * (ep[k] - em[k]);
                  return o;
                }
                case Func::Abs: {
                  if (a[0] == 0) throw DomainError("taylor: abs is not smooth where its argument vanishes");
                  if (a[0] > 0) return a;
                  Jet o = a;
                  for (auto& v : o) v = -v;
                  return o;
                }
              }
              return a;
            },
            [&](const Piecewise& pw) {
              const std::size_t last = pw.pieces.size() - 1;
              for (std::size_t i = 0; i <= last; ++i) {
                const double lo = Expr(pw.pieces[i].lo).eval(x0_, params_);
                const double hi = Expr(pw.pieces[i].hi).eval(x0_, params_);
                if (x0_ == lo || x0_ == hi)
                  throw DomainError("taylor: expansion point lies on a piecewise breakpoint");
                if (x0_ > lo && x0_ < hi) return eval(*pw.pieces[i].value);
              }
              throw DomainError("taylor: expansion point outside every piecewise guard");
            },
        },
        node.data);
  }

private:
  double x0_;
  std::size_t n_;
  const ParamValues& params_;
};

}  // namespace

void TaylorCoeffs::require_minimum(double tol) const {
  if (std::abs(f(0)) > tol) throw DomainError("taylor: f(x0) != 0 at the declared minimum");
  if (std::abs(f(1)) > tol) throw DomainError("taylor: f'(x0) != 0 at the declared minimum");
  if (!(f(2) > 0)) throw DomainError("taylor: f2 must be positive at a minimum");
}

TaylorCoeffs taylor(const Expr& expr, double x0, int J, const ParamValues& params) {
  if (J < 2) throw DomainError("taylor: order J must be at least 2");
  JetEvaluator ev(x0, static_cast<std::size_t>(J) + 1, params);
  const Jet c = ev.eval(expr.node());
  TaylorCoeffs out;
  out.x0 = x0;
  out.derivatives.resize(c.size());
  double fact = 1;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j > 0) fact *= static_cast<double>(j);
    out.derivatives[j] = c[j] * fact;
  }
  return out;
}

}  // namespace scaleqm
