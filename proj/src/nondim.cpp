#include "scaleqm/nondim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "scaleqm/errors.hpp"

namespace scaleqm {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string rule_name(const ScalingRule& r) {
  struct {
    std::string operator()(const rule::GivenLength& g) const { return "GivenLength(" + g.param + ")"; }
    std::string operator()(const rule::DepthBased&) const { return "DepthBased"; }
    std::string operator()(const rule::HarmonicBalance&) const { return "HarmonicBalance"; }
    std::string operator()(const rule::QuarticBased&) const { return "QuarticBased"; }
    std::string operator()(const rule::CoulombBased& c) const {
      return c.mu ? "CoulombBased(" + format_double(c.mu->magnitude) + " " + c.mu->dim.to_config_string() + ")"
                  : "CoulombBased";
    }
    std::string operator()(const rule::Explicit& e) const {
      return "Explicit(" + format_double(e.length.magnitude) + " " + e.length.dim.to_config_string() + ")";
    }
  } visitor;
  return std::visit(visitor, r);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ScalingRule parse_rule(std::string_view text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  const std::string head = trim(t.substr(0, open));
  std::string arg;
  if (open != std::string::npos) {
    if (t.back() != ')') throw ParseError("unterminated rule '" + t + "'", 1, static_cast<int>(t.size()));
    arg = trim(t.substr(open + 1, t.size() - open - 2));
  }
  if (head == "GivenLength") {
    if (arg.empty()) throw ParseError("GivenLength needs a parameter name", 1, 1);
    return rule::GivenLength{arg};
  }
  if (head == "DepthBased" && arg.empty()) return rule::DepthBased{};
  if (head == "HarmonicBalance" && arg.empty()) return rule::HarmonicBalance{};
  if (head == "QuarticBased" && arg.empty()) return rule::QuarticBased{};
  if (head == "CoulombBased") {
    if (arg.empty()) return rule::CoulombBased{};
    return rule::CoulombBased{parse_quantity(arg)};
  }
  if (head == "Explicit" && !arg.empty()) return rule::Explicit{parse_quantity(arg)};
  throw ParseError("unknown scaling rule '" + t + "'", 1, 1);
}

ScalingRule default_rule(Family f) {
  switch (f) {
    case Family::Box: return rule::GivenLength{"Lbox"};
    case Family::Harmonic:
    case Family::PolyAnharmonic: return rule::HarmonicBalance{};
    case Family::ScaledForm:
    case Family::RectBarrier:
    case Family::AhmedBIC:
    case Family::Morse: return rule::GivenLength{"a"};
    case Family::TruncInvSquare: return rule::DepthBased{};
    case Family::Custom: break;
  }
  throw RuleMismatch("custom potentials need an explicit scaling rule");
}

namespace {

const Dimension kSpring(1, 0, -2, 0);
const Dimension kQuartic(1, -2, -2, 0);

const Quantity& param(const PotentialSpec& spec, const std::string& name) {
  const auto it = spec.params.find(name);
  if (it == spec.params.end()) throw LookupError("missing parameter '" + name + "'");
  return it->second;
}

std::optional<std::string> unique_param_with(const PotentialSpec& spec, const Dimension& d) {
  std::optional<std::string> found;
  for (const auto& [name, q] : spec.params) {
    if (q.dim != d) continue;
    if (found) return std::nullopt;
    found = name;
  }
  return found;
}

Quantity scale_from(const std::vector<Quantity>& qs, const Dimension& target) {
  return solve_scale(qs, target).value;
}

struct Choice {
  Quantity L;
  Quantity mass;
  enum Kind { Given, Depth, Harmonic, Quartic, Coulomb, Explicit } kind;
  std::string given;
};

Choice choose_length(const PotentialSpec& spec, const Quantity& mass, const ScalingRule& r,
                     const ConstantRegistry& constants) {
  const Quantity& hbar = constants.hbar();
  const std::string fam = family_name(spec.family);
  struct Visitor {
    const PotentialSpec& spec;
    const Quantity& mass;
    const Quantity& hbar;
    const ConstantRegistry& constants;
    const std::string& fam;

    Choice operator()(const rule::GivenLength& g) const {
      const auto it = spec.params.find(g.param);
      if (it == spec.params.end()) throw RuleMismatch(fam + " has no parameter '" + g.param + "' for GivenLength");
      const Quantity& q = it->second;
      if (q.dim == Dimension::length()) return {q, mass, Choice::Given, g.param};
      if (q.dim == Dimension::length().pow(-1)) return {Quantity(1.0 / q.magnitude, Dimension::length()), mass,
                                                        Choice::Given, g.param};
      throw RuleMismatch("GivenLength(" + g.param + "): parameter is neither a length nor an inverse length");
    }
    Choice operator()(const rule::DepthBased&) const {
      Quantity depth;
      switch (spec.family) {
        case Family::ScaledForm:
        case Family::RectBarrier:
        case Family::AhmedBIC: depth = param(spec, "V0"); break;
        case Family::Morse: depth = param(spec, "D"); break;
        case Family::TruncInvSquare: depth = param(spec, "alpha") / param(spec, "eps").pow(2); break;
        default: {
          const auto name = unique_param_with(spec, Dimension::energy());
          if (!name) throw RuleMismatch("DepthBased: " + fam + " has no unique depth (energy) parameter");
          depth = param(spec, *name);
        }
      }
      return {scale_from({hbar, mass, depth}, Dimension::length()), mass, Choice::Depth, {}};
    }
    Choice operator()(const rule::HarmonicBalance&) const {
      std::optional<std::string> name;
      if (spec.family == Family::Harmonic) name = "k";
      else if (spec.family == Family::PolyAnharmonic) name = "k2";
      else name = unique_param_with(spec, kSpring);
      if (!name || !spec.params.count(*name))
        throw RuleMismatch("HarmonicBalance: " + fam + " has no quadratic force constant");
      return {scale_from({hbar, mass, param(spec, *name)}, Dimension::length()), mass, Choice::Harmonic, {}};
    }
    Choice operator()(const rule::QuarticBased&) const {
      std::optional<std::string> name;
      if (spec.family == Family::PolyAnharmonic) name = "k4";
      else name = unique_param_with(spec, kQuartic);
      if (!name || !spec.params.count(*name))
        throw RuleMismatch("QuarticBased: " + fam + " has no quartic coefficient");
      return {scale_from({hbar, mass, param(spec, *name)}, Dimension::length()), mass, Choice::Quartic, {}};
    }
    Choice operator()(const rule::CoulombBased& c) const {
      const Quantity mu = c.mu ? *c.mu : mass;
      if (mu.dim != Dimension::mass() || !(mu.magnitude > 0))
        throw DimensionError("CoulombBased: reduced mass must be a positive mass");
      return {scale_from({hbar, mu, constants.coulomb_constant()}, Dimension::length()), mu, Choice::Coulomb, {}};
    }
    Choice operator()(const rule::Explicit& e) const {
      if (e.length.dim != Dimension::length()) throw DimensionError("Explicit length unit is not a length");
      if (!(e.length.magnitude > 0)) throw DomainError("Explicit length unit must be positive");
      return {e.length, mass, Choice::Explicit, {}};
    }
  };
  return std::visit(Visitor{spec, mass, hbar, constants, fam}, r);
}

// Dimensionless combination p / (m^a L^b hbar^c).
double reduce(const Quantity& p, const Quantity& m, const Quantity& L, const Quantity& hbar) {
  const std::vector<Quantity> basis{m, L, hbar};
  return p.magnitude / solve_scale(basis, p.dim).value.magnitude;
}

struct Template {
  std::string ftilde;
  ParamValues couplings;
  std::string lo = "-inf", hi = "inf";
};

std::optional<Template> catalog_template(const PotentialSpec& spec, const Choice& c, const Quantity& hbar) {
  const Quantity& m = c.mass;
  const double h2 = hbar.magnitude * hbar.magnitude;
  auto lambda_va = [&] {
    const double a = param(spec, "a").magnitude;
    return m.magnitude * a * a * param(spec, "V0").magnitude / h2;
  };
  switch (spec.family) {
    case Family::Box:
      if (c.kind == Choice::Given && c.given == "Lbox") return Template{"0", {}, "0", "1"};
      break;
    case Family::Harmonic:
      if (c.kind == Choice::Harmonic) return Template{"0.5*x^2", {}};
      break;
    case Family::ScaledForm: {
      if (!spec.shape) break;
      if (c.kind == Choice::Given && c.given == "a")
        return Template{(Expr::param("lambda") * *spec.shape).to_string(), {{"lambda", lambda_va()}}};
      if (c.kind == Choice::Depth)
        return Template{spec.shape->substitute_x(Expr::x() / Expr::pow(Expr::param("lambda"), Rational(1, 2)))
                            .to_string(),
                        {{"lambda", lambda_va()}}};
      break;
    }
    case Family::RectBarrier:
      if (c.kind == Choice::Given && c.given == "a")
        return Template{"piecewise([-inf, 0]: 0, [0, 1]: lambda, [1, inf]: 0)", {{"lambda", lambda_va()}}};
      if (c.kind == Choice::Depth)
        return Template{"piecewise([-inf, 0]: 0, [0, lambda^(1/2)]: 1, [lambda^(1/2), inf]: 0)",
                        {{"lambda", lambda_va()}}};
      break;
    case Family::Morse: {
      const double a = param(spec, "a").magnitude;
      const double lambda = m.magnitude * param(spec, "D").magnitude / (h2 * a * a);
      if (c.kind == Choice::Given && c.given == "a") return Template{"lambda*(1 - exp(-x))^2", {{"lambda", lambda}}};
      if (c.kind == Choice::Depth) return Template{"(1 - exp(-x/lambda^(1/2)))^2", {{"lambda", lambda}}};
      break;
    }
    case Family::AhmedBIC:
      if (c.kind == Choice::Given && c.given == "a")
        return Template{"lambda*(1 - exp(2*abs(x)))", {{"lambda", lambda_va()}}};
      if (c.kind == Choice::Depth) return Template{"1 - exp(2*abs(x)/lambda^(1/2))", {{"lambda", lambda_va()}}};
      break;
    case Family::TruncInvSquare: {
      const double rho0 = std::sqrt(2.0 * m.magnitude * param(spec, "alpha").magnitude / h2);
      if (c.kind == Choice::Depth)
        return Template{
            "piecewise([0, rho0/2^(1/2)]: -1, [rho0/2^(1/2), inf]: -rho0^2/(2*x^2))", {{"rho0", rho0}}, "0", "inf"};
      if (c.kind == Choice::Given && c.given == "eps")
        return Template{"piecewise([0, 1]: -rho0^2/2, [1, inf]: -rho0^2/(2*x^2))", {{"rho0", rho0}}, "0", "inf"};
      break;
    }
    case Family::PolyAnharmonic: {
      const double k2 = param(spec, "k2").magnitude;
      const double k4 = param(spec, "k4").magnitude;
      const double omega = std::sqrt(k2 / m.magnitude);
      const double lambda = hbar.magnitude * k4 / (m.magnitude * m.magnitude * omega * omega * omega);
      if (c.kind == Choice::Harmonic) return Template{"0.5*x^2 + lambda*x^4", {{"lambda", lambda}}};
      if (c.kind == Choice::Quartic) return Template{"x^2/(2*lambda^(2/3)) + x^4", {{"lambda", lambda}}};
      break;
    }
    case Family::Custom: break;
  }
  return std::nullopt;
}

void check_dimensionless(const ScaledProblem& p) {
  ParamDims dims;
  for (const auto& [name, v] : p.couplings) dims[name] = Dimension::none();
  std::vector<Diagnostic> diags;
  try {
    diags = lint(p.ftilde, dims, Dimension::none());
    for (const Expr* e : {&p.lo, &p.hi}) {
      const auto more = lint(*e, dims, Dimension::none());
      diags.insert(diags.end(), more.begin(), more.end());
    }
  } catch (const LookupError& e) {
    throw ConsistencyError(std::string("residual dimensional parameter after collapse: ") + e.what());
  }
  if (!diags.empty()) throw ConsistencyError("scaled potential is not dimensionless: " + diags.front().to_string());
}

}  // namespace

double collapse_error(const PotentialSpec& spec, const ScaledProblem& p, int samples,
                      const ConstantRegistry& constants) {
  (void)constants;
  const ParamValues values = spec.param_values();
  const double lo = std::max(p.domain_lo(), -6.0);
  const double hi = std::min(p.domain_hi(), 6.0);
  std::mt19937_64 rng(0x5ca1e);
  std::uniform_real_distribution<double> dist(lo, hi);
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    const double xt = dist(rng);
    const double a = spec.expr.eval(p.length.magnitude * xt, values) / p.energy_unit.magnitude;
    const double b = p.potential(xt);
    const double scale = std::max(std::abs(a), std::abs(b));
    // Subnormal values carry too few bits for a relative comparison.
    if (scale < std::numeric_limits<double>::min() * 0x1p52) continue;
    worst = std::max(worst, std::abs(a - b) / scale);
  }
  return worst;
}

ScaledProblem nondimensionalize(const PotentialSpec& spec, const Quantity& mass, const ScalingRule& r,
                                const ConstantRegistry& constants) {
  if (mass.dim != Dimension::mass()) throw DimensionError("mass has dimension " + mass.dim.to_string());
  if (!(mass.magnitude > 0)) throw DomainError("mass must be positive");
  spec.validate();
  const Quantity& hbar = constants.hbar();
  const Choice c = choose_length(spec, mass, r, constants);

  ScaledProblem p;
  p.family = spec.family;
  p.rule = rule_name(r);
  p.mass = c.mass;
  p.length = c.L;
  p.energy_unit = energy_unit(c.mass, c.L, constants);
  p.time_unit = time_unit(c.mass, c.L, constants);
  p.lo_bc = spec.domain.lo_bc;
  p.hi_bc = spec.domain.hi_bc;

  if (auto t = catalog_template(spec, c, hbar)) {
    p.ftilde = parse_expr(t->ftilde);
    p.couplings = std::move(t->couplings);
    p.lo = parse_expr(t->lo);
    p.hi = parse_expr(t->hi);
  } else {
    std::map<std::string, Expr, std::less<>> rename;
    for (const auto& [name, q] : spec.params) {
      const std::string scaled = name + "_t";
      rename.emplace(name, Expr::param(scaled));
      p.couplings[scaled] = reduce(q, c.mass, c.L, hbar);
    }
    p.ftilde = spec.expr.substitute_params(rename);
    p.lo = spec.domain.lo.substitute_params(rename);
    p.hi = spec.domain.hi.substitute_params(rename);
    // Drop couplings the scaled problem never references.
    std::set<std::string> used = p.ftilde.free_params();
    for (const Expr* e : {&p.lo, &p.hi})
      for (const auto& n : e->free_params()) used.insert(n);
    std::erase_if(p.couplings, [&](const auto& kv) { return !used.count(kv.first); });
  }

  check_dimensionless(p);
  const double err = collapse_error(spec, p, 100, constants);
  if (!(err <= 1e-10))
    throw ConsistencyError("scaled potential does not reproduce (m L^2/hbar^2) V(L x): relative error " +
                           format_double(err));
  return p;
}

ParamValues couplings_of(const PotentialSpec& spec, const Quantity& mass, const ScalingRule& rule,
                         const ConstantRegistry& constants) {
  return nondimensionalize(spec, mass, rule, constants).couplings;
}

std::pair<ScaledProblem, ScaledProblem> nondimensionalize_both(const PotentialSpec& spec, const Quantity& mass,
                                                               const ConstantRegistry& constants) {
  std::string length;
  switch (spec.family) {
    case Family::ScaledForm:
    case Family::RectBarrier:
    case Family::AhmedBIC:
    case Family::Morse: length = "a"; break;
    case Family::TruncInvSquare: length = "eps"; break;
    default: throw RuleMismatch(std::string(family_name(spec.family)) + " has no length/depth pair");
  }
  return {nondimensionalize(spec, mass, rule::GivenLength{length}, constants),
          nondimensionalize(spec, mass, rule::DepthBased{}, constants)};
}

double hydrogen_effective_mass(const Quantity& m_n, const ConstantRegistry& constants) {
  if (m_n.dim != Dimension::mass()) throw DimensionError("nuclear mass has dimension " + m_n.dim.to_string());
  if (!(m_n.magnitude > 0)) throw DomainError("nuclear mass must be positive");
  if (std::isinf(m_n.magnitude)) return 1.0;
  const double me = constants.electron_mass().magnitude;
  return m_n.magnitude / (m_n.magnitude + me);
}

ScaleSolution bohr_radius(const ConstantRegistry& constants) {
  const std::vector<Quantity> qs{constants.hbar(), constants.electron_mass(), constants.coulomb_constant()};
  return solve_scale(qs, Dimension::length());
}

AtomicDescriptor atomic_units(const std::vector<Particle>& particles, const ConstantRegistry& constants) {
  if (particles.empty()) throw DomainError("atomic_units needs at least one particle");
  const Quantity& me = constants.electron_mass();
  const Quantity& e = constants.elementary_charge();
  AtomicDescriptor d;
  d.length = bohr_radius(constants).value;
  d.energy_unit = energy_unit(me, d.length, constants);
  d.time_unit = time_unit(me, d.length, constants);
  for (const auto& p : particles) {
    if (p.mass.dim != Dimension::mass() || !(p.mass.magnitude > 0))
      throw DimensionError("particle mass must be a positive mass");
    if (p.charge.dim != Dimension::charge()) throw DimensionError("particle charge must be a charge");
    d.mass.push_back(p.mass.magnitude / me.magnitude);
    d.charge.push_back(p.charge.magnitude / e.magnitude);
  }
  const int K = static_cast<int>(particles.size());
  for (int i = 0; i < K; ++i)
    for (int j = i + 1; j < K; ++j) d.coulomb.push_back({{i, j}, d.charge[i] * d.charge[j]});

  std::ostringstream h;
  if (K == 2) {
    const double mu = d.mass[0] * d.mass[1] / (d.mass[0] + d.mass[1]);
    d.reduced_mass = mu;
    h << "H = -1/(2*" << format_double(mu) << ") nabla^2 + (" << format_double(d.coulomb[0].second) << ")/r";
  } else {
    h << "H =";
    for (int i = 0; i < K; ++i) h << " - 1/(2*" << format_double(d.mass[i]) << ") nabla_" << i << "^2";
    for (const auto& [ij, c] : d.coulomb)
      h << " + (" << format_double(c) << ")/r_" << ij.first << ij.second;
  }
  d.hamiltonian = h.str();
  return d;
}

ZScaledAtom z_scaled_atom(int N, int Z, const ConstantRegistry& constants) {
  if (N < 1) throw DomainError("electron count must be at least 1");
  if (Z < 1) throw DomainError("nuclear charge must be at least 1");
  ZScaledAtom a;
  a.electrons = N;
  a.Z = Z;
  const Quantity a0 = bohr_radius(constants).value;
  a.length = a0 * (1.0 / Z);
  a.energy_unit = energy_unit(constants.electron_mass(), a.length, constants);
  a.nucleus_electron.assign(static_cast<std::size_t>(N), Rational(-1));
  a.electron_electron.assign(static_cast<std::size_t>(N) * (N - 1) / 2, Rational(1, Z));

  std::ostringstream h;
  h << "H = sum_{i=1..N} [-(1/2) nabla_i^2 - 1/r_i]";
  if (N > 1) h << " + (" << to_string(Rational(1, Z)) << ") sum_{i<j} 1/r_ij";
  a.hamiltonian = h.str();
  a.series_template = N == 1 ? "E = (hbar^2*Z^2/(m_e*a0^2))*E(0)"
                             : "E = (hbar^2*Z^2/(m_e*a0^2))*sum_{j>=0} E(j)*Z^(-j)";
  return a;
}

EquivalenceVerdict equivalence_witness(const PotentialSpec& spec1, const PotentialSpec& spec2, const Quantity& mass1,
                                       const Quantity& mass2, const ScalingRule& rule, double tol,
                                       const ConstantRegistry& constants) {
  if (spec1.family != spec2.family)
    throw RuleMismatch(std::string("cannot compare ") + family_name(spec1.family) + " with " +
                       family_name(spec2.family));
  EquivalenceVerdict v;
  v.couplings1 = couplings_of(spec1, mass1, rule, constants);
  v.couplings2 = couplings_of(spec2, mass2, rule, constants);
  v.equivalent = v.couplings1.size() == v.couplings2.size();
  for (const auto& [name, c1] : v.couplings1) {
    const auto it = v.couplings2.find(name);
    if (it == v.couplings2.end()) {
      v.equivalent = false;
      continue;
    }
    const double scale = std::max(std::abs(c1), std::abs(it->second));
    const double rel = scale == 0 ? 0 : std::abs(c1 - it->second) / scale;
    v.max_relative_difference = std::max(v.max_relative_difference, rel);
  }
  if (v.max_relative_difference > tol) v.equivalent = false;
  return v;
}

std::string report(const ScaledProblem& p) {
  std::ostringstream o;
  o << "scaled problem: " << family_name(p.family) << " under " << p.rule << "\n";
  o << "  length unit L      = " << format_double(p.length.magnitude) << " m\n";
  o << "  energy unit        = " << format_double(p.energy_unit.magnitude) << " J\n";
  o << "  time unit (omega)  = " << format_double(p.time_unit.magnitude) << " 1/s\n";
  if (p.couplings.empty()) o << "  couplings: none\n";
  for (const auto& [name, v] : p.couplings) o << "  coupling " << name << " = " << format_double(v) << "\n";
  o << "  H = -1/2 d^2/dx^2 + " << p.ftilde.to_string() << "\n";
  o << "  x in [" << p.lo.to_string() << ", " << p.hi.to_string() << "]\n";
  o << "  E = " << format_double(p.energy_unit.magnitude) << " J * E_tilde\n";
  o << "[machine]\n";
  o << "family=" << family_name(p.family) << "\n";
  o << "rule=" << p.rule << "\n";
  o << "L_SI=" << format_double(p.length.magnitude) << "\n";
  o << "energy_unit_SI=" << format_double(p.energy_unit.magnitude) << "\n";
  o << "omega_SI=" << format_double(p.time_unit.magnitude) << "\n";
  for (const auto& [name, v] : p.couplings) o << "coupling." << name << "=" << format_double(v) << "\n";
  o << "ftilde=" << p.ftilde.to_string() << "\n";
  o << "domain_lo=" << p.lo.to_string() << "\n";
  o << "domain_hi=" << p.hi.to_string() << "\n";
  o << "bc_lo=" << (p.lo_bc == BoundaryKind::Dirichlet ? "dirichlet" : "open") << "\n";
  o << "bc_hi=" << (p.hi_bc == BoundaryKind::Dirichlet ? "dirichlet" : "open") << "\n";
  return o.str();
}

}  // namespace scaleqm
