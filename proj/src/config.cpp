#include "scaleqm/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scaleqm/errors.hpp"

namespace scaleqm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Splits at commas outside parentheses and brackets.
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

BoundaryKind parse_bc(const std::string& s, int line, int column) {
  const std::string t = lower(s);
  if (t == "dirichlet" || t == "wall") return BoundaryKind::Dirichlet;
  if (t == "open") return BoundaryKind::Open;
  throw ParseError("unknown boundary condition '" + s + "' (use dirichlet or open)", line, column);
}

const char* bc_text(BoundaryKind k) { return k == BoundaryKind::Dirichlet ? "dirichlet" : "open"; }

Quantity parse_mass(const std::string& text, const ConstantRegistry& constants, int line, int column) {
  std::istringstream in(text);
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  auto constant = [&](const std::string& name) -> std::optional<Quantity> {
    if (!constants.contains(name)) return std::nullopt;
    return constants.get(name);
  };
  if (tok.size() == 1) {
    if (auto q = constant(tok[0])) return *q;
  }
  if (tok.size() == 2) {
    if (auto q = constant(tok[1])) {
      try {
        std::size_t used = 0;
        const double f = std::stod(tok[0], &used);
        if (used == tok[0].size()) return *q * f;
      } catch (const std::exception&) {
      }
    }
  }
  try {
    return parse_quantity(text);
  } catch (const Error& e) {
    throw ParseError("bad mass '" + text + "': expected '<value> M1', a constant name or '<factor> <constant>'", line,
                     column);
  }
}

template <class F>
auto at_line(int line, int column, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line, column + e.column() - 1);
  } catch (const Error& e) {
    throw ParseError(e.what(), line, column);
  }
}

}  // namespace

ProblemConfig parse_config(std::string_view text, const ConstantRegistry& constants) {
  ProblemConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = hash == std::string::npos ? raw : raw.substr(0, hash);
    if (trim(content).empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line, 1);
    const std::string key = trim(content.substr(0, eq));
    const auto vstart = content.find_first_not_of(" \t", eq + 1);
    const int col = vstart == std::string::npos ? static_cast<int>(content.size()) + 1 : static_cast<int>(vstart) + 1;
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key before '='", line, 1);
    if (value.empty()) throw ParseError("missing value for key '" + key + "'", line, col);
    if (key != "assume" && cfg.lines.count(key)) throw ParseError("repeated key '" + key + "'", line, 1);
    cfg.lines.emplace(key, line);

    if (key == "family") {
      cfg.family = at_line(line, col, [&] { return family_from_name(value); });
    } else if (key == "potential") {
      cfg.potential = at_line(line, col, [&] { return parse_expr(value); });
    } else if (key == "shape") {
      cfg.shape = at_line(line, col, [&] { return parse_expr(value); });
    } else if (key.rfind("param.", 0) == 0) {
      const std::string name = key.substr(6);
      if (name.empty()) throw ParseError("empty parameter name", line, 1);
      cfg.params[name] = at_line(line, col, [&] { return parse_quantity(value); });
    } else if (key == "mass") {
      cfg.mass = parse_mass(value, constants, line, col);
    } else if (key == "domain") {
      const std::string v = lower(value);
      if (v == "whole") {
        const Domain d = Domain::whole_line();
        cfg.domain = {d.lo, d.hi};
      } else if (v == "half") {
        const Domain d = Domain::half_line();
        cfg.domain = {d.lo, d.hi};
      } else {
        std::string body = value;
        if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
        const auto parts = split_top(body);
        if (parts.size() != 2) throw ParseError("domain must be 'whole', 'half' or 'lo, hi'", line, col);
        cfg.domain = at_line(line, col, [&] { return std::pair{parse_expr(parts[0]), parse_expr(parts[1])}; });
      }
    } else if (key == "bc") {
      const auto parts = split_top(value);
      if (parts.size() != 2) throw ParseError("bc must be '<lower>, <upper>'", line, col);
      cfg.bc = std::pair{parse_bc(parts[0], line, col), parse_bc(parts[1], line, col)};
    } else if (key == "rule") {
      cfg.rule = at_line(line, col, [&] { return parse_rule(value); });
    } else if (key == "assume") {
      cfg.assume.push_back(at_line(line, col, [&] { return parse_equation(value); }));
      cfg.assume_lines.push_back(line);
    } else {
      throw ParseError("unknown key '" + key + "'", line, 1);
    }
  }
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path, const ConstantRegistry& constants) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), constants);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
  }
}

std::string write_config(const ProblemConfig& cfg) {
  std::ostringstream os;
  if (cfg.family) os << "family = " << family_name(*cfg.family) << "\n";
  if (cfg.potential) os << "potential = " << cfg.potential->to_string() << "\n";
  if (cfg.shape) os << "shape = " << cfg.shape->to_string() << "\n";
  for (const auto& [name, q] : cfg.params)
    os << "param." << name << " = " << format_double(q.magnitude) << " " << q.dim.to_config_string() << "\n";
  if (cfg.mass) os << "mass = " << format_double(cfg.mass->magnitude) << " " << cfg.mass->dim.to_config_string() << "\n";
  if (cfg.domain) os << "domain = " << cfg.domain->first.to_string() << ", " << cfg.domain->second.to_string() << "\n";
  if (cfg.bc) os << "bc = " << bc_text(cfg.bc->first) << ", " << bc_text(cfg.bc->second) << "\n";
  if (cfg.rule) os << "rule = " << rule_name(*cfg.rule) << "\n";
  for (const auto& eq : cfg.assume) os << "assume = " << eq.lhs.to_string() << " = " << eq.rhs.to_string() << "\n";
  return os.str();
}

PotentialSpec build_spec(const ProblemConfig& cfg) {
  const Family f = cfg.family.value_or(Family::Custom);
  auto require_param = [&](const std::string& name, const std::string& what) {
    if (!cfg.params.count(name)) throw UsageError("missing config key 'param." + name + "' (" + what + ")");
  };
  if (f != Family::Custom)
    for (const auto& [name, dim] : catalog::family_params(f))
      require_param(name, std::string(family_name(f)) + " parameter, dimension " + dim.to_config_string());
  if (!cfg.potential && f == Family::Custom) throw UsageError("missing config key 'potential' (or a catalog 'family')");
  if (f != Family::Custom && !cfg.potential) {
    if (f == Family::ScaledForm && !cfg.shape) throw UsageError("missing config key 'shape' for family ScaledForm");
    if (cfg.domain || cfg.bc) throw UsageError("catalog families fix their own domain; remove 'domain' and 'bc'");
    return catalog::build(f, cfg.params, cfg.shape);
  }
  PotentialSpec spec;
  spec.family = f;
  spec.expr = *cfg.potential;
  if (f != Family::Custom) {
    const Expr expected = catalog::family_expr(f, cfg.shape);
    if (!(expected == spec.expr))
      throw UsageError("potential '" + spec.expr.to_string() + "' does not match the " + family_name(f) +
                       " expression '" + expected.to_string() + "'");
    return catalog::build(f, cfg.params, cfg.shape);
  }
  for (const auto& name : spec.expr.free_params()) require_param(name, "used by the potential");
  spec.params = cfg.params;
  if (cfg.domain) {
    spec.domain.lo = cfg.domain->first;
    spec.domain.hi = cfg.domain->second;
  }
  const ParamValues values = spec.param_values();
  auto finite = [&](const Expr& e) {
    try {
      return std::isfinite(e.eval(0, values));
    } catch (const LookupError&) {
      return true;
    }
  };
  spec.domain.lo_bc = finite(spec.domain.lo) ? BoundaryKind::Dirichlet : BoundaryKind::Open;
  spec.domain.hi_bc = finite(spec.domain.hi) ? BoundaryKind::Dirichlet : BoundaryKind::Open;
  if (cfg.bc) {
    spec.domain.lo_bc = cfg.bc->first;
    spec.domain.hi_bc = cfg.bc->second;
  }
  spec.validate();
  return spec;
}

Quantity require_mass(const ProblemConfig& cfg) {
  if (!cfg.mass) throw UsageError("missing config key 'mass'");
  return *cfg.mass;
}

ScalingRule config_rule(const ProblemConfig& cfg) {
  if (cfg.rule) return *cfg.rule;
  const Family f = cfg.family.value_or(Family::Custom);
  if (f == Family::Custom) throw UsageError("missing config key 'rule' (Custom potentials have no default rule)");
  return default_rule(f);
}

ScaledProblem scaled_problem(const ProblemConfig& cfg, const ConstantRegistry& constants) {
  const PotentialSpec spec = build_spec(cfg);
  const Quantity m = require_mass(cfg);
  return nondimensionalize(spec, m, config_rule(cfg), constants);
}

ParamDims assumption_dims(const ProblemConfig& cfg, const ConstantRegistry& constants) {
  ParamDims dims;
  for (const auto& [name, q] : constants.all()) dims[name] = q.dim;
  dims["m"] = Dimension::mass();
  for (const auto& [name, q] : cfg.params) dims[name] = q.dim;
  return dims;
}

std::vector<Diagnostic> lint_config(const ProblemConfig& cfg, const ConstantRegistry& constants) {
  std::vector<Diagnostic> out;
  auto at = [&](const std::string& key) {
    const auto it = cfg.lines.find(key);
    return it == cfg.lines.end() ? 0 : it->second;
  };
  auto note = [&](std::string message, std::string subexpr, int line) {
    Diagnostic d;
    d.message = std::move(message);
    d.subexpr = std::move(subexpr);
    d.span.line = line;
    d.span.column = 1;
    out.push_back(std::move(d));
  };

  ParamDims pdims;
  for (const auto& [name, q] : cfg.params) pdims[name] = q.dim;
  std::optional<Expr> expr = cfg.potential;
  if (!expr && cfg.family && *cfg.family != Family::Custom) {
    try {
      expr = catalog::family_expr(*cfg.family, cfg.shape);
    } catch (const Error& e) {
      note(e.what(), "family", at("family"));
    }
  }
  if (expr) {
    bool known = true;
    for (const auto& p : expr->free_params())
      if (!pdims.count(p)) {
        note("parameter is not declared", p, at(cfg.potential ? "potential" : "family"));
        known = false;
      }
    if (known) {
      for (auto d : lint(*expr, pdims)) {
        d.span.line = at(cfg.potential ? "potential" : "family");
        out.push_back(std::move(d));
      }
      if (out.empty()) {
        try {
          build_spec(cfg);
        } catch (const Error& e) {
          note(e.what(), expr->to_string(), at(cfg.potential ? "potential" : "family"));
        }
      }
    }
  } else if (!cfg.family) {
    note("missing config key 'potential' (or a catalog 'family')", "", 0);
  }

  const ParamDims adims = assumption_dims(cfg, constants);
  std::size_t k = 0;
  for (const auto& eq : cfg.assume) {
    const int line = k < cfg.assume_lines.size() ? cfg.assume_lines[k] : 0;
    ++k;
    std::vector<Diagnostic> ds;
    try {
      ds = lint_equation(eq, adims);
    } catch (const LookupError& e) {
      note(e.what(), eq.text, line);
      continue;
    }
    for (auto& d : ds) {
      d.message = "unit assumption is dimensionally wrong: " + d.message;
      d.span.line = line;
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::string config_key_help() {
  return R"(Config keys (one 'key = value' per line, '#' starts a comment):
  family = <name>          Box, Harmonic, ScaledForm, RectBarrier, Morse, AhmedBIC,
                           TruncInvSquare, PolyAnharmonic or Custom
  potential = <expr>       V(x) in joules, x in metres (Custom potentials)
  shape = <expr>           dimensionless f(q) of V0 f(x/a) (ScaledForm)
  param.<name> = <v> <dim> SI magnitude then dimension, e.g.
                             param.D = 7.6e-19 M1 L2 T-2     (J)
                             param.a = 1.9e10 L-1            (1/m)
                             param.k = 500 M1 T-2            (N/m)
                             param.k4 = 1e21 M1 L-2 T-2      (J/m^4)
                             param.alpha = 1e-38 M1 L4 T-2   (J m^2)
                             param.Lbox = 1e-9 L1            (m)
  mass = <mass>            kg as '<v> M1', a constant name (m_e, m_p) or
                           '<factor> <constant>'
  domain = whole | half | <lo>, <hi>
                           bounds in metres, as expressions
  bc = <lower>, <upper>    dirichlet or open
  rule = <rule>            GivenLength(<param>), DepthBased, HarmonicBalance,
                           QuarticBased, CoulombBased, Explicit(<v> L1)
  assume = <lhs> = <rhs>   unit assumption for 'lint'; may repeat. Symbols:
                           parameters, m (the mass) and constants
                           (hbar, m_e, e, eps0, kappa, ...)
)";
}

}  // namespace scaleqm
