#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scaleqm/nondim.hpp"

namespace scaleqm {

/// Problem description read from a line-oriented `key = value` file.
///
///   family = Morse                     catalog tag (or Custom)
///   potential = D*(1 - exp(-a*x))^2    expression in x, energy valued
///   shape = exp(-x^2)                  f(q) of a ScaledForm potential
///   param.D = 7.6e-19 M1 L2 T-2        SI magnitude and dimension
///   mass = m_e                         constant name, "<factor> <name>" or a quantity
///   domain = whole | half | lo, hi     bounds are length expressions
///   bc = dirichlet, open               lower and upper boundary kinds
///   rule = GivenLength(a)              scaling rule
///   assume = V0 = 50                   unit assumption checked by lint
///
/// `#` starts a comment. Every key except `assume` may appear once.
struct ProblemConfig {
  std::optional<Family> family;
  std::optional<Expr> potential;
  std::optional<Expr> shape;
  std::map<std::string, Quantity, std::less<>> params;
  std::optional<Quantity> mass;
  std::optional<std::pair<Expr, Expr>> domain;
  std::optional<std::pair<BoundaryKind, BoundaryKind>> bc;
  std::optional<ScalingRule> rule;
  std::vector<Equation> assume;
  std::vector<int> assume_lines;
  std::map<std::string, int, std::less<>> lines;  // key -> 1-based line
};

/// Throws ParseError (with line/column) on malformed lines, unknown or
/// repeated keys and bad values.
ProblemConfig parse_config(std::string_view text, const ConstantRegistry& constants = ConstantRegistry::codata());

/// Throws UsageError when the file cannot be read.
ProblemConfig load_config(const std::filesystem::path& path,
                          const ConstantRegistry& constants = ConstantRegistry::codata());

/// Canonical text; parse_config(write_config(c)) writes back identically.
std::string write_config(const ProblemConfig& cfg);

/// Potential spec of the configuration. Throws UsageError naming the
/// missing key.
PotentialSpec build_spec(const ProblemConfig& cfg);

Quantity require_mass(const ProblemConfig& cfg);

/// The configured rule, or the family default.
ScalingRule config_rule(const ProblemConfig& cfg);

/// build_spec + nondimensionalize.
ScaledProblem scaled_problem(const ProblemConfig& cfg, const ConstantRegistry& constants = ConstantRegistry::codata());

/// Dimensions visible to `assume` lines: parameters, `m` (the mass) and every
/// registry constant.
ParamDims assumption_dims(const ProblemConfig& cfg, const ConstantRegistry& constants = ConstantRegistry::codata());

/// Dimensional lint of the potential, the parameter checks and every assumption.
std::vector<Diagnostic> lint_config(const ProblemConfig& cfg,
                                    const ConstantRegistry& constants = ConstantRegistry::codata());

/// Input keys with their units, for help texts.
std::string config_key_help();

}  // namespace scaleqm
