#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scaleqm/constants.hpp"
#include "scaleqm/potential.hpp"

namespace scaleqm {

namespace rule {

/// L is a length parameter of the potential, or the inverse of an
/// inverse-length parameter (Morse `a`).
struct GivenLength {
  std::string param;
};
/// L = hbar / sqrt(m V0) for the depth parameter V0.
struct DepthBased {};
/// L = (hbar^2 / (m k))^(1/4) for the quadratic force constant.
struct HarmonicBalance {};
/// L = (hbar / sqrt(m k4))^(1/3) for the quartic coefficient.
struct QuarticBased {};
/// L = hbar^2 / (mu kappa). Uses the problem mass when `mu` is empty.
struct CoulombBased {
  std::optional<Quantity> mu;
};
struct Explicit {
  Quantity length;
};

}  // namespace rule

using ScalingRule =
    std::variant<rule::GivenLength, rule::DepthBased, rule::HarmonicBalance, rule::QuarticBased, rule::CoulombBased,
                 rule::Explicit>;

std::string rule_name(const ScalingRule& r);
/// Inverse of rule_name for the rules without a Quantity payload:
/// "GivenLength(a)", "DepthBased", "HarmonicBalance", "QuarticBased",
/// "CoulombBased". Throws ParseError otherwise.
ScalingRule parse_rule(std::string_view text);

/// Default rule of a catalog family (GivenLength of its length parameter,
/// HarmonicBalance for the oscillators, DepthBased for TruncInvSquare).
ScalingRule default_rule(Family f);

/// Dimensionless problem -1/2 psi'' + ftilde(x) psi = E psi.
struct ScaledProblem {
  Family family = Family::Custom;
  std::string rule;
  Expr ftilde;
  ParamValues couplings;
  Quantity mass;
  Quantity length;       // L
  Quantity energy_unit;  // hbar^2 / (m L^2)
  Quantity time_unit;    // omega, hbar omega = energy_unit
  Expr lo, hi;           // scaled domain, in terms of the couplings
  BoundaryKind lo_bc = BoundaryKind::Open;
  BoundaryKind hi_bc = BoundaryKind::Open;

  double potential(double x) const { return ftilde.eval(x, couplings); }
  double domain_lo() const { return lo.eval(0, couplings); }
  double domain_hi() const { return hi.eval(0, couplings); }
  /// E = energy_unit * Etilde.
  Quantity to_physical(double Etilde) const { return energy_unit * Etilde; }
};

/// Builds the dimensionless problem. Catalog families use named couplings
/// (lambda, rho0); other combinations rename each parameter p to p_t = p /
/// (m^a L^b hbar^c). The collapse is checked at 100 random points.
///
/// Throws RuleMismatch when the rule does not fit the family, and
/// ConsistencyError when the collapse check fails.
ScaledProblem nondimensionalize(const PotentialSpec& spec, const Quantity& mass, const ScalingRule& rule,
                                const ConstantRegistry& constants = ConstantRegistry::codata());

ParamValues couplings_of(const PotentialSpec& spec, const Quantity& mass, const ScalingRule& rule,
                         const ConstantRegistry& constants = ConstantRegistry::codata());

/// Both length choices of a V0 f(x/a)-type problem (GivenLength and
/// DepthBased).
std::pair<ScaledProblem, ScaledProblem> nondimensionalize_both(
    const PotentialSpec& spec, const Quantity& mass, const ConstantRegistry& constants = ConstantRegistry::codata());

/// Largest relative deviation between (m L^2/hbar^2) V(L x) and ftilde(x)
/// over `samples` random points of the scaled domain (clipped to |x| <= 6).
double collapse_error(const PotentialSpec& spec, const ScaledProblem& p, int samples = 100,
                      const ConstantRegistry& constants = ConstantRegistry::codata());

/// m_n / (m_n + m_e).
double hydrogen_effective_mass(const Quantity& m_n, const ConstantRegistry& constants = ConstantRegistry::codata());

struct Particle {
  Quantity mass;
  Quantity charge;
};

struct AtomicDescriptor {
  std::vector<double> mass;    // m_i / m_e
  std::vector<double> charge;  // q_i / e
  /// Coulomb coefficient q_i q_j for each pair i < j, row-major.
  std::vector<std::pair<std::pair<int, int>, double>> coulomb;
  Quantity length;  // a0
  Quantity energy_unit;
  Quantity time_unit;
  /// Two-body reduction (K = 2): reduced mass in units of m_e.
  std::optional<double> reduced_mass;
  std::string hamiltonian;
};

/// Atomic-unit description of K charged particles. Throws DomainError for an
/// empty list.
AtomicDescriptor atomic_units(const std::vector<Particle>& particles,
                              const ConstantRegistry& constants = ConstantRegistry::codata());

/// Bohr radius from solve_scale over {hbar, m_e, kappa}.
ScaleSolution bohr_radius(const ConstantRegistry& constants = ConstantRegistry::codata());

struct ZScaledAtom {
  int electrons = 1;
  int Z = 1;
  Quantity length;       // a0 / Z
  Quantity energy_unit;  // Z^2 hartree
  std::vector<Rational> nucleus_electron;  // one per electron, all -1
  std::vector<Rational> electron_electron;  // one per pair, all 1/Z
  std::string hamiltonian;
  std::string series_template;
};

/// N-electron atom in units of a0/Z. Throws DomainError for N < 1 or Z < 1.
ZScaledAtom z_scaled_atom(int N, int Z, const ConstantRegistry& constants = ConstantRegistry::codata());

struct EquivalenceVerdict {
  bool equivalent = false;
  double max_relative_difference = 0;
  ParamValues couplings1, couplings2;
};

/// Equivalent iff both specs produce the same coupling names with values
/// within `tol` relative. Throws RuleMismatch for different families.
EquivalenceVerdict equivalence_witness(const PotentialSpec& spec1, const PotentialSpec& spec2, const Quantity& mass1,
                                       const Quantity& mass2, const ScalingRule& rule, double tol = 1e-12,
                                       const ConstantRegistry& constants = ConstantRegistry::codata());

/// Human-readable summary followed by a `[machine]` section of key=value
/// lines.
std::string report(const ScaledProblem& p);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace scaleqm
