#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scaleqm/dimensions.hpp"
#include "scaleqm/expr.hpp"

namespace scaleqm {

enum class Family { Box, Harmonic, ScaledForm, RectBarrier, Morse, AhmedBIC, TruncInvSquare, PolyAnharmonic, Custom };

const char* family_name(Family f);
/// Throws LookupError for an unknown name.
Family family_from_name(std::string_view name);

/// Boundary behaviour at one end of the coordinate domain. Finite ends are
/// Dirichlet walls; infinite ends are open.
enum class BoundaryKind { Dirichlet, Open };

struct Domain {
  Expr lo;  // may be -inf
  Expr hi;  // may be inf
  BoundaryKind lo_bc = BoundaryKind::Open;
  BoundaryKind hi_bc = BoundaryKind::Open;

  static Domain whole_line();
  static Domain half_line();  // [0, inf) with a wall at 0
};

/// Dimensional potential plus its parameter table.
struct PotentialSpec {
  Family family = Family::Custom;
  Expr expr;
  std::map<std::string, Quantity, std::less<>> params;
  Domain domain = Domain::whole_line();
  /// Dimensionless shape f(q) for ScaledForm (V = V0 f(x/a)).
  std::optional<Expr> shape;

  ParamDims param_dims() const;
  ParamValues param_values() const;

  /// Lint, energy dimension of the whole expression, piecewise coverage of
  /// the domain and the family positivity constraints. Throws DimensionError
  /// or DomainError with the first violation.
  void validate() const;
};

namespace catalog {

/// Particle in an impenetrable box [0, Lbox].
PotentialSpec box(const Quantity& Lbox);
/// (k/2) x^2.
PotentialSpec harmonic(const Quantity& k);
/// V0 f(x/a) with f given as an expression in x.
PotentialSpec scaled_form(const Quantity& V0, const Quantity& a, const Expr& shape);
/// V0 on [0, a), zero elsewhere.
PotentialSpec rect_barrier(const Quantity& V0, const Quantity& a);
/// D (1 - exp(-a x))^2.
PotentialSpec morse(const Quantity& D, const Quantity& a);
/// V0 (1 - exp(2|x|/a)).
PotentialSpec ahmed_bic(const Quantity& V0, const Quantity& a);
/// -alpha/eps^2 for 0 < x < eps, -alpha/x^2 beyond, on the half-line.
PotentialSpec trunc_inv_square(const Quantity& alpha, const Quantity& eps);
/// (k2/2) x^2 + k4 x^4.
PotentialSpec poly_anharmonic(const Quantity& k2, const Quantity& k4);

/// Expression the family constructor produces, in terms of its canonical
/// parameter names.
Expr family_expr(Family f, const std::optional<Expr>& shape = std::nullopt);

/// Canonical parameter names and dimensions of a catalog family.
std::vector<std::pair<std::string, Dimension>> family_params(Family f);

/// Builds a catalog spec from a parameter table. Throws LookupError or
/// DimensionError when a canonical parameter is missing or mistyped.
PotentialSpec build(Family f, const std::map<std::string, Quantity, std::less<>>& params,
                    const std::optional<Expr>& shape = std::nullopt);

}  // namespace catalog

/// Derivatives of f at x0: f[j] = f^(j)(x0), so that
/// f(x0 + q) = sum_j f[j] q^j / j!.
struct TaylorCoeffs {
  double x0 = 0;
  std::vector<double> derivatives;  // index j = 0..J

  double f(int j) const { return derivatives.at(static_cast<std::size_t>(j)); }
  /// Throws DomainError unless f(x0) = 0, f'(x0) = 0 (to `tol`) and f2 > 0.
  void require_minimum(double tol = 1e-12) const;
};

/// Forward-mode Taylor arithmetic on the AST, exact to round-off.
/// Throws DomainError at a non-smooth point (abs of zero, piecewise
/// breakpoint, fractional power of zero) or when J < 2.
TaylorCoeffs taylor(const Expr& expr, double x0, int J, const ParamValues& params = {});

}  // namespace scaleqm
