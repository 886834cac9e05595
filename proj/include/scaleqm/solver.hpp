#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scaleqm/nondim.hpp"

namespace scaleqm {

enum class BoundaryTag { Dirichlet, ParityEven, ParityOdd, RadialRegular };

const char* boundary_tag_name(BoundaryTag t);

/// Uniform grid x_i = x_min + i h, i = 0..N.
struct GridSpec {
  double x_min = 0;
  double x_max = 1;
  double h = 1e-3;
  BoundaryTag lo = BoundaryTag::Dirichlet;
  BoundaryTag hi = BoundaryTag::Dirichlet;

  int intervals() const;
  /// Throws DomainError unless h > 0 and (x_max - x_min)/h is an integer
  /// (to 1e-9 relative) of at least 16.
  void validate() const;
};

enum class Backend { Numerov, FiniteDifference };

struct SolveOptions {
  double h = 1e-3;
  Backend backend = Backend::Numerov;
  /// Use the half-line with even/odd conditions when the potential is even.
  bool use_parity = true;
  /// Keep normalized samples of each eigenfunction on the final grid.
  bool keep_wavefunctions = false;
  /// Open ends of the auto-sized window never go beyond |x| = max_extent.
  double max_extent = 400;
};

struct BoundState {
  int n = 0;        // node count
  double E = 0;     // dimensionless energy
  bool converged = false;
  double residual = 0;  // |E(h) - E(h/2)|
  int nodes = -1;       // interior sign changes of the computed eigenfunction
  std::vector<double> x, psi;
};

struct BoundStateResult {
  std::vector<BoundState> states;
  /// Fewer than the requested count exist below the continuum threshold.
  bool partial = false;
  std::string note;
  GridSpec grid;  // final full-line grid
  double threshold = 0;  // lowest asymptotic value of the potential (inf if none)
};

/// Lowest `count` eigenvalues of -1/2 psi'' + ftilde psi = E psi. The window
/// is auto-sized unless `grid` is given. Throws DomainError when ftilde is
/// unbounded below.
BoundStateResult bound_states(const ScaledProblem& problem, int count, const SolveOptions& opts = {});
BoundStateResult bound_states(const ScaledProblem& problem, const GridSpec& grid, int count,
                              const SolveOptions& opts = {});

/// -(1/(2m)) u'' + [l(l+1)/(2 m x^2) - 1/x] u = E u with u(0) = 0.
BoundStateResult radial_hydrogen(double m_tilde, int l, int count, const SolveOptions& opts = {});

/// Closed forms: Box n >= 1 (n^2 pi^2/2), Harmonic n >= 0 (n + 1/2), Morse
/// n >= 0 under GivenLength (sqrt(2 lambda)(n + 1/2) - (n + 1/2)^2/2).
/// Throws NoSuchState past the Morse cutoff and LookupError for other
/// families.
double exact_reference(Family family, const ParamValues& couplings, int n);

/// Number of bound states of the Morse problem with coupling lambda.
int morse_state_count(double lambda);

Quantity to_physical(double E_tilde, const ScaledProblem& problem);

struct TransmissionResult {
  double E = 0;
  double lambda = 0;
  double T = 0;
  double R = 0;
};

/// Rectangular barrier with E = energy / V0 and lambda = m a^2 V0 / hbar^2.
/// Throws DomainError unless E > 0 and lambda > 0.
TransmissionResult transmission_closed(double E, double lambda);

/// Transfer matrices over piecewise-constant slices of width <= h. Throws
/// NoScattering when E lies below both asymptotic values.
TransmissionResult transmission_numeric(const ScaledProblem& problem, double E, double h = 1e-3);

struct CsvRow {
  std::string family;
  std::string coupling_name;
  std::string coupling_value;
  int n = 0;
  double E_tilde = 0;
  double E_SI = 0;
  double residual = 0;
};

std::string csv_header();
std::string csv_quote(const std::string& field);
std::string csv_line(const CsvRow& row);
/// Rows for every state of a result; couplings are joined with ';'.
std::vector<CsvRow> csv_rows(const ScaledProblem& problem, const BoundStateResult& result);

}  // namespace scaleqm
