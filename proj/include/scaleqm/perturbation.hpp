#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scaleqm/rational.hpp"
#include "scaleqm/solver.hpp"

namespace scaleqm {

/// sum_d coeffs[d] x^d with exact coefficients.
struct Polynomial {
  std::vector<Rational> coeffs;

  int degree() const;
  bool odd_only() const;
  std::string to_string() const;

  static Polynomial monomial(int d, const Rational& c = Rational(1));
  static Polynomial quartic() { return monomial(4); }
  /// "d:c" terms separated by commas, e.g. "3:1/2,4:1".
  static Polynomial parse(std::string_view text);
};

/// Coefficients E(j) of E(lambda) = sum_j E(j) lambda^j for
/// -1/2 psi'' + (x^2/2 + lambda P(x)) psi = E psi.
struct RationalSeries {
  int n = 0;
  int order = 0;
  std::vector<Rational> coeffs;  // size order + 1
  Polynomial perturbation;

  double value(double lambda) const;
};

inline constexpr int kDefaultOrderCap = 12;
inline constexpr int kMaxPerturbationDegree = 8;

/// Rayleigh-Schrodinger coefficients in the oscillator basis, truncated at
/// n + J d + 1 states so every coefficient is exact. Throws
/// ExactnessCapError for J > cap and DomainError for n < 0, J < 0 or
/// degree > 8.
RationalSeries rs_series(int n, int J, const Polynomial& perturbation, int cap = kDefaultOrderCap);

/// Quartic coefficients from the hypervirial and Hellmann-Feynman relations
/// on the moments <x^k>.
RationalSeries hypervirial_series(int n, int J, int cap = kDefaultOrderCap);

/// Partial sums S_0..S_jmax (jmax is clamped to the series order). Throws
/// DomainError for lambda < 0.
std::vector<double> weak_coupling_eval(const RationalSeries& series, double lambda, int j_max);

/// `j, numerator, denominator, float_value` per order.
std::string series_report(const RationalSeries& series);

/// Dimensionless quartic problem. With `quartic_form` the potential is
/// x^2/(2 lambda^(2/3)) + x^4, whose energies are E(lambda)/lambda^(1/3) of
/// the oscillator form x^2/2 + lambda x^4.
ScaledProblem quartic_problem(double lambda, bool quartic_form);

struct StrongCouplingProbe {
  int n = 0;
  double e0 = 0;  // leading strong-coupling coefficient
  double e1 = 0;  // coefficient of lambda^(-2/3)
  std::vector<double> lambdas;
  std::vector<double> ratios;  // E(lambda) / lambda^(1/3)
  bool monotone = false;
};

/// Solves each sample (concurrently when threads != 1) and fits
/// e0 + e1 lambda^(-2/3) to the three largest. Samples must be positive,
/// increasing, with max >= 1e3. Throws NonConvergence when a solve fails.
StrongCouplingProbe strong_coupling_probe(const std::vector<double>& lambdas, int n, int threads = 0,
                                          const SolveOptions& opts = {});

/// E = (hbar^2 Z^2/(m_e a0^2)) sum_j E(j) Z^(-j) for an N-electron atom.
/// Only the hydrogenic case has known coefficients; for N >= 2 they are left
/// empty.
struct AtomicSeries {
  int electrons = 1;
  int Z = 1;
  int order = 0;
  std::string expression;
  std::vector<std::optional<Rational>> coeffs;
};

AtomicSeries atomic_series(int N, int Z, int order);
std::string atomic_series_report(const AtomicSeries& s);

}  // namespace scaleqm
