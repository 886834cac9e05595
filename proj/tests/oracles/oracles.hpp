#pragma once

// Reference values computed without the scaleqm library.

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

/// <n| x^d |n> for the unit oscillator, x = (a + a^dagger)/sqrt(2), by
/// summing over ladder paths. d must be even.
Rational ladder_moment(int n, int d);

/// Second-order energy -sum_{m != n} |<m|P|n>|^2 / (m - n) for
/// P = sum_d c_d x^d, from a dense ladder matrix in double precision.
double second_order_energy(int n, const std::vector<double>& poly);

/// Eigenvalues of -1/2 d^2/dx^2 + x^4 in a `basis`-state oscillator basis of
/// frequency `omega`.
std::vector<double> pure_quartic_levels(int basis, double omega, int count);

/// Lowest eigenvalues of -1/2 d^2/dx^2 + sum_d c_d x^d (same basis method).
std::vector<double> polynomial_levels(const std::vector<double>& poly, int basis, double omega, int count);

/// Rectangular barrier, E in units of the height, lambda = m a^2 V0 / hbar^2.
double barrier_transmission(double E, double lambda);

/// sqrt(2 lambda)(n + 1/2) - (n + 1/2)^2 / 2 for every n below the cutoff.
std::vector<double> morse_levels(double lambda);

}  // namespace oracle
