#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scaleqm/rational.hpp"

namespace scaleqm {

enum class BaseDim : int { Mass = 0, Length = 1, Time = 2, Charge = 3 };

inline constexpr int kBaseDims = 4;

const char* base_dim_name(BaseDim d);

/// Exponents over (mass, length, time, charge). Exact rationals; equality is
/// componentwise.
class Dimension {
public:
  Dimension() = default;
  Dimension(Rational mass, Rational length, Rational time, Rational charge)
      : exps_{std::move(mass), std::move(length), std::move(time), std::move(charge)} {}

  static Dimension none() { return {}; }
  static Dimension mass() { return {1, 0, 0, 0}; }
  static Dimension length() { return {0, 1, 0, 0}; }
  static Dimension time() { return {0, 0, 1, 0}; }
  static Dimension charge() { return {0, 0, 0, 1}; }
  static Dimension energy() { return {1, 2, -2, 0}; }
  static Dimension action() { return {1, 2, -1, 0}; }
  static Dimension frequency() { return {0, 0, -1, 0}; }

  const Rational& operator[](BaseDim d) const { return exps_[static_cast<int>(d)]; }
  const Rational& operator[](int i) const { return exps_[i]; }
  const std::array<Rational, kBaseDims>& exponents() const { return exps_; }

  bool is_dimensionless() const;

  Dimension operator*(const Dimension& o) const;
  Dimension operator/(const Dimension& o) const;
  Dimension pow(const Rational& p) const;

  bool operator==(const Dimension& o) const = default;

  /// Human form, e.g. "M L^2 T^-2"; "1" when dimensionless.
  std::string to_string() const;
  /// Configuration form, e.g. "M1 L2 T-2 Q0".
  std::string to_config_string() const;

private:
  std::array<Rational, kBaseDims> exps_{};
};

/// Parses whitespace-separated tokens "M<r> L<r> T<r> Q<r>" in any order
/// (missing components are zero). A leading "dim=" is accepted, as is the
/// single token "1".
Dimension parse_dimension(std::string_view text);

/// SI magnitude paired with its dimension.
struct Quantity {
  double magnitude = 0.0;
  Dimension dim;

  Quantity() = default;
  Quantity(double m, Dimension d) : magnitude(m), dim(std::move(d)) {}

  static Quantity dimensionless(double m) { return {m, Dimension::none()}; }

  Quantity operator*(const Quantity& o) const { return {magnitude * o.magnitude, dim * o.dim}; }
  Quantity operator/(const Quantity& o) const { return {magnitude / o.magnitude, dim / o.dim}; }
  Quantity operator*(double s) const { return {magnitude * s, dim}; }
  /// Throws DimensionError unless dimensions agree.
  Quantity operator+(const Quantity& o) const;
  Quantity operator-(const Quantity& o) const;

  /// Throws DomainError for a fractional power of a negative magnitude.
  Quantity pow(const Rational& p) const;

  std::string to_string() const;
};

/// "<value> <dimension>", e.g. "1.5e-19 M1 L2 T-2". Throws ParseError.
Quantity parse_quantity(std::string_view text);

/// Product of q_i^{p_i}; both magnitude and dimension are exponentiated.
Quantity combine(std::span<const Quantity> quantities, std::span<const Rational> exponents);

struct ScaleSolution {
  std::vector<Rational> exponents;
  Quantity value;
  /// True when the exponent system has a nontrivial nullspace; the exponents
  /// are then the minimal-norm member of the solution family.
  bool ambiguous = false;
  int nullity = 0;
};

/// Exact rational solve of sum_i p_i dim(params_i) = target.
/// Throws ScaleUnderdetermined naming the base dimension that cannot be
/// reached.
ScaleSolution solve_scale(std::span<const Quantity> params, const Dimension& target);

}  // namespace scaleqm
