#include "scaleqm/dimensions.hpp"

#include <cmath>
#include <sstream>

#include "scaleqm/errors.hpp"

namespace scaleqm {

const char* base_dim_name(BaseDim d) {
  switch (d) {
    case BaseDim::Mass: return "mass";
    case BaseDim::Length: return "length";
    case BaseDim::Time: return "time";
    case BaseDim::Charge: return "charge";
  }
  return "?";
}

namespace {
constexpr char kSymbols[kBaseDims] = {'M', 'L', 'T', 'Q'};
}

bool Dimension::is_dimensionless() const {
  for (const auto& e : exps_)
    if (e != 0) return false;
  return true;
}

Dimension Dimension::operator*(const Dimension& o) const {
  Dimension r;
  for (int i = 0; i < kBaseDims; ++i) r.exps_[i] = exps_[i] + o.exps_[i];
  return r;
}

Dimension Dimension::operator/(const Dimension& o) const {
  Dimension r;
  for (int i = 0; i < kBaseDims; ++i) r.exps_[i] = exps_[i] - o.exps_[i];
  return r;
}

Dimension Dimension::pow(const Rational& p) const {
  Dimension r;
  for (int i = 0; i < kBaseDims; ++i) r.exps_[i] = exps_[i] * p;
  return r;
}

std::string Dimension::to_string() const {
  std::string out;
  for (int i = 0; i < kBaseDims; ++i) {
    if (exps_[i] == 0) continue;
    if (!out.empty()) out += ' ';
    out += kSymbols[i];
    if (exps_[i] != 1) {
      out += '^';
      out += scaleqm::to_string(exps_[i]);
    }
  }
  return out.empty() ? "1" : out;
}

std::string Dimension::to_config_string() const {
  std::string out;
  for (int i = 0; i < kBaseDims; ++i) {
    if (i) out += ' ';
    out += kSymbols[i];
    out += scaleqm::to_string(exps_[i]);
  }
  return out;
}

Dimension parse_dimension(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::array<Rational, kBaseDims> exps{};
  std::array<bool, kBaseDims> seen{};
  std::string tok;
  bool any = false;
  while (in >> tok) {
    if (tok.rfind("dim=", 0) == 0) tok = tok.substr(4);
    if (tok.empty()) continue;
    if (tok == "1" && !any) {
      any = true;
      continue;
    }
    int idx = -1;
    for (int i = 0; i < kBaseDims; ++i)
      if (tok[0] == kSymbols[i]) idx = i;
    if (idx < 0) throw DimensionError("unknown dimension token '" + tok + "'");
    if (seen[idx]) throw DimensionError("repeated dimension token '" + tok + "'");
    seen[idx] = true;
    exps[idx] = tok.size() == 1 ? Rational(1) : parse_rational(std::string_view(tok).substr(1));
    any = true;
  }
  return Dimension(exps[0], exps[1], exps[2], exps[3]);
}

Quantity Quantity::operator+(const Quantity& o) const {
  if (dim != o.dim)
    throw DimensionError("cannot add " + dim.to_string() + " and " + o.dim.to_string());
  return {magnitude + o.magnitude, dim};
}

Quantity Quantity::operator-(const Quantity& o) const {
  if (dim != o.dim)
    throw DimensionError("cannot subtract " + o.dim.to_string() + " from " + dim.to_string());
  return {magnitude - o.magnitude, dim};
}

Quantity Quantity::pow(const Rational& p) const {
  if (magnitude < 0 && !is_integer(p))
    throw DomainError("fractional power " + scaleqm::to_string(p) + " of negative magnitude");
  double m;
  if (is_integer(p)) {
    m = std::pow(magnitude, p.convert_to<double>());
  } else {
    m = std::pow(magnitude, to_double(p));
  }
  return {m, dim.pow(p)};
}

std::string Quantity::to_string() const {
  std::ostringstream os;
  os.precision(10);
  os << magnitude << " [" << dim.to_string() << "]";
  return os.str();
}

Quantity combine(std::span<const Quantity> quantities, std::span<const Rational> exponents) {
  if (quantities.size() != exponents.size())
    throw DimensionError("combine: quantity and exponent lists differ in length");
  if (quantities.empty()) throw DimensionError("combine: empty input");
  Quantity out = Quantity::dimensionless(1.0);
  for (std::size_t i = 0; i < quantities.size(); ++i) out = out * quantities[i].pow(exponents[i]);
  return out;
}

namespace {

using Matrix = std::vector<std::vector<Rational>>;

// Reduced row echelon form in place; returns pivot columns.
std::vector<int> rref(Matrix& a, int cols) {
  std::vector<int> pivots;
  int row = 0;
  const int rows = static_cast<int>(a.size());
  for (int c = 0; c < cols && row < rows; ++c) {
    int p = -1;
    for (int r = row; r < rows; ++r)
      if (a[r][c] != 0) {
        p = r;
        break;
      }
    if (p < 0) continue;
    std::swap(a[row], a[p]);
    const Rational piv = a[row][c];
    for (auto& v : a[row]) v /= piv;
    for (int r = 0; r < rows; ++r) {
      if (r == row || a[r][c] == 0) continue;
      const Rational f = a[r][c];
      for (std::size_t k = 0; k < a[r].size(); ++k) a[r][k] -= f * a[row][k];
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

}  // namespace

ScaleSolution solve_scale(std::span<const Quantity> params, const Dimension& target) {
  const int n = static_cast<int>(params.size());
  if (n == 0) throw ScaleUnderdetermined("scale underdetermined: no parameters given");
  if (n > 6) throw ScaleUnderdetermined("scale solve supports at most 6 parameters");

  // Missing base dimensions are reported by name before any elimination.
  for (int d = 0; d < kBaseDims; ++d) {
    if (target[d] == 0) continue;
    bool carried = false;
    for (const auto& p : params)
      if (p.dim[d] != 0) carried = true;
    if (!carried)
      throw ScaleUnderdetermined(std::string("scale underdetermined: no parameter carries ") +
                                 base_dim_name(static_cast<BaseDim>(d)));
  }

  Matrix aug(kBaseDims, std::vector<Rational>(n + 1));
  for (int d = 0; d < kBaseDims; ++d) {
    for (int j = 0; j < n; ++j) aug[d][j] = params[j].dim[d];
    aug[d][n] = target[d];
  }
  const auto pivots = rref(aug, n);
  const int rank = static_cast<int>(pivots.size());
  for (int r = rank; r < kBaseDims; ++r)
    if (aug[r][n] != 0)
      throw ScaleUnderdetermined("scale underdetermined: target " + target.to_string() +
                                 " is not reachable from the given parameters");

  // Minimal-norm solution p = R^T (R R^T)^{-1} t over the independent rows R.
  Matrix gram(rank, std::vector<Rational>(rank + 1));
  for (int i = 0; i < rank; ++i) {
    for (int j = 0; j < rank; ++j) {
      Rational s = 0;
      for (int k = 0; k < n; ++k) s += aug[i][k] * aug[j][k];
      gram[i][j] = s;
    }
    gram[i][rank] = aug[i][n];
  }
  rref(gram, rank);
  std::vector<Rational> exps(n);
  for (int k = 0; k < n; ++k) {
    Rational s = 0;
    for (int i = 0; i < rank; ++i) s += aug[i][k] * gram[i][rank];
    exps[k] = s;
  }

  ScaleSolution sol;
  sol.value = combine(params, exps);
  sol.exponents = std::move(exps);
  sol.nullity = n - rank;
  sol.ambiguous = sol.nullity > 0;
  if (sol.value.dim != target) throw ConsistencyError("solve_scale produced " + sol.value.dim.to_string());
  return sol;
}

Quantity parse_quantity(std::string_view text_view) {
  const std::string text(text_view);
  std::istringstream in(text);
  std::string value;
  in >> value;
  std::string rest;
  std::getline(in, rest);
  double v = 0;
  try {
    std::size_t used = 0;
    v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw ParseError("expected a number in '" + text + "'", 1, 1);
  }
  return {v, parse_dimension(rest)};
}


}  // namespace scaleqm
