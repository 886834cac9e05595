#include "scaleqm/constants.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "scaleqm/errors.hpp"

namespace scaleqm {

namespace {

double parse_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + s + "'", line, 1);
  }
  if (used != s.size()) throw ParseError("expected a number, got '" + s + "'", line, 1);
  return v;
}

}  // namespace

ConstantRegistry ConstantRegistry::from_string(std::string_view text) {
  ConstantRegistry reg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::string name, value;
    if (!(ls >> name)) continue;
    if (!(ls >> value)) throw ParseError("constant '" + name + "' has no value", line_no, 1);
    std::string rest;
    std::getline(ls, rest);
    if (rest.find("dim=") == std::string::npos)
      throw ParseError("constant '" + name + "' has no dim= field", line_no, 1);
    Dimension dim;
    try {
      dim = parse_dimension(rest);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no, 1);
    }
    reg.values_[name] = Quantity(parse_double(value, line_no), dim);
  }
  reg.finalize();
  return reg;
}

ConstantRegistry ConstantRegistry::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open constants file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

const ConstantRegistry& ConstantRegistry::codata() {
  static const ConstantRegistry reg = from_string(codata_constants_text());
  return reg;
}

ConstantRegistry ConstantRegistry::from_environment() {
  if (const char* path = std::getenv("SCALEQM_CONSTANTS"); path && *path) return from_file(path);
  return codata();
}

const Quantity& ConstantRegistry::get(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw LookupError("unknown constant '" + name + "'");
  return it->second;
}

ConstantRegistry ConstantRegistry::with_override(const std::string& name, const Quantity& value) const {
  ConstantRegistry copy = *this;
  copy.values_[name] = value;
  // A stale derived kappa must not survive an override of e or eps0.
  if ((name == "e" || name == "eps0") && copy.values_.count("kappa")) copy.values_.erase("kappa");
  copy.finalize();
  return copy;
}

void ConstantRegistry::finalize() {
  const auto e = values_.find("e");
  const auto eps0 = values_.find("eps0");
  if (e == values_.end() || eps0 == values_.end()) return;
  const Quantity derived =
      Quantity(e->second.magnitude * e->second.magnitude / (4.0 * std::numbers::pi * eps0->second.magnitude),
               e->second.dim.pow(2) / eps0->second.dim);
  const auto kappa = values_.find("kappa");
  if (kappa == values_.end()) {
    values_["kappa"] = derived;
    return;
  }
  if (kappa->second.dim != derived.dim)
    throw DimensionError("kappa has dimension " + kappa->second.dim.to_string() + ", expected " +
                         derived.dim.to_string());
  const double rel = std::abs(kappa->second.magnitude - derived.magnitude) / std::abs(derived.magnitude);
  if (!(rel <= 1e-10))
    throw ConsistencyError("kappa inconsistent with e^2/(4 pi eps0): relative deviation " + std::to_string(rel));
}

namespace {

void require(const Quantity& q, const Dimension& d, const char* what) {
  if (q.dim != d)
    throw DimensionError(std::string(what) + " must have dimension " + d.to_string() + ", got " +
                         q.dim.to_string());
  if (!(q.magnitude > 0)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

Quantity energy_unit(const Quantity& m, const Quantity& L, const ConstantRegistry& constants) {
  require(m, Dimension::mass(), "mass");
  require(L, Dimension::length(), "length unit");
  const Quantity& hbar = constants.hbar();
  return hbar.pow(2) / (m * L.pow(2));
}

Quantity time_unit(const Quantity& m, const Quantity& L, const ConstantRegistry& constants) {
  require(m, Dimension::mass(), "mass");
  require(L, Dimension::length(), "length unit");
  const Quantity& hbar = constants.hbar();
  return hbar / (m * L.pow(2));
}

}  // namespace scaleqm
