#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "scaleqm/dimensions.hpp"

namespace scaleqm {

/// Named physical constants in SI magnitudes. Read-only after load.
///
/// Files are line oriented: `name value_SI dim=Ma Lb Tc Qd`, with `#`
/// starting a comment. When `e` and `eps0` are present, `kappa` (the Coulomb
/// constant e^2/(4 pi eps0)) is derived if absent and checked to 1e-10
/// relative if present.
class ConstantRegistry {
public:
  ConstantRegistry() = default;

  static ConstantRegistry from_string(std::string_view text);
  static ConstantRegistry from_file(const std::filesystem::path& path);

  /// CODATA 2018 values compiled into the library.
  static const ConstantRegistry& codata();

  /// Registry named by $SCALEQM_CONSTANTS if set, else codata().
  static ConstantRegistry from_environment();

  const Quantity& get(const std::string& name) const;
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  const std::map<std::string, Quantity>& all() const { return values_; }

  /// Copy with one constant replaced or added; re-runs the consistency check.
  ConstantRegistry with_override(const std::string& name, const Quantity& value) const;

  const Quantity& hbar() const { return get("hbar"); }
  const Quantity& electron_mass() const { return get("m_e"); }
  const Quantity& elementary_charge() const { return get("e"); }
  const Quantity& coulomb_constant() const { return get("kappa"); }

private:
  void finalize();

  std::map<std::string, Quantity> values_;
};

/// Text of the compiled-in constants file.
std::string_view codata_constants_text();

/// hbar^2 / (m L^2). Throws DimensionError unless m is a mass and L a length,
/// DomainError unless both are positive.
Quantity energy_unit(const Quantity& m, const Quantity& L,
                     const ConstantRegistry& constants = ConstantRegistry::codata());

/// Angular frequency with hbar * omega = hbar^2 / (m L^2).
Quantity time_unit(const Quantity& m, const Quantity& L,
                   const ConstantRegistry& constants = ConstantRegistry::codata());

}  // namespace scaleqm
