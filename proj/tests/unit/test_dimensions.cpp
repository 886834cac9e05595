#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "scaleqm/constants.hpp"
#include "scaleqm/errors.hpp"

using namespace scaleqm;

namespace {

const ConstantRegistry& C = ConstantRegistry::codata();

Dimension force_constant() { return Dimension::mass() / Dimension::time().pow(2); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("dimensions") {

TEST_CASE("combine raises magnitude and dimension together") {
  Quantity hbar = C.hbar();
  std::vector<Quantity> q{hbar};
  std::vector<Rational> p{Rational(2)};
  Quantity sq = combine(q, p);
  CHECK(sq.dim == Dimension(2, 4, -2, 0));
  CHECK(rel(sq.magnitude, hbar.magnitude * hbar.magnitude) < 1e-15);

  Quantity L(3e-9, Dimension::length());
  std::vector<Quantity> one{L};
  std::vector<Rational> unit{Rational(1)};
  Quantity same = combine(one, unit);
  CHECK(same.dim == L.dim);
  CHECK(same.magnitude == L.magnitude);
}

TEST_CASE("oscillator length has the dimension of length") {
  std::vector<Quantity> q{C.hbar(), C.electron_mass(), Quantity(500, force_constant())};
  std::vector<Rational> p{Rational(1, 2), Rational(-1, 4), Rational(-1, 4)};
  Quantity L = combine(q, p);
  CHECK(L.dim == Dimension::length());
  double expect = std::pow(C.hbar().magnitude * C.hbar().magnitude / (C.electron_mass().magnitude * 500), 0.25);
  CHECK(rel(L.magnitude, expect) < 1e-14);
}

TEST_CASE("fractional power of a negative magnitude is a domain error") {
  Quantity q(-2, Dimension::length());
  CHECK_THROWS_AS(q.pow(Rational(1, 2)), DomainError);
  CHECK(q.pow(Rational(2)).magnitude == doctest::Approx(4));
}

TEST_CASE("adding incompatible dimensions throws") {
  Quantity a(1, Dimension::length()), b(1, Dimension::time());
  CHECK_THROWS_AS(a + b, DimensionError);
  CHECK((a + a).magnitude == 2);
}

TEST_CASE("solve_scale reproduces the oscillator, Bohr and depth lengths") {
  Quantity m = C.electron_mass();
  {
    std::vector<Quantity> q{C.hbar(), m, Quantity(500, force_constant())};
    auto s = solve_scale(q, Dimension::length());
    REQUIRE(s.exponents.size() == 3);
    CHECK(s.exponents[0] == Rational(1, 2));
    CHECK(s.exponents[1] == Rational(-1, 4));
    CHECK(s.exponents[2] == Rational(-1, 4));
    CHECK_FALSE(s.ambiguous);
  }
  {
    std::vector<Quantity> q{C.hbar(), m, C.coulomb_constant()};
    auto s = solve_scale(q, Dimension::length());
    CHECK(s.exponents == std::vector<Rational>{Rational(2), Rational(-1), Rational(-1)});
    double pi = std::acos(-1.0);
    double e = C.elementary_charge().magnitude, eps0 = C.get("eps0").magnitude, hb = C.hbar().magnitude;
    double a0 = 4 * pi * eps0 * hb * hb / (m.magnitude * e * e);
    CHECK(rel(s.value.magnitude, a0) < 1e-12);
    CHECK(rel(s.value.magnitude, 5.29177210903e-11) < 1e-9);
  }
  {
    Quantity V0(1e-19, Dimension::energy());
    std::vector<Quantity> q{C.hbar(), m, V0};
    auto s = solve_scale(q, Dimension::length());
    CHECK(s.exponents == std::vector<Rational>{Rational(1), Rational(-1, 2), Rational(-1, 2)});
    CHECK(rel(s.value.magnitude, C.hbar().magnitude / std::sqrt(m.magnitude * V0.magnitude)) < 1e-14);
  }
  {
    Quantity L(2e-10, Dimension::length());
    std::vector<Quantity> q{L};
    auto s = solve_scale(q, Dimension::length());
    CHECK(s.exponents == std::vector<Rational>{Rational(1)});
  }
}

TEST_CASE("solve_scale names the missing base dimension") {
  std::vector<Quantity> q{C.electron_mass()};
  try {
    solve_scale(q, Dimension::length());
    FAIL("expected ScaleUnderdetermined");
  } catch (const ScaleUnderdetermined& e) {
    CHECK(std::string(e.what()).find(base_dim_name(BaseDim::Length)) != std::string::npos);
  }
}

TEST_CASE("combine of a solution hits the target exactly") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> ex(-3, 3);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Quantity> q;
    int n = 2 + trial % 3;
    for (int i = 0; i < n; ++i) q.emplace_back(mag(rng), Dimension(ex(rng), ex(rng), ex(rng), 0));
    Dimension target(ex(rng), ex(rng), ex(rng), 0);
    try {
      auto s = solve_scale(q, target);
      CHECK(combine(q, s.exponents).dim == target);
      ++solved;
    } catch (const ScaleUnderdetermined&) {
    }
  }
  CHECK(solved > 50);
}

TEST_CASE("energy unit of the Bohr radius is the Hartree") {
  std::vector<Quantity> q{C.hbar(), C.electron_mass(), C.coulomb_constant()};
  Quantity a0 = solve_scale(q, Dimension::length()).value;
  Quantity Eh = energy_unit(C.electron_mass(), a0);
  CHECK(Eh.dim == Dimension::energy());
  CHECK(rel(Eh.magnitude, C.coulomb_constant().magnitude / a0.magnitude) < 1e-10);
  Quantity w = time_unit(C.electron_mass(), a0);
  CHECK(w.dim == Dimension::frequency());
  CHECK(rel(w.magnitude, Eh.magnitude / C.hbar().magnitude) < 1e-12);
}

TEST_CASE("energy unit of the oscillator length is hbar omega") {
  double m = 2.3e-26, k = 17.0;
  Quantity mass(m, Dimension::mass());
  Quantity L(std::pow(C.hbar().magnitude * C.hbar().magnitude / (m * k), 0.25), Dimension::length());
  double w = std::sqrt(k / m);
  CHECK(rel(energy_unit(mass, L).magnitude, C.hbar().magnitude * w) < 1e-12);
  CHECK(rel(time_unit(mass, L).magnitude, w) < 1e-12);
}

TEST_CASE("unit mass and length give hbar squared") {
  Quantity e = energy_unit(Quantity(1, Dimension::mass()), Quantity(1, Dimension::length()));
  CHECK(rel(e.magnitude, C.hbar().magnitude * C.hbar().magnitude) < 1e-15);
}

TEST_CASE("energy_unit rejects wrong dimensions and nonpositive inputs") {
  CHECK_THROWS_AS(energy_unit(Quantity(1, Dimension::length()), Quantity(1, Dimension::length())), DimensionError);
  CHECK_THROWS_AS(energy_unit(Quantity(1, Dimension::mass()), Quantity(1, Dimension::time())), DimensionError);
  CHECK_THROWS_AS(energy_unit(Quantity(-1, Dimension::mass()), Quantity(1, Dimension::length())), DomainError);
}

TEST_CASE("hbar times the time unit is the energy unit") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 50; ++i) {
    Quantity m(std::pow(10.0, -30 + u(rng)), Dimension::mass());
    Quantity L(std::pow(10.0, -10 + u(rng)), Dimension::length());
    CHECK(rel(C.hbar().magnitude * time_unit(m, L).magnitude, energy_unit(m, L).magnitude) < 1e-12);
  }
}

TEST_CASE("registry derives kappa and checks it") {
  double pi = std::acos(-1.0);
  double e = C.elementary_charge().magnitude, eps0 = C.get("eps0").magnitude;
  CHECK(rel(C.coulomb_constant().magnitude, e * e / (4 * pi * eps0)) < 1e-10);
  CHECK(C.coulomb_constant().dim == Dimension(1, 3, -2, 0));
  CHECK_THROWS_AS(C.get("nope"), LookupError);

  std::string text(codata_constants_text());
  CHECK_NOTHROW(ConstantRegistry::from_string(text + "\nkappa 2.30707755234e-28 dim=M1 L3 T-2 Q0\n"));
  CHECK_THROWS_AS(ConstantRegistry::from_string(text + "\nkappa 2.31e-28 dim=M1 L3 T-2 Q0\n"), ConsistencyError);
  CHECK_THROWS_AS(ConstantRegistry::from_string(text + "\nkappa 2.30707755234e-28 dim=M1 L3 Q0\n"), DimensionError);
  CHECK_THROWS_AS(ConstantRegistry::from_string("hbar x dim=M1\n"), ParseError);
}

TEST_CASE("constants file named by the environment replaces the built-in table") {
  auto path = std::filesystem::temp_directory_path() / "scaleqm_test_constants.txt";
  {
    std::ofstream f(path);
    f << codata_constants_text() << "\nm_mu 1.883531627e-28 dim=M1\n";
  }
  ::setenv("SCALEQM_CONSTANTS", path.c_str(), 1);
  auto reg = ConstantRegistry::from_environment();
  ::unsetenv("SCALEQM_CONSTANTS");
  std::filesystem::remove(path);
  CHECK(reg.contains("m_mu"));
  CHECK_FALSE(ConstantRegistry::from_environment().contains("m_mu"));

  auto heavy = C.with_override("m_e", Quantity(1e-30, Dimension::mass()));
  CHECK(heavy.electron_mass().magnitude == 1e-30);
  CHECK(C.electron_mass().magnitude == doctest::Approx(9.1093837015e-31));
}

TEST_CASE("dimension and quantity text forms") {
  CHECK(parse_dimension("M1 L2 T-2") == Dimension::energy());
  CHECK(parse_dimension("dim=L1/2") == Dimension(0, Rational(1, 2), 0, 0));
  CHECK(parse_dimension("1").is_dimensionless());
  CHECK_THROWS_AS(parse_dimension("X3"), DimensionError);
  CHECK(parse_dimension(Dimension::energy().to_config_string()) == Dimension::energy());
  Quantity q = parse_quantity("1.5e-19 M1 L2 T-2");
  CHECK(q.magnitude == 1.5e-19);
  CHECK(q.dim == Dimension::energy());
  CHECK_THROWS_AS(parse_quantity("abc M1"), ParseError);
}

}  // TEST_SUITE
