#include <doctest.h>

#include <cmath>
#include <random>

#include "scaleqm/errors.hpp"
#include "scaleqm/nondim.hpp"

using namespace scaleqm;

namespace {

const ConstantRegistry& C = ConstantRegistry::codata();
const double hb = C.hbar().magnitude;

Quantity energy(double v) { return {v, Dimension::energy()}; }
Quantity length(double v) { return {v, Dimension::length()}; }
Quantity inv_length(double v) { return {v, Dimension::length().pow(-1)}; }
Quantity spring(double v) { return {v, Dimension::mass() / Dimension::time().pow(2)}; }
Quantity quartic(double v) { return {v, Dimension::mass() / Dimension::length().pow(2) / Dimension::time().pow(2)}; }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Case {
  PotentialSpec spec;
  Quantity mass;
  std::vector<ScalingRule> rules;
};

std::vector<Case> random_cases(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  auto r = [&](double centre) { return centre * std::pow(10.0, u(rng)); };
  Quantity m(r(1e-30), Dimension::mass());
  return {
      {catalog::box(length(r(1e-9))), m, {rule::GivenLength{"Lbox"}}},
      {catalog::harmonic(spring(r(10))), m, {rule::HarmonicBalance{}}},
      {catalog::scaled_form(energy(r(1e-19)), length(r(1e-10)), parse_expr("-exp(-x^2)")),
       m,
       {rule::GivenLength{"a"}, rule::DepthBased{}}},
      {catalog::rect_barrier(energy(r(1e-19)), length(r(1e-10))), m, {rule::GivenLength{"a"}, rule::DepthBased{}}},
      {catalog::morse(energy(r(1e-19)), inv_length(r(1e10))), m, {rule::GivenLength{"a"}, rule::DepthBased{}}},
      {catalog::ahmed_bic(energy(r(1e-19)), length(r(1e-10))), m, {rule::GivenLength{"a"}, rule::DepthBased{}}},
      {catalog::trunc_inv_square(Quantity(r(1e-38), Dimension::energy() * Dimension::length().pow(2)),
                                 length(r(5e-11))),
       m,
       {rule::DepthBased{}, rule::GivenLength{"eps"}}},
      {catalog::poly_anharmonic(spring(r(10)), quartic(r(1e20))),
       m,
       {rule::HarmonicBalance{}, rule::QuarticBased{}}},
  };
}

}  // namespace

TEST_SUITE("nondim_engine") {

TEST_CASE("box scales onto the unit interval") {
  auto p = nondimensionalize(catalog::box(length(2e-9)), C.electron_mass(), rule::GivenLength{"Lbox"});
  CHECK(p.couplings.empty());
  CHECK(p.domain_lo() == 0);
  CHECK(p.domain_hi() == 1);
  CHECK(p.potential(0.3) == 0);
  CHECK(p.lo_bc == BoundaryKind::Dirichlet);
  CHECK(p.hi_bc == BoundaryKind::Dirichlet);
  CHECK(rel(p.length.magnitude, 2e-9) < 1e-15);
}

TEST_CASE("V0 f(x/a) under both length choices") {
  Quantity m = C.electron_mass();
  double V0 = 3e-19, a = 4e-10;
  auto spec = catalog::scaled_form(energy(V0), length(a), parse_expr("-exp(-x^2)"));
  double lambda = m.magnitude * a * a * V0 / (hb * hb);

  auto A = nondimensionalize(spec, m, rule::GivenLength{"a"});
  CHECK(rel(A.couplings.at("lambda"), lambda) < 1e-14);
  CHECK(rel(A.length.magnitude, a) < 1e-15);
  CHECK(rel(A.potential(0.7), -lambda * std::exp(-0.49)) < 1e-14);

  auto B = nondimensionalize(spec, m, rule::DepthBased{});
  CHECK(rel(B.energy_unit.magnitude, V0) < 1e-14);
  CHECK(rel(B.length.magnitude, hb / std::sqrt(m.magnitude * V0)) < 1e-14);
  CHECK(rel(B.potential(0.7), -std::exp(-0.49 / lambda)) < 1e-14);

  auto both = nondimensionalize_both(spec, m);
  CHECK(both.first.rule == A.rule);
  CHECK(both.second.rule == B.rule);
}

TEST_CASE("Morse coupling and energy unit") {
  Quantity m = C.get("m_p") * 0.5;
  double D = 7.6e-19, a = 1.9e10;
  auto p = nondimensionalize(catalog::morse(energy(D), inv_length(a)), m, rule::GivenLength{"a"});
  double lambda = m.magnitude * D / (hb * hb * a * a);
  CHECK(rel(p.couplings.at("lambda"), lambda) < 1e-14);
  CHECK(rel(p.length.magnitude, 1 / a) < 1e-15);
  CHECK(rel(p.energy_unit.magnitude, D / lambda) < 1e-14);
  CHECK(p.ftilde == parse_expr("lambda*(1 - exp(-x))^2"));

  // D chosen so that m D / (hbar^2 a^2) = 8
  double D8 = 8 * hb * hb * a * a / C.electron_mass().magnitude;
  auto c = couplings_of(catalog::morse(energy(D8), inv_length(a)), C.electron_mass(), rule::GivenLength{"a"});
  REQUIRE(c.size() == 1);
  CHECK(c.at("lambda") == doctest::Approx(8).epsilon(1e-14));
}

TEST_CASE("Ahmed potential has one coupling") {
  double V0 = 1e-19, a = 1e-9;
  Quantity m = C.electron_mass();
  auto p = nondimensionalize(catalog::ahmed_bic(energy(V0), length(a)), m, rule::GivenLength{"a"});
  REQUIRE(p.couplings.size() == 1);
  double lambda = m.magnitude * a * a * V0 / (hb * hb);
  CHECK(rel(p.couplings.at("lambda"), lambda) < 1e-14);
  CHECK(rel(p.potential(0.25), lambda * (1 - std::exp(0.5))) < 1e-14);
}

TEST_CASE("truncated inverse square depends on rho0 only") {
  double alpha = 2e-38, eps = 5e-11;
  Quantity m = C.electron_mass();
  auto p = nondimensionalize(catalog::trunc_inv_square(Quantity(alpha, Dimension::energy() * Dimension::length().pow(2)),
                                                       length(eps)),
                             m, default_rule(Family::TruncInvSquare));
  REQUIRE(p.couplings.size() == 1);
  double rho0 = std::sqrt(2 * m.magnitude * alpha / (hb * hb));
  CHECK(rel(p.couplings.at("rho0"), rho0) < 1e-14);
  CHECK(rel(p.energy_unit.magnitude, alpha / (eps * eps)) < 1e-14);
  CHECK(p.domain_lo() == 0);
  CHECK(std::isinf(p.domain_hi()));
  CHECK(p.lo_bc == BoundaryKind::Dirichlet);
}

TEST_CASE("quartic coupling under the oscillator length") {
  Quantity m = C.electron_mass();
  double k2 = 3.0, k4 = 2e21;
  auto p = nondimensionalize(catalog::poly_anharmonic(spring(k2), quartic(k4)), m, rule::HarmonicBalance{});
  double w = std::sqrt(k2 / m.magnitude);
  CHECK(rel(p.couplings.at("lambda"), hb * k4 / (m.magnitude * m.magnitude * w * w * w)) < 1e-13);
  CHECK(rel(p.time_unit.magnitude, w) < 1e-13);
  CHECK(rel(p.energy_unit.magnitude, hb * w) < 1e-13);
}

TEST_CASE("harmonic time unit is the oscillator frequency") {
  Quantity m(2e-26, Dimension::mass());
  auto p = nondimensionalize(catalog::harmonic(spring(40)), m, rule::HarmonicBalance{});
  CHECK(p.couplings.empty());
  CHECK(rel(p.time_unit.magnitude, std::sqrt(40 / 2e-26)) < 1e-13);
}

TEST_CASE("equal m a^2 V0 / hbar^2 gives identical couplings") {
  Quantity m1 = C.electron_mass(), m2 = m1 * 4.0;
  auto s1 = catalog::rect_barrier(energy(1e-19), length(2e-10));
  auto s2 = catalog::rect_barrier(energy(1e-19), length(1e-10));
  auto c1 = couplings_of(s1, m1, rule::GivenLength{"a"});
  auto c2 = couplings_of(s2, m2, rule::GivenLength{"a"});
  CHECK(rel(c1.at("lambda"), c2.at("lambda")) < 1e-14);
}

TEST_CASE("rule and family mismatches") {
  Quantity m = C.electron_mass();
  CHECK_THROWS_AS(nondimensionalize(catalog::harmonic(spring(1)), m, rule::DepthBased{}), RuleMismatch);
  CHECK_THROWS_AS(nondimensionalize(catalog::box(length(1e-9)), m, rule::QuarticBased{}), RuleMismatch);
  CHECK_THROWS_AS(nondimensionalize(catalog::morse(energy(1e-19), inv_length(1e10)), m, rule::GivenLength{"zz"}),
                  RuleMismatch);
  CHECK(rule_name(parse_rule("GivenLength(a)")) == "GivenLength(a)");
  CHECK_THROWS_AS(parse_rule("Sideways"), ParseError);
}

TEST_CASE("scaled potentials collapse onto ftilde") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    for (const auto& c : random_cases(rng)) {
      for (const auto& r : c.rules) {
        CAPTURE(std::string(family_name(c.spec.family)));
        CAPTURE(rule_name(r));
        auto p = nondimensionalize(c.spec, c.mass, r);
        CHECK(collapse_error(c.spec, p) <= 1e-10);
        // independent check at a few points
        for (double xt : {0.13, 0.77, 1.9}) {
          double L = p.length.magnitude;
          double v = c.spec.expr.eval(L * xt, c.spec.param_values());
          double scaled = c.mass.magnitude * L * L / (hb * hb) * v;
          double f = p.potential(xt);
          CHECK(std::abs(scaled - f) <= 1e-10 * std::max(1.0, std::abs(f)));
        }
      }
    }
  }
}

TEST_CASE("scaled problems lint clean with dimensionless couplings") {
  std::mt19937 rng(19);
  for (const auto& c : random_cases(rng)) {
    for (const auto& r : c.rules) {
      auto p = nondimensionalize(c.spec, c.mass, r);
      ParamDims dims;
      for (const auto& [k, v] : p.couplings) dims[k] = Dimension::none();
      CAPTURE(p.ftilde.to_string());
      CHECK(lint(p.ftilde, dims, Dimension::none()).empty());
    }
  }
}

TEST_CASE("custom potentials get renamed dimensionless parameters") {
  PotentialSpec spec;
  spec.expr = parse_expr("c4*x^4 - c2*x^2");
  spec.params["c4"] = quartic(1e21);
  spec.params["c2"] = spring(2);
  auto p = nondimensionalize(spec, C.electron_mass(), rule::Explicit{length(1e-10)});
  CHECK(p.couplings.size() == 2);
  CHECK(collapse_error(spec, p) <= 1e-10);
}

TEST_CASE("hydrogen effective mass") {
  double mp = C.get("m_p").magnitude, me = C.electron_mass().magnitude;
  double mt = hydrogen_effective_mass(C.get("m_p"));
  CHECK(rel(mt, mp / (mp + me)) < 1e-15);
  CHECK(mt == doctest::Approx(0.9994557).epsilon(1e-7));
  CHECK(hydrogen_effective_mass(Quantity(1e10, Dimension::mass())) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hydrogen_effective_mass(C.electron_mass()) == 0.5);
  CHECK_THROWS_AS(hydrogen_effective_mass(Quantity(-1, Dimension::mass())), DomainError);
}

TEST_CASE("atomic units descriptor") {
  Quantity e = C.elementary_charge();
  auto one = atomic_units({{C.electron_mass(), e * -1.0}});
  CHECK(one.mass == std::vector<double>{1.0});
  CHECK(one.charge == std::vector<double>{-1.0});
  CHECK(one.coulomb.empty());

  auto h = atomic_units({{C.electron_mass(), e * -1.0}, {C.get("m_p"), e}});
  REQUIRE(h.coulomb.size() == 1);
  CHECK(h.coulomb[0].second == doctest::Approx(-1.0));
  REQUIRE(h.reduced_mass);
  CHECK(*h.reduced_mass == doctest::Approx(hydrogen_effective_mass(C.get("m_p"))).epsilon(1e-14));
  CHECK(rel(h.length.magnitude, bohr_radius().value.magnitude) < 1e-15);
  CHECK(rel(h.energy_unit.magnitude, C.coulomb_constant().magnitude / h.length.magnitude) < 1e-10);
  CHECK_THROWS_AS(atomic_units({}), DomainError);
}

TEST_CASE("1/Z scaled atoms") {
  auto h = z_scaled_atom(1, 3);
  CHECK(h.electron_electron.empty());
  CHECK(h.nucleus_electron == std::vector<Rational>{Rational(-1)});
  CHECK(rel(h.energy_unit.magnitude, 9 * energy_unit(C.electron_mass(), bohr_radius().value).magnitude) < 1e-12);

  auto he = z_scaled_atom(2, 2);
  CHECK(he.electron_electron == std::vector<Rational>{Rational(1, 2)});
  CHECK(he.nucleus_electron == std::vector<Rational>{Rational(-1), Rational(-1)});

  auto li = z_scaled_atom(3, 1000);
  CHECK(li.electron_electron.size() == 3);
  for (const auto& c : li.electron_electron) CHECK(c == Rational(1, 1000));
  CHECK_THROWS_AS(z_scaled_atom(0, 1), DomainError);
}

TEST_CASE("equivalence witness") {
  Quantity m1 = C.electron_mass();
  Quantity m2 = m1 * 3.0;
  // lambda = hbar k4 / (m^2 w^3) = hbar k4 / (m^(1/2) k2^(3/2))
  auto s1 = catalog::poly_anharmonic(spring(2), quartic(1e21));
  double k2b = 5.0;
  double k4b = 1e21 * std::sqrt(3.0) * std::pow(k2b / 2, 1.5);
  auto s2 = catalog::poly_anharmonic(spring(k2b), quartic(k4b));
  auto v = equivalence_witness(s1, s2, m1, m2, rule::HarmonicBalance{});
  CHECK(v.equivalent);
  CHECK(equivalence_witness(s1, s1, m1, m1, rule::HarmonicBalance{}).equivalent);
  auto s3 = catalog::poly_anharmonic(spring(2), quartic(2e21));
  auto w = equivalence_witness(s1, s3, m1, m1, rule::HarmonicBalance{});
  CHECK_FALSE(w.equivalent);
  CHECK(w.max_relative_difference > 0.4);
  CHECK_THROWS_AS(equivalence_witness(s1, catalog::harmonic(spring(2)), m1, m1, rule::HarmonicBalance{}),
                  RuleMismatch);
}

TEST_CASE("report has a machine-readable section") {
  auto p = nondimensionalize(catalog::morse(energy(7.6e-19), inv_length(1.9e10)), C.get("m_p") * 0.5,
                             rule::GivenLength{"a"});
  std::string r = report(p);
  auto pos = r.find("[machine]");
  REQUIRE(pos != std::string::npos);
  CHECK(r.find("coupling.lambda=" + format_double(p.couplings.at("lambda")), pos) != std::string::npos);
  CHECK(r.find("family=Morse", pos) != std::string::npos);
  CHECK(std::stod(format_double(0.1)) == 0.1);
}

}  // TEST_SUITE
