#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "scaleqm/errors.hpp"
#include "scaleqm/solver.hpp"

using namespace scaleqm;
using std::numbers::pi;

namespace {

const ConstantRegistry& C = ConstantRegistry::codata();
const double hb = C.hbar().magnitude;
const Quantity me = C.electron_mass();

Quantity energy(double v) { return {v, Dimension::energy()}; }
Quantity length(double v) { return {v, Dimension::length()}; }
Quantity spring(double v) { return {v, Dimension::mass() / Dimension::time().pow(2)}; }

ScaledProblem box() { return nondimensionalize(catalog::box(length(1e-9)), me, rule::GivenLength{"Lbox"}); }
ScaledProblem oscillator() { return nondimensionalize(catalog::harmonic(spring(500)), me, rule::HarmonicBalance{}); }

ScaledProblem morse(double lambda) {
  double a = 1e10;
  double D = lambda * hb * hb * a * a / me.magnitude;
  return nondimensionalize(catalog::morse(energy(D), {a, Dimension::length().pow(-1)}), me, rule::GivenLength{"a"});
}

ScaledProblem barrier(double lambda) {
  double a = 5e-10;
  double V0 = lambda * hb * hb / (me.magnitude * a * a);
  return nondimensionalize(catalog::rect_barrier(energy(V0), length(a)), me, rule::DepthBased{});
}

}  // namespace

TEST_SUITE("solver1d") {

TEST_CASE("box levels") {
  auto r = bound_states(box(), 3);
  REQUIRE(r.states.size() == 3);
  CHECK_FALSE(r.partial);
  for (int n = 1; n <= 3; ++n) CHECK(std::abs(r.states[n - 1].E - n * n * pi * pi / 2) <= 1e-8);
}

TEST_CASE("oscillator levels") {
  auto r = bound_states(oscillator(), 3);
  REQUIRE(r.states.size() == 3);
  for (int n = 0; n < 3; ++n) CHECK(std::abs(r.states[n].E - (n + 0.5)) <= 1e-8);
}

TEST_CASE("Morse ground state at lambda 8") {
  auto r = bound_states(morse(8), 1);
  REQUIRE(r.states.size() == 1);
  CHECK(std::abs(r.states[0].E - 1.875) <= 1e-7);
}

TEST_CASE("Morse at lambda 8 has exactly four bound states") {
  auto p = morse(8);
  auto r = bound_states(p, 6);
  CHECK(r.partial);
  CHECK_FALSE(r.note.empty());
  auto want = oracle::morse_levels(8);
  REQUIRE(want.size() == 4);
  REQUIRE(r.states.size() == want.size());
  for (std::size_t n = 0; n < want.size(); ++n) CHECK(std::abs(r.states[n].E - want[n]) <= 1e-7);
  CHECK(morse_state_count(8) == 4);
}

TEST_CASE("hydrogen s levels") {
  auto r = radial_hydrogen(1.0, 0, 2);
  REQUIRE(r.states.size() == 2);
  CHECK(std::abs(r.states[0].E + 0.5) <= 1e-7);
  CHECK(std::abs(r.states[1].E + 0.125) <= 1e-7);
  auto p = radial_hydrogen(1.0, 1, 1);
  REQUIRE(p.states.size() == 1);
  CHECK(std::abs(p.states[0].E + 0.125) <= 1e-7);
}

TEST_CASE("returned states have n interior nodes") {
  for (const auto& p : {box(), oscillator(), morse(12.5)}) {
    SolveOptions o;
    o.keep_wavefunctions = true;
    auto r = bound_states(p, 4, o);
    for (const auto& s : r.states) {
      CHECK(s.nodes == s.n);
      int changes = 0;
      double last = 0;
      double peak = 0;
      for (double v : s.psi) peak = std::max(peak, std::abs(v));
      for (double v : s.psi) {
        if (std::abs(v) < 1e-9 * peak) continue;
        if (last != 0 && (v > 0) != (last > 0)) ++changes;
        last = v;
      }
      CHECK(changes == s.n);
    }
  }
}

TEST_CASE("closed-form transmission") {
  CHECK(transmission_closed(1, 2).T == doctest::Approx(0.5).epsilon(1e-15));
  double E = 1 + pi * pi / (2 * 3.0);
  CHECK(transmission_closed(E, 3).T == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(transmission_closed(1e-9, 2).T < 1e-6);
  CHECK(transmission_closed(0.3, 4).T == doctest::Approx(oracle::barrier_transmission(0.3, 4)).epsilon(1e-13));
  CHECK_THROWS_AS(transmission_closed(0, 1), DomainError);
  CHECK_THROWS_AS(transmission_closed(1, -1), DomainError);
}

TEST_CASE("numeric transmission through barriers") {
  auto t = transmission_numeric(barrier(2), 1.0);
  CHECK(std::abs(t.T - 0.5) <= 1e-8);
  CHECK(std::abs(t.T + t.R - 1) <= 1e-10);
  auto u = transmission_numeric(barrier(5), 0.5);
  CHECK(std::abs(u.T - oracle::barrier_transmission(0.5, 5)) <= 1e-8);
  CHECK_THROWS_AS(transmission_numeric(barrier(5), -0.5), NoScattering);
}

TEST_CASE("free particle transmits completely") {
  PotentialSpec spec;
  spec.expr = parse_expr("0");
  auto p = nondimensionalize(spec, me, rule::Explicit{length(1e-10)});
  auto t = transmission_numeric(p, 0.7);
  CHECK(t.T == 1.0);
  CHECK(t.R == 0.0);
}

TEST_CASE("exact references") {
  CHECK(exact_reference(Family::Box, {}, 2) == doctest::Approx(2 * pi * pi).epsilon(1e-15));
  CHECK(exact_reference(Family::Harmonic, {}, 3) == 3.5);
  CHECK(exact_reference(Family::Morse, {{"lambda", 8.0}}, 3) == doctest::Approx(7.875).epsilon(1e-15));
  CHECK_THROWS_AS(exact_reference(Family::Morse, {{"lambda", 8.0}}, 4), NoSuchState);
  CHECK_THROWS_AS(exact_reference(Family::AhmedBIC, {{"lambda", 8.0}}, 0), LookupError);
}

TEST_CASE("physical energies") {
  auto p = oscillator();
  double w = std::sqrt(500 / me.magnitude);
  CHECK(to_physical(0.5, p).magnitude == doctest::Approx(hb * w / 2).epsilon(1e-13));
  CHECK(to_physical(0.5, p).dim == Dimension::energy());
  CHECK(to_physical(0, p).magnitude == 0);
}

TEST_CASE("shooting and matrix backends agree") {
  Quantity V0 = energy(2e-19);
  std::vector<std::pair<std::string, ScaledProblem>> problems{
      {"box", box()},
      {"oscillator", oscillator()},
      {"morse", morse(12.5)},
      {"quartic", nondimensionalize(catalog::poly_anharmonic(spring(500), {3e21, Dimension::mass() / Dimension::length().pow(2) / Dimension::time().pow(2)}), me,
                                    rule::HarmonicBalance{})},
      {"gaussian", nondimensionalize(catalog::scaled_form(V0, length(1e-9), parse_expr("-exp(-x^2)")), me,
                                     rule::GivenLength{"a"})},
      {"trunc", nondimensionalize(catalog::trunc_inv_square({2e-38, Dimension::energy() * Dimension::length().pow(2)},
                                                            length(5e-11)),
                                  me, rule::DepthBased{})},
  };
  for (const auto& [name, p] : problems) {
    int count = name == "trunc" ? 3 : 5;
    auto a = bound_states(p, count);
    SolveOptions fd;
    fd.backend = Backend::FiniteDifference;
    auto b = bound_states(p, count, fd);
    CAPTURE(name);
    REQUIRE(a.states.size() == b.states.size());
    CHECK(a.states.size() >= 3);
    for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(std::abs(a.states[i].E - b.states[i].E) <= 1e-6);
  }
}

TEST_CASE("truncated inverse square energies follow alpha / eps^2") {
  Dimension da = Dimension::energy() * Dimension::length().pow(2);
  auto p1 = nondimensionalize(catalog::trunc_inv_square({2e-38, da}, length(5e-11)), me, rule::DepthBased{});
  // same rho0, different eps
  auto p2 = nondimensionalize(catalog::trunc_inv_square({2e-38, da}, length(9e-11)), me, rule::DepthBased{});
  auto r1 = bound_states(p1, 2);
  auto r2 = bound_states(p2, 2);
  REQUIRE(r1.states.size() == 2);
  REQUIRE(r2.states.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(r1.states[i].E == doctest::Approx(r2.states[i].E).epsilon(1e-12));
    double E1 = p1.to_physical(r1.states[i].E).magnitude;
    CHECK(E1 == doctest::Approx(2e-38 / (5e-11 * 5e-11) * r1.states[i].E).epsilon(1e-14));
  }
}

TEST_CASE("unbounded potentials are rejected") {
  auto p = nondimensionalize(catalog::ahmed_bic(energy(1e-19), length(1e-9)), me, rule::GivenLength{"a"});
  CHECK_THROWS_AS(bound_states(p, 1), DomainError);
}

TEST_CASE("grid validation") {
  GridSpec g;
  g.x_min = 0;
  g.x_max = 1;
  g.h = 0.3;
  CHECK_THROWS_AS(g.validate(), DomainError);
  g.h = 0.1;
  CHECK_THROWS_AS(g.validate(), DomainError);
  g.h = 1.0 / 32;
  CHECK_NOTHROW(g.validate());
  CHECK(g.intervals() == 32);
}

TEST_CASE("fixed grids") {
  GridSpec g{-8, 8, 1e-3, BoundaryTag::Dirichlet, BoundaryTag::Dirichlet};
  auto r = bound_states(oscillator(), g, 2);
  REQUIRE(r.states.size() == 2);
  CHECK(std::abs(r.states[1].E - 1.5) <= 1e-8);
}

TEST_CASE("CSV rows") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  auto p = morse(8);
  auto r = bound_states(p, 2);
  auto rows = csv_rows(p, r);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].family == "Morse");
  CHECK(rows[0].coupling_name == "lambda");
  std::string line = csv_line(rows[1]);
  CHECK(line.rfind("Morse,lambda,", 0) == 0);
  std::string header = csv_header();
  CHECK(std::count(line.begin(), line.end(), ',') == std::count(header.begin(), header.end(), ','));
}

}  // TEST_SUITE
