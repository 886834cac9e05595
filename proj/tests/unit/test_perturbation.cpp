#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "scaleqm/errors.hpp"
#include "scaleqm/perturbation.hpp"

using namespace scaleqm;

namespace {

double ground(double lambda) {
  auto r = bound_states(quartic_problem(lambda, false), 1);
  REQUIRE(r.states.size() == 1);
  return r.states[0].E;
}

}  // namespace

TEST_SUITE("perturbation") {

TEST_CASE("ladder oracle") {
  CHECK(oracle::ladder_moment(0, 2) == Rational(1, 2));
  CHECK(oracle::ladder_moment(0, 4) == Rational(3, 4));
  for (int n = 0; n < 5; ++n) CHECK(oracle::ladder_moment(n, 4) == Rational(6 * n * n + 6 * n + 3, 4));
}

TEST_CASE("quartic ground-state coefficients") {
  auto s = rs_series(0, 4, Polynomial::quartic());
  REQUIRE(s.coeffs.size() == 5);
  CHECK(s.coeffs[0] == Rational(1, 2));
  CHECK(s.coeffs[1] == oracle::ladder_moment(0, 4));
  CHECK(s.coeffs[2] == Rational(-21, 8));
  CHECK(to_double(s.coeffs[2]) == doctest::Approx(oracle::second_order_energy(0, {0, 0, 0, 0, 1})).epsilon(1e-13));
}

TEST_CASE("first and second order for general polynomials") {
  const char* polys[] = {"3:1", "4:1", "3:1/2,4:1", "1:1", "6:1", "2:1/3,5:-2", "8:1"};
  for (const char* text : polys) {
    Polynomial P = Polynomial::parse(text);
    std::vector<double> dense(P.coeffs.size());
    for (std::size_t d = 0; d < P.coeffs.size(); ++d) dense[d] = to_double(P.coeffs[d]);
    for (int n = 0; n < 3; ++n) {
      auto s = rs_series(n, 2, P);
      Rational e1 = 0;
      for (std::size_t d = 0; d < P.coeffs.size(); ++d)
        if (d % 2 == 0 && P.coeffs[d] != 0) e1 += P.coeffs[d] * oracle::ladder_moment(n, static_cast<int>(d));
      CAPTURE(text);
      CAPTURE(n);
      CHECK(s.coeffs[1] == e1);
      double e2 = oracle::second_order_energy(n, dense);
      CHECK(std::abs(to_double(s.coeffs[2]) - e2) <= 1e-12 * std::max(1.0, std::abs(e2)));
    }
  }
}

TEST_CASE("cubic perturbation") {
  auto s = rs_series(0, 4, Polynomial::monomial(3));
  CHECK(s.coeffs[1] == 0);
  CHECK(s.coeffs[2] == Rational(-11, 8));
  CHECK(s.coeffs[3] == 0);
  for (int n = 0; n < 4; ++n) CHECK(rs_series(n, 1, Polynomial::parse("1:2,3:1,5:-1")).coeffs[1] == 0);
}

TEST_CASE("linear perturbation shifts by -lambda^2/2") {
  auto s = rs_series(2, 6, Polynomial::monomial(1));
  CHECK(s.coeffs[2] == Rational(-1, 2));
  for (int j = 3; j <= 6; ++j) CHECK(s.coeffs[j] == 0);
}

TEST_CASE("hypervirial series basics") {
  auto s = hypervirial_series(1, 3);
  CHECK(s.coeffs[0] == Rational(3, 2));
  CHECK(hypervirial_series(0, 0).coeffs.size() == 1);
  auto g = hypervirial_series(0, 2);
  CHECK(g.coeffs == std::vector<Rational>{Rational(1, 2), Rational(3, 4), Rational(-21, 8)});
}

TEST_CASE("both methods agree exactly") {
  for (int n = 0; n <= 2; ++n) {
    auto a = rs_series(n, 8, Polynomial::quartic());
    auto b = hypervirial_series(n, 8);
    CAPTURE(n);
    CHECK(a.coeffs == b.coeffs);
  }
}

TEST_CASE("quartic ground-state series alternates in sign") {
  auto s = hypervirial_series(0, 12);
  for (int j = 2; j <= 12; ++j) CHECK((s.coeffs[j] > 0) == (j % 2 == 1));
  CHECK(rs_series(0, 12, Polynomial::quartic()).coeffs == s.coeffs);
}

TEST_CASE("order and degree limits") {
  CHECK_THROWS_AS(rs_series(0, 13, Polynomial::quartic()), ExactnessCapError);
  CHECK_THROWS_AS(hypervirial_series(0, 13), ExactnessCapError);
  CHECK_THROWS_AS(rs_series(0, 2, Polynomial::monomial(9)), DomainError);
  CHECK_THROWS_AS(rs_series(-1, 2, Polynomial::quartic()), DomainError);
  CHECK_NOTHROW(rs_series(0, 14, Polynomial::quartic(), 14));
  CHECK_THROWS_AS(Polynomial::parse("4"), ParseError);
}

TEST_CASE("series report") {
  std::string r = series_report(rs_series(0, 2, Polynomial::quartic()));
  CHECK(r.find("2, -21, 8, -2.625") != std::string::npos);
}

TEST_CASE("partial sums at zero coupling") {
  auto s = hypervirial_series(0, 6);
  for (double v : weak_coupling_eval(s, 0, 6)) CHECK(v == 0.5);
  CHECK(weak_coupling_eval(s, 0.1, 20).size() == 7);
  CHECK_THROWS_AS(weak_coupling_eval(s, -1, 2), DomainError);
}

TEST_CASE("weak-coupling error scales as lambda^3 for S_2") {
  auto s = hypervirial_series(0, 4);
  double err[2];
  double lambdas[2] = {1e-3, 1e-2};
  for (int i = 0; i < 2; ++i) {
    double E = ground(lambdas[i]);
    auto S = weak_coupling_eval(s, lambdas[i], 4);
    err[i] = std::abs(S[2] - E);
    // the remainder is the next term to leading order
    double next = to_double(s.coeffs[3]) * std::pow(lambdas[i], 3);
    CHECK(std::abs(err[i] - std::abs(next)) <= 0.25 * std::abs(next));
    CHECK(std::abs(S[4] - E) <= 1e-5);
  }
  double slope = std::log10(err[1] / err[0]);
  CHECK(slope == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("partial sums diverge at lambda 10") {
  auto s = hypervirial_series(0, 8);
  double E = ground(10);
  auto S = weak_coupling_eval(s, 10, 8);
  for (int j = 2; j <= 8; ++j) CHECK(std::abs(S[j] - E) > std::abs(S[j - 1] - E));
}

TEST_CASE("strong coupling against matrix diagonalization") {
  auto big = oracle::pure_quartic_levels(160, 2.0, 1)[0];
  auto small = oracle::pure_quartic_levels(120, 2.0, 1)[0];
  REQUIRE(std::abs(big - small) < 1e-12);
  auto probe = strong_coupling_probe({1e2, 1e3, 3e3, 1e4}, 0);
  CHECK(std::abs(probe.e0 - big) <= 1e-3 * big);
  CHECK(std::abs(probe.ratios.back() - big) <= 1e-3 * big);
  CHECK(probe.monotone);
  CHECK_THROWS_AS(strong_coupling_probe({1, 10, 100}, 0), DomainError);
  CHECK_THROWS_AS(strong_coupling_probe({1e3, 1e2, 1e4}, 0), DomainError);
}

TEST_CASE("E(8 lambda) / E(lambda) approaches 2") {
  double prev = 0;
  for (double lambda : {1e1, 1e3, 1e5}) {
    double r = bound_states(quartic_problem(8 * lambda, false), 1).states.at(0).E /
               bound_states(quartic_problem(lambda, false), 1).states.at(0).E;
    CHECK(std::abs(r - 2) < std::abs(prev - 2) + (prev == 0 ? 1 : 0));
    prev = r;
  }
  CHECK(std::abs(prev - 2) < 1e-3);
}

TEST_CASE("the two quartic forms are related by lambda^(1/3)") {
  for (double lambda : {0.5, 1.0, 30.0}) {
    double a = bound_states(quartic_problem(lambda, false), 1).states.at(0).E;
    double b = bound_states(quartic_problem(lambda, true), 1).states.at(0).E;
    CHECK(a == doctest::Approx(b * std::cbrt(lambda)).epsilon(1e-10));
  }
}

TEST_CASE("1/Z series form") {
  auto h = atomic_series(1, 1, 3);
  REQUIRE(h.coeffs.size() == 4);
  REQUIRE(h.coeffs[0]);
  CHECK(*h.coeffs[0] == Rational(-1, 2));
  auto he = atomic_series(2, 2, 2);
  CHECK(he.expression == "E = (hbar^2*Z^2/(m_e*a0^2))*sum_{j>=0} E(j)*Z^(-j)");
  CHECK(he.coeffs.size() == 3);
  for (const auto& c : he.coeffs) CHECK_FALSE(c.has_value());
  std::string r = atomic_series_report(he);
  CHECK(r.find("unknown(N=2)") != std::string::npos);
}

}  // TEST_SUITE

TEST_SUITE("weak_coupling_stated") {

// S_2 at lambda = 0.01 differs from the exact energy by about E(3) lambda^3 =
// 2.1e-5, so this bound cannot hold; kept red.
TEST_CASE("S_2 within 1e-5 of the solver at lambda 0.01") {
  auto S = weak_coupling_eval(hypervirial_series(0, 2), 0.01, 2);
  CHECK(std::abs(S[2] - ground(0.01)) <= 1e-5);
}

}  // TEST_SUITE
