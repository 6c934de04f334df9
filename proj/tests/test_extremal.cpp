#include <doctest.h>

#include "fixtures.hpp"
#include "toric/curvature.hpp"
#include "toric/extremal.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace toric;

namespace {

PiScalar q(long n, long d = 1, int p = 0) { return {mpq_class(n, d), p}; }
PiScalar qpi(long n, long d = 1) { return q(n, d, 1); }

Laurent u_pow(int k, const PiScalar& c) { return Laurent::monomial(k, c); }

// The printed closed form, -(4 pi/11)(2u^3 - 5u^2 - 15 + 18/u), entered term by term.
Laurent printed_exotic_tau() {
  return u_pow(3, qpi(-8, 11)) + u_pow(2, qpi(20, 11)) + u_pow(0, qpi(60, 11)) + u_pow(-1, qpi(-72, 11));
}

HybridBMetric profile_metric(const Profile& p) {
  const auto m = p.w == Weight::Constant ? fx::standard_band() : fx::exotic_band();
  const expr::Expr h = expr::Expr::var(1);
  const expr::Expr w = p.w == Weight::Constant ? expr::Expr(1.0) : h + expr::Expr(2.0);
  return HybridBMetric::direct(m, {{w, expr::Expr()}, {expr::Expr(), expr::Expr(1.0) / p.as_expr(1)}});
}

}  // namespace

TEST_CASE("pi scalar arithmetic and formatting") {
  CHECK(qpi(36, 11).to_string() == "36*pi/11");
  CHECK(q(1, 4, -1).to_string() == "1/(4*pi)");
  CHECK(q(3, 1, -1).to_string() == "3/pi");
  CHECK((-PiScalar::pi()).to_string() == "-pi");
  CHECK(q(-3, 2).to_string() == "-3/2");
  CHECK((qpi(1) + q(2)).to_string() == "pi + 2");
  CHECK((q(1, 6, 2) - q(1)).to_string() == "pi^2/6 - 1");
  CHECK(PiScalar().to_string() == "0");
  CHECK((qpi(4) - qpi(4)).is_zero());
  CHECK(qpi(2) * q(1, 8, -1) == q(1, 4));
  CHECK(qpi(36, 11).to_double() == doctest::Approx(36 * std::numbers::pi / 11).epsilon(1e-15));

  CHECK(parse_pi_scalar("4pi") == qpi(4));
  CHECK(parse_pi_scalar("8*pi") == qpi(8));
  CHECK(parse_pi_scalar("pi") == qpi(1));
  CHECK(parse_pi_scalar("3/2*pi") == qpi(3, 2));
  CHECK(parse_pi_scalar("2.5") == q(5, 2));
  CHECK(parse_pi_scalar("-0.125") == q(-1, 8));
  CHECK_THROWS_AS(parse_pi_scalar("four pi"), std::invalid_argument);
  CHECK_THROWS_AS(parse_pi_scalar(""), std::invalid_argument);
}

TEST_CASE("laurent calculus") {
  const Laurent a = u_pow(3, q(2)) + u_pow(-1, q(5));
  CHECK(a.derivative() == u_pow(2, q(6)) + u_pow(-2, q(-5)));
  CHECK(u_pow(0, q(1)).double_antiderivative() == u_pow(2, q(1, 2)));
  CHECK(u_pow(-3, q(1)).double_antiderivative() == u_pow(-1, q(1, 2)));
  CHECK_THROWS_AS(u_pow(-1, q(1)).double_antiderivative(), DomainError);
  CHECK(a.at(mpq_class(2)) == q(16) + q(5, 2));
  CHECK(a.at_h(mpq_class(-1)) == q(7));
  CHECK_THROWS_AS(a.at(mpq_class(0)), DomainError);
}

TEST_CASE("profile coefficient views") {
  // (h+2)^2 + 3/(h+2) = h^2 + 4h + 4 + 3 (h+2)^-1
  const Profile p{u_pow(2, q(1)) + u_pow(-1, q(3)), Weight::Shifted};
  const auto poly = p.poly_coeffs();
  REQUIRE(poly.size() == 3);
  CHECK(poly[0] == q(4));
  CHECK(poly[1] == q(4));
  CHECK(poly[2] == q(1));
  REQUIRE(p.pole_coeffs().size() == 1);
  CHECK(p.pole_coeffs()[0] == q(3));
  CHECK(p(0.5) == doctest::Approx(6.25 + 1.2));
  CHECK(p.derivative(0.5) == doctest::Approx(5 - 3 / 6.25));
  CHECK(expr::evaluate(p.as_expr(0), std::vector<double>{0.5}) == doctest::Approx(7.45));
}

TEST_CASE("scalar of profile") {
  const Profile sq{u_pow(2, qpi(-4)) + u_pow(1, qpi(16)) + u_pow(0, qpi(-12)), Weight::Constant};  // 4 pi (1 - h^2)
  for (double h : {-0.7, 0.0, 0.3}) CHECK(scalar_of_profile(sq, h) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-15));
  const Profile cube{u_pow(2, q(1)), Weight::Shifted};
  CHECK(scalar_laurent(cube) == u_pow(0, q(-3)));
  CHECK(scalar_of_profile(cube, 0.25) == -3.0);
  CHECK_THROWS_AS(scalar_of_profile(cube, -2.0), DomainError);

  const Profile ex{printed_exotic_tau(), Weight::Shifted};
  // S = (4 pi/11)(12 h + 9) = (48 pi/11) u - 60 pi/11
  CHECK(scalar_laurent(ex) == u_pow(1, qpi(48, 11)) + u_pow(0, qpi(-60, 11)));
  for (double h : {-0.9, 0.0, 0.6}) CHECK(scalar_of_profile(ex, h) == doctest::Approx(4 * std::numbers::pi / 11 * (12 * h + 9)).epsilon(1e-14));
}

TEST_CASE("unified curvature formula matches both per-weight formulas") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<long> coef(-9, 9), den(1, 7);
  for (int trial = 0; trial < 25; ++trial) {
    Laurent tau;
    for (int k = 0; k <= 5; ++k) tau += u_pow(k, {mpq_class(coef(rng), den(rng)), static_cast<int>(coef(rng) % 2)});
    // Standard cylinder: S = -tau''/2.
    CHECK(scalar_laurent({tau, Weight::Constant}) == PiScalar(mpq_class(-1, 2)) * tau.derivative().derivative());
    // Non-standard cylinder: S = -tau''/2 - tau'/(h+2).
    const Laurent d = tau.derivative();
    Laurent lower;
    for (const auto& [k, c] : d.coeffs()) lower += u_pow(k - 1, c);
    const Laurent expect = PiScalar(mpq_class(-1, 2)) * tau.derivative().derivative() - lower;
    CHECK(scalar_laurent({tau, Weight::Shifted}) == expect);
  }
}

TEST_CASE("general non-standard family is extremal") {
  // tau = (c1/6) u^3 + (c0/3) u^2 + c2/u + c3 has S = -c1 u - c0.
  std::mt19937 rng(3);
  std::uniform_int_distribution<long> c(-20, 20);
  for (int trial = 0; trial < 10; ++trial) {
    const PiScalar c0 = q(c(rng)), c1 = qpi(c(rng)), c2 = q(c(rng)), c3 = qpi(c(rng), 3);
    const Laurent tau = PiScalar(mpq_class(1, 6)) * u_pow(3, c1) + PiScalar(mpq_class(1, 3)) * u_pow(2, c0) + u_pow(-1, c2) + u_pow(0, c3);
    CHECK(scalar_laurent({tau, Weight::Shifted}) == u_pow(1, -c1) + u_pow(0, -c0));
  }
}

TEST_CASE("boundary value problem, exotic weight") {
  const auto s = solve_bvp({Weight::Shifted, qpi(8)});
  CHECK(s.profile.tau == printed_exotic_tau());
  CHECK(s.c0 == qpi(36, 11));
  CHECK(s.c1 == qpi(48, 11));
  CHECK(s.c0.to_string() == "36*pi/11");
  CHECK(s.c1.to_string() == "48*pi/11");
  CHECK(s.certificate.exact());
  CHECK(s.positive);
  CHECK(s.min_interior > 0.0);
  // 1/tau reproduces the printed metric coefficient 1/(4 pi (1-h^2)) + 1/(2 pi (2h^2+11h+20)).
  for (double h : {-0.95, -0.4, 0.0, 0.5, 0.99}) {
    const double printed = 1 / (4 * std::numbers::pi * (1 - h * h)) + 1 / (2 * std::numbers::pi * (2 * h * h + 11 * h + 20));
    CHECK(1 / s.profile(h) == doctest::Approx(printed).epsilon(1e-12));
  }
  // Scalar curvature of the solution is exactly c0 + c1 h.
  const Laurent hl = Laurent::monomial(1) - Laurent::monomial(0, q(2));
  CHECK(scalar_laurent(s.profile) == Laurent::monomial(0, s.c0) + s.c1 * hl);
}

TEST_CASE("boundary value problem, constant weight") {
  auto s = solve_bvp({Weight::Constant, qpi(8)});
  auto poly = s.profile.poly_coeffs();
  REQUIRE(poly.size() == 3);
  CHECK(poly[0] == qpi(4));
  CHECK(poly[1].is_zero());
  CHECK(poly[2] == qpi(-4));
  CHECK(s.profile.pole_coeffs().empty());
  CHECK(s.c0 == qpi(4));
  CHECK(s.c1.is_zero());
  CHECK(s.certificate.exact());
  CHECK(s.positive);

  s = solve_bvp({Weight::Constant, qpi(4)});
  poly = s.profile.poly_coeffs();
  REQUIRE(poly.size() == 3);
  CHECK(poly[0] == qpi(2));
  CHECK(poly[1].is_zero());
  CHECK(poly[2] == qpi(-2));
  CHECK(s.c0 == qpi(2));
  CHECK(s.certificate.exact());

  // Default kappa is the theorem normalization 4 pi.
  CHECK(BVProblem{}.kappa == qpi(4));
  CHECK_THROWS_AS(solve_bvp({Weight::Constant, qpi(-1)}), DomainError);
}

TEST_CASE("boundary value problem agrees with the curvature module") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uh(-0.98, 0.98);
  for (auto w : {Weight::Constant, Weight::Shifted})
    for (const auto& kappa : {qpi(4), qpi(8)}) {
      const auto s = solve_bvp({w, kappa});
      const ScalarCurvature sc(profile_metric(s.profile));
      for (int i = 0; i < 50; ++i) {
        const double h = uh(rng);
        const double ref = scalar_of_profile(s.profile, h);
        CHECK(std::abs(sc({{ux(rng), h}, false}, CurvatureMethod::Abreu).value - ref) < 1e-8 * (1 + std::abs(ref)));
      }
    }
}

TEST_CASE("weight parsing") {
  CHECK(parse_weight("const") == Weight::Constant);
  CHECK(parse_weight("h+2") == Weight::Shifted);
  CHECK(parse_weight(" h + 2 ") == Weight::Shifted);
  CHECK(to_string(Weight::Shifted) == "h+2");
  CHECK_THROWS_AS(parse_weight("h^2"), std::invalid_argument);
}
