#include <doctest.h>

#include "oracles.hpp"
#include "toric/expr.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace toric::expr;

namespace {

const VariableNames kH = VariableNames::euclidean(1);
const VariableNames kXY = VariableNames::euclidean(2);

double at(const Expr& e, std::vector<double> p) { return evaluate(e, p); }

// Random expression over two variables, built from operations whose values
// stay away from singularities on [0.2, 0.8]^2.
Expr random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  const Expr x = Expr::var(0), y = Expr::var(1);
  switch (pick(rng)) {
    case 0: return x;
    case 1: return y;
    case 2: return Expr::constant(std::round(c(rng) * 4) / 4 + 0.5);
    case 3: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 5: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 6: return random_expr(rng, depth - 1) / (2.0 + x * x + y);
    case 7: return pow(random_expr(rng, depth - 1), 2 + static_cast<int>(rng() % 2));
    case 8: return log_abs(1.0 + x * y) * random_expr(rng, depth - 1);
    default: return (1.0 - x) * log_abs(1.0 - x) + pow(x + 2.0, -2);
  }
}

}  // namespace

TEST_CASE("differentiate examples") {
  const Expr e1 = parse("log(1-h)", kH);
  const Expr d1 = differentiate(e1, 0);
  for (double h : {-0.5, 0.0, 0.3, 0.9}) CHECK(at(d1, {h}) == doctest::Approx(-1.0 / (1.0 - h)));

  const Expr e2 = parse("(1+h)*log(1+h) + (1-h)*log(1-h)", kH);
  const Expr d2 = differentiate(differentiate(e2, 0), 0);
  for (double h : {-0.7, 0.0, 0.25, 0.8})
    CHECK(at(d2, {h}) == doctest::Approx(1.0 / (1.0 + h) + 1.0 / (1.0 - h)).epsilon(1e-13));

  const Expr e3 = parse("(h+2)^(-1)", kH);
  const Expr d3 = differentiate(e3, 0);
  for (double h : {-1.0, 0.0, 3.0}) CHECK(at(d3, {h}) == doctest::Approx(-std::pow(h + 2, -2)));
}

TEST_CASE("evaluate examples") {
  const Expr e = parse("1/(2*pi*(1-h^2))", kH);
  CHECK(at(e, {0.0}) == doctest::Approx(0.15915494309189535).epsilon(1e-15));
  CHECK(at(parse("x*y", kXY), {2, 3}) == 6.0);
  CHECK_THROWS_AS(at(parse("log(h-1)", kH), {1.0}), SingularEvaluation);
  try {
    at(parse("1/(h-1)", kH), {1.0});
    FAIL("expected a singular evaluation");
  } catch (const SingularEvaluation& ex) {
    CHECK(ex.point() == std::vector<double>{1.0});
  }
}

TEST_CASE("derivatives agree with Richardson finite differences") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Expr e = random_expr(rng, 3);
    const std::vector<double> p{u(rng), u(rng)};
    for (int i = 0; i < 2; ++i) {
      const double sym = at(differentiate(e, i), p);
      const double fd = oracle::richardson_partial([&](const std::vector<double>& q) { return at(e, q); }, p, i,
                                                   0.05, 5);
      CHECK(std::abs(sym - fd) <= 1e-7 * std::max(1.0, std::abs(sym)));
      ++checked;
    }
  }
  CHECK(checked == 400);
}

TEST_CASE("fourth derivative of a log potential") {
  // d^4/dh^4 [(1-h) log(1-h)] = 2/(1-h)^3
  const Expr e = parse("(1-h)*log(1-h)", kH);
  const int vars[] = {0, 0, 0, 0};
  const Expr d4 = differentiate(e, vars);
  for (double h : {-0.5, 0.1, 0.6}) CHECK(at(d4, {h}) == doctest::Approx(2.0 / std::pow(1 - h, 3)).epsilon(1e-12));
  CHECK(dag_size(d4) < 200);
}

TEST_CASE("differentiation is linear") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (int trial = 0; trial < 50; ++trial) {
    const Expr e1 = random_expr(rng, 3), e2 = random_expr(rng, 3);
    const double a = 1.5;
    const Expr lhs = differentiate(a * e1 + e2, 1);
    const Expr rhs = a * differentiate(e1, 1) + differentiate(e2, 1);
    const std::vector<double> p{u(rng), u(rng)};
    CHECK(at(lhs, p) == doctest::Approx(at(rhs, p)).epsilon(1e-12));
  }
}

TEST_CASE("parser precedence and round trip") {
  CHECK(at(parse("-h^2", kH), {3.0}) == -9.0);
  CHECK(at(parse("2^3", kH), {0.0}) == 8.0);
  CHECK(at(parse("1 - 2 - 3", kH), {0.0}) == -4.0);
  CHECK(at(parse("8/4/2", kH), {0.0}) == 1.0);
  CHECK(at(parse("pi", kH), {0.0}) == std::numbers::pi);
  CHECK(at(parse("1.5e-1*x1 + y", kXY), {2.0, 1.0}) == doctest::Approx(1.3));
  CHECK(at(parse("sin(2*pi*x)", kXY), {0.25, 0.0}) == doctest::Approx(1.0));

  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 4);
    const std::string s = to_string(e, kXY);
    const Expr back = parse(s, kXY);
    const std::vector<double> p{u(rng), u(rng)};
    CHECK(at(back, p) == doctest::Approx(at(e, p)).epsilon(1e-14));
    CHECK(to_string(back, kXY) == s);
  }
}

TEST_CASE("parse errors report positions") {
  CHECK_THROWS_AS(parse("x +", kXY), ParseError);
  CHECK_THROWS_AS(parse("w + 1", kXY), ParseError);
  CHECK_THROWS_AS(parse("x^1.5", kXY), ParseError);
  try {
    parse("x + )", kXY);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("substitute") {
  const Expr e = parse("x*y + 1", kXY);
  const Expr r[] = {Expr::var(1), Expr::constant(2.0)};
  CHECK(at(substitute(e, r), {0.0, 5.0}) == 11.0);
}
