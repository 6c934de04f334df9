#include <doctest.h>

#include "fixtures.hpp"
#include "toric/curvature.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace toric;
using std::numbers::pi;

namespace {

HybridBMetric profile_metric(const std::string& inv_tau) {
  auto m = fx::standard_band();
  return HybridBMetric::direct(m, fx::parse_matrix({{"1", "0"}, {"0", inv_tau}}, m.geometry().variable_names()));
}

HybridBMetric circle(const std::string& f) {
  auto m = DelzantModel::half_space(BaseGeometry::euclidean(1), {{{-1}, 0.0}, {{1}, -1.0}});
  return HybridBMetric::direct(m, fx::parse_matrix({{f}}, expr::VariableNames::euclidean(1)));
}

double rel(double a, double b) { return std::abs(a - b) / (1 + std::abs(b)); }

}  // namespace

TEST_CASE("koszul form") {
  const auto flat = HybridBMetric::direct(fx::square(), fx::parse_matrix({{"1", "0"}, {"0", "1"}}, expr::VariableNames::euclidean(2)));
  for (double a : koszul_alpha(flat, {{0.3, 0.6}, false})) CHECK(a == 0.0);
  const auto iv = fx::guillemin(fx::interval());
  CHECK(koszul_alpha(iv, {{0.0}, false})[0] == doctest::Approx(0.0));
  CHECK(koszul_alpha(iv, {{0.5}, false})[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("scalar curvature examples") {
  const auto p = profile_metric("1/(4*pi*(1-h^2))");
  for (double h : {-0.8, 0.0, 0.5})
    for (auto m : {CurvatureMethod::Abreu, CurvatureMethod::Divergence})
      CHECK(scalar_curvature(p, {{0.3, h}, false}, m).value == doctest::Approx(4 * pi).epsilon(1e-10));

  const auto ex = fx::exotic_extremal();
  CHECK(scalar_curvature(ex, {{0.0, 0.0}, false}, CurvatureMethod::Abreu).value == doctest::Approx(36 * pi / 11).epsilon(1e-10));
  for (double h : {-0.9, -0.3, 0.4, 0.95}) {
    const double expect = 4 * pi / 11 * (12 * h + 9);
    CHECK(scalar_curvature(ex, {{0.7, h}, false}, CurvatureMethod::Abreu).value == doctest::Approx(expect).epsilon(1e-9));
    CHECK(scalar_curvature(ex, {{0.7, h}, false}, CurvatureMethod::Divergence).value == doctest::Approx(expect).epsilon(1e-9));
  }

  const auto c = circle("2 + sin(2*pi*h)");
  CHECK(scalar_curvature(c, {{0.0 + 1e-300}, false}, CurvatureMethod::Abreu).value == doctest::Approx(-pi * pi / 2).epsilon(1e-12));
}

TEST_CASE("one dimensional formula") {
  // S = f''/(2 f^2) - f'^2 / f^3, with f and its derivatives written out by hand.
  const auto c = circle("2 + sin(2*pi*h)");
  for (double x : {0.1, 0.33, 0.5, 0.77}) {
    const double f = 2 + std::sin(2 * pi * x), f1 = 2 * pi * std::cos(2 * pi * x), f2 = -4 * pi * pi * std::sin(2 * pi * x);
    const double expect = f2 / (2 * f * f) - f1 * f1 / (f * f * f);
    CHECK(std::abs(scalar_curvature(c, {{x}, false}, CurvatureMethod::Abreu).value - expect) < 1e-9);
    CHECK(std::abs(scalar_curvature(c, {{x}, false}, CurvatureMethod::Divergence).value - expect) < 1e-9);
  }
  const auto k = circle("3");
  CHECK(scalar_curvature(k, {{0.4}, false}, CurvatureMethod::Abreu).value == 0.0);
}

TEST_CASE("abreu and divergence agree") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.01, 0.99), uh(-0.99, 0.99);
  const std::vector<HybridBMetric> ms{fx::guillemin(fx::interval()), fx::guillemin(fx::square()),
                                      fx::guillemin(fx::simplex()), fx::standard_extremal(), fx::exotic_extremal()};
  for (const auto& m : ms) {
    const ScalarCurvature s(m);
    for (int trial = 0; trial < 40; ++trial) {
      ChartPoint x;
      if (m.model().geometry().is_cylinder()) x = {{u(rng), uh(rng)}, false};
      else if (m.dim() == 1) x = {{uh(rng)}, false};
      else x = {{u(rng), u(rng)}, false};
      if (m.model().max_functional(affine_coords(m.model().geometry(), x)) >= -1e-3) continue;
      const double a = s(x, CurvatureMethod::Abreu).value, d = s(x, CurvatureMethod::Divergence).value;
      CHECK(rel(a, d) < 1e-6);
    }
  }
}

TEST_CASE("scalar curvature is additive on products") {
  const auto unit = DelzantModel::half_space(BaseGeometry::euclidean(1), {{{-1}, 0.0}, {{1}, -1.0}});
  const ScalarCurvature s1(fx::guillemin(unit)), s2(fx::guillemin(fx::square()));
  for (auto [x, y] : {std::pair{0.2, 0.7}, {0.5, 0.5}, {0.9, 0.05}}) {
    const double sum = s1({{x}, false}, CurvatureMethod::Abreu).value + s1({{y}, false}, CurvatureMethod::Abreu).value;
    CHECK(s2({{x, y}, false}, CurvatureMethod::Abreu).value == doctest::Approx(sum).epsilon(1e-10));
  }
}

TEST_CASE("extremality fit") {
  const auto flat = profile_metric("1");
  auto f = extremality_fit(flat, interior_grid(fx::standard_band(), 5, 1e-3));
  CHECK(f.residual_max == 0.0);
  for (double c : f.c) CHECK(c == 0.0);

  const auto ex = fx::exotic_extremal();
  f = extremality_fit(ex, interior_grid(fx::exotic_band(), 21, 2e-3));
  CHECK(f.c0 == doctest::Approx(36 * pi / 11).epsilon(1e-10));
  CHECK(std::abs(f.c[0]) < 1e-9);
  CHECK(f.c[1] == doctest::Approx(48 * pi / 11).epsilon(1e-10));
  CHECK(f.residual_max < 1e-9);

  const auto quartic = profile_metric("1/(4*pi*(1-h^4))");
  std::vector<ChartPoint> grid;
  for (double x : {0.25, 0.5, 0.75})
    for (int i = 0; i <= 20; ++i) grid.push_back({{x, -0.9 + 1.8 * i / 20.0}, false});
  f = extremality_fit(quartic, grid);
  CHECK(f.residual_max > 1.0);
  // S = 24 pi h^2 exactly.
  CHECK(scalar_curvature(quartic, {{0.5, 0.5}, false}, CurvatureMethod::Abreu).value == doctest::Approx(6 * pi).epsilon(1e-10));

  CHECK_THROWS_AS(fit_affine({{0.0}, {0.0}, {0.0}}, {1.0, 2.0, 3.0}), DomainError);
  CHECK_THROWS_AS(extremality_fit(flat, {{{0.5, 0.0}, false}}), DomainError);
}

TEST_CASE("fit affine recovers an affine function") {
  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      pts.push_back({i * 0.25, j * 0.25 - 1});
      vals.push_back(3 - 2 * pts.back()[0] + 0.5 * pts.back()[1]);
    }
  const auto f = fit_affine(pts, vals);
  CHECK(f.c0 == doctest::Approx(3.0));
  CHECK(f.c[0] == doctest::Approx(-2.0));
  CHECK(f.c[1] == doctest::Approx(0.5));
  CHECK(f.residual_max < 1e-13);
}
