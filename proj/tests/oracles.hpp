#pragma once

// Independent numerical oracles shared by the unit tests.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Central difference of f at x with step h, refined by Richardson
// extrapolation on the halving sequence h, h/2, h/4, ...
inline double richardson_derivative(const std::function<double(double)>& f, double x, double h = 1e-2,
                                    int levels = 5) {
  std::vector<std::vector<double>> t(levels, std::vector<double>(levels, 0.0));
  for (int i = 0; i < levels; ++i) {
    const double s = h / std::pow(2.0, i);
    t[i][0] = (f(x + s) - f(x - s)) / (2 * s);
    double p = 4.0;
    for (int j = 1; j <= i; ++j, p *= 4.0) t[i][j] = t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (p - 1);
  }
  return t[levels - 1][levels - 1];
}

// Partial derivative of a function of several variables.
inline double richardson_partial(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, int i, double h = 1e-2, int levels = 5) {
  const double x0 = x[static_cast<std::size_t>(i)];
  return richardson_derivative(
      [&](double s) {
        x[static_cast<std::size_t>(i)] = s;
        return f(x);
      },
      x0, h, levels);
}

}  // namespace oracle
