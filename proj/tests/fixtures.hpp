#pragma once

// In-code versions of the fixture models and metrics used across tests.

#include "toric/bmetric.hpp"

namespace fx {

using namespace toric;

inline DelzantModel interval() {
  return DelzantModel::half_space(BaseGeometry::euclidean(1), {{{-1}, -1.0}, {{1}, -1.0}});
}
inline DelzantModel square() {
  return DelzantModel::half_space(BaseGeometry::euclidean(2),
                                  {{{-1, 0}, 0.0}, {{0, -1}, 0.0}, {{1, 0}, -1.0}, {{0, 1}, -1.0}});
}
inline DelzantModel simplex() {
  return DelzantModel::half_space(BaseGeometry::euclidean(2), {{{-1, 0}, 0.0}, {{0, -1}, 0.0}, {{1, 1}, -1.0}});
}
inline DelzantModel box(double w, double h) {
  return DelzantModel::half_space(BaseGeometry::euclidean(2),
                                  {{{-1, 0}, 0.0}, {{0, -1}, 0.0}, {{1, 0}, -w}, {{0, 1}, -h}});
}
inline DelzantModel standard_band() { return DelzantModel::cylinder_band(BaseGeometry::standard_cylinder(), -1, 1); }
inline DelzantModel exotic_band() { return DelzantModel::cylinder_band(BaseGeometry::exotic_cylinder(), -1, 1); }

inline ExprMatrix parse_matrix(const std::vector<std::vector<std::string>>& m, const expr::VariableNames& names) {
  ExprMatrix out;
  for (const auto& r : m) {
    std::vector<expr::Expr> row;
    for (const auto& s : r) row.push_back(expr::parse(s, names));
    out.push_back(std::move(row));
  }
  return out;
}

inline HybridBMetric guillemin(DelzantModel m) { return HybridBMetric::from_potential(std::move(m), true); }

// Guillemin potential on a band plus a torus-direction background.
inline HybridBMetric guillemin_band(DelzantModel m) {
  const auto names = m.geometry().variable_names();
  const std::string w = m.geometry().kind() == GeometryKind::ExoticCylinder ? "h+2" : "1";
  return HybridBMetric::from_potential(m, true, {}, parse_matrix({{w, "0"}, {"0", "0"}}, names));
}

// (1/tau) dh^2 + w dx^2 with tau = 4pi(1-h^2), w = 1.
inline HybridBMetric standard_extremal() {
  auto m = standard_band();
  return HybridBMetric::direct(m, parse_matrix({{"1", "0"}, {"0", "1/(4*pi*(1-h^2))"}}, m.geometry().variable_names()));
}

// The exotic-cylinder extremal metric with c = 1.
inline HybridBMetric exotic_extremal() {
  auto m = exotic_band();
  return HybridBMetric::direct(
      m, parse_matrix({{"h+2", "0"}, {"0", "1/(4*pi*(1-h^2)) + 1/(2*pi*(2*h^2+11*h+20))"}}, m.geometry().variable_names()));
}

inline HybridBMetric interval_verbatim() {
  return HybridBMetric::direct(interval(), parse_matrix({{"1/(4*pi*(1-h^2))"}}, expr::VariableNames::euclidean(1)));
}

}  // namespace fx
