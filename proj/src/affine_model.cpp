#include "toric/affine_model.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace toric {

using expr::Expr;

BaseGeometry BaseGeometry::euclidean(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("euclidean geometry needs dimension >= 1");
  return {GeometryKind::Euclidean, dim};
}
BaseGeometry BaseGeometry::standard_cylinder() { return {GeometryKind::StandardCylinder, 2}; }
BaseGeometry BaseGeometry::exotic_cylinder() { return {GeometryKind::ExoticCylinder, 2}; }
BaseGeometry BaseGeometry::parabola_cylinder() { return {GeometryKind::ParabolaCylinder, 2}; }

BaseGeometry BaseGeometry::from_tag(const std::string& tag, std::size_t dim) {
  if (tag == "euclidean") return euclidean(dim);
  if (tag == "cylinder-standard") return standard_cylinder();
  if (tag == "cylinder-exotic") return exotic_cylinder();
  throw std::invalid_argument("unknown geometry '" + tag +
                              "' (expected euclidean, cylinder-standard or cylinder-exotic)");
}

std::string BaseGeometry::tag() const {
  switch (kind_) {
    case GeometryKind::Euclidean: return "euclidean";
    case GeometryKind::StandardCylinder: return "cylinder-standard";
    case GeometryKind::ExoticCylinder: return "cylinder-exotic";
    case GeometryKind::ParabolaCylinder: return "cylinder-parabola";
  }
  return "?";
}

expr::VariableNames BaseGeometry::variable_names() const {
  return is_cylinder() ? expr::VariableNames::cylinder() : expr::VariableNames::euclidean(dim_);
}

expr::VariableNames BaseGeometry::affine_variable_names() const {
  if (kind_ == GeometryKind::ExoticCylinder || kind_ == GeometryKind::ParabolaCylinder)
    return expr::VariableNames({"xi", "eta"});
  return variable_names();
}

std::vector<Expr> BaseGeometry::affine_in_model() const {
  std::vector<Expr> v;
  for (std::size_t i = 0; i < dim_; ++i) v.push_back(Expr::var(static_cast<int>(i)));
  const Expr x = Expr::var(0), h = Expr::var(1);
  if (kind_ == GeometryKind::ExoticCylinder) v[0] = x * (h + 2.0);
  if (kind_ == GeometryKind::ParabolaCylinder) v[1] = h - pow(x, 2) / 2.0;
  return v;
}

std::vector<Expr> BaseGeometry::model_in_affine() const {
  std::vector<Expr> v;
  for (std::size_t i = 0; i < dim_; ++i) v.push_back(Expr::var(static_cast<int>(i)));
  const Expr xi = Expr::var(0), eta = Expr::var(1);
  if (kind_ == GeometryKind::ExoticCylinder) v[0] = xi / (eta + 2.0);
  if (kind_ == GeometryKind::ParabolaCylinder) v[1] = eta + pow(xi, 2) / 2.0;
  return v;
}

namespace {

void check_dim(const BaseGeometry& geom, const ChartPoint& p) {
  if (p.coords.size() != geom.dim())
    throw DomainError("point has dimension " + std::to_string(p.coords.size()) + ", geometry " +
                      geom.tag() + " has dimension " + std::to_string(geom.dim()));
}

}  // namespace

ChartPoint reduce_to_fundamental_domain(const BaseGeometry& geom, ChartPoint p) {
  check_dim(geom, p);
  if (!geom.is_cylinder() || p.affine) return p;
  double x = p.coords[0] - std::floor(p.coords[0]);
  if (x >= 1.0) x = 0.0;
  p.coords[0] = x;
  return p;
}

ChartImage to_affine_chart(const BaseGeometry& geom, const ChartPoint& p) {
  check_dim(geom, p);
  const std::size_t n = geom.dim();
  ChartImage out{{p.coords, true}, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                             static_cast<Eigen::Index>(n))};
  if (p.affine) return out;
  switch (geom.kind()) {
    case GeometryKind::Euclidean:
    case GeometryKind::StandardCylinder:
      break;
    case GeometryKind::ExoticCylinder: {
      const double x = p.coords[0], h = p.coords[1];
      if (!(h > -2.0)) throw DomainError("exotic cylinder requires h > -2, got h = " + std::to_string(h));
      out.point.coords[0] = x * (h + 2.0);
      out.jacobian(0, 0) = h + 2.0;
      out.jacobian(0, 1) = x;
      break;
    }
    case GeometryKind::ParabolaCylinder: {
      const double x = p.coords[0], h = p.coords[1];
      out.point.coords[1] = h - 0.5 * x * x;
      out.jacobian(1, 0) = -x;
      break;
    }
  }
  return out;
}

ChartPoint from_affine_chart(const BaseGeometry& geom, const ChartPoint& p) {
  check_dim(geom, p);
  if (!p.affine) return p;
  ChartPoint out{p.coords, false};
  if (geom.kind() == GeometryKind::ExoticCylinder) {
    if (!(p.coords[1] > -2.0)) throw DomainError("exotic cylinder requires eta > -2");
    out.coords[0] = p.coords[0] / (p.coords[1] + 2.0);
  } else if (geom.kind() == GeometryKind::ParabolaCylinder) {
    out.coords[1] = p.coords[1] + 0.5 * p.coords[0] * p.coords[0];
  }
  return out;
}

std::vector<double> affine_coords(const BaseGeometry& geom, const ChartPoint& p) {
  return p.affine ? p.coords : to_affine_chart(geom, p).point.coords;
}

ChartPoint deck_translate(const BaseGeometry& geom, const ChartPoint& p, long k) {
  check_dim(geom, p);
  if (!geom.is_cylinder()) throw DomainError("euclidean space has no deck transformations");
  ChartPoint model = from_affine_chart(geom, p);
  model.coords[0] += static_cast<double>(k);
  return model;
}

std::vector<lattice::IntMatrix> linear_holonomy(const BaseGeometry& geom) {
  switch (geom.kind()) {
    case GeometryKind::Euclidean:
      return {};
    case GeometryKind::StandardCylinder:
      return {lattice::IntMatrix::identity(2)};
    case GeometryKind::ExoticCylinder:
      // (h+2)dx + x dh  ->  (h+2)dx + (x+1)dh = d xi + d eta
      return {lattice::IntMatrix{{1, 0}, {1, 1}}};
    case GeometryKind::ParabolaCylinder:
      // dh - x dx  ->  dh - (x+1)dx = d eta - d xi
      return {lattice::IntMatrix{{1, -1}, {0, 1}}};
  }
  return {};
}

bool is_classical_toric(const BaseGeometry& geom) {
  for (const auto& m : linear_holonomy(geom))
    if (!(m == lattice::IntMatrix::identity(m.rows()))) return false;
  return true;
}

double AffineFunctional::operator()(std::span<const double> p) const {
  if (p.size() != normal.size()) throw DomainError("functional/point dimension mismatch");
  double v = offset;
  for (std::size_t i = 0; i < p.size(); ++i) v += static_cast<double>(normal[i]) * p[i];
  return v;
}

Expr AffineFunctional::as_expr() const {
  Expr e;
  bool first = true;
  for (std::size_t i = 0; i < normal.size(); ++i) {
    if (normal[i] == 0) continue;
    Expr v = Expr::var(static_cast<int>(i));
    const double c = static_cast<double>(std::abs(normal[i]));
    Expr term = c == 1.0 ? v : Expr::constant(c) * v;
    if (first) e = normal[i] < 0 ? -term : term;
    else e = normal[i] < 0 ? e - term : e + term;
    first = false;
  }
  if (offset > 0) e = e + Expr::constant(offset);
  else if (offset < 0) e = e - Expr::constant(-offset);
  return e;
}

bool AffineFunctional::is_primitive() const {
  long g = 0;
  for (long v : normal) g = std::gcd(g, v);
  return g == 1;
}

std::string AffineFunctional::to_string(const expr::VariableNames& names) const {
  return expr::to_string(as_expr(), names);
}

}  // namespace toric
