#pragma once

// Built-in integral affine base geometries and their affine charts.
//
// Model coordinates are the ones used in input files: (x1..xn) for euclidean
// space and (x, h) for the cylinders, x in the fundamental domain [0, 1).
// Affine coordinates are the developing coordinates whose differentials form
// the lattice frame:
//   euclidean, standard cylinder:  identity
//   exotic cylinder  Z((h+2)dx + x dh) + Z dh:   (xi, eta) = (x (h+2), h)
//   parabola cylinder Z dx + Z(dh - x dx):        (xi, eta) = (x, h - x^2/2)

#include "toric/expr.hpp"
#include "toric/lattice.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace toric {

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GeometryKind { Euclidean, StandardCylinder, ExoticCylinder, ParabolaCylinder };

class BaseGeometry {
 public:
  static BaseGeometry euclidean(std::size_t dim);
  static BaseGeometry standard_cylinder();
  static BaseGeometry exotic_cylinder();
  /// Only used by the infinite-type parabola band exemplar.
  static BaseGeometry parabola_cylinder();
  /// "euclidean", "cylinder-standard", "cylinder-exotic"; throws on anything else.
  static BaseGeometry from_tag(const std::string& tag, std::size_t dim = 2);

  GeometryKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  bool is_cylinder() const { return kind_ != GeometryKind::Euclidean; }
  std::string tag() const;
  expr::VariableNames variable_names() const;
  /// Names of the affine coordinates; (xi, eta) when they differ from (x, h).
  expr::VariableNames affine_variable_names() const;

  /// Affine coordinates as expressions in model coordinates.
  std::vector<expr::Expr> affine_in_model() const;
  /// Model coordinates as expressions in affine coordinates (local inverse).
  std::vector<expr::Expr> model_in_affine() const;

  friend bool operator==(const BaseGeometry&, const BaseGeometry&) = default;

 private:
  BaseGeometry(GeometryKind k, std::size_t d) : kind_(k), dim_(d) {}
  GeometryKind kind_;
  std::size_t dim_;
};

struct ChartPoint {
  std::vector<double> coords;
  bool affine = false;
};

struct ChartImage {
  ChartPoint point;          // affine coordinates
  Eigen::MatrixXd jacobian;  // d(affine_i)/d(model_j)
};

/// Reduces the cylinder x-coordinate into [0, 1). Identity on euclidean space.
ChartPoint reduce_to_fundamental_domain(const BaseGeometry& geom, ChartPoint p);

/// Throws DomainError outside the geometry (h <= -2 on the exotic cylinder).
ChartImage to_affine_chart(const BaseGeometry& geom, const ChartPoint& p);
ChartPoint from_affine_chart(const BaseGeometry& geom, const ChartPoint& p);
/// Returns p in affine coordinates, converting if needed.
std::vector<double> affine_coords(const BaseGeometry& geom, const ChartPoint& p);

/// Deck generator x -> x + k acting on model coordinates.
ChartPoint deck_translate(const BaseGeometry& geom, const ChartPoint& p, long k);

/// Entry (i, j) is the coefficient of frame covector e_i in the pullback of
/// e_j under the deck generator, with (e_1, e_2) = (d xi, d eta).
std::vector<lattice::IntMatrix> linear_holonomy(const BaseGeometry& geom);
bool is_classical_toric(const BaseGeometry& geom);

/// l(x) = normal . x + offset in affine coordinates.
struct AffineFunctional {
  std::vector<long> normal;
  double offset = 0.0;

  double operator()(std::span<const double> affine_point) const;
  expr::Expr as_expr() const;  // in affine coordinate variables
  bool is_primitive() const;
  std::string to_string(const expr::VariableNames& names) const;
};

}  // namespace toric
