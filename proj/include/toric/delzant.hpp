#pragma once

// Delzant subspace models: defining functions, depth, the Delzant (basis
// extension) condition, finite type, and reduction lattice data.

#include "toric/affine_model.hpp"
#include "toric/lattice.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toric {

inline constexpr double tol_active = 1e-9;

enum class ShapeKind { HalfSpace, CylinderBand, ParabolaBand };

class DelzantModel {
 public:
  /// Delta = intersection of {l_i <= 0}, functionals in affine coordinates.
  /// Vertices, when supplied, are in affine coordinates as well.
  static DelzantModel half_space(BaseGeometry geom, std::vector<AffineFunctional> functionals,
                                 std::optional<std::vector<std::vector<double>>> vertices = {});
  /// S^1 x [a, b] on either cylinder.
  static DelzantModel cylinder_band(BaseGeometry geom, double a, double b);
  /// {h <= x^2/2 - 1/8, |x| <= 1/2} on the cylinder Z dx + Z(dh - x dx).
  static DelzantModel parabola_band();

  const BaseGeometry& geometry() const { return geometry_; }
  ShapeKind shape() const { return shape_; }
  std::size_t dim() const { return geometry_.dim(); }
  double band_lower() const { return a_; }
  double band_upper() const { return b_; }

  /// Defining functionals in affine coordinates (unvalidated, as stored).
  const std::vector<AffineFunctional>& functionals() const { return functionals_; }
  const std::optional<std::vector<std::vector<double>>>& supplied_vertices() const {
    return vertices_;
  }

  /// max_i l_i(p) at an affine point.
  double max_functional(std::span<const double> affine_point) const;
  bool contains(const ChartPoint& p, double tol = tol_active) const;

 private:
  DelzantModel(BaseGeometry g, ShapeKind s) : geometry_(g), shape_(s) {}
  BaseGeometry geometry_;
  ShapeKind shape_;
  std::vector<AffineFunctional> functionals_;
  std::optional<std::vector<std::vector<double>>> vertices_;
  double a_ = 0.0, b_ = 0.0;
};

struct FacetInfo {
  std::size_t index = 0;
  AffineFunctional functional;  // affine coordinates
  std::string description;      // printed in model coordinates where possible
};

/// Validated primitive boundary defining functions. Throws DomainError on a
/// non-primitive normal, a functional positive at an interior sample, or a
/// functional that touches no vertex.
std::vector<FacetInfo> facet_functions(const DelzantModel& model);

/// Number of functionals with |l_i(x)| <= tol_active. Throws DomainError when
/// x lies outside Delta.
int depth(const DelzantModel& model, const ChartPoint& x);

/// Corners of a half-space model (affine coordinates, lexicographically
/// sorted). Throws DomainError if the model has no vertex or is not pointed.
std::vector<std::vector<double>> vertices(const DelzantModel& model);
bool is_bounded(const DelzantModel& model);

struct CornerCertificate {
  std::vector<double> point;  // affine coordinates
  std::vector<std::size_t> active;
  std::vector<std::vector<long>> covectors;
  lattice::BasisExtension extension;
};

struct DelzantReport {
  bool pass = true;
  std::vector<CornerCertificate> certificates;  // one per checked corner
  std::optional<CornerCertificate> violation;   // first failing corner
};

DelzantReport verify_delzant(const DelzantModel& model);

struct DefiningFunctionWitness {
  long n = 0;
  AffineFunctional functional;  // affine coordinates
  std::string model_expression; // h - 1/2*(x+n)^2 + 1/8
};

struct FiniteTypeReport {
  bool finite = true;
  std::size_t count = 0;
  std::vector<DefiningFunctionWitness> witnesses;  // infinite type only, |n| <= witness_range
  std::string reason;
};

FiniteTypeReport verify_finite_type(const DelzantModel& model, long witness_range = 3);

struct ReductionData {
  lattice::IntMatrix normals;  // n x d, columns dl_a
  std::vector<std::vector<lattice::Integer>> kernel_basis;
  DelzantReport freeness;
};

/// Throws DomainError for models that are not finite-type half spaces.
ReductionData reduction_data(const DelzantModel& model);

/// Characteristic length used to scale sampling margins.
double diameter_proxy(const DelzantModel& model);

/// A point well inside Delta, in affine coordinates.
std::vector<double> interior_point(const DelzantModel& model);

/// Tensor grid of interior points (model coordinates) at distance >= margin
/// from every facet. Cylinders sample x in [0, 1).
std::vector<ChartPoint> interior_grid(const DelzantModel& model, std::size_t per_axis, double margin);

/// Point in the relative interior of facet i with an inward direction v
/// (dl_i(v) = -1) and a basis of directions tangent to the facet. All affine.
struct FacetFrame {
  std::vector<double> anchor;
  std::vector<double> inward;
  std::vector<std::vector<double>> tangents;
};
FacetFrame facet_frame(const DelzantModel& model, std::size_t facet);

}  // namespace toric
