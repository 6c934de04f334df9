#pragma once

// Invariant Kahler metrics on the total space in action-angle coordinates.
//
// Conventions: omega(u, v) = u^T Omega v, G(u, v) = omega(u, J v), so
// J = Omega^-1 G. Orientation is the opposite of the printed forms, so
// G = omega_printed(J., .) with omega_printed = -omega holds as well.

#include "toric/bmetric.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace toric {

enum class LiftFamily { Canonical, CylinderStandard, CylinderExotic };
LiftFamily parse_lift_family(const std::string& text);
std::string to_string(LiftFamily f);

struct ConnectionParams {
  LiftFamily family = LiftFamily::Canonical;
  double a = 0.0, b = 0.0;  // flat connection D_{a,b}
  double c = 1.0;           // flat torus parameter, > 0
};

/// Canonical: coframe (dx^1..dx^n, dtheta_1..dtheta_n) in affine coordinates,
///   G = g + g^-1, omega = sum dx^i ^ dtheta_i.
/// Cylinder families: coframe (dh, dx, dphi, dy) with theta = dphi (standard)
/// or x dy + dphi (exotic), w = 1 or h + 2,
///   G = (1/tau + b^2 tau) dh^2 + tau theta (theta - 2b dh) + (w/c)((a^2+c^2) dx^2 - 2a dx dy + dy^2),
///   omega = w dx ^ dy + dh ^ theta,
/// where 1/tau = g(d/dh, d/dh) and g(d/dx, d/dx) must equal c w.
class TotalMetric {
 public:
  TotalMetric(HybridBMetric base, ConnectionParams params);

  const HybridBMetric& base() const { return base_; }
  const ConnectionParams& params() const { return params_; }
  std::size_t dim() const { return 2 * base_.dim(); }
  std::vector<std::string> coframe() const;

  Eigen::MatrixXd metric(const ChartPoint& x) const;
  Eigen::MatrixXd symplectic(const ChartPoint& x) const;

  /// Tangent vector with base part v (affine components) and fiber part
  /// sum_i f_i d/dtheta_i (angles dual to the affine coordinates), written in
  /// the family's frame.
  Eigen::VectorXd embed(const ChartPoint& x, const std::vector<double>& base_affine,
                        const std::vector<double>& fiber) const;

  /// Scalar curvature of G, computed from the base metric alone.
  double scalar_curvature(const ChartPoint& x) const;

 private:
  struct Local {
    std::vector<double> affine, model;
    Eigen::MatrixXd k;  // d(model)/d(affine)
  };
  Local local(const ChartPoint& x) const;

  HybridBMetric base_;
  ConnectionParams params_;
};

Eigen::MatrixXd assemble_total_metric(const TotalMetric& tm, const ChartPoint& x);
/// Throws DomainError if omega is singular.
Eigen::MatrixXd complex_structure(const TotalMetric& tm, const ChartPoint& x);

struct CompatibilityReport {
  double j_squared = 0.0;        // |J^2 + I|_max
  double compatibility = 0.0;    // |G - omega(., J.)|_max
  double printed_form = 0.0;       // |G - omega_printed(J., .)|_max
  double omega_invariance = 0.0; // |J^T Omega J - Omega|_max
  double asymmetry = 0.0;        // |G - G^T|_max
  double min_eigenvalue = 0.0;
};
CompatibilityReport check_compatibility(const TotalMetric& tm, const ChartPoint& x);

struct SmoothnessReport {
  std::size_t facet = 0;
  std::vector<double> anchor;  // affine
  double ratio = 0.0;          // lim (2 pi)^2 g_rr / g_phiphi
  double error = 0.0;
  bool converged = false;
  std::vector<double> raw;
};

/// Along the inward normal at the facet anchor with t = r^2:
/// g_rr = 4t G(v, v), g_phiphi = G(V, V) / t, V the collapsing circle generator.
SmoothnessReport check_boundary_smoothness(const TotalMetric& tm, std::size_t facet, double tol = 1e-7);

}  // namespace toric
