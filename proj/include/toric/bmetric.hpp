#pragma once

// Hessian hybrid b-metrics on Delzant models.
//
// Metric data is supplied in model coordinates (x, h or x1..xn) and pushed
// once, symbolically, to the affine chart. Everything downstream (jets,
// Hessian condition, residues, curvature) works with the affine expressions.

#include "toric/delzant.hpp"
#include "toric/expr.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toric {

using ExprMatrix = std::vector<std::vector<expr::Expr>>;

expr::Expr symbolic_determinant(const ExprMatrix& m);
/// Adjugate over determinant.
ExprMatrix symbolic_inverse(const ExprMatrix& m);

/// phi_can = -(1/4pi) sum_i l_i log|l_i|, in affine coordinate variables.
expr::Expr guillemin_expr(const DelzantModel& model);

class HybridBMetric {
 public:
  /// g = background + Hess(phi_can * guillemin + correction).
  static HybridBMetric from_potential(DelzantModel model, bool guillemin, expr::Expr correction = {},
                                      std::optional<ExprMatrix> background = {});
  /// g given coefficient by coefficient.
  static HybridBMetric direct(DelzantModel model, ExprMatrix coefficients);

  const DelzantModel& model() const { return model_; }
  std::size_t dim() const { return model_.dim(); }
  bool has_potential() const { return has_potential_; }
  bool includes_guillemin() const { return guillemin_; }

  /// Potential part phi (affine variables); zero for direct metrics.
  const expr::Expr& potential() const { return potential_; }
  /// g_ij, d_l g_ij, g^jk, d_l g^jk, d_l d_m g^jk, all affine.
  const ExprMatrix& g() const { return g_; }
  const std::vector<ExprMatrix>& dg() const { return dg_; }
  const ExprMatrix& g_inv() const { return ginv_; }
  const std::vector<ExprMatrix>& dg_inv() const { return dginv_; }
  const std::vector<std::vector<ExprMatrix>>& d2g_inv() const { return d2ginv_; }
  const expr::Expr& det() const { return det_; }

  /// Numeric g at an affine point.
  Eigen::MatrixXd evaluate(std::span<const double> affine_point) const;

 private:
  HybridBMetric(DelzantModel m) : model_(std::move(m)) {}
  void build(const ExprMatrix& affine_g);

  DelzantModel model_;
  bool has_potential_ = false;
  bool guillemin_ = false;
  expr::Expr potential_;
  ExprMatrix g_, ginv_;
  std::vector<ExprMatrix> dg_, dginv_;
  std::vector<std::vector<ExprMatrix>> d2ginv_;
  expr::Expr det_;
};

/// Pushes a model-coordinate metric matrix to affine coordinates.
ExprMatrix metric_to_affine(const BaseGeometry& geom, const ExprMatrix& model_coefficients);
/// Rewrites a model-coordinate scalar in affine variables.
expr::Expr scalar_to_affine(const BaseGeometry& geom, const expr::Expr& e);

/// Throws DomainError on the boundary (log singularity) or outside.
double guillemin_potential(const DelzantModel& model, const ChartPoint& x);

struct MetricJet {
  std::vector<double> point;  // affine
  Eigen::MatrixXd g, g_inv;
  std::vector<Eigen::MatrixXd> dg;                   // dg[l](i, j) = d_l g_ij
  std::vector<Eigen::MatrixXd> dg_inv;               // dg_inv[l](j, k)
  std::vector<std::vector<Eigen::MatrixXd>> d2g_inv; // d2g_inv[l][m](j, k)
};

/// Throws DomainError if x is not interior or g is not positive definite at
/// x; SingularEvaluation propagates.
MetricJet metric_jet(const HybridBMetric& metric, const ChartPoint& x);

/// lim_{s -> 0+} f(s) from f(s0 / 2^k), k = 0..levels-1.
struct LimitEstimate {
  double value = 0.0;
  double error = 0.0;  // |last diagonal - previous diagonal|
  bool converged = false;
  std::vector<double> raw;  // f(s_k)
};
LimitEstimate richardson_limit(const std::function<double(double)>& f, double s0, int levels = 8,
                               double tol = 1e-7);

struct ResidueReport {
  std::size_t facet = 0;
  std::vector<double> anchor, inward;  // affine; dl(inward) = -1
  double coefficient_dt = 0.0;         // c in c dt, t = -l
  double coefficient_dl = 0.0;         // same residue as a multiple of dl: -c
  std::vector<double> tangential;      // lim s g(inward, w) per facet tangent w
  double error = 0.0;
  bool converged = false;
};

inline const char* residue_convention =
    "coefficient_dt is lim t*g(v,v) with t = -l and dl(v) = -1; coefficient_dl = -coefficient_dt";

ResidueReport facet_residue(const HybridBMetric& metric, std::size_t facet, double tol = 1e-7);

struct HessianViolation {
  std::vector<double> point;  // model coordinates
  std::size_t i = 0, j = 0, l = 0;  // d_j g_il != d_l g_ij
  double defect = 0.0;
};

struct HessianReport {
  bool pass = true;
  std::size_t points = 0;
  double max_defect = 0.0;
  std::optional<HessianViolation> violation;  // first failing sample
  std::vector<HessianViolation> defects;      // every failing sample (capped)
};

HessianReport verify_hessian(const HybridBMetric& metric, const std::vector<ChartPoint>& grid,
                             double tol = 1e-8);

struct NondegeneracySample {
  std::vector<double> point;  // affine corner or facet anchor
  int depth = 0;
  double limit = 0.0;  // lim (prod of active t_i) * det g
  bool converged = false;
};

struct NondegeneracyReport {
  bool pass = true;
  std::vector<NondegeneracySample> samples;
  std::optional<NondegeneracySample> violation;
};

/// Approach paths to every facet anchor and every corner of depth >= 2.
NondegeneracyReport verify_nondegeneracy(const HybridBMetric& metric, double tol = 1e-9);

/// Least-squares fit of phi(anchor + s v) to c s log s + a0 + a1 s + a2 s^2 + a3 s^3.
struct LocalPotentialFit {
  std::size_t facet = 0;
  double coefficient = 0.0;
  double residual = 0.0;
};
LocalPotentialFit fit_local_potential(const HybridBMetric& metric, std::size_t facet);

}  // namespace toric
