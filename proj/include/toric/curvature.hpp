#pragma once

// Koszul form, scalar curvature by two independent formulas, and the
// affine-fit extremality diagnostic.

#include "toric/bmetric.hpp"

#include <string>
#include <vector>

namespace toric {

enum class CurvatureMethod { Abreu, Divergence };
std::string to_string(CurvatureMethod m);

struct ScalarSample {
  std::vector<double> point;  // affine coordinates
  double value = 0.0;
  CurvatureMethod method = CurvatureMethod::Abreu;
};

/// Symbolic curvature expressions for one metric, built once and evaluated
/// at many points.
///   abreu:      S = -1/2 sum_jk d_j d_k g^jk
///   divergence: S = sum_j d_j (g^jk alpha_k),  alpha = 1/2 d log|det g|
class ScalarCurvature {
 public:
  explicit ScalarCurvature(const HybridBMetric& metric);

  const HybridBMetric& metric() const { return metric_; }
  std::vector<double> alpha(const ChartPoint& x) const;
  ScalarSample operator()(const ChartPoint& x, CurvatureMethod method) const;

  const expr::Expr& abreu_expr() const { return abreu_; }
  const expr::Expr& divergence_expr() const { return divergence_; }

 private:
  std::vector<double> interior(const ChartPoint& x) const;

  HybridBMetric metric_;
  std::vector<expr::Expr> alpha_;
  expr::Expr abreu_, divergence_;
};

std::vector<double> koszul_alpha(const HybridBMetric& metric, const ChartPoint& x);
ScalarSample scalar_curvature(const HybridBMetric& metric, const ChartPoint& x, CurvatureMethod method);

struct AffineFit {
  double c0 = 0.0;
  std::vector<double> c;
  double residual_max = 0.0;
  double residual_rms = 0.0;
};

/// Least squares S ~ c0 + c . p by column-scaled normal equations. Throws
/// DomainError for a rank-deficient design.
AffineFit fit_affine(const std::vector<std::vector<double>>& points, const std::vector<double>& values);

/// Affine fit of the abreu scalar curvature sampled on a model-coordinate grid.
AffineFit extremality_fit(const HybridBMetric& metric, const std::vector<ChartPoint>& grid);

}  // namespace toric
