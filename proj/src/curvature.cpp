#include "toric/curvature.hpp"

#include <cmath>

namespace toric {

using expr::Expr;

std::string to_string(CurvatureMethod m) { return m == CurvatureMethod::Abreu ? "abreu" : "divergence"; }

ScalarCurvature::ScalarCurvature(const HybridBMetric& metric) : metric_(metric) {
  const std::size_t n = metric_.dim();
  const Expr logdet = log_abs(metric_.det());
  for (std::size_t k = 0; k < n; ++k) alpha_.push_back(Expr(0.5) * expr::differentiate(logdet, static_cast<int>(k)));
  for (std::size_t j = 0; j < n; ++j) {
    Expr v;
    for (std::size_t k = 0; k < n; ++k) v = v + metric_.g_inv()[j][k] * alpha_[k];
    divergence_ = divergence_ + expr::differentiate(v, static_cast<int>(j));
    for (std::size_t k = 0; k < n; ++k) abreu_ = abreu_ + metric_.d2g_inv()[j][k][j][k];
  }
  abreu_ = Expr(-0.5) * abreu_;
}

std::vector<double> ScalarCurvature::interior(const ChartPoint& x) const {
  auto p = affine_coords(metric_.model().geometry(), x);
  if (!(metric_.model().max_functional(p) < 0.0)) throw DomainError("curvature requested at a non-interior point");
  return p;
}

std::vector<double> ScalarCurvature::alpha(const ChartPoint& x) const {
  const auto p = interior(x);
  expr::Evaluator ev(p);
  std::vector<double> out;
  for (const auto& a : alpha_) out.push_back(ev(a));
  return out;
}

ScalarSample ScalarCurvature::operator()(const ChartPoint& x, CurvatureMethod method) const {
  const auto p = interior(x);
  const double v = expr::evaluate(method == CurvatureMethod::Abreu ? abreu_ : divergence_, p);
  return {p, v, method};
}

std::vector<double> koszul_alpha(const HybridBMetric& metric, const ChartPoint& x) {
  return ScalarCurvature(metric).alpha(x);
}

ScalarSample scalar_curvature(const HybridBMetric& metric, const ChartPoint& x, CurvatureMethod method) {
  return ScalarCurvature(metric)(x, method);
}

AffineFit fit_affine(const std::vector<std::vector<double>>& points, const std::vector<double>& values) {
  if (points.empty() || points.size() != values.size()) throw DomainError("affine fit needs matching, non-empty samples");
  const std::size_t n = points.front().size();
  const auto rows = static_cast<Eigen::Index>(points.size()), cols = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    a(r, 0) = 1.0;
    for (std::size_t i = 0; i < n; ++i) a(r, static_cast<Eigen::Index>(i + 1)) = points[static_cast<std::size_t>(r)][i];
    y(r) = values[static_cast<std::size_t>(r)];
  }
  // Center and scale the coordinate columns so the normal equations stay well conditioned.
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(cols), scale = Eigen::VectorXd::Ones(cols);
  for (Eigen::Index c = 1; c < cols; ++c) {
    shift(c) = a.col(c).mean();
    scale(c) = (a.col(c).array() - shift(c)).matrix().norm();
    if (scale(c) == 0.0) throw DomainError("affine fit: degenerate sample grid (coordinate " + std::to_string(c - 1) + " is constant)");
  }
  Eigen::MatrixXd as = a;
  for (Eigen::Index c = 1; c < cols; ++c) as.col(c) = (a.col(c).array() - shift(c)).matrix() / scale(c);
  const Eigen::MatrixXd ata = as.transpose() * as;
  if (Eigen::FullPivLU<Eigen::MatrixXd>(ata).rank() < cols) throw DomainError("affine fit: rank-deficient sample grid");
  const Eigen::VectorXd z = ata.ldlt().solve(as.transpose() * y);

  AffineFit fit;
  fit.c0 = z(0);
  for (Eigen::Index c = 1; c < cols; ++c) {
    fit.c.push_back(z(c) / scale(c));
    fit.c0 -= z(c) * shift(c) / scale(c);
  }
  const Eigen::VectorXd res = as * z - y;
  fit.residual_max = res.cwiseAbs().maxCoeff();
  fit.residual_rms = std::sqrt(res.squaredNorm() / static_cast<double>(rows));
  return fit;
}

AffineFit extremality_fit(const HybridBMetric& metric, const std::vector<ChartPoint>& grid) {
  if (grid.size() < metric.dim() + 2) throw DomainError("extremality fit needs at least n+2 sample points");
  const ScalarCurvature s(metric);
  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
  for (const auto& x : grid) {
    const auto smp = s(x, CurvatureMethod::Abreu);
    pts.push_back(smp.point);
    vals.push_back(smp.value);
  }
  return fit_affine(pts, vals);
}

}  // namespace toric
