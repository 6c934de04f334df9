#include "toric/bmetric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace toric {

using expr::Expr;

namespace {

ExprMatrix minor_of(const ExprMatrix& m, std::size_t row, std::size_t col) {
  ExprMatrix out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i == row) continue;
    std::vector<Expr> r;
    for (std::size_t j = 0; j < m.size(); ++j)
      if (j != col) r.push_back(m[i][j]);
    out.push_back(std::move(r));
  }
  return out;
}

ExprMatrix zeros(std::size_t n) { return ExprMatrix(n, std::vector<Expr>(n)); }

Eigen::MatrixXd eval_matrix(expr::Evaluator& ev, const ExprMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = ev(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  return out;
}

std::vector<double> shifted(const std::vector<double>& p, const std::vector<double>& v, double s) {
  std::vector<double> q = p;
  for (std::size_t i = 0; i < q.size(); ++i) q[i] += s * v[i];
  return q;
}

double quad(const Eigen::MatrixXd& g, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      s += a[i] * g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * b[j];
  return s;
}

std::string point_string(std::span<const double> p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

}  // namespace

Expr symbolic_determinant(const ExprMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) return Expr(1.0);
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  Expr det;
  for (std::size_t j = 0; j < n; ++j) {
    if (m[0][j].is_const(0)) continue;
    Expr term = m[0][j] * symbolic_determinant(minor_of(m, 0, j));
    det = j % 2 ? det - term : det + term;
  }
  return det;
}

ExprMatrix symbolic_inverse(const ExprMatrix& m) {
  const std::size_t n = m.size();
  const Expr det = symbolic_determinant(m);
  ExprMatrix inv = zeros(n);
  if (n == 1) {
    inv[0][0] = Expr(1.0) / m[0][0];
    return inv;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Expr cof = symbolic_determinant(minor_of(m, j, i));
      if ((i + j) % 2) cof = -cof;
      inv[i][j] = cof / det;
    }
  return inv;
}

Expr guillemin_expr(const DelzantModel& model) {
  Expr sum;
  for (const auto& f : model.functionals()) {
    const Expr l = f.as_expr();
    sum = sum + l * log_abs(l);
  }
  return Expr(-1.0) / (Expr(4.0) * Expr::pi()) * sum;
}

Expr scalar_to_affine(const BaseGeometry& geom, const Expr& e) {
  if (geom.kind() == GeometryKind::Euclidean || geom.kind() == GeometryKind::StandardCylinder) return e;
  const auto repl = geom.model_in_affine();
  return expr::substitute(e, repl);
}

ExprMatrix metric_to_affine(const BaseGeometry& geom, const ExprMatrix& mc) {
  const std::size_t n = geom.dim();
  if (mc.size() != n) throw DomainError("metric matrix has " + std::to_string(mc.size()) + " rows, expected " + std::to_string(n));
  for (const auto& r : mc)
    if (r.size() != n) throw DomainError("metric matrix is not square");
  if (geom.kind() == GeometryKind::Euclidean || geom.kind() == GeometryKind::StandardCylinder) return mc;

  const auto repl = geom.model_in_affine();
  // k[i][a] = d(model_i)/d(affine_a)
  ExprMatrix k = zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a) k[i][a] = expr::differentiate(repl[i], static_cast<int>(a));
  ExprMatrix sub = zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sub[i][j] = expr::substitute(mc[i][j], repl);
  ExprMatrix out = zeros(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      Expr s;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s = s + k[i][a] * k[j][b] * sub[i][j];
      out[a][b] = s;
      out[b][a] = s;
    }
  return out;
}

HybridBMetric HybridBMetric::from_potential(DelzantModel model, bool guillemin, Expr correction,
                                            std::optional<ExprMatrix> background) {
  HybridBMetric m(std::move(model));
  const auto& geom = m.model_.geometry();
  const std::size_t n = geom.dim();
  m.has_potential_ = true;
  m.guillemin_ = guillemin;
  m.potential_ = scalar_to_affine(geom, correction);
  if (guillemin) m.potential_ = guillemin_expr(m.model_) + m.potential_;

  ExprMatrix g = background ? metric_to_affine(geom, *background) : zeros(n);
  std::vector<Expr> grad;
  for (std::size_t a = 0; a < n; ++a) grad.push_back(expr::differentiate(m.potential_, static_cast<int>(a)));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const Expr hab = expr::differentiate(grad[a], static_cast<int>(b));
      g[a][b] = g[a][b] + hab;
      if (b != a) g[b][a] = g[b][a] + hab;
    }
  m.build(g);
  return m;
}

HybridBMetric HybridBMetric::direct(DelzantModel model, ExprMatrix coefficients) {
  HybridBMetric m(std::move(model));
  ExprMatrix g = metric_to_affine(m.model_.geometry(), coefficients);
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      // Symmetry check by evaluation at the interior sample.
      const auto p = interior_point(m.model_);
      double a = 0, b = 0;
      try {
        a = expr::evaluate(g[i][j], p);
        b = expr::evaluate(g[j][i], p);
      } catch (const expr::SingularEvaluation&) {
        continue;
      }
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
        throw DomainError("metric matrix is not symmetric (entries " + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  m.build(g);
  return m;
}

void HybridBMetric::build(const ExprMatrix& g) {
  const std::size_t n = g.size();
  g_ = g;
  det_ = symbolic_determinant(g_);
  ginv_ = symbolic_inverse(g_);
  dg_.assign(n, zeros(n));
  dginv_.assign(n, zeros(n));
  d2ginv_.assign(n, std::vector<ExprMatrix>(n, zeros(n)));
  for (std::size_t l = 0; l < n; ++l) {
    const int vl = static_cast<int>(l);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        dg_[l][i][j] = dg_[l][j][i] = expr::differentiate(g_[i][j], vl);
        dginv_[l][i][j] = dginv_[l][j][i] = expr::differentiate(ginv_[i][j], vl);
      }
  }
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t m = l; m < n; ++m)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
          const Expr d = expr::differentiate(dginv_[l][i][j], static_cast<int>(m));
          d2ginv_[l][m][i][j] = d2ginv_[l][m][j][i] = d2ginv_[m][l][i][j] = d2ginv_[m][l][j][i] = d;
        }
}

Eigen::MatrixXd HybridBMetric::evaluate(std::span<const double> p) const {
  expr::Evaluator ev(p);
  return eval_matrix(ev, g_);
}

double guillemin_potential(const DelzantModel& model, const ChartPoint& x) {
  const auto p = affine_coords(model.geometry(), x);
  if (model.max_functional(p) > tol_active) throw DomainError("point " + point_string(x.coords) + " lies outside the model");
  try {
    return expr::evaluate(guillemin_expr(model), p);
  } catch (const expr::SingularEvaluation&) {
    throw DomainError("guillemin potential is singular on the boundary at " + point_string(x.coords));
  }
}

MetricJet metric_jet(const HybridBMetric& metric, const ChartPoint& x) {
  const auto p = affine_coords(metric.model().geometry(), x);
  if (!(metric.model().max_functional(p) < 0.0))
    throw DomainError("metric jet requested at non-interior point " + point_string(x.coords));
  const std::size_t n = metric.dim();
  expr::Evaluator ev(p);
  MetricJet j;
  j.point = p;
  j.g = eval_matrix(ev, metric.g());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j.g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << "metric is not positive definite at " << point_string(x.coords) << " (smallest eigenvalue " << lo << ")";
    throw DomainError(os.str());
  }
  j.g_inv = eval_matrix(ev, metric.g_inv());
  for (std::size_t l = 0; l < n; ++l) {
    j.dg.push_back(eval_matrix(ev, metric.dg()[l]));
    j.dg_inv.push_back(eval_matrix(ev, metric.dg_inv()[l]));
    std::vector<Eigen::MatrixXd> row;
    for (std::size_t m = 0; m < n; ++m) row.push_back(eval_matrix(ev, metric.d2g_inv()[l][m]));
    j.d2g_inv.push_back(std::move(row));
  }
  return j;
}

LimitEstimate richardson_limit(const std::function<double(double)>& f, double s0, int levels, double tol) {
  constexpr int max_order = 4;
  LimitEstimate out;
  std::vector<std::vector<double>> t(static_cast<std::size_t>(levels));
  for (int i = 0; i < levels; ++i) {
    const double s = s0 / std::ldexp(1.0, i);
    const double v = f(s);
    out.raw.push_back(v);
    auto& row = t[static_cast<std::size_t>(i)];
    row.push_back(v);
    for (int k = 1; k <= std::min(i, max_order); ++k) {
      const double p = std::ldexp(1.0, k) - 1.0;
      const double prev = t[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)];
      row.push_back(row[static_cast<std::size_t>(k - 1)] + (row[static_cast<std::size_t>(k - 1)] - prev) / p);
    }
  }
  out.value = t.back().back();
  out.error = levels > 1 ? std::abs(out.value - t[t.size() - 2].back()) : INFINITY;
  out.converged = std::isfinite(out.value) && out.error <= tol * std::max(1.0, std::abs(out.value));
  return out;
}

ResidueReport facet_residue(const HybridBMetric& metric, std::size_t facet, double tol) {
  const auto& model = metric.model();
  const FacetFrame fr = facet_frame(model, facet);
  const double s0 = 0.05 * diameter_proxy(model);
  ResidueReport rep;
  rep.facet = facet;
  rep.anchor = fr.anchor;
  rep.inward = fr.inward;
  auto along = [&](const std::vector<double>& w) {
    return richardson_limit(
        [&](double s) { return s * quad(metric.evaluate(shifted(fr.anchor, fr.inward, s)), fr.inward, w); }, s0, 8,
        tol);
  };
  const LimitEstimate main = along(fr.inward);
  rep.coefficient_dt = main.value;
  rep.coefficient_dl = -main.value;
  rep.error = main.error;
  rep.converged = main.converged;
  for (const auto& w : fr.tangents) {
    const LimitEstimate e = along(w);
    rep.tangential.push_back(e.value);
    rep.converged = rep.converged && e.converged;
  }
  return rep;
}

HessianReport verify_hessian(const HybridBMetric& metric, const std::vector<ChartPoint>& grid, double tol) {
  HessianReport rep;
  const std::size_t n = metric.dim();
  for (const auto& x : grid) {
    const auto p = affine_coords(metric.model().geometry(), x);
    expr::Evaluator ev(p);
    ++rep.points;
    bool bad_here = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = j + 1; l < n; ++l) {
          const double a = ev(metric.dg()[j][i][l]);
          const double b = ev(metric.dg()[l][i][j]);
          const double defect = a - b;
          rep.max_defect = std::max(rep.max_defect, std::abs(defect));
          if (std::abs(defect) > tol * std::max({1.0, std::abs(a), std::abs(b)}) && !bad_here) {
            bad_here = true;
            HessianViolation v{x.coords, i, j, l, defect};
            if (!rep.violation) rep.violation = v;
            if (rep.defects.size() < 64) rep.defects.push_back(v);
          }
        }
  }
  rep.pass = !rep.violation.has_value();
  return rep;
}

NondegeneracyReport verify_nondegeneracy(const HybridBMetric& metric, double tol) {
  const auto& model = metric.model();
  const double s0 = 0.05 * diameter_proxy(model);
  NondegeneracyReport rep;
  auto sample = [&](const std::vector<double>& base, const std::vector<double>& dir) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < model.functionals().size(); ++i)
      if (std::abs(model.functionals()[i](base)) <= tol_active) active.push_back(i);
    const LimitEstimate e = richardson_limit(
        [&](double s) {
          const auto p = shifted(base, dir, s);
          double w = metric.evaluate(p).determinant();
          for (std::size_t i : active) w *= -model.functionals()[i](p);
          return w;
        },
        s0, 8, 1e-6);
    NondegeneracySample smp{base, static_cast<int>(active.size()), e.value, e.converged};
    rep.samples.push_back(smp);
    if ((!(e.value > tol) || !e.converged) && !rep.violation) rep.violation = smp;
  };
  for (std::size_t f = 0; f < model.functionals().size(); ++f) {
    const auto fr = facet_frame(model, f);
    sample(fr.anchor, fr.inward);
  }
  if (model.shape() == ShapeKind::HalfSpace) {
    const auto inside = interior_point(model);
    for (const auto& v : vertices(model)) {
      int act = 0;
      for (const auto& f : model.functionals()) act += std::abs(f(v)) <= tol_active;
      if (act < 2) continue;
      std::vector<double> dir(v.size());
      double len = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        dir[i] = inside[i] - v[i];
        len += dir[i] * dir[i];
      }
      len = std::sqrt(len);
      for (auto& c : dir) c /= len;
      sample(v, dir);
    }
  }
  rep.pass = !rep.violation.has_value();
  return rep;
}

LocalPotentialFit fit_local_potential(const HybridBMetric& metric, std::size_t facet) {
  if (!metric.has_potential()) throw DomainError("local potential fit needs a metric given by a potential");
  const FacetFrame fr = facet_frame(metric.model(), facet);
  const double d = diameter_proxy(metric.model());
  constexpr int samples = 40;
  Eigen::MatrixXd a(samples, 5);
  Eigen::VectorXd y(samples);
  for (int k = 0; k < samples; ++k) {
    // Geometric spacing from 1e-6 d to 1e-2 d.
    const double s = d * std::pow(10.0, -6.0 + 4.0 * k / (samples - 1));
    a(k, 0) = s * std::log(s);
    a(k, 1) = 1.0;
    a(k, 2) = s;
    a(k, 3) = s * s;
    a(k, 4) = s * s * s;
    y(k) = expr::evaluate(metric.potential(), shifted(fr.anchor, fr.inward, s));
  }
  const Eigen::VectorXd scale = a.colwise().norm().transpose();
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
  const Eigen::VectorXd cs = as.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd coef = cs.cwiseQuotient(scale);
  return {facet, coef(0), (a * coef - y).cwiseAbs().maxCoeff()};
}

}  // namespace toric
