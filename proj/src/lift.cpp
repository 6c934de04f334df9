#include "toric/lift.hpp"

#include "toric/curvature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace toric {

LiftFamily parse_lift_family(const std::string& text) {
  if (text == "canonical") return LiftFamily::Canonical;
  if (text == "cylinder-standard") return LiftFamily::CylinderStandard;
  if (text == "cylinder-exotic") return LiftFamily::CylinderExotic;
  throw std::invalid_argument("unknown lift family '" + text + "' (expected canonical, cylinder-standard or cylinder-exotic)");
}

std::string to_string(LiftFamily f) {
  switch (f) {
    case LiftFamily::Canonical: return "canonical";
    case LiftFamily::CylinderStandard: return "cylinder-standard";
    case LiftFamily::CylinderExotic: return "cylinder-exotic";
  }
  return "?";
}

TotalMetric::TotalMetric(HybridBMetric base, ConnectionParams params) : base_(std::move(base)), params_(params) {
  const auto kind = base_.model().geometry().kind();
  if (params_.family == LiftFamily::CylinderStandard && kind != GeometryKind::StandardCylinder)
    throw DomainError("cylinder-standard lift needs a base on the standard cylinder");
  if (params_.family == LiftFamily::CylinderExotic && kind != GeometryKind::ExoticCylinder)
    throw DomainError("cylinder-exotic lift needs a base on the exotic cylinder");
  if (params_.family != LiftFamily::Canonical && !(params_.c > 0.0))
    throw DomainError("flat torus parameter c must be positive");
  if (!std::isfinite(params_.a) || !std::isfinite(params_.b)) throw DomainError("connection parameters must be finite");
}

std::vector<std::string> TotalMetric::coframe() const {
  if (params_.family != LiftFamily::Canonical) return {"dh", "dx", "dphi", "dy"};
  const auto names = base_.model().geometry().affine_variable_names();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back("d" + names.name(static_cast<int>(i)));
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back("dtheta_" + names.name(static_cast<int>(i)));
  return out;
}

TotalMetric::Local TotalMetric::local(const ChartPoint& x) const {
  const auto& geom = base_.model().geometry();
  Local l;
  const ChartPoint model = x.affine ? from_affine_chart(geom, x) : x;
  const ChartImage img = to_affine_chart(geom, model);
  l.model = model.coords;
  l.affine = img.point.coords;
  l.k = img.jacobian.inverse();
  if (!(base_.model().max_functional(l.affine) < 0.0)) throw DomainError("lift evaluated at a non-interior base point");
  return l;
}

Eigen::MatrixXd TotalMetric::metric(const ChartPoint& x) const {
  const Local l = local(x);
  const Eigen::MatrixXd g = base_.evaluate(l.affine);
  const auto n = static_cast<Eigen::Index>(base_.dim());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  if (params_.family == LiftFamily::Canonical) {
    out.topLeftCorner(n, n) = g;
    const Eigen::MatrixXd gi = g.inverse();
    out.bottomRightCorner(n, n) = 0.5 * (gi + gi.transpose());
    return out;
  }
  // Model-coordinate metric, (x, h) order.
  const Eigen::MatrixXd kinv = l.k.inverse();
  const Eigen::MatrixXd gm = kinv.transpose() * g * kinv;
  const double w = params_.family == LiftFamily::CylinderExotic ? l.model[1] + 2.0 : 1.0;
  const double scale = std::max({1.0, std::abs(gm(0, 0)), std::abs(gm(1, 1))});
  if (std::abs(gm(0, 1)) > 1e-9 * scale)
    throw DomainError("cylinder lift needs a base metric w(h) c dx^2 + dh^2/tau without cross term");
  if (std::abs(gm(0, 0) - params_.c * w) > 1e-9 * scale)
    throw DomainError("cylinder lift: base coefficient of dx^2 is " + std::to_string(gm(0, 0)) + ", expected c*w = " +
                      std::to_string(params_.c * w));
  const double tau = 1.0 / gm(1, 1);
  const double a = params_.a, b = params_.b, c = params_.c;

  // Frame (dh, dx, theta, dy) first, then theta = dphi + x dy for the exotic family.
  Eigen::Matrix4d f = Eigen::Matrix4d::Zero();
  f(0, 0) = 1 / tau + b * b * tau;
  f(0, 2) = f(2, 0) = -b * tau;
  f(2, 2) = tau;
  f(1, 1) = w / c * (a * a + c * c);
  f(1, 3) = f(3, 1) = -w / c * a;
  f(3, 3) = w / c;
  Eigen::Matrix4d p = Eigen::Matrix4d::Identity();
  if (params_.family == LiftFamily::CylinderExotic) p(2, 3) = l.model[0];
  const Eigen::Matrix4d out4 = p.transpose() * f * p;
  return 0.5 * (out4 + out4.transpose());
}

Eigen::MatrixXd TotalMetric::symplectic(const ChartPoint& x) const {
  const Local l = local(x);
  const auto n = static_cast<Eigen::Index>(base_.dim());
  Eigen::MatrixXd om = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  if (params_.family == LiftFamily::Canonical) {
    om.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    om.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return om;
  }
  const bool exotic = params_.family == LiftFamily::CylinderExotic;
  const double w = exotic ? l.model[1] + 2.0 : 1.0;
  // w dx ^ dy + dh ^ dphi + (exotic) x dh ^ dy
  om(1, 3) = w;
  om(3, 1) = -w;
  om(0, 2) = 1;
  om(2, 0) = -1;
  if (exotic) {
    om(0, 3) = l.model[0];
    om(3, 0) = -l.model[0];
  }
  return om;
}

Eigen::VectorXd TotalMetric::embed(const ChartPoint& x, const std::vector<double>& base_affine,
                                   const std::vector<double>& fiber) const {
  const auto n = static_cast<Eigen::Index>(base_.dim());
  if (base_affine.size() != base_.dim() || fiber.size() != base_.dim()) throw DomainError("embed: dimension mismatch");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(base_affine.data(), n);
  Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(fiber.data(), n);
  Eigen::VectorXd out(2 * n);
  if (params_.family == LiftFamily::Canonical) {
    out << v, f;
    return out;
  }
  // Angles dual to the affine coordinates (xi, eta) are (y, phi).
  const Eigen::VectorXd m = local(x).k * v;
  out << m(1), m(0), f(1), f(0);
  return out;
}

double TotalMetric::scalar_curvature(const ChartPoint& x) const {
  return ScalarCurvature(base_)(x, CurvatureMethod::Abreu).value;
}

Eigen::MatrixXd assemble_total_metric(const TotalMetric& tm, const ChartPoint& x) { return tm.metric(x); }

Eigen::MatrixXd complex_structure(const TotalMetric& tm, const ChartPoint& x) {
  const Eigen::MatrixXd om = tm.symplectic(x);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(om);
  if (!lu.isInvertible()) throw DomainError("symplectic form is degenerate");
  return lu.solve(tm.metric(x));
}

CompatibilityReport check_compatibility(const TotalMetric& tm, const ChartPoint& x) {
  const Eigen::MatrixXd g = tm.metric(x), om = tm.symplectic(x), j = complex_structure(tm, x);
  const auto n = g.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  CompatibilityReport r;
  r.j_squared = (j * j + id).cwiseAbs().maxCoeff();
  r.compatibility = (g - om * j).cwiseAbs().maxCoeff();
  // omega_printed = -omega, omega_printed(Ju, v) = -(Ju)^T Omega v
  r.printed_form = (g + j.transpose() * om).cwiseAbs().maxCoeff();
  r.omega_invariance = (j.transpose() * om * j - om).cwiseAbs().maxCoeff();
  r.asymmetry = (g - g.transpose()).cwiseAbs().maxCoeff();
  r.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (g + g.transpose())).eigenvalues().minCoeff();
  return r;
}

SmoothnessReport check_boundary_smoothness(const TotalMetric& tm, std::size_t facet, double tol) {
  const auto& model = tm.base().model();
  if (facet >= model.functionals().size()) throw DomainError("no facet " + std::to_string(facet));
  const FacetFrame fr = facet_frame(model, facet);
  const auto& u = model.functionals()[facet].normal;
  std::vector<double> zero(tm.base().dim(), 0.0), gen;
  for (long ui : u) gen.push_back(static_cast<double>(ui));

  SmoothnessReport rep;
  rep.facet = facet;
  rep.anchor = fr.anchor;
  const auto ratio = [&](double t) {
    std::vector<double> p = fr.anchor;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += t * fr.inward[i];
    const ChartPoint x{p, true};
    const Eigen::MatrixXd g = tm.metric(x);
    const Eigen::VectorXd v = tm.embed(x, fr.inward, zero), w = tm.embed(x, zero, gen);
    const double grr = 4 * t * v.dot(g * v), gphi = w.dot(g * w) / t;
    return 4 * std::numbers::pi * std::numbers::pi * grr / gphi;
  };
  const LimitEstimate e = richardson_limit(ratio, 0.05 * diameter_proxy(model), 8, tol);
  rep.ratio = e.value;
  rep.error = e.error;
  rep.converged = e.converged;
  rep.raw = e.raw;
  return rep;
}

}  // namespace toric
