#include "toric/delzant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace toric {

using expr::Expr;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::MatrixXd normal_matrix(const std::vector<AffineFunctional>& fs, std::size_t n) {
  Eigen::MatrixXd u(static_cast<Eigen::Index>(fs.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = 0; j < n; ++j)
      u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(fs[i].normal[j]);
  return u;
}

double norm(const std::vector<long>& u) {
  double s = 0;
  for (long v : u) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

// Calls f(subset) for every k-subset of {0..d-1} in lexicographic order.
template <class F>
void for_each_subset(std::size_t d, std::size_t k, F&& f) {
  if (k > d) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    f(static_cast<const std::vector<std::size_t>&>(idx));
    if (k == 0) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == d - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Extreme rays of the recession cone {v : U v <= 0}.
std::vector<Eigen::VectorXd> recession_rays(const DelzantModel& m) {
  const auto& fs = m.functionals();
  const std::size_t n = m.dim();
  const Eigen::MatrixXd u = normal_matrix(fs, n);
  std::vector<Eigen::VectorXd> rays;
  auto try_dir = [&](const Eigen::VectorXd& v) {
    if ((u * v).maxCoeff() <= 1e-12) {
      for (const auto& r : rays)
        if ((r - v).norm() < 1e-9) return;
      rays.push_back(v);
    }
  };
  if (n == 1) {
    try_dir(Eigen::VectorXd::Constant(1, 1.0));
    try_dir(Eigen::VectorXd::Constant(1, -1.0));
    return rays;
  }
  for_each_subset(fs.size(), n - 1, [&](const std::vector<std::size_t>& s) {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < s.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = u.row(static_cast<Eigen::Index>(s[r]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() != static_cast<Eigen::Index>(n - 1)) return;
    Eigen::VectorXd v = lu.kernel().col(0).normalized();
    try_dir(v);
    try_dir(-v);
  });
  return rays;
}

std::vector<double> centroid(const std::vector<std::vector<double>>& pts) {
  std::vector<double> c(pts.front().size(), 0.0);
  for (const auto& p : pts)
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += p[i];
  for (auto& v : c) v /= static_cast<double>(pts.size());
  return c;
}

std::string model_string(const DelzantModel& m, const AffineFunctional& f) {
  Expr e = f.as_expr();
  if (m.geometry().kind() != GeometryKind::Euclidean) {
    auto sub = m.geometry().affine_in_model();
    e = expr::substitute(e, sub);
  }
  return expr::to_string(e, m.geometry().variable_names());
}

std::vector<std::size_t> active_set(const DelzantModel& m, std::span<const double> p) {
  std::vector<std::size_t> act;
  for (std::size_t i = 0; i < m.functionals().size(); ++i)
    if (std::abs(m.functionals()[i](p)) <= tol_active) act.push_back(i);
  return act;
}

CornerCertificate certify(const DelzantModel& m, std::vector<double> point) {
  CornerCertificate c;
  c.point = std::move(point);
  c.active = active_set(m, c.point);
  for (std::size_t i : c.active) c.covectors.push_back(m.functionals()[i].normal);
  if (c.covectors.size() <= m.dim()) {
    c.extension = lattice::extends_to_lattice_basis(c.covectors);
  } else {
    // More facets than the dimension meet here: never a lattice basis.
    auto s = lattice::snf(lattice::IntMatrix::from_rows(c.covectors, m.dim()));
    c.extension.extends = false;
    c.extension.invariant_factors = s.diag;
    c.extension.rank = s.rank();
  }
  return c;
}

}  // namespace

DelzantModel DelzantModel::half_space(BaseGeometry geom, std::vector<AffineFunctional> functionals,
                                      std::optional<std::vector<std::vector<double>>> verts) {
  if (geom.kind() != GeometryKind::Euclidean)
    throw DomainError("half-space models are only supported on euclidean space; use a band on cylinders");
  for (const auto& f : functionals)
    if (f.normal.size() != geom.dim())
      throw DomainError("functional normal has dimension " + std::to_string(f.normal.size()) +
                        ", expected " + std::to_string(geom.dim()));
  if (verts)
    for (const auto& v : *verts)
      if (v.size() != geom.dim()) throw DomainError("vertex has wrong dimension");
  DelzantModel m(geom, ShapeKind::HalfSpace);
  m.functionals_ = std::move(functionals);
  m.vertices_ = std::move(verts);
  return m;
}

DelzantModel DelzantModel::cylinder_band(BaseGeometry geom, double a, double b) {
  if (geom.kind() != GeometryKind::StandardCylinder && geom.kind() != GeometryKind::ExoticCylinder)
    throw DomainError("cylinder band needs cylinder-standard or cylinder-exotic geometry");
  if (!(a < b)) throw DomainError("cylinder band requires a < b");
  if (geom.kind() == GeometryKind::ExoticCylinder && !(a > -2.0))
    throw DomainError("cylinder band on the exotic cylinder requires a > -2");
  DelzantModel m(geom, ShapeKind::CylinderBand);
  m.a_ = a;
  m.b_ = b;
  m.functionals_ = {{{0, -1}, a}, {{0, 1}, -b}};  // a - h, h - b
  return m;
}

DelzantModel DelzantModel::parabola_band() {
  DelzantModel m(BaseGeometry::parabola_cylinder(), ShapeKind::ParabolaBand);
  m.functionals_ = {{{0, 1}, 0.125}};  // eta + 1/8 = h - x^2/2 + 1/8
  return m;
}

double DelzantModel::max_functional(std::span<const double> p) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& f : functionals_) m = std::max(m, f(p));
  return m;
}

bool DelzantModel::contains(const ChartPoint& p, double tol) const {
  return max_functional(affine_coords(geometry_, p)) <= tol;
}

std::vector<std::vector<double>> vertices(const DelzantModel& m) {
  if (m.shape() != ShapeKind::HalfSpace) throw DomainError("vertices are defined for half-space models only");
  const std::size_t n = m.dim();
  const auto& fs = m.functionals();
  const Eigen::MatrixXd u = normal_matrix(fs, n);
  if (fs.empty() || Eigen::FullPivLU<Eigen::MatrixXd>(u).rank() < static_cast<Eigen::Index>(n))
    throw DomainError("vertex enumeration failed: the facet normals do not span, so the model has no corners");

  std::vector<std::vector<double>> out;
  if (m.supplied_vertices()) {
    for (const auto& v : *m.supplied_vertices()) {
      if (m.max_functional(v) > tol_active) throw DomainError("supplied vertex lies outside the model");
      if (active_set(m, v).size() < n) throw DomainError("supplied vertex is not a corner of the model");
      out.push_back(v);
    }
  } else {
    for_each_subset(fs.size(), n, [&](const std::vector<std::size_t>& s) {
      Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
      for (std::size_t r = 0; r < n; ++r) {
        a.row(static_cast<Eigen::Index>(r)) = u.row(static_cast<Eigen::Index>(s[r]));
        rhs(static_cast<Eigen::Index>(r)) = -fs[s[r]].offset;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < static_cast<Eigen::Index>(n)) return;
      std::vector<double> p = to_std(lu.solve(rhs));
      for (auto& c : p)
        if (std::abs(c) < 1e-15) c = 0.0;
      if (m.max_functional(p) > tol_active) return;
      for (const auto& q : out) {
        double d = 0;
        for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(p[i] - q[i]));
        if (d < tol_active) return;
      }
      out.push_back(std::move(p));
    });
  }
  if (out.empty()) throw DomainError("vertex enumeration failed: no feasible corner (empty model?)");
  std::sort(out.begin(), out.end());
  return out;
}

bool is_bounded(const DelzantModel& m) {
  if (m.shape() != ShapeKind::HalfSpace) return false;
  return recession_rays(m).empty();
}

double diameter_proxy(const DelzantModel& m) {
  switch (m.shape()) {
    case ShapeKind::CylinderBand:
      return m.band_upper() - m.band_lower();
    case ShapeKind::ParabolaBand:
      return 1.0;
    case ShapeKind::HalfSpace: {
      const auto vs = vertices(m);
      double d = 0;
      for (const auto& p : vs)
        for (const auto& q : vs) {
          double s = 0;
          for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
          d = std::max(d, std::sqrt(s));
        }
      if (!is_bounded(m)) d = std::max(d, 1.0);
      return d;
    }
  }
  return 1.0;
}

std::vector<double> interior_point(const DelzantModel& m) {
  switch (m.shape()) {
    case ShapeKind::CylinderBand:
      return affine_coords(m.geometry(), {{0.5, 0.5 * (m.band_lower() + m.band_upper())}, false});
    case ShapeKind::ParabolaBand:
      return affine_coords(m.geometry(), {{0.0, -1.0}, false});
    case ShapeKind::HalfSpace: {
      std::vector<double> c = centroid(vertices(m));
      const auto rays = recession_rays(m);
      if (!rays.empty()) {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.dim()));
        for (const auto& r : rays) dir += r;
        dir.normalize();
        const double d = diameter_proxy(m);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += d * dir(static_cast<Eigen::Index>(i));
      }
      return c;
    }
  }
  return {};
}

std::vector<FacetInfo> facet_functions(const DelzantModel& m) {
  std::vector<FacetInfo> out;
  const auto& fs = m.functionals();
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (!fs[i].is_primitive()) {
      std::ostringstream os;
      os << "functional " << i << " has non-primitive normal (";
      for (std::size_t k = 0; k < fs[i].normal.size(); ++k) os << (k ? "," : "") << fs[i].normal[k];
      os << ")";
      throw DomainError(os.str());
    }

  if (m.shape() == ShapeKind::HalfSpace) {
    const auto vs = vertices(m);
    const auto inside = interior_point(m);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (fs[i](inside) > -tol_active)
        throw DomainError("functional " + std::to_string(i) + " is not negative at the interior sample");
      const bool touches = std::any_of(vs.begin(), vs.end(),
                                       [&](const auto& v) { return std::abs(fs[i](v)) <= tol_active; });
      if (!touches) throw DomainError("functional " + std::to_string(i) + " does not cut out a facet");
    }
  }
  for (std::size_t i = 0; i < fs.size(); ++i) out.push_back({i, fs[i], model_string(m, fs[i])});
  return out;
}

int depth(const DelzantModel& m, const ChartPoint& x) {
  const auto p = affine_coords(m.geometry(), x);
  if (m.max_functional(p) > tol_active) throw DomainError("point lies outside the model");
  return static_cast<int>(active_set(m, p).size());
}

DelzantReport verify_delzant(const DelzantModel& m) {
  facet_functions(m);
  DelzantReport rep;
  std::vector<std::vector<double>> corners;
  if (m.shape() == ShapeKind::HalfSpace) {
    corners = vertices(m);
  } else {
    for (std::size_t i = 0; i < m.functionals().size(); ++i) corners.push_back(facet_frame(m, i).anchor);
  }
  for (auto& p : corners) {
    CornerCertificate c = certify(m, p);
    if (!c.extension.extends && !rep.violation) {
      rep.pass = false;
      rep.violation = c;
    }
    rep.certificates.push_back(std::move(c));
  }
  return rep;
}

FiniteTypeReport verify_finite_type(const DelzantModel& m, long range) {
  FiniteTypeReport rep;
  switch (m.shape()) {
    case ShapeKind::HalfSpace:
      rep.count = m.functionals().size();
      rep.reason = "half-space model on simply connected base";
      break;
    case ShapeKind::CylinderBand: {
      // Each lifted defining function is fixed by the deck generator.
      const auto& geom = m.geometry();
      for (const auto& f : m.functionals())
        for (double x : {0.1, 0.4, 0.85})
          for (double h : {m.band_lower(), 0.5 * (m.band_lower() + m.band_upper())}) {
            ChartPoint p{{x, h}, false};
            const double l0 = f(affine_coords(geom, p));
            const double l1 = f(affine_coords(geom, deck_translate(geom, p, 1)));
            if (std::abs(l0 - l1) > 1e-12) {
              rep.finite = false;
              rep.reason = "defining function not deck invariant";
              return rep;
            }
          }
      rep.count = 2;
      rep.reason = "both defining functions are deck invariant";
      break;
    }
    case ShapeKind::ParabolaBand:
      rep.finite = false;
      rep.reason = "the deck orbit of h - x^2/2 + 1/8 under x -> x+1 is infinite";
      for (long n = -range; n <= range; ++n) {
        DefiningFunctionWitness w;
        w.n = n;
        // eta + xi^2/2 - (xi+n)^2/2 + 1/8 = eta - n xi - n^2/2 + 1/8
        w.functional = {{-n, 1}, 0.125 - 0.5 * static_cast<double>(n * n)};
        std::ostringstream os;
        if (n == 0) os << "h - 1/2*x^2 + 1/8";
        else os << "h - 1/2*(x " << (n < 0 ? "- " : "+ ") << std::labs(n) << ")^2 + 1/8";
        w.model_expression = os.str();
        rep.witnesses.push_back(std::move(w));
      }
      break;
  }
  return rep;
}

ReductionData reduction_data(const DelzantModel& m) {
  if (m.shape() != ShapeKind::HalfSpace)
    throw DomainError("reduction data needs a finite-type half-space model");
  ReductionData out;
  out.freeness = verify_delzant(m);
  const auto& fs = m.functionals();
  out.normals = lattice::IntMatrix(m.dim(), fs.size());
  for (std::size_t a = 0; a < fs.size(); ++a)
    for (std::size_t i = 0; i < m.dim(); ++i) out.normals(i, a) = fs[a].normal[i];
  out.kernel_basis = lattice::kernel_lattice(out.normals);
  return out;
}

std::vector<ChartPoint> interior_grid(const DelzantModel& m, std::size_t per_axis, double margin) {
  if (per_axis < 2) throw DomainError("grid needs at least 2 points per axis");
  std::vector<ChartPoint> out;
  const std::size_t n = m.dim();
  auto lin = [&](double lo, double hi, std::size_t k) {
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(per_axis - 1);
  };

  if (m.shape() == ShapeKind::CylinderBand) {
    const double lo = m.band_lower() + margin, hi = m.band_upper() - margin;
    for (std::size_t i = 0; i < per_axis; ++i)
      for (std::size_t j = 0; j < per_axis; ++j)
        out.push_back({{static_cast<double>(i) / static_cast<double>(per_axis), lin(lo, hi, j)}, false});
    return out;
  }
  if (m.shape() == ShapeKind::ParabolaBand) throw DomainError("no sampling grid for the infinite-type band");

  const auto vs = vertices(m);
  std::vector<double> lo(n, std::numeric_limits<double>::infinity()), hi(n, -lo[0]);
  for (const auto& v : vs)
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  if (!is_bounded(m)) {
    const double d = diameter_proxy(m);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] -= d;
      hi[i] += d;
    }
  }
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = lin(lo[i] + margin, hi[i] - margin, idx[i]);
    bool ok = true;
    for (const auto& f : m.functionals())
      if (-f(p) / norm(f.normal) < margin * (1 - 1e-12)) ok = false;
    if (ok) out.push_back({p, false});
    std::size_t k = 0;
    while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == n) break;
  }
  return out;
}

FacetFrame facet_frame(const DelzantModel& m, std::size_t facet) {
  const auto& fs = m.functionals();
  if (facet >= fs.size()) throw DomainError("facet index " + std::to_string(facet) + " out of range");
  const auto& f = fs[facet];
  const std::size_t n = m.dim();
  FacetFrame fr;

  double u2 = 0;
  for (long v : f.normal) u2 += static_cast<double>(v * v);
  fr.inward.resize(n);
  for (std::size_t i = 0; i < n; ++i) fr.inward[i] = -static_cast<double>(f.normal[i]) / u2;

  Eigen::MatrixXd ut(1, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) ut(0, static_cast<Eigen::Index>(i)) = static_cast<double>(f.normal[i]);
  if (n > 1) {
    Eigen::MatrixXd ker = Eigen::FullPivLU<Eigen::MatrixXd>(ut).kernel();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ker);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ker.rows(), ker.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) fr.tangents.push_back(to_std(q.col(c)));
  }

  switch (m.shape()) {
    case ShapeKind::CylinderBand:
      fr.anchor = affine_coords(m.geometry(), {{0.5, facet == 0 ? m.band_lower() : m.band_upper()}, false});
      break;
    case ShapeKind::ParabolaBand:
      fr.anchor = affine_coords(m.geometry(), {{0.0, -0.125}, false});
      break;
    case ShapeKind::HalfSpace: {
      const auto vs = vertices(m);
      std::vector<std::vector<double>> on;
      for (const auto& v : vs)
        if (std::abs(f(v)) <= tol_active) on.push_back(v);
      if (on.size() >= n) {
        fr.anchor = centroid(on);
      } else {
        auto p = interior_point(m);
        const double l = f(p);
        for (std::size_t i = 0; i < n; ++i) p[i] -= l * static_cast<double>(f.normal[i]) / u2;
        fr.anchor = p;
      }
      for (std::size_t i = 0; i < fs.size(); ++i)
        if (i != facet && fs[i](fr.anchor) > -tol_active)
          throw DomainError("could not place an anchor in the relative interior of facet " +
                            std::to_string(facet));
      break;
    }
  }
  return fr;
}

}  // namespace toric
