#include "toric/cli.hpp"

#include "toric/curvature.hpp"
#include "toric/extremal.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>
#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace toric::cli {

using nlohmann::json;

namespace {

std::string compose(const std::string& what, const std::string& field, std::size_t line) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!field.empty()) out += field + ": ";
  return out + what;
}

}  // namespace

InputError::InputError(const std::string& what, std::string field, std::size_t line)
    : std::runtime_error(compose(what, field, line)), field_(std::move(field)), line_(line) {}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// ---- problem files ----

namespace {

std::size_t line_of(const toml::node* n) { return n ? n->source().begin.line : 0; }

[[noreturn]] void bad(const std::string& field, const toml::node* n, const std::string& what) {
  throw InputError(what, field, line_of(n));
}

void reject_unknown(const toml::table& t, const std::string& prefix, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : t)
    if (!allowed.contains(std::string(k.str())))
      bad(prefix + "." + std::string(k.str()), &v, "unknown key");
}

double number(const toml::node& n, const std::string& field) {
  if (auto d = n.value<double>()) return *d;
  if (auto s = n.value<std::string>()) {
    try {
      return parse_pi_scalar(*s).to_double();
    } catch (const std::invalid_argument& e) {
      bad(field, &n, e.what());
    }
  }
  bad(field, &n, "expected a number");
}

std::optional<double> opt_number(const toml::table& t, const std::string& key, const std::string& prefix) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  return number(*n, prefix + "." + key);
}

std::string string_field(const toml::table& t, const std::string& key, const std::string& prefix,
                         std::optional<std::string> fallback = {}) {
  const toml::node* n = t.get(key);
  if (!n) {
    if (fallback) return *fallback;
    bad(prefix + "." + key, &t, "missing required field");
  }
  auto s = n->value<std::string>();
  if (!s) bad(prefix + "." + key, n, "expected a string");
  return *s;
}

const toml::array& array_field(const toml::node& n, const std::string& field) {
  const auto* a = n.as_array();
  if (!a) bad(field, &n, "expected an array");
  return *a;
}

std::vector<long> int_vector(const toml::node& n, const std::string& field) {
  std::vector<long> out;
  const auto& a = array_field(n, field);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto v = a[i].value_exact<int64_t>();
    if (!v) bad(field + "[" + std::to_string(i) + "]", &a[i], "expected an integer");
    out.push_back(static_cast<long>(*v));
  }
  return out;
}

std::vector<double> real_vector(const toml::node& n, const std::string& field) {
  std::vector<double> out;
  const auto& a = array_field(n, field);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(number(a[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

DelzantModel parse_model(const toml::table& root) {
  const toml::node* mn = root.get("model");
  if (!mn) bad("model", &root, "missing required table");
  const auto* mt = mn->as_table();
  if (!mt) bad("model", mn, "expected a table");
  reject_unknown(*mt, "model", {"geometry", "dim", "shape", "functionals", "vertices", "a", "b"});

  const std::string shape = string_field(*mt, "shape", "model", std::string("halfspace"));
  if (shape == "parabola-band") return DelzantModel::parabola_band();

  const std::string tag = string_field(*mt, "geometry", "model", std::string("euclidean"));
  std::optional<std::size_t> dim;
  if (const toml::node* d = mt->get("dim")) {
    auto v = d->value_exact<int64_t>();
    if (!v || *v < 1) bad("model.dim", d, "expected a positive integer");
    dim = static_cast<std::size_t>(*v);
  }

  if (shape == "band") {
    BaseGeometry geom = BaseGeometry::euclidean(1);
    try {
      geom = BaseGeometry::from_tag(tag, 2);
    } catch (const std::invalid_argument& e) {
      bad("model.geometry", mt->get("geometry"), e.what());
    }
    if (!geom.is_cylinder()) bad("model.geometry", mt->get("geometry"), "band shape needs a cylinder geometry");
    const auto a = opt_number(*mt, "a", "model"), b = opt_number(*mt, "b", "model");
    if (!a || !b) bad(!a ? "model.a" : "model.b", mt, "band needs both a and b");
    if (!(*a < *b)) bad("model.b", mt->get("b"), "band needs a < b");
    try {
      return DelzantModel::cylinder_band(geom, *a, *b);
    } catch (const DomainError& e) {
      bad("model", mn, e.what());
    }
  }
  if (shape != "halfspace") bad("model.shape", mt->get("shape"), "unknown shape '" + shape + "' (expected halfspace, band or parabola-band)");

  const toml::node* fn = mt->get("functionals");
  if (!fn) bad("model.functionals", mn, "missing required field");
  const auto& fa = array_field(*fn, "model.functionals");
  std::vector<AffineFunctional> fs;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const std::string field = "model.functionals[" + std::to_string(i) + "]";
    const auto* ft = fa[i].as_table();
    if (!ft) bad(field, &fa[i], "expected a table {normal, offset}");
    reject_unknown(*ft, field, {"normal", "offset"});
    const toml::node* nn = ft->get("normal");
    if (!nn) bad(field + ".normal", &fa[i], "missing required field");
    AffineFunctional f;
    f.normal = int_vector(*nn, field + ".normal");
    f.offset = opt_number(*ft, "offset", field).value_or(0.0);
    fs.push_back(std::move(f));
  }
  if (fs.empty()) bad("model.functionals", fn, "needs at least one functional");
  const std::size_t n = dim.value_or(fs.front().normal.size());
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs[i].normal.size() != n)
      bad("model.functionals[" + std::to_string(i) + "].normal", fa[i].as_table()->get("normal"),
          "expected " + std::to_string(n) + " components");

  std::optional<std::vector<std::vector<double>>> verts;
  if (const toml::node* vn = mt->get("vertices")) {
    const auto& va = array_field(*vn, "model.vertices");
    verts.emplace();
    for (std::size_t i = 0; i < va.size(); ++i) {
      verts->push_back(real_vector(va[i], "model.vertices[" + std::to_string(i) + "]"));
      if (verts->back().size() != n) bad("model.vertices[" + std::to_string(i) + "]", &va[i], "wrong dimension");
    }
  }
  BaseGeometry geom = BaseGeometry::euclidean(1);
  try {
    geom = BaseGeometry::from_tag(tag, n);
  } catch (const std::invalid_argument& e) {
    bad("model.geometry", mt->get("geometry"), e.what());
  }
  try {
    return DelzantModel::half_space(geom, std::move(fs), std::move(verts));
  } catch (const DomainError& e) {
    bad("model", mn, e.what());
  } catch (const std::invalid_argument& e) {
    bad("model", mn, e.what());
  }
}

expr::Expr expression(const toml::node& n, const std::string& field, const expr::VariableNames& names) {
  if (auto d = n.value_exact<double>()) return expr::Expr(*d);
  if (auto i = n.value_exact<int64_t>()) return expr::Expr(static_cast<double>(*i));
  auto s = n.value<std::string>();
  if (!s) bad(field, &n, "expected an expression string or a number");
  try {
    return expr::parse(*s, names);
  } catch (const expr::ParseError& e) {
    bad(field, &n, std::string(e.what()) + " at column " + std::to_string(e.position() + 1));
  }
}

ExprMatrix expr_matrix(const toml::node& n, const std::string& field, const expr::VariableNames& names, std::size_t dim) {
  const auto& rows = array_field(n, field);
  if (rows.size() != dim) bad(field, &n, "expected " + std::to_string(dim) + " rows");
  ExprMatrix out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string rf = field + "[" + std::to_string(i) + "]";
    const auto& row = array_field(rows[i], rf);
    if (row.size() != dim) bad(rf, &rows[i], "expected " + std::to_string(dim) + " entries");
    std::vector<expr::Expr> r;
    for (std::size_t j = 0; j < row.size(); ++j) r.push_back(expression(row[j], rf + "[" + std::to_string(j) + "]", names));
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<HybridBMetric> parse_metric(const toml::table& root, const DelzantModel& model) {
  const toml::node* mn = root.get("metric");
  if (!mn) return std::nullopt;
  const auto* mt = mn->as_table();
  if (!mt) bad("metric", mn, "expected a table");
  reject_unknown(*mt, "metric", {"guillemin", "correction", "background", "direct"});
  const auto names = model.geometry().variable_names();
  try {
    if (const toml::node* d = mt->get("direct")) {
      for (const char* k : {"guillemin", "correction", "background"})
        if (mt->get(k)) bad(std::string("metric.") + k, mt->get(k), "cannot be combined with metric.direct");
      return HybridBMetric::direct(model, expr_matrix(*d, "metric.direct", names, model.dim()));
    }
    bool guillemin = false;
    if (const toml::node* g = mt->get("guillemin")) {
      auto b = g->value<bool>();
      if (!b) bad("metric.guillemin", g, "expected a boolean");
      guillemin = *b;
    }
    expr::Expr correction;
    if (const toml::node* c = mt->get("correction")) correction = expression(*c, "metric.correction", names);
    std::optional<ExprMatrix> background;
    if (const toml::node* b = mt->get("background")) background = expr_matrix(*b, "metric.background", names, model.dim());
    if (!guillemin && !mt->get("correction") && !background) bad("metric", mn, "empty metric table");
    return HybridBMetric::from_potential(model, guillemin, correction, background);
  } catch (const DomainError& e) {
    bad("metric", mn, e.what());
  }
}

std::optional<ConnectionParams> parse_lift(const toml::table& root) {
  const toml::node* ln = root.get("lift");
  if (!ln) return std::nullopt;
  const auto* lt = ln->as_table();
  if (!lt) bad("lift", ln, "expected a table");
  reject_unknown(*lt, "lift", {"family", "a", "b", "c"});
  ConnectionParams p;
  try {
    p.family = parse_lift_family(string_field(*lt, "family", "lift", std::string("canonical")));
  } catch (const std::invalid_argument& e) {
    bad("lift.family", lt->get("family"), e.what());
  }
  p.a = opt_number(*lt, "a", "lift").value_or(0.0);
  p.b = opt_number(*lt, "b", "lift").value_or(0.0);
  p.c = opt_number(*lt, "c", "lift").value_or(1.0);
  if (!(p.c > 0.0)) bad("lift.c", lt->get("c"), "must be positive");
  return p;
}

}  // namespace

Problem parse_problem(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw InputError(std::string(e.description()), "", e.source().begin.line);
  }
  reject_unknown(root, "", {"model", "metric", "lift"});
  Problem p{parse_model(root), {}, {}, sha256_hex(text)};
  p.metric = parse_metric(root, p.model);
  p.lift = parse_lift(root);
  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path + "'", "input");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str(), path);
}

// ---- reports ----

namespace {

// Floats are rounded to 12 significant digits so reports are stable across
// platforms; non-finite values become null.
json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json mat(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(num(m(i, j)));
    a.push_back(r);
  }
  return a;
}

json integer(const lattice::Integer& z) {
  if (z.fits_slong_p()) return z.get_si();
  return z.get_str();
}

json exact(const PiScalar& s) { return {{"exact", s.to_string()}, {"value", num(s.to_double())}}; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Context {
  const RunConfig& cfg;
  std::optional<Problem> problem;
  json tolerances = json::object();
  std::string csv;

  const Problem& need_problem() const {
    if (!problem) throw InputError("this subcommand needs an input file", "input");
    return *problem;
  }
  const HybridBMetric& need_metric() const {
    const auto& p = need_problem();
    if (!p.metric) throw InputError("this subcommand needs a [metric] table", "metric");
    return *p.metric;
  }
  double margin() {
    const double m = cfg.margin.value_or(1e-3 * diameter_proxy(need_problem().model));
    tolerances["margin"] = num(m);
    return m;
  }
  std::size_t grid() {
    const int g = cfg.grid.value_or(21);
    tolerances["grid"] = g;
    return static_cast<std::size_t>(g);
  }
  double tol(const char* name, double fallback) {
    const double t = cfg.tol.value_or(fallback);
    tolerances[name] = num(t);
    return t;
  }
  PiScalar kappa() {
    const PiScalar k = parse_pi_scalar(cfg.kappa.value_or("4pi"));
    if (!(k.to_double() > 0.0)) throw InputError("kappa must be positive", "--kappa");
    tolerances["kappa"] = k.to_string();
    return k;
  }
  std::vector<ChartPoint> sample_grid() { return interior_grid(need_problem().model, grid(), margin()); }
};

json model_point(const DelzantModel& model, const std::vector<double>& affine) {
  return vec(from_affine_chart(model.geometry(), {affine, true}).coords);
}

std::vector<std::string> coord_names(const DelzantModel& m) {
  const auto names = m.geometry().variable_names();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m.dim(); ++i) out.push_back(names.name(static_cast<int>(i)));
  return out;
}

std::string csv_header(const DelzantModel& m, const std::vector<std::string>& extra) {
  std::string h;
  for (const auto& c : coord_names(m)) h += (h.empty() ? "" : ",") + c;
  for (const auto& e : extra) h += "," + e;
  return h + "\n";
}

json certificate(const CornerCertificate& c) {
  json inv = json::array();
  for (const auto& z : c.extension.invariant_factors) inv.push_back(integer(z));
  return {{"point", vec(c.point)},       {"active", c.active},  {"covectors", c.covectors},
          {"invariants", inv},            {"extends", c.extension.extends}, {"rank", c.extension.rank}};
}

int cmd_check_delzant(Context& ctx, json& j) {
  const auto& model = ctx.need_problem().model;
  ctx.tolerances["tol_active"] = num(tol_active);
  json facets = json::array();
  try {
    for (const auto& f : facet_functions(model)) facets.push_back({{"index", f.index}, {"functional", f.description}});
  } catch (const DomainError& e) {
    j["violation"] = {{"reason", e.what()}};
    return 2;
  }
  j["facets"] = facets;
  if (model.shape() == ShapeKind::HalfSpace) j["vertices"] = vertices(model).size();
  const auto rep = verify_delzant(model);
  json corners = json::array();
  for (const auto& c : rep.certificates) corners.push_back(certificate(c));
  j["corners"] = corners;
  if (rep.violation) j["violation"] = certificate(*rep.violation);
  return rep.pass ? 0 : 2;
}

int cmd_finite_type(Context& ctx, json& j) {
  const auto rep = verify_finite_type(ctx.need_problem().model);
  j["finite"] = rep.finite;
  j["reason"] = rep.reason;
  if (rep.finite) j["count"] = rep.count;
  json w = json::array();
  for (const auto& x : rep.witnesses)
    w.push_back({{"n", x.n}, {"normal", x.functional.normal}, {"offset", num(x.functional.offset)}, {"expression", x.model_expression}});
  j["witnesses"] = w;
  return rep.finite ? 0 : 2;
}

int cmd_reduce(Context& ctx, json& j) {
  const auto r = reduction_data(ctx.need_problem().model);
  json normals = json::array();
  for (std::size_t i = 0; i < r.normals.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < r.normals.cols(); ++k) row.push_back(integer(r.normals(i, k)));
    normals.push_back(row);
  }
  json kernel = json::array();
  for (const auto& v : r.kernel_basis) {
    json row = json::array();
    for (const auto& z : v) row.push_back(integer(z));
    kernel.push_back(row);
  }
  j["normals"] = normals;
  j["kernel_basis"] = kernel;
  j["kernel_rank"] = r.kernel_basis.size();
  j["free"] = r.freeness.pass;
  if (r.freeness.violation) j["violation"] = certificate(*r.freeness.violation);
  return r.freeness.pass ? 0 : 2;
}

int cmd_potential(Context& ctx, json& j) {
  const auto& metric = ctx.need_metric();
  if (!metric.has_potential()) throw InputError("metric has no potential (direct metric)", "metric");
  const auto& model = metric.model();
  const auto grid = ctx.sample_grid();
  j["expression"] = expr::to_string(metric.potential(), model.geometry().affine_variable_names());
  j["guillemin"] = metric.includes_guillemin();
  std::string csv = csv_header(model, {"phi"});
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& x : grid) {
    const double v = expr::evaluate(metric.potential(), affine_coords(model.geometry(), x));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    for (double c : x.coords) csv += fmt(c) + ",";
    csv += fmt(v) + "\n";
  }
  j["points"] = grid.size();
  j["min"] = num(lo);
  j["max"] = num(hi);
  ctx.csv = csv;
  return 0;
}

int cmd_metric_eval(Context& ctx, json& j) {
  const auto& metric = ctx.need_metric();
  const auto& model = metric.model();
  const auto grid = ctx.sample_grid();
  const auto n = static_cast<Eigen::Index>(metric.dim());
  std::vector<std::string> cols;
  const auto an = model.geometry().affine_variable_names();
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b)
      cols.push_back("g_" + an.name(static_cast<int>(a)) + an.name(static_cast<int>(b)));
  cols.insert(cols.end(), {"det", "min_eigenvalue"});
  std::string csv = csv_header(model, cols);
  double min_eig = INFINITY;
  json bad_point;
  for (const auto& x : grid) {
    const auto p = affine_coords(model.geometry(), x);
    const Eigen::MatrixXd g = metric.evaluate(p);
    const double e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff();
    if (e < min_eig) min_eig = e;
    if (!(e > 0.0) && bad_point.is_null()) bad_point = {{"point", vec(x.coords)}, {"min_eigenvalue", num(e)}};
    for (double c : x.coords) csv += fmt(c) + ",";
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a; b < n; ++b) csv += fmt(g(a, b)) + ",";
    csv += fmt(g.determinant()) + "," + fmt(e) + "\n";
  }
  ctx.csv = csv;
  j["points"] = grid.size();
  j["min_eigenvalue"] = num(min_eig);
  j["positive_definite"] = bad_point.is_null();

  const double tol = ctx.tol("nondegeneracy", 1e-9);
  const auto nd = verify_nondegeneracy(metric, tol);
  json samples = json::array();
  for (const auto& s : nd.samples)
    samples.push_back({{"point", model_point(model, s.point)}, {"depth", s.depth}, {"limit", num(s.limit)}, {"converged", s.converged}});
  j["nondegeneracy"] = {{"pass", nd.pass}, {"samples", samples}};
  if (!bad_point.is_null()) j["violation"] = bad_point;
  else if (nd.violation)
    j["violation"] = {{"point", model_point(model, nd.violation->point)}, {"depth", nd.violation->depth}, {"limit", num(nd.violation->limit)}};
  return bad_point.is_null() && nd.pass ? 0 : 2;
}

PiScalar reciprocal(const PiScalar& k) {
  if (!k.is_monomial() || k.is_zero()) throw InputError("kappa must be a single term q*pi^p", "--kappa");
  const auto& [p, q] = *k.terms().begin();
  return {mpq_class(1) / q, -p};
}

int cmd_residues(Context& ctx, json& j) {
  const auto& metric = ctx.need_metric();
  const PiScalar expected = reciprocal(ctx.kappa());
  const double rel = ctx.tol("relative", 1e-4);
  ctx.tolerances["richardson"] = num(1e-7);
  const auto facets = facet_functions(metric.model());
  json out = json::array();
  bool pass = true;
  json first_bad;
  for (std::size_t f = 0; f < facets.size(); ++f) {
    const auto r = facet_residue(metric, f);
    const double err = std::abs(r.coefficient_dt - expected.to_double()) / expected.to_double();
    const bool ok = r.converged && err <= rel;
    json e = {{"facet", f},
              {"functional", facets[f].description},
              {"anchor", model_point(metric.model(), r.anchor)},
              {"coefficient_dt", num(r.coefficient_dt)},
              {"coefficient_dl", num(r.coefficient_dl)},
              {"tangential", vec(r.tangential)},
              {"relative_error", num(err)},
              {"extrapolation_error", num(r.error)},
              {"converged", r.converged},
              {"pass", ok}};
    if (metric.has_potential()) e["local_potential_coefficient"] = num(fit_local_potential(metric, f).coefficient);
    out.push_back(e);
    if (!ok && first_bad.is_null()) first_bad = e;
    pass = pass && ok;
  }
  j["expected"] = exact(expected);
  j["convention"] = residue_convention;
  j["method"] = "richardson limit of t*g(v,v) along the inward normal";
  j["facets"] = out;
  if (!pass) j["violation"] = first_bad;
  return pass ? 0 : 2;
}

int cmd_hessian(Context& ctx, json& j) {
  const auto& metric = ctx.need_metric();
  const auto grid = ctx.sample_grid();
  const auto r = verify_hessian(metric, grid, ctx.tol("hessian", 1e-8));
  auto viol = [](const HessianViolation& v) {
    return json{{"point", vec(v.point)}, {"i", v.i}, {"j", v.j}, {"l", v.l}, {"defect", num(v.defect)}};
  };
  j["points"] = r.points;
  j["max_defect"] = num(r.max_defect);
  j["defect_definition"] = "d_j g_il - d_l g_ij in affine coordinates";
  json d = json::array();
  for (const auto& v : r.defects) d.push_back(viol(v));
  j["defects"] = d;
  if (r.violation) j["violation"] = viol(*r.violation);
  return r.pass ? 0 : 2;
}

int cmd_curvature(Context& ctx, json& j) {
  const auto& metric = ctx.need_metric();
  const auto& model = metric.model();
  const auto grid = ctx.sample_grid();
  const double tol = ctx.tol("cross_formula", 1e-6);
  const ScalarCurvature s(metric);
  std::vector<std::vector<double>> pts;
  std::vector<double> ab, dv;
  double worst = 0.0;
  for (const auto& x : grid) {
    const auto a = s(x, CurvatureMethod::Abreu), d = s(x, CurvatureMethod::Divergence);
    pts.push_back(a.point);
    ab.push_back(a.value);
    dv.push_back(d.value);
    worst = std::max(worst, std::abs(a.value - d.value) / (1 + std::abs(a.value)));
  }
  json fitj;
  std::vector<double> resid(grid.size(), NAN);
  if (grid.size() >= metric.dim() + 2) {
    const auto f = fit_affine(pts, ab);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double pred = f.c0;
      for (std::size_t k = 0; k < f.c.size(); ++k) pred += f.c[k] * pts[i][k];
      resid[i] = ab[i] - pred;
    }
    fitj = {{"c0", num(f.c0)}, {"c", vec(f.c)}, {"residual_max", num(f.residual_max)}, {"residual_rms", num(f.residual_rms)},
            {"coordinates", "affine"}};
  }
  std::string csv = csv_header(model, {"S_abreu", "S_divergence", "fit_residual"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (double c : grid[i].coords) csv += fmt(c) + ",";
    csv += fmt(ab[i]) + "," + fmt(dv[i]) + "," + fmt(resid[i]) + "\n";
  }
  ctx.csv = csv;
  j["points"] = grid.size();
  j["methods"] = {to_string(CurvatureMethod::Abreu), to_string(CurvatureMethod::Divergence)};
  j["max_relative_discrepancy"] = num(worst);
  j["fit"] = fitj;
  if (worst > tol) j["violation"] = {{"reason", "abreu and divergence formulas disagree"}, {"max_relative_discrepancy", num(worst)}};
  return worst <= tol ? 0 : 2;
}

int cmd_extremal_check(Context& ctx, json& j) {
  const auto& metric = ctx.need_metric();
  const auto grid = ctx.sample_grid();
  const double tol = ctx.tol("residual_max", 1e-9);
  const auto f = extremality_fit(metric, grid);
  j["method"] = to_string(CurvatureMethod::Abreu);
  j["points"] = grid.size();
  j["fit"] = {{"c0", num(f.c0)}, {"c", vec(f.c)}, {"residual_max", num(f.residual_max)}, {"residual_rms", num(f.residual_rms)},
              {"coordinates", "affine"}};
  j["extremal"] = f.residual_max < tol;
  if (!(f.residual_max < tol)) j["violation"] = {{"reason", "scalar curvature is not affine"}, {"residual_max", num(f.residual_max)}};
  return f.residual_max < tol ? 0 : 2;
}

int cmd_extremal_solve(Context& ctx, json& j) {
  Weight w;
  try {
    w = parse_weight(ctx.cfg.weight);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what(), "--weight");
  }
  const PiScalar kappa = ctx.kappa();
  const auto s = solve_bvp({w, kappa});
  json poly = json::array(), poles = json::array(), shifted = json::object();
  for (const auto& c : s.profile.poly_coeffs()) poly.push_back(c.to_string());
  for (const auto& c : s.profile.pole_coeffs()) poles.push_back(c.to_string());
  for (const auto& [k, c] : s.profile.tau.coeffs()) shifted[std::to_string(k)] = c.to_string();
  j["weight"] = to_string(w);
  j["kappa"] = exact(kappa);
  j["boundary_conditions"] = "tau(-1) = tau(1) = 0, tau'(1) = -kappa, tau'(-1) = kappa";
  j["tau_coeffs"] = {{"h_powers", poly}, {"pole_powers", poles}, {"shifted_powers", shifted}, {"expression", s.profile.to_string()}};
  j["S_coeffs"] = {{"c0", s.c0.to_string()}, {"c1", s.c1.to_string()}, {"c0_value", num(s.c0.to_double())}, {"c1_value", num(s.c1.to_double())}};
  j["residue"] = exact(reciprocal(kappa));
  j["positivity"] = {{"positive", s.positive}, {"min_interior", num(s.min_interior)}, {"samples", 1999}};
  const auto& c = s.certificate;
  j["residual_certificate"] = {{"tau_at_plus1", c.tau_at_plus1.to_string()},     {"tau_at_minus1", c.tau_at_minus1.to_string()},
                               {"slope_at_plus1", c.slope_at_plus1.to_string()}, {"slope_at_minus1", c.slope_at_minus1.to_string()},
                               {"ode_residual_terms", c.ode_residual.coeffs().size()}, {"exact", c.exact()}};
  if (ctx.cfg.grid || ctx.cfg.out_csv) {
    const int n = static_cast<int>(ctx.grid());
    std::string csv = "h,tau,S\n";
    for (int i = 1; i < n + 1; ++i) {
      const double h = -1.0 + 2.0 * i / (n + 1);
      csv += fmt(h) + "," + fmt(s.profile(h)) + "," + fmt(scalar_of_profile(s.profile, h)) + "\n";
    }
    ctx.csv = csv;
  }
  const bool ok = c.exact() && s.positive;
  if (!ok) j["violation"] = {{"reason", c.exact() ? "profile is not positive on ]-1,1[" : "certificate is not exact"}};
  return ok ? 0 : 2;
}

int cmd_lift_check(Context& ctx, json& j) {
  const auto& metric = ctx.need_metric();
  const auto& cfg = ctx.cfg;
  ConnectionParams p = ctx.need_problem().lift.value_or(ConnectionParams{});
  try {
    if (cfg.family) p.family = parse_lift_family(*cfg.family);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what(), "--family");
  }
  if (cfg.a) p.a = *cfg.a;
  if (cfg.b) p.b = *cfg.b;
  if (cfg.c) p.c = *cfg.c;
  // A family that does not match the base geometry is a usage error.
  std::optional<TotalMetric> lifted;
  try {
    lifted.emplace(metric, p);
  } catch (const DomainError& e) {
    throw InputError(e.what(), "lift.family");
  }
  const TotalMetric& tm = *lifted;
  const auto& model = metric.model();
  const double margin = ctx.margin();
  const double smooth_tol = ctx.tol("smoothness_ratio", 1e-3);
  ctx.tolerances["j_squared"] = num(1e-12);
  ctx.tolerances["compatibility"] = num(1e-10);
  constexpr int samples = 100;
  ctx.tolerances["samples"] = samples;

  // Deterministic random points inside the bounding box of the sampling grid.
  const auto grid = interior_grid(model, 5, margin);
  std::vector<double> lo(model.dim(), INFINITY), hi(model.dim(), -INFINITY);
  for (const auto& x : grid)
    for (std::size_t i = 0; i < model.dim(); ++i) {
      lo[i] = std::min(lo[i], x.coords[i]);
      hi[i] = std::max(hi[i], x.coords[i]);
    }
  std::mt19937 rng(20240611);
  double j2 = 0, compat = 0, printed = 0, inv = 0, min_eig = INFINITY;
  int taken = 0;
  for (int tries = 0; taken < samples && tries < 100 * samples; ++tries) {
    ChartPoint x;
    for (std::size_t i = 0; i < model.dim(); ++i) x.coords.push_back(std::uniform_real_distribution<double>(lo[i], hi[i])(rng));
    if (!(model.max_functional(affine_coords(model.geometry(), x)) < -margin)) continue;
    const auto r = check_compatibility(tm, x);
    const double scale = std::max(1.0, tm.metric(x).cwiseAbs().maxCoeff());
    j2 = std::max(j2, r.j_squared / (scale * scale));
    compat = std::max(compat, r.compatibility);
    printed = std::max(printed, r.printed_form);
    inv = std::max(inv, r.omega_invariance / scale);
    min_eig = std::min(min_eig, r.min_eigenvalue);
    ++taken;
  }
  const bool kahler = taken > 0 && j2 < 1e-12 && compat < 1e-10 && min_eig > 0.0;
  json sm = json::array();
  bool smooth = true;
  for (std::size_t f = 0; f < model.functionals().size(); ++f) {
    const auto r = check_boundary_smoothness(tm, f);
    const bool ok = r.converged && std::abs(r.ratio - 1.0) <= smooth_tol;
    smooth = smooth && ok;
    sm.push_back({{"facet", f},
                  {"anchor", model_point(model, r.anchor)},
                  {"ratio", num(r.ratio)},
                  {"error", num(r.error)},
                  {"converged", r.converged},
                  {"residue_dt", num(facet_residue(metric, f).coefficient_dt)},
                  {"pass", ok}});
  }
  const auto x0 = from_affine_chart(model.geometry(), {interior_point(model), true});
  j["family"] = to_string(p.family);
  j["params"] = {{"a", num(p.a)}, {"b", num(p.b)}, {"c", num(p.c)}};
  j["coframe"] = tm.coframe();
  j["conventions"] = "omega(u,v) = u^T Omega v, G = omega(., J.), J = Omega^-1 G; omega_printed = -omega";
  j["sample_point"] = vec(x0.coords);
  j["G_at_sample"] = mat(tm.metric(x0));
  j["omega_at_sample"] = mat(tm.symplectic(x0));
  j["compatibility"] = {{"points", taken},
                        {"max_j_squared_relative", num(j2)},
                        {"max_G_minus_omega_J", num(compat)},
                        {"max_G_minus_omega_printed_J", num(printed)},
                        {"max_omega_invariance_relative", num(inv)},
                        {"min_eigenvalue", num(min_eig)},
                        {"pass", kahler}};
  j["smoothness"] = {{"definition", "(2 pi)^2 g_rr / g_phiphi with t = r^2"}, {"facets", sm}, {"pass", smooth}};
  j["scalar_curvature_at_sample"] = num(tm.scalar_curvature(x0));
  if (!kahler) j["violation"] = {{"reason", "lift is not Kahler-compatible"}};
  else if (!smooth) j["violation"] = {{"reason", "smoothness ratio differs from 1"}};
  return kahler && smooth ? 0 : 2;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  RunResult res;
  json& j = res.report;
  j["version"] = version;
  j["subcommand"] = cfg.subcommand;
  j["input"] = cfg.input ? json(*cfg.input) : json(nullptr);
  j["input_digest"] = nullptr;
  Context ctx{cfg, {}, json::object(), {}};
  auto finish = [&](int code, const std::string& status) {
    j["status"] = status;
    j["tolerances"] = ctx.tolerances;
    res.exit_code = code;
    res.csv = ctx.csv;
    return res;
  };
  try {
    if (std::find(subcommands().begin(), subcommands().end(), cfg.subcommand) == subcommands().end())
      throw InputError("unknown subcommand '" + cfg.subcommand + "'", "subcommand");
    if (cfg.tol && !(*cfg.tol > 0.0)) throw InputError("tolerance must be positive", "--tol");
    if (cfg.margin && !(*cfg.margin > 0.0)) throw InputError("margin must be positive", "--margin");
    if (cfg.grid && *cfg.grid < 2) throw InputError("grid needs at least 2 points per axis", "--grid");
    if (cfg.input) {
      ctx.problem = load_problem(*cfg.input);
      j["input_digest"] = ctx.problem->digest;
    }
    const auto& s = cfg.subcommand;
    int code = 0;
    if (s == "check-delzant") code = cmd_check_delzant(ctx, j);
    else if (s == "finite-type") code = cmd_finite_type(ctx, j);
    else if (s == "reduce") code = cmd_reduce(ctx, j);
    else if (s == "potential") code = cmd_potential(ctx, j);
    else if (s == "metric-eval") code = cmd_metric_eval(ctx, j);
    else if (s == "residues") code = cmd_residues(ctx, j);
    else if (s == "hessian-check") code = cmd_hessian(ctx, j);
    else if (s == "curvature") code = cmd_curvature(ctx, j);
    else if (s == "extremal-check") code = cmd_extremal_check(ctx, j);
    else if (s == "extremal-solve") code = cmd_extremal_solve(ctx, j);
    else code = cmd_lift_check(ctx, j);
    return finish(code, code == 0 ? "pass" : "violation");
  } catch (const InputError& e) {
    j["error"] = {{"message", e.what()}, {"field", e.field()}, {"line", e.line()}};
    return finish(1, "error");
  } catch (const std::invalid_argument& e) {
    j["error"] = {{"message", e.what()}};
    return finish(1, "error");
  } catch (const DomainError& e) {
    j["violation"] = {{"reason", e.what()}};
    return finish(2, "violation");
  } catch (const expr::SingularEvaluation& e) {
    j["violation"] = {{"reason", e.what()}, {"point", vec(e.point())}};
    return finish(2, "violation");
  } catch (const std::exception& e) {
    j["error"] = {{"message", e.what()}};
    return finish(1, "error");
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Delzant subspaces, hybrid b-metrics, scalar curvature and extremal toric metrics"};
  app.set_version_flag("--version", std::string(version));
  RunConfig cfg;
  std::string positional, input_opt;
  std::string kappa, family;
  double margin = 0, tol = 0, a = 0, b = 0, c = 0;
  int grid = 0;
  app.add_option("subcommand", cfg.subcommand, "Computation to run")->required()->check(CLI::IsMember(subcommands()));
  app.add_option("input_file", positional, "Problem file (TOML)");
  auto* in_flag = app.add_option("--input", input_opt, "Problem file (TOML)");
  auto* out_json = app.add_option("--out-json", cfg.out_json, "Write the JSON report here instead of stdout");
  auto* out_csv = app.add_option("--out-csv", cfg.out_csv, "Write the CSV grid here");
  auto* m_flag = app.add_option("--margin", margin, "Distance kept from facets when sampling");
  auto* g_flag = app.add_option("--grid", grid, "Points per axis");
  auto* k_flag = app.add_option("--kappa", kappa, "Boundary slope, e.g. 4pi or 8pi");
  auto* t_flag = app.add_option("--tol", tol, "Main tolerance of the subcommand");
  app.add_option("--weight", cfg.weight, "extremal-solve weight: const or h+2");
  auto* f_flag = app.add_option("--family", family, "lift family: canonical, cylinder-standard, cylinder-exotic");
  auto* a_flag = app.add_option("--a", a, "lift parameter a");
  auto* b_flag = app.add_option("--b", b, "lift parameter b");
  auto* c_flag = app.add_option("--c", c, "lift parameter c");
  (void)out_json;
  (void)out_csv;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (!positional.empty() && *in_flag && positional != input_opt) {
    std::cerr << "error: input given twice ('" << positional << "' and '" << input_opt << "')\n";
    return 1;
  }
  if (!positional.empty()) cfg.input = positional;
  else if (*in_flag) cfg.input = input_opt;
  if (*m_flag) cfg.margin = margin;
  if (*g_flag) cfg.grid = grid;
  if (*k_flag) cfg.kappa = kappa;
  if (*t_flag) cfg.tol = tol;
  if (*f_flag) cfg.family = family;
  if (*a_flag) cfg.a = a;
  if (*b_flag) cfg.b = b;
  if (*c_flag) cfg.c = c;

  const RunResult r = run(cfg);
  const std::string text = r.report.dump(2) + "\n";
  if (cfg.out_json) {
    std::ofstream out(*cfg.out_json, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << *cfg.out_json << "\n";
      return 1;
    }
    out << text;
  } else {
    std::cout << text;
  }
  if (cfg.out_csv && !r.csv.empty()) {
    std::ofstream out(*cfg.out_csv, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << *cfg.out_csv << "\n";
      return 1;
    }
    out << r.csv;
  }
  if (r.exit_code == 1 && r.report.contains("error")) std::cerr << "error: " << r.report["error"]["message"].get<std::string>() << "\n";
  return r.exit_code;
}

}  // namespace toric::cli
