#include "toric/extremal.hpp"

#include "toric/affine_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace toric {

using expr::Expr;

// ---- PiScalar ----

PiScalar::PiScalar(const mpq_class& q, int pi_power) {
  mpq_class c = q;
  c.canonicalize();
  if (c != 0) terms_[pi_power] = c;
}

void PiScalar::clean() {
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0; });
}

PiScalar& PiScalar::operator+=(const PiScalar& o) {
  for (const auto& [p, q] : o.terms_) terms_[p] += q;
  clean();
  return *this;
}

PiScalar& PiScalar::operator-=(const PiScalar& o) {
  for (const auto& [p, q] : o.terms_) terms_[p] -= q;
  clean();
  return *this;
}

PiScalar operator-(const PiScalar& a) {
  PiScalar r = a;
  for (auto& kv : r.terms_) kv.second = -kv.second;
  return r;
}

PiScalar operator*(const PiScalar& a, const PiScalar& b) {
  PiScalar r;
  for (const auto& [p, q] : a.terms_)
    for (const auto& [pp, qq] : b.terms_) r.terms_[p + pp] += q * qq;
  r.clean();
  return r;
}

double PiScalar::to_double() const {
  double s = 0.0;
  for (const auto& [p, q] : terms_) s += q.get_d() * std::pow(std::numbers::pi, p);
  return s;
}

namespace {

std::string pi_power_string(int p) {
  const int a = std::abs(p);
  return a == 1 ? "pi" : "pi^" + std::to_string(a);
}

// Renders |q| pi^p; sign handled by the caller.
std::string monomial_string(const mpq_class& q, int p) {
  const mpz_class num = abs(q.get_num()), den = q.get_den();
  const std::string n = num.get_str(), d = den.get_str();
  if (p == 0) return den == 1 ? n : n + "/" + d;
  if (p > 0) {
    std::string s = num == 1 ? pi_power_string(p) : n + "*" + pi_power_string(p);
    return den == 1 ? s : s + "/" + d;
  }
  const std::string below = den == 1 ? pi_power_string(p) : "(" + d + "*" + pi_power_string(p) + ")";
  return n + "/" + below;
}

}  // namespace

std::string PiScalar::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const bool neg = it->second < 0;
    if (out.empty()) out = neg ? "-" : "";
    else out += neg ? " - " : " + ";
    out += monomial_string(it->second, it->first);
  }
  return out;
}

Expr PiScalar::to_expr() const {
  Expr e;
  for (const auto& [p, q] : terms_) {
    // Keep small integer ratios exact in double: 36/11 rather than 3.2727...
    const Expr c = Expr(q.get_num().get_d()) / Expr(q.get_den().get_d());
    e = e + (p == 0 ? c : c * pow(Expr::pi(), p));
  }
  return e;
}

namespace {

mpq_class parse_rational(const std::string& s, const std::string& whole) {
  if (s.empty()) throw std::invalid_argument("empty number in '" + whole + "'");
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    mpq_class q(parse_rational(s.substr(0, slash), whole) / parse_rational(s.substr(slash + 1), whole));
    q.canonicalize();
    return q;
  }
  std::string digits = s;
  int sign = 1;
  if (digits[0] == '-' || digits[0] == '+') {
    sign = digits[0] == '-' ? -1 : 1;
    digits.erase(0, 1);
  }
  const auto dot = digits.find('.');
  std::string frac;
  if (dot != std::string::npos) {
    frac = digits.substr(dot + 1);
    digits = digits.substr(0, dot) + frac;
  }
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw std::invalid_argument("malformed number '" + s + "' in '" + whole + "'");
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
  mpq_class q(mpz_class(digits, 10) * sign, den);
  q.canonicalize();
  return q;
}

}  // namespace

PiScalar parse_pi_scalar(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    std::string coef = s.substr(0, s.size() - 2);
    if (!coef.empty() && coef.back() == '*') coef.pop_back();
    if (coef.empty() || coef == "+") return PiScalar::pi();
    if (coef == "-") return -PiScalar::pi();
    return {parse_rational(coef, text), 1};
  }
  return {parse_rational(s, text), 0};
}

// ---- Laurent ----

Laurent Laurent::monomial(int power, const PiScalar& c) {
  Laurent l;
  if (!c.is_zero()) l.c_[power] = c;
  return l;
}

void Laurent::clean() {
  std::erase_if(c_, [](const auto& kv) { return kv.second.is_zero(); });
}

PiScalar Laurent::coeff(int power) const {
  auto it = c_.find(power);
  return it == c_.end() ? PiScalar() : it->second;
}

int Laurent::min_power() const { return c_.empty() ? 0 : c_.begin()->first; }
int Laurent::max_power() const { return c_.empty() ? 0 : c_.rbegin()->first; }

Laurent Laurent::derivative() const {
  Laurent r;
  for (const auto& [k, c] : c_)
    if (k != 0) r.c_[k - 1] += PiScalar(mpq_class(k)) * c;
  r.clean();
  return r;
}

Laurent Laurent::double_antiderivative() const {
  Laurent r;
  for (const auto& [k, c] : c_) {
    if (k == -1 || k == -2) throw DomainError("double antiderivative of u^" + std::to_string(k) + " is not a Laurent polynomial");
    r.c_[k + 2] += PiScalar(mpq_class(1, (k + 1) * (k + 2))) * c;
  }
  r.clean();
  return r;
}

PiScalar Laurent::at(const mpq_class& u) const {
  if (u == 0 && min_power() < 0) throw DomainError("Laurent polynomial evaluated at its pole h = -2");
  PiScalar s;
  for (const auto& [k, c] : c_) {
    mpq_class p(1);
    mpz_class num = u.get_num(), den = u.get_den();
    const unsigned e = static_cast<unsigned>(std::abs(k));
    mpz_pow_ui(num.get_mpz_t(), num.get_mpz_t(), e);
    mpz_pow_ui(den.get_mpz_t(), den.get_mpz_t(), e);
    p = k >= 0 ? mpq_class(num, den) : mpq_class(den, num);
    p.canonicalize();
    s += PiScalar(p) * c;
  }
  return s;
}

Laurent& Laurent::operator+=(const Laurent& o) {
  for (const auto& [k, c] : o.c_) c_[k] += c;
  clean();
  return *this;
}

Laurent operator-(const Laurent& a, const Laurent& b) { return a + PiScalar(mpq_class(-1)) * b; }

Laurent operator*(const Laurent& a, const Laurent& b) {
  Laurent r;
  for (const auto& [k, c] : a.c_)
    for (const auto& [kk, cc] : b.c_) r.c_[k + kk] += c * cc;
  r.clean();
  return r;
}

Laurent operator*(const PiScalar& s, const Laurent& a) {
  Laurent r;
  for (const auto& [k, c] : a.c_) r.c_[k] = s * c;
  r.clean();
  return r;
}

// ---- weights and profiles ----

Weight parse_weight(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s == "const" || s == "constant" || s == "1") return Weight::Constant;
  if (s == "h+2" || s == "2+h") return Weight::Shifted;
  throw std::invalid_argument("unknown weight '" + text + "' (expected const or h+2)");
}

std::string to_string(Weight w) { return w == Weight::Constant ? "const" : "h+2"; }

Laurent weight_laurent(Weight w) { return Laurent::monomial(w == Weight::Constant ? 0 : 1); }

namespace {

// Exact quotient by w, which is a monomial in u.
Laurent divide_by_weight(const Laurent& f, Weight w) {
  if (w == Weight::Constant) return f;
  Laurent r;
  for (const auto& [k, c] : f.coeffs()) r += Laurent::monomial(k - 1, c);
  return r;
}

mpq_class binomial(int n, int k) {
  mpz_class b;
  mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return mpq_class(b);
}

}  // namespace

std::vector<PiScalar> Profile::poly_coeffs() const {
  std::vector<PiScalar> out(static_cast<std::size_t>(std::max(tau.max_power(), 0)) + 1);
  for (const auto& [k, c] : tau.coeffs()) {
    if (k < 0) continue;
    // (h+2)^k = sum_i C(k,i) 2^(k-i) h^i
    for (int i = 0; i <= k; ++i) {
      mpz_class two;
      mpz_ui_pow_ui(two.get_mpz_t(), 2, static_cast<unsigned long>(k - i));
      out[static_cast<std::size_t>(i)] += PiScalar(binomial(k, i) * mpq_class(two)) * c;
    }
  }
  while (out.size() > 1 && out.back().is_zero()) out.pop_back();
  return out;
}

std::vector<PiScalar> Profile::pole_coeffs() const {
  std::vector<PiScalar> out;
  for (int m = 1; m <= -tau.min_power(); ++m) out.push_back(tau.coeff(-m));
  return out;
}

double Profile::operator()(double h) const {
  const double u = h + 2;
  double s = 0.0;
  for (const auto& [k, c] : tau.coeffs()) s += c.to_double() * std::pow(u, k);
  return s;
}

double Profile::derivative(double h) const { return Profile{tau.derivative(), w}(h); }

Expr Profile::as_expr(int h_index) const {
  const Expr u = Expr::var(h_index) + Expr(2.0);
  Expr e;
  for (const auto& [k, c] : tau.coeffs()) e = e + c.to_expr() * pow(u, k);
  return e;
}

std::string Profile::to_string() const {
  if (tau.is_zero()) return "0";
  std::string out;
  for (auto it = tau.coeffs().rbegin(); it != tau.coeffs().rend(); ++it) {
    if (!out.empty()) out += " + ";
    out += "(" + it->second.to_string() + ")";
    if (it->first == 1) out += "*(h+2)";
    else if (it->first != 0) out += "*(h+2)^" + std::to_string(it->first);
  }
  return out;
}

Laurent scalar_laurent(const Profile& p) {
  const Laurent f = (weight_laurent(p.w) * p.tau).derivative().derivative();
  return PiScalar(mpq_class(-1, 2)) * divide_by_weight(f, p.w);
}

double scalar_of_profile(const Profile& p, double h) {
  if (!std::isfinite(h)) throw DomainError("scalar curvature requested at a non-finite point");
  const mpq_class hq(h);
  if (hq + 2 == 0 && (p.w == Weight::Shifted || p.tau.min_power() < 0))
    throw DomainError("scalar curvature requested at the pole h = -2");
  return scalar_laurent(p).at_h(hq).to_double();
}

// ---- boundary value problem ----

bool ResidualCertificate::exact() const {
  return tau_at_plus1.is_zero() && tau_at_minus1.is_zero() && slope_at_plus1.is_zero() && slope_at_minus1.is_zero() &&
         ode_residual.is_zero();
}

namespace {

mpq_class rational_part(const PiScalar& s) {
  if (s.is_zero()) return 0;
  if (s.terms().size() != 1 || s.terms().begin()->first != 0) throw std::logic_error("basis value is not rational");
  return s.terms().begin()->second;
}

// Gaussian elimination over Q; throws on a singular system.
std::array<mpq_class, 4> solve4(std::array<std::array<mpq_class, 4>, 4> a, std::array<mpq_class, 4> b) {
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    while (piv < 4 && a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(c)] == 0) ++piv;
    if (piv == 4) throw DomainError("extremal boundary value problem is singular");
    std::swap(a[static_cast<std::size_t>(c)], a[static_cast<std::size_t>(piv)]);
    std::swap(b[static_cast<std::size_t>(c)], b[static_cast<std::size_t>(piv)]);
    const auto uc = static_cast<std::size_t>(c);
    for (std::size_t r = 0; r < 4; ++r) {
      if (r == uc || a[r][uc] == 0) continue;
      const mpq_class f = a[r][uc] / a[uc][uc];
      for (std::size_t k = uc; k < 4; ++k) a[r][k] -= f * a[uc][k];
      b[r] -= f * b[uc];
    }
  }
  std::array<mpq_class, 4> x;
  for (std::size_t i = 0; i < 4; ++i) x[i] = b[i] / a[i][i];
  return x;
}

}  // namespace

ExtremalSolution solve_bvp(const BVProblem& prob) {
  if (!(prob.kappa.to_double() > 0.0)) throw DomainError("boundary slope kappa must be positive, got " + prob.kappa.to_string());
  const Laurent w = weight_laurent(prob.w);
  const Laurent h = Laurent::monomial(1) - Laurent::monomial(0, mpq_class(2));
  const PiScalar m2(mpq_class(-2));

  // tau = c0 T0 + c1 T1 + A u/w + B/w, where (w T_k)'' = -2 w h^k.
  const std::array<Laurent, 4> basis{
      divide_by_weight((m2 * w).double_antiderivative(), prob.w),
      divide_by_weight((m2 * w * h).double_antiderivative(), prob.w),
      divide_by_weight(Laurent::monomial(1), prob.w),
      divide_by_weight(Laurent::monomial(0), prob.w),
  };
  const mpq_class u_plus(3), u_minus(1);
  std::array<std::array<mpq_class, 4>, 4> a;
  for (std::size_t j = 0; j < 4; ++j) {
    const Laurent d = basis[j].derivative();
    a[0][j] = rational_part(basis[j].at(u_plus));
    a[1][j] = rational_part(basis[j].at(u_minus));
    a[2][j] = rational_part(d.at(u_plus));
    a[3][j] = rational_part(d.at(u_minus));
  }
  // Right-hand side is kappa * (0, 0, -1, 1).
  const auto x = solve4(a, {mpq_class(0), mpq_class(0), mpq_class(-1), mpq_class(1)});

  ExtremalSolution sol;
  sol.kappa = prob.kappa;
  sol.profile.w = prob.w;
  for (std::size_t j = 0; j < 4; ++j) sol.profile.tau += (PiScalar(x[j]) * prob.kappa) * basis[j];
  sol.c0 = PiScalar(x[0]) * prob.kappa;
  sol.c1 = PiScalar(x[1]) * prob.kappa;

  const Laurent& tau = sol.profile.tau;
  const Laurent dtau = tau.derivative();
  auto& cert = sol.certificate;
  cert.tau_at_plus1 = tau.at(u_plus);
  cert.tau_at_minus1 = tau.at(u_minus);
  cert.slope_at_plus1 = dtau.at(u_plus) + prob.kappa;
  cert.slope_at_minus1 = dtau.at(u_minus) - prob.kappa;
  const Laurent s = Laurent::monomial(0, sol.c0) + sol.c1 * h;
  cert.ode_residual = (w * tau).derivative().derivative() + (PiScalar(mpq_class(2)) * w) * s;

  // Positivity: sampled interior minimum, plus the slope signs at the zeros.
  constexpr int samples = 2000;
  sol.min_interior = INFINITY;
  for (int i = 1; i < samples; ++i) sol.min_interior = std::min(sol.min_interior, sol.profile(-1.0 + 2.0 * i / samples));
  sol.positive = sol.min_interior > 0.0 && dtau.at(u_plus).to_double() < 0.0 && dtau.at(u_minus).to_double() > 0.0;
  return sol;
}

}  // namespace toric
