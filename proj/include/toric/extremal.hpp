#pragma once

// Closed-form extremal profiles on the band S^1 x [-1, 1].
//
// Profiles are Laurent polynomials in u = h + 2 with coefficients that are
// themselves Laurent polynomials in pi over Q, so that constants such as
// 4*pi/11 are kept exactly until the final conversion to double.

#include "toric/expr.hpp"

#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

namespace toric {

class PiScalar {
 public:
  PiScalar() = default;
  PiScalar(const mpq_class& q, int pi_power = 0);  // NOLINT: rationals promote naturally
  static PiScalar pi() { return {mpq_class(1), 1}; }

  bool is_zero() const { return terms_.empty(); }
  /// Single term q * pi^p (or zero).
  bool is_monomial() const { return terms_.size() <= 1; }
  const std::map<int, mpq_class>& terms() const { return terms_; }

  double to_double() const;
  /// "36*pi/11", "-1/(4*pi)", "3", "pi^2/6 + 1".
  std::string to_string() const;
  expr::Expr to_expr() const;

  PiScalar& operator+=(const PiScalar& o);
  PiScalar& operator-=(const PiScalar& o);
  friend PiScalar operator+(PiScalar a, const PiScalar& b) { return a += b; }
  friend PiScalar operator-(PiScalar a, const PiScalar& b) { return a -= b; }
  friend PiScalar operator-(const PiScalar& a);
  friend PiScalar operator*(const PiScalar& a, const PiScalar& b);
  friend bool operator==(const PiScalar& a, const PiScalar& b) { return a.terms_ == b.terms_; }

 private:
  void clean();
  std::map<int, mpq_class> terms_;  // pi power -> coefficient, no zeros
};

/// Parses "4pi", "8pi", "4*pi", "2.5", "3/2*pi".
PiScalar parse_pi_scalar(const std::string& text);

/// Laurent polynomial in u = h + 2 with PiScalar coefficients.
class Laurent {
 public:
  Laurent() = default;
  static Laurent monomial(int power, const PiScalar& c = mpq_class(1));

  const std::map<int, PiScalar>& coeffs() const { return c_; }
  PiScalar coeff(int power) const;
  bool is_zero() const { return c_.empty(); }
  int min_power() const;
  int max_power() const;

  Laurent derivative() const;
  /// Double antiderivative with zero integration constants; throws
  /// DomainError for u^-1 and u^-2 terms.
  Laurent double_antiderivative() const;
  /// Exact value at u (h = u - 2); throws DomainError at u = 0 with poles.
  PiScalar at(const mpq_class& u) const;
  PiScalar at_h(const mpq_class& h) const { return at(h + 2); }

  Laurent& operator+=(const Laurent& o);
  friend Laurent operator+(Laurent a, const Laurent& b) { return a += b; }
  friend Laurent operator-(const Laurent& a, const Laurent& b);
  friend Laurent operator*(const Laurent& a, const Laurent& b);
  friend Laurent operator*(const PiScalar& s, const Laurent& a);
  friend bool operator==(const Laurent& a, const Laurent& b) { return a.c_ == b.c_; }

 private:
  void clean();
  std::map<int, PiScalar> c_;
};

enum class Weight { Constant, Shifted };  // w = 1 or w = h + 2
Weight parse_weight(const std::string& text);
std::string to_string(Weight w);
Laurent weight_laurent(Weight w);

struct Profile {
  Laurent tau;  // in u = h + 2
  Weight w = Weight::Constant;

  /// tau = sum_k poly[k] h^k + sum_m poles[m-1] (h+2)^-m.
  std::vector<PiScalar> poly_coeffs() const;
  std::vector<PiScalar> pole_coeffs() const;
  double operator()(double h) const;
  double derivative(double h) const;
  /// tau as an expression in the coordinate with the given index.
  expr::Expr as_expr(int h_index) const;
  /// "(-8*pi/11)*(h+2)^3 + ..." in powers of (h+2).
  std::string to_string() const;
};

/// S = -(w tau)'' / (2 w) as a Laurent polynomial in u.
Laurent scalar_laurent(const Profile& p);
/// Exact evaluation of S at h, converted to double at the end. Throws
/// DomainError at a pole of w, tau or S.
double scalar_of_profile(const Profile& p, double h);

struct BVProblem {
  Weight w = Weight::Constant;
  PiScalar kappa = PiScalar(mpq_class(4), 1);
};

struct ResidualCertificate {
  PiScalar tau_at_plus1, tau_at_minus1;
  PiScalar slope_at_plus1;   // tau'(1) + kappa
  PiScalar slope_at_minus1;  // tau'(-1) - kappa
  Laurent ode_residual;      // (w tau)'' + 2 w (c1 h + c0)
  bool exact() const;
};

struct ExtremalSolution {
  Profile profile;
  PiScalar c0, c1;  // S = c0 + c1 h
  PiScalar kappa;
  bool positive = false;
  double min_interior = 0.0;  // smallest sampled tau on ]-1, 1[
  ResidualCertificate certificate;
};

/// Solves (w tau)'' = -2 w (c1 h + c0), tau(+-1) = 0, tau'(+-1) = -+kappa
/// exactly. Throws DomainError if kappa <= 0 or the system is singular.
ExtremalSolution solve_bvp(const BVProblem& prob);

}  // namespace toric
