#pragma once

// Small expression trees with exact symbolic differentiation.
//
// Nodes are immutable and shared, so differentiated expressions form a DAG.
// Both differentiate() and evaluate() memoize on node identity, which keeps
// fourth derivatives of metric inverses tractable.

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toric::expr {

class SingularEvaluation : public std::runtime_error {
 public:
  SingularEvaluation(const std::string& what, std::vector<double> point);
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

enum class Kind { Const, Pi, Var, Add, Sub, Mul, Div, Pow, Neg, LogAbs, Sin, Cos };

struct Node;

class Expr {
 public:
  Expr();  // constant zero
  Expr(double c);  // NOLINT(google-explicit-constructor): literals read naturally in formulas

  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Expr constant(double c);
  static Expr pi();
  static Expr var(int index);

  Kind kind() const;
  double value() const;     // Const only
  int index() const;        // Var only
  int exponent() const;     // Pow only
  Expr lhs() const;         // binary nodes; unary argument for Neg/LogAbs/Sin/Cos/Pow
  Expr rhs() const;

  bool is_const(double c) const;
  bool is_constant() const;  // Const or Pi
  const Node* id() const { return node_.get(); }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int n);
  friend Expr log_abs(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);

 private:
  static Expr make(Kind k, const Expr* a, const Expr* b, double v, int i);
  std::shared_ptr<const Node> node_;
};

struct Node {
  Kind kind = Kind::Const;
  double value = 0.0;
  int index = 0;  // variable index or integer exponent
  std::shared_ptr<const Node> a, b;
};

Expr differentiate(const Expr& e, int var);
Expr differentiate(const Expr& e, std::span<const int> vars);

/// Number of distinct nodes reachable from e.
std::size_t dag_size(const Expr& e);

/// Throws SingularEvaluation on division by, or log of, |v| < singular_threshold.
double evaluate(const Expr& e, std::span<const double> point);

inline constexpr double singular_threshold = 1e-15;

/// Evaluates several expressions at one point sharing a single memo table.
class Evaluator {
 public:
  explicit Evaluator(std::span<const double> point) : point_(point.begin(), point.end()) {}
  double operator()(const Expr& e);

 private:
  std::vector<double> point_;
  std::map<const Node*, double> memo_;
};

/// Replaces Var(i) by replacements[i].
Expr substitute(const Expr& e, std::span<const Expr> replacements);

/// Coordinate names for printing and parsing. Aliases map extra spellings
/// onto indices (e.g. x1 for x).
class VariableNames {
 public:
  VariableNames() = default;
  explicit VariableNames(std::vector<std::string> names);

  void add_alias(const std::string& alias, int index);
  int lookup(std::string_view name) const;  // -1 if unknown
  const std::string& name(int index) const;
  std::size_t size() const { return names_.size(); }

  /// x, y, z (plus x1..xn). Dimension 1 prints h and also accepts x.
  static VariableNames euclidean(std::size_t dim);
  /// x, h
  static VariableNames cylinder();

 private:
  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> lookup_;
};

/// Infix text: + - * / ^int, log() = log|.|, sin(), cos(), pi, numbers,
/// parentheses. Unary minus binds looser than ^ (so -h^2 = -(h^2)).
Expr parse(std::string_view text, const VariableNames& names);
std::string to_string(const Expr& e, const VariableNames& names);

}  // namespace toric::expr
