#include "toric/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace toric::expr {

SingularEvaluation::SingularEvaluation(const std::string& what, std::vector<double> point)
    : std::runtime_error(what), point_(std::move(point)) {}

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " at offset " + std::to_string(position)), position_(position) {}

namespace {

std::shared_ptr<const Node> zero_node() {
  static const auto z = std::make_shared<const Node>(Node{Kind::Const, 0.0, 0, nullptr, nullptr});
  return z;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}
Expr::Expr(double c) : Expr(constant(c)) {}

Expr Expr::make(Kind k, const Expr* a, const Expr* b, double v, int i) {
  return Expr(std::make_shared<const Node>(
      Node{k, v, i, a ? a->node_ : nullptr, b ? b->node_ : nullptr}));
}

Expr Expr::constant(double c) {
  if (c == 0.0) return Expr();
  return make(Kind::Const, nullptr, nullptr, c, 0);
}

Expr Expr::pi() {
  static const Expr p = make(Kind::Pi, nullptr, nullptr, std::numbers::pi, 0);
  return p;
}

Expr Expr::var(int index) { return make(Kind::Var, nullptr, nullptr, 0.0, index); }

Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
int Expr::index() const { return node_->index; }
int Expr::exponent() const { return node_->index; }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }

bool Expr::is_const(double c) const { return node_->kind == Kind::Const && node_->value == c; }
bool Expr::is_constant() const { return node_->kind == Kind::Const || node_->kind == Kind::Pi; }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const(0)) return b;
  if (b.is_const(0)) return a;
  if (a.kind() == Kind::Const && b.kind() == Kind::Const) return Expr::constant(a.value() + b.value());
  return Expr::make(Kind::Add, &a, &b, 0, 0);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_const(0)) return a;
  if (a.is_const(0)) return -b;
  if (a.kind() == Kind::Const && b.kind() == Kind::Const) return Expr::constant(a.value() - b.value());
  return Expr::make(Kind::Sub, &a, &b, 0, 0);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_const(0) || b.is_const(0)) return Expr();
  if (a.is_const(1)) return b;
  if (b.is_const(1)) return a;
  if (a.is_const(-1)) return -b;
  if (b.is_const(-1)) return -a;
  if (a.kind() == Kind::Const && b.kind() == Kind::Const) return Expr::constant(a.value() * b.value());
  return Expr::make(Kind::Mul, &a, &b, 0, 0);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_const(0)) return Expr();
  if (b.is_const(1)) return a;
  if (a.kind() == Kind::Const && b.kind() == Kind::Const && b.value() != 0.0)
    return Expr::constant(a.value() / b.value());
  return Expr::make(Kind::Div, &a, &b, 0, 0);
}

Expr operator-(const Expr& a) {
  if (a.kind() == Kind::Const) return Expr::constant(-a.value());
  if (a.kind() == Kind::Neg) return a.lhs();
  return Expr::make(Kind::Neg, &a, nullptr, 0, 0);
}

Expr pow(const Expr& base, int n) {
  if (n == 0) return Expr::constant(1.0);
  if (n == 1) return base;
  if (base.kind() == Kind::Const) return Expr::constant(std::pow(base.value(), n));
  if (base.kind() == Kind::Pow) return pow(base.lhs(), base.exponent() * n);
  return Expr::make(Kind::Pow, &base, nullptr, 0, n);
}

Expr log_abs(const Expr& a) { return Expr::make(Kind::LogAbs, &a, nullptr, 0, 0); }
Expr sin(const Expr& a) { return Expr::make(Kind::Sin, &a, nullptr, 0, 0); }
Expr cos(const Expr& a) { return Expr::make(Kind::Cos, &a, nullptr, 0, 0); }

namespace {

class Differentiator {
 public:
  explicit Differentiator(int var) : var_(var) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr d = compute(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case Kind::Const:
      case Kind::Pi:
        return Expr();
      case Kind::Var:
        return Expr::constant(e.index() == var_ ? 1.0 : 0.0);
      case Kind::Add:
        return (*this)(e.lhs()) + (*this)(e.rhs());
      case Kind::Sub:
        return (*this)(e.lhs()) - (*this)(e.rhs());
      case Kind::Neg:
        return -(*this)(e.lhs());
      case Kind::Mul: {
        Expr a = e.lhs(), b = e.rhs();
        return (*this)(a) * b + a * (*this)(b);
      }
      case Kind::Div: {
        Expr a = e.lhs(), b = e.rhs();
        Expr da = (*this)(a), db = (*this)(b);
        if (db.is_const(0)) return da / b;
        // (da - (a/b) db) / b keeps denominators at first power across repeated derivatives.
        return (da - e * db) / b;
      }
      case Kind::Pow: {
        Expr base = e.lhs();
        const int n = e.exponent();
        return Expr::constant(n) * pow(base, n - 1) * (*this)(base);
      }
      case Kind::LogAbs: {
        Expr a = e.lhs();
        return (*this)(a) / a;
      }
      case Kind::Sin:
        return cos(e.lhs()) * (*this)(e.lhs());
      case Kind::Cos:
        return -(sin(e.lhs()) * (*this)(e.lhs()));
    }
    return Expr();
  }

  int var_;
  std::unordered_map<const Node*, Expr> memo_;
};

std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

}  // namespace

Expr differentiate(const Expr& e, int var) { return Differentiator(var)(e); }

Expr differentiate(const Expr& e, std::span<const int> vars) {
  Expr d = e;
  for (int v : vars) d = differentiate(d, v);
  return d;
}

std::size_t dag_size(const Expr& e) {
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{e.id()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!n || !seen.insert(n).second) continue;
    stack.push_back(n->a.get());
    stack.push_back(n->b.get());
  }
  return seen.size();
}

double Evaluator::operator()(const Expr& e) {
  if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
  double v = 0.0;
  switch (e.kind()) {
    case Kind::Const:
    case Kind::Pi:
      v = e.value();
      break;
    case Kind::Var:
      if (e.index() < 0 || static_cast<std::size_t>(e.index()) >= point_.size())
        throw std::out_of_range("expression references coordinate " + std::to_string(e.index()) +
                                " but the point has dimension " + std::to_string(point_.size()));
      v = point_[static_cast<std::size_t>(e.index())];
      break;
    case Kind::Add:
      v = (*this)(e.lhs()) + (*this)(e.rhs());
      break;
    case Kind::Sub:
      v = (*this)(e.lhs()) - (*this)(e.rhs());
      break;
    case Kind::Neg:
      v = -(*this)(e.lhs());
      break;
    case Kind::Mul:
      v = (*this)(e.lhs()) * (*this)(e.rhs());
      break;
    case Kind::Div: {
      const double den = (*this)(e.rhs());
      if (std::abs(den) < singular_threshold)
        throw SingularEvaluation("division by zero at " + format_point(point_), point_);
      v = (*this)(e.lhs()) / den;
      break;
    }
    case Kind::Pow: {
      const double base = (*this)(e.lhs());
      if (e.exponent() < 0 && std::abs(base) < singular_threshold)
        throw SingularEvaluation("negative power of zero at " + format_point(point_), point_);
      v = std::pow(base, e.exponent());
      break;
    }
    case Kind::LogAbs: {
      const double a = std::abs((*this)(e.lhs()));
      if (a < singular_threshold)
        throw SingularEvaluation("log of zero at " + format_point(point_), point_);
      v = std::log(a);
      break;
    }
    case Kind::Sin:
      v = std::sin((*this)(e.lhs()));
      break;
    case Kind::Cos:
      v = std::cos((*this)(e.lhs()));
      break;
  }
  memo_.emplace(e.id(), v);
  return v;
}

double evaluate(const Expr& e, std::span<const double> point) { return Evaluator(point)(e); }

Expr substitute(const Expr& e, std::span<const Expr> replacements) {
  std::unordered_map<const Node*, Expr> memo;
  auto rec = [&](auto&& self, const Expr& x) -> Expr {
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    Expr r;
    switch (x.kind()) {
      case Kind::Const:
      case Kind::Pi:
        r = x;
        break;
      case Kind::Var:
        if (x.index() < 0 || static_cast<std::size_t>(x.index()) >= replacements.size())
          throw std::out_of_range("substitute: no replacement for coordinate " + std::to_string(x.index()));
        r = replacements[static_cast<std::size_t>(x.index())];
        break;
      case Kind::Add: r = self(self, x.lhs()) + self(self, x.rhs()); break;
      case Kind::Sub: r = self(self, x.lhs()) - self(self, x.rhs()); break;
      case Kind::Mul: r = self(self, x.lhs()) * self(self, x.rhs()); break;
      case Kind::Div: r = self(self, x.lhs()) / self(self, x.rhs()); break;
      case Kind::Neg: r = -self(self, x.lhs()); break;
      case Kind::Pow: r = pow(self(self, x.lhs()), x.exponent()); break;
      case Kind::LogAbs: r = log_abs(self(self, x.lhs())); break;
      case Kind::Sin: r = sin(self(self, x.lhs())); break;
      case Kind::Cos: r = cos(self(self, x.lhs())); break;
    }
    memo.emplace(x.id(), r);
    return r;
  };
  return rec(rec, e);
}

// ---------------------------------------------------------------------------
// Names

VariableNames::VariableNames(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) lookup_[names_[i]] = static_cast<int>(i);
}

void VariableNames::add_alias(const std::string& alias, int index) { lookup_[alias] = index; }

int VariableNames::lookup(std::string_view name) const {
  auto it = lookup_.find(name);
  return it == lookup_.end() ? -1 : it->second;
}

const std::string& VariableNames::name(int index) const {
  return names_.at(static_cast<std::size_t>(index));
}

VariableNames VariableNames::euclidean(std::size_t dim) {
  static const char* short_names[] = {"x", "y", "z"};
  if (dim == 1) {
    VariableNames v({"h"});
    v.add_alias("x", 0);
    v.add_alias("x1", 0);
    return v;
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dim; ++i)
    names.push_back(dim <= 3 ? short_names[i] : "x" + std::to_string(i + 1));
  VariableNames v(std::move(names));
  for (std::size_t i = 0; i < dim; ++i) v.add_alias("x" + std::to_string(i + 1), static_cast<int>(i));
  return v;
}

VariableNames VariableNames::cylinder() { return VariableNames({"x", "h"}); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view s, const VariableNames& names) : s_(s), names_(names) {}

  Expr parse_all() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+')) e = e + parse_product();
      else if (accept('-')) e = e - parse_product();
      else return e;
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*')) e = e * parse_unary();
      else if (accept('/')) e = e / parse_unary();
      else return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_exponent() {
    skip_ws();
    bool paren = accept('(');
    skip_ws();
    bool neg = false;
    if (accept('-')) neg = true;
    else accept('+');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("expected integer exponent", pos_);
    int n = std::stoi(std::string(s_.substr(start, pos_ - start)));
    if (paren) expect(')');
    return neg ? -n : n;
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return pow(base, parse_exponent());
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string_view id = s_.substr(start, pos_ - start);
      if (id == "pi") return Expr::pi();
      if (id == "log" || id == "sin" || id == "cos") {
        expect('(');
        Expr arg = parse_sum();
        expect(')');
        if (id == "log") return log_abs(arg);
        if (id == "sin") return sin(arg);
        return cos(arg);
      }
      int idx = names_.lookup(id);
      if (idx < 0) throw ParseError("unknown identifier '" + std::string(id) + "'", start);
      return Expr::var(idx);
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  Expr parse_number() {
    std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      std::size_t exp_start = pos_;
      digits();
      if (exp_start == pos_) pos_ = save;
    }
    std::string text(s_.substr(start, pos_ - start));
    if (text == ".") throw ParseError("malformed number", start);
    return Expr::constant(std::stod(text));
  }

  std::string_view s_;
  const VariableNames& names_;
  std::size_t pos_ = 0;
};

int precedence(const Expr& e) {
  switch (e.kind()) {
    case Kind::Add:
    case Kind::Sub:
      return 1;
    case Kind::Mul:
    case Kind::Div:
      return 2;
    case Kind::Neg:
      return 3;
    case Kind::Pow:
      return 4;
    case Kind::Const:
      return e.value() < 0 ? 3 : 5;
    default:
      return 5;
  }
}

void print(std::ostream& os, const Expr& e, const VariableNames& names);

void print_wrapped(std::ostream& os, const Expr& e, bool wrap, const VariableNames& names) {
  if (wrap) os << '(';
  print(os, e, names);
  if (wrap) os << ')';
}

void print(std::ostream& os, const Expr& e, const VariableNames& names) {
  switch (e.kind()) {
    case Kind::Const: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.value());
      os << buf;
      return;
    }
    case Kind::Pi:
      os << "pi";
      return;
    case Kind::Var:
      if (static_cast<std::size_t>(e.index()) < names.size()) os << names.name(e.index());
      else os << "x" << (e.index() + 1);
      return;
    case Kind::Add:
    case Kind::Sub:
      print_wrapped(os, e.lhs(), precedence(e.lhs()) < 1, names);
      os << (e.kind() == Kind::Add ? " + " : " - ");
      print_wrapped(os, e.rhs(), precedence(e.rhs()) <= 1, names);
      return;
    case Kind::Mul:
    case Kind::Div:
      print_wrapped(os, e.lhs(), precedence(e.lhs()) < 2, names);
      os << (e.kind() == Kind::Mul ? "*" : "/");
      print_wrapped(os, e.rhs(), precedence(e.rhs()) <= 3, names);
      return;
    case Kind::Neg:
      os << '-';
      print_wrapped(os, e.lhs(), precedence(e.lhs()) < 4, names);
      return;
    case Kind::Pow:
      print_wrapped(os, e.lhs(), precedence(e.lhs()) < 5, names);
      os << '^';
      if (e.exponent() < 0) os << '(' << e.exponent() << ')';
      else os << e.exponent();
      return;
    case Kind::LogAbs:
    case Kind::Sin:
    case Kind::Cos:
      os << (e.kind() == Kind::LogAbs ? "log(" : e.kind() == Kind::Sin ? "sin(" : "cos(");
      print(os, e.lhs(), names);
      os << ')';
      return;
  }
}

}  // namespace

Expr parse(std::string_view text, const VariableNames& names) { return Parser(text, names).parse_all(); }

std::string to_string(const Expr& e, const VariableNames& names) {
  std::ostringstream os;
  print(os, e, names);
  return os.str();
}

}  // namespace toric::expr
