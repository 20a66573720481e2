#include "shapelab/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

namespace shapelab::expr {

struct Node {
  Kind kind = Kind::number;
  double value = 0.0;
  std::string name;
  Function function = Function::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

constexpr std::array<std::string_view, 12> kFunctionNames = {
    "sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "ln", "sqrt", "arcsin", "arccos", "arctan"};

std::optional<Function> lookup_function(std::string_view name) {
  for (std::size_t i = 0; i < kFunctionNames.size(); ++i) {
    if (kFunctionNames[i] == name) return static_cast<Function>(i);
  }
  return std::nullopt;
}

double apply_function(Function f, double x) {
  switch (f) {
    case Function::sin: return std::sin(x);
    case Function::cos: return std::cos(x);
    case Function::tan: return std::tan(x);
    case Function::sinh: return std::sinh(x);
    case Function::cosh: return std::cosh(x);
    case Function::tanh: return std::tanh(x);
    case Function::exp: return std::exp(x);
    case Function::ln: return std::log(x);
    case Function::sqrt: return std::sqrt(x);
    case Function::arcsin: return std::asin(x);
    case Function::arccos: return std::acos(x);
    case Function::arctan: return std::atan(x);
  }
  return std::nan("");
}

bool in_domain(Function f, double x) {
  switch (f) {
    case Function::ln: return x > 0.0;
    case Function::sqrt: return x >= 0.0;
    case Function::arcsin:
    case Function::arccos: return x >= -1.0 && x <= 1.0;
    default: return true;
  }
}

// Printing precedence levels; an operand is parenthesized when its level is
// below what the parent requires.
int precedence(Kind k) {
  switch (k) {
    case Kind::add:
    case Kind::subtract: return 1;
    case Kind::multiply:
    case Kind::divide: return 2;
    case Kind::negate: return 3;
    case Kind::power: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

void print(const Node& n, std::string& out);

void print_operand(const Node& n, int required, std::string& out) {
  if (precedence(n.kind) < required) {
    out += '(';
    print(n, out);
    out += ')';
  } else {
    print(n, out);
  }
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::number: out += format_number(n.value); return;
    case Kind::variable: out += n.name; return;
    case Kind::negate:
      out += '-';
      print_operand(*n.lhs, 3, out);
      return;
    case Kind::add:
    case Kind::subtract:
      print_operand(*n.lhs, 1, out);
      out += n.kind == Kind::add ? " + " : " - ";
      print_operand(*n.rhs, 2, out);
      return;
    case Kind::multiply:
    case Kind::divide:
      print_operand(*n.lhs, 2, out);
      out += n.kind == Kind::multiply ? "*" : "/";
      print_operand(*n.rhs, 3, out);
      return;
    case Kind::power:
      print_operand(*n.lhs, 5, out);
      out += '^';
      print_operand(*n.rhs, 3, out);
      return;
    case Kind::call:
      out += function_name(n.function);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
  }
}

bool equal(const Node* a, const Node* b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::number: return a->value == b->value;
    case Kind::variable: return a->name == b->name;
    case Kind::call: return a->function == b->function && equal(a->lhs.get(), b->lhs.get());
    default: return equal(a->lhs.get(), b->lhs.get()) && equal(a->rhs.get(), b->rhs.get());
  }
}

std::string describe(const Node& n) {
  std::string s;
  print(n, s);
  return s;
}

double eval_node(const Node& n, const Bindings& b) {
  switch (n.kind) {
    case Kind::number: return n.value;
    case Kind::variable: {
      auto it = b.find(n.name);
      if (it == b.end()) throw EvalError("unbound name '" + n.name + "'");
      return it->second;
    }
    case Kind::negate: return -eval_node(*n.lhs, b);
    case Kind::add: return eval_node(*n.lhs, b) + eval_node(*n.rhs, b);
    case Kind::subtract: return eval_node(*n.lhs, b) - eval_node(*n.rhs, b);
    case Kind::multiply: return eval_node(*n.lhs, b) * eval_node(*n.rhs, b);
    case Kind::divide: {
      const double num = eval_node(*n.lhs, b);
      const double den = eval_node(*n.rhs, b);
      if (den == 0.0) throw EvalError("division by zero in '" + describe(n) + "'");
      return num / den;
    }
    case Kind::power: {
      const double base = eval_node(*n.lhs, b);
      const double ex = eval_node(*n.rhs, b);
      const double r = std::pow(base, ex);
      if (!std::isfinite(r)) throw EvalError("domain violation in '" + describe(n) + "'");
      return r;
    }
    case Kind::call: {
      const double x = eval_node(*n.lhs, b);
      if (!in_domain(n.function, x)) throw EvalError("domain violation in '" + describe(n) + "'");
      const double r = apply_function(n.function, x);
      if (!std::isfinite(r)) throw EvalError("domain violation in '" + describe(n) + "'");
      return r;
    }
  }
  return std::nan("");
}

bool node_depends_on(const Node& n, std::string_view name) {
  switch (n.kind) {
    case Kind::number: return false;
    case Kind::variable: return n.name == name;
    case Kind::negate:
    case Kind::call: return node_depends_on(*n.lhs, name);
    default: return node_depends_on(*n.lhs, name) || node_depends_on(*n.rhs, name);
  }
}

void collect_names(const Node& n, std::set<std::string>& out) {
  if (n.kind == Kind::variable) out.insert(n.name);
  if (n.lhs) collect_names(*n.lhs, out);
  if (n.rhs) collect_names(*n.rhs, out);
}

std::size_t count_nodes(const Node& n) {
  std::size_t c = 1;
  if (n.lhs) c += count_nodes(*n.lhs);
  if (n.rhs) c += count_nodes(*n.rhs);
  return c;
}

}  // namespace

std::string_view function_name(Function f) { return kFunctionNames[static_cast<std::size_t>(f)]; }

std::string coordinate_name(int axis) { return "R" + std::to_string(axis + 1); }

std::vector<std::string> coordinate_slots(int n) {
  std::vector<std::string> s;
  for (int i = 0; i < n; ++i) s.push_back(coordinate_name(i));
  return s;
}

// ---------------------------------------------------------------------------
// ScalarExpr

ScalarExpr::ScalarExpr() : ScalarExpr(raw_number(0.0)) {}

ScalarExpr ScalarExpr::raw_number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::number;
  n->value = value;
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::constant(double value) {
  if (!std::isfinite(value)) throw EvalError("non-finite constant");
  if (value == 0.0) return raw_number(0.0);  // also folds -0.0
  if (value < 0.0) return raw_unary(Kind::negate, raw_number(-value));
  return raw_number(value);
}

ScalarExpr ScalarExpr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::variable;
  n->name = std::move(name);
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::coordinate(int axis) { return variable(coordinate_name(axis)); }

ScalarExpr ScalarExpr::raw_unary(Kind kind, const ScalarExpr& operand) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = operand.node_;
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::raw_binary(Kind kind, const ScalarExpr& lhs, const ScalarExpr& rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = lhs.node_;
  n->rhs = rhs.node_;
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::raw_call(Function f, const ScalarExpr& arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::call;
  n->function = f;
  n->lhs = arg.node_;
  return ScalarExpr(std::move(n));
}

Kind ScalarExpr::kind() const { return node_->kind; }
double ScalarExpr::value() const { return node_->value; }
const std::string& ScalarExpr::name() const { return node_->name; }
Function ScalarExpr::function() const { return node_->function; }
ScalarExpr ScalarExpr::lhs() const { return ScalarExpr(node_->lhs); }
ScalarExpr ScalarExpr::rhs() const { return ScalarExpr(node_->rhs); }

double ScalarExpr::eval(const Bindings& bindings) const { return eval_node(*node_, bindings); }

std::string ScalarExpr::str() const { return describe(*node_); }

bool ScalarExpr::depends_on(std::string_view name) const { return node_depends_on(*node_, name); }

std::set<std::string> ScalarExpr::free_names() const {
  std::set<std::string> out;
  collect_names(*node_, out);
  return out;
}

std::size_t ScalarExpr::node_count() const { return count_nodes(*node_); }

ScalarExpr ScalarExpr::substitute(std::string_view name, const ScalarExpr& replacement) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::number: return *this;
    case Kind::variable: return n.name == name ? replacement : *this;
    case Kind::negate: return -lhs().substitute(name, replacement);
    case Kind::call: return apply(n.function, lhs().substitute(name, replacement));
    case Kind::add: return lhs().substitute(name, replacement) + rhs().substitute(name, replacement);
    case Kind::subtract: return lhs().substitute(name, replacement) - rhs().substitute(name, replacement);
    case Kind::multiply: return lhs().substitute(name, replacement) * rhs().substitute(name, replacement);
    case Kind::divide: return lhs().substitute(name, replacement) / rhs().substitute(name, replacement);
    case Kind::power: return pow(lhs().substitute(name, replacement), rhs().substitute(name, replacement));
  }
  return *this;
}

ScalarExpr ScalarExpr::bind(const Bindings& bindings) const {
  ScalarExpr out = *this;
  for (const auto& [name, value] : bindings) {
    if (out.depends_on(name)) out = out.substitute(name, constant(value));
  }
  return out;
}

bool operator==(const ScalarExpr& a, const ScalarExpr& b) { return equal(a.node_.get(), b.node_.get()); }

// ---------------------------------------------------------------------------
// Folding constructors

namespace {

bool is_negative_number(const ScalarExpr& e) {
  return e.kind() == Kind::negate && e.lhs().is_number();
}

std::optional<double> numeric_value(const ScalarExpr& e) {
  if (e.is_number()) return e.value();
  if (is_negative_number(e)) return -e.lhs().value();
  return std::nullopt;
}

std::optional<ScalarExpr> fold(Kind k, const ScalarExpr& a, const ScalarExpr& b) {
  auto x = numeric_value(a);
  auto y = numeric_value(b);
  if (!x || !y) return std::nullopt;
  double r = 0.0;
  switch (k) {
    case Kind::add: r = *x + *y; break;
    case Kind::subtract: r = *x - *y; break;
    case Kind::multiply: r = *x * *y; break;
    case Kind::divide:
      if (*y == 0.0) return std::nullopt;
      r = *x / *y;
      break;
    case Kind::power: r = std::pow(*x, *y); break;
    default: return std::nullopt;
  }
  if (!std::isfinite(r)) return std::nullopt;
  return ScalarExpr::constant(r);
}

}  // namespace

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  if (auto f = fold(Kind::add, a, b)) return *f;
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (b.kind() == Kind::negate) return ScalarExpr::raw_binary(Kind::subtract, a, b.lhs());
  return ScalarExpr::raw_binary(Kind::add, a, b);
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  if (auto f = fold(Kind::subtract, a, b)) return *f;
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (b.kind() == Kind::negate) return ScalarExpr::raw_binary(Kind::add, a, b.lhs());
  return ScalarExpr::raw_binary(Kind::subtract, a, b);
}

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  if (auto f = fold(Kind::multiply, a, b)) return *f;
  if (a.is_zero() || b.is_zero()) return ScalarExpr::constant(0.0);
  if (a.is_number(1.0)) return b;
  if (b.is_number(1.0)) return a;
  if (a.kind() == Kind::negate) return -(a.lhs() * b);
  if (b.kind() == Kind::negate) return -(a * b.lhs());
  return ScalarExpr::raw_binary(Kind::multiply, a, b);
}

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  if (auto f = fold(Kind::divide, a, b)) return *f;
  if (a.is_zero() && !b.is_zero()) return ScalarExpr::constant(0.0);
  if (b.is_number(1.0)) return a;
  if (a.kind() == Kind::negate) return -(a.lhs() / b);
  if (b.kind() == Kind::negate) return -(a / b.lhs());
  return ScalarExpr::raw_binary(Kind::divide, a, b);
}

ScalarExpr operator-(const ScalarExpr& a) {
  if (a.is_zero()) return a;
  if (a.kind() == Kind::negate) return a.lhs();
  return ScalarExpr::raw_unary(Kind::negate, a);
}

ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent) {
  if (auto f = fold(Kind::power, base, exponent)) return *f;
  if (exponent.is_zero()) return ScalarExpr::constant(1.0);
  if (exponent.is_number(1.0)) return base;
  return ScalarExpr::raw_binary(Kind::power, base, exponent);
}

ScalarExpr apply(Function f, const ScalarExpr& arg) {
  if (auto x = numeric_value(arg); x && in_domain(f, *x)) {
    const double r = apply_function(f, *x);
    // Only fold values that print back exactly as the same call would evaluate.
    if (std::isfinite(r) && (r == 0.0 || r == 1.0)) return ScalarExpr::constant(r);
  }
  return ScalarExpr::raw_call(f, arg);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view src, const ParseOptions& options) : src_(src), options_(options) {}

  ScalarExpr parse_all() {
    ScalarExpr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }
  [[noreturn]] void fail_at(const std::string& message, std::size_t at) const { throw ParseError(message, at); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  // Consumes '-' or U+2212.
  bool accept_minus() {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '-') {
      ++pos_;
      return true;
    }
    if (src_.substr(pos_, 3) == "\xE2\x88\x92") {
      pos_ += 3;
      return true;
    }
    return false;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ScalarExpr parse_expr() {
    ScalarExpr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = ScalarExpr::raw_binary(Kind::add, lhs, parse_term());
      } else if (accept_minus()) {
        lhs = ScalarExpr::raw_binary(Kind::subtract, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  ScalarExpr parse_term() {
    ScalarExpr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = ScalarExpr::raw_binary(Kind::multiply, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = ScalarExpr::raw_binary(Kind::divide, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  ScalarExpr parse_unary() {
    if (accept_minus()) return ScalarExpr::raw_unary(Kind::negate, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  ScalarExpr parse_power() {
    ScalarExpr base = parse_atom();
    if (accept('^')) return ScalarExpr::raw_binary(Kind::power, base, parse_unary());
    return base;
  }

  ScalarExpr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ScalarExpr e = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  ScalarExpr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_) fail_at("malformed number", start);
    if (!std::isfinite(value)) fail_at("number out of range", start);
    return ScalarExpr::raw_number(value);
  }

  ScalarExpr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view ident = src_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      auto f = lookup_function(ident);
      if (!f) fail_at("unknown function '" + std::string(ident) + "'", start);
      ++pos_;
      ScalarExpr arg = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return ScalarExpr::raw_call(*f, arg);
    }
    if (lookup_function(ident)) fail_at("function '" + std::string(ident) + "' requires an argument", start);
    if (ident == "pi") return ScalarExpr::raw_number(std::numbers::pi);
    if (!options_.known_names.empty() && !is_coordinate(ident) && !options_.known_names.contains(ident))
      fail_at("unknown identifier '" + std::string(ident) + "'", start);
    return ScalarExpr::variable(std::string(ident));
  }

  static bool is_coordinate(std::string_view s) {
    if (s.size() < 2 || s[0] != 'R') return false;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return s[1] != '0';
  }

  std::string_view src_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarExpr parse(std::string_view source, const ParseOptions& options) {
  return Parser(source, options).parse_all();
}

// ---------------------------------------------------------------------------
// Differentiation

ScalarExpr differentiate(const ScalarExpr& e, std::string_view name) {
  if (!e.depends_on(name)) return ScalarExpr::constant(0.0);
  switch (e.kind()) {
    case Kind::number: return ScalarExpr::constant(0.0);
    case Kind::variable: return ScalarExpr::constant(e.name() == name ? 1.0 : 0.0);
    case Kind::negate: return -differentiate(e.lhs(), name);
    case Kind::add: return differentiate(e.lhs(), name) + differentiate(e.rhs(), name);
    case Kind::subtract: return differentiate(e.lhs(), name) - differentiate(e.rhs(), name);
    case Kind::multiply: {
      const ScalarExpr u = e.lhs(), v = e.rhs();
      return differentiate(u, name) * v + u * differentiate(v, name);
    }
    case Kind::divide: {
      const ScalarExpr u = e.lhs(), v = e.rhs();
      const ScalarExpr du = differentiate(u, name), dv = differentiate(v, name);
      if (dv.is_zero()) return du / v;
      return (du * v - u * dv) / pow(v, 2.0);
    }
    case Kind::power: {
      const ScalarExpr u = e.lhs(), v = e.rhs();
      if (!v.depends_on(name)) {
        return v * pow(u, v - 1.0) * differentiate(u, name);
      }
      if (!u.depends_on(name)) {
        return e * ln(u) * differentiate(v, name);
      }
      return e * (differentiate(v, name) * ln(u) + v * differentiate(u, name) / u);
    }
    case Kind::call: {
      const ScalarExpr u = e.lhs();
      const ScalarExpr du = differentiate(u, name);
      switch (e.function()) {
        case Function::sin: return apply(Function::cos, u) * du;
        case Function::cos: return -(apply(Function::sin, u) * du);
        case Function::tan: return du / pow(apply(Function::cos, u), 2.0);
        case Function::sinh: return apply(Function::cosh, u) * du;
        case Function::cosh: return apply(Function::sinh, u) * du;
        case Function::tanh: return du / pow(apply(Function::cosh, u), 2.0);
        case Function::exp: return e * du;
        case Function::ln: return du / u;
        case Function::sqrt: return du / (2.0 * e);
        case Function::arcsin: return du / sqrt(1.0 - pow(u, 2.0));
        case Function::arccos: return -(du / sqrt(1.0 - pow(u, 2.0)));
        case Function::arctan: return du / (1.0 + pow(u, 2.0));
      }
    }
  }
  return ScalarExpr::constant(0.0);
}

ScalarExpr differentiate(const ScalarExpr& e, int axis) { return differentiate(e, coordinate_name(axis)); }

// ---------------------------------------------------------------------------
// Program

namespace {

enum Op : std::uint8_t { kPush, kLoad, kNeg, kAdd, kSub, kMul, kDiv, kPow, kCall };

}  // namespace

Program::Program(const ScalarExpr& e, std::span<const std::string> slots) {
  std::size_t depth = 0;
  auto emit = [&](auto&& self, const Node& n) -> void {
    switch (n.kind) {
      case Kind::number:
        code_.push_back({kPush, 0, 0, n.value});
        max_depth_ = std::max(max_depth_, ++depth);
        return;
      case Kind::variable: {
        std::uint32_t slot = 0;
        for (; slot < slots.size(); ++slot)
          if (slots[slot] == n.name) break;
        if (slot == slots.size()) throw EvalError("unbound name '" + n.name + "'");
        code_.push_back({kLoad, 0, slot, 0.0});
        max_depth_ = std::max(max_depth_, ++depth);
        return;
      }
      case Kind::negate:
        self(self, *n.lhs);
        code_.push_back({kNeg, 0, 0, 0.0});
        return;
      case Kind::call:
        self(self, *n.lhs);
        code_.push_back({kCall, static_cast<std::uint8_t>(n.function), 0, 0.0});
        return;
      default: {
        self(self, *n.lhs);
        self(self, *n.rhs);
        std::uint8_t op = kAdd;
        switch (n.kind) {
          case Kind::subtract: op = kSub; break;
          case Kind::multiply: op = kMul; break;
          case Kind::divide: op = kDiv; break;
          case Kind::power: op = kPow; break;
          default: break;
        }
        code_.push_back({op, 0, 0, 0.0});
        --depth;
        return;
      }
    }
  };
  emit(emit, *e.node());
}

double Program::operator()(std::span<const double> slots) const noexcept {
  constexpr std::size_t kInline = 64;
  std::array<double, kInline> inline_stack;
  std::vector<double> heap;
  double* stack = inline_stack.data();
  if (max_depth_ > kInline) {
    heap.resize(max_depth_);
    stack = heap.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case kPush: stack[sp++] = in.value; break;
      case kLoad: stack[sp++] = slots[in.slot]; break;
      case kNeg: stack[sp - 1] = -stack[sp - 1]; break;
      case kAdd: --sp; stack[sp - 1] += stack[sp]; break;
      case kSub: --sp; stack[sp - 1] -= stack[sp]; break;
      case kMul: --sp; stack[sp - 1] *= stack[sp]; break;
      case kDiv:
        --sp;
        if (stack[sp] == 0.0) return std::nan("");
        stack[sp - 1] /= stack[sp];
        break;
      case kPow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
      case kCall: {
        const auto f = static_cast<Function>(in.fn);
        if (!in_domain(f, stack[sp - 1])) return std::nan("");
        stack[sp - 1] = apply_function(f, stack[sp - 1]);
        break;
      }
    }
    if (!std::isfinite(stack[sp - 1])) return std::nan("");
  }
  return sp == 1 ? stack[0] : std::nan("");
}

}  // namespace shapelab::expr
