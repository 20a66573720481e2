#pragma once

// Closed-form scalar expressions over the coordinates R1..Rn and named
// constants: parsing, printing, evaluation and exact symbolic derivatives.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shapelab/errors.hpp"

namespace shapelab::expr {

enum class Kind : std::uint8_t { number, variable, negate, add, subtract, multiply, divide, power, call };

enum class Function : std::uint8_t { sin, cos, tan, sinh, cosh, tanh, exp, ln, sqrt, arcsin, arccos, arctan };

std::string_view function_name(Function f);

using Bindings = std::map<std::string, double, std::less<>>;

struct Node;

/// Immutable expression tree. Copies share structure.
///
/// Number nodes are always non-negative; negative constants are stored as
/// negate(number) so that printing and re-parsing reproduces the same tree.
class ScalarExpr {
 public:
  ScalarExpr();  // the constant 0

  static ScalarExpr constant(double value);
  static ScalarExpr variable(std::string name);
  /// Coordinate R<axis+1>.
  static ScalarExpr coordinate(int axis);

  Kind kind() const;
  double value() const;
  const std::string& name() const;
  Function function() const;
  ScalarExpr lhs() const;
  ScalarExpr rhs() const;

  bool is_number() const { return kind() == Kind::number; }
  bool is_number(double v) const { return is_number() && value() == v; }
  bool is_zero() const { return is_number(0.0); }

  double eval(const Bindings& bindings) const;
  std::string str() const;

  bool depends_on(std::string_view name) const;
  std::set<std::string> free_names() const;

  ScalarExpr substitute(std::string_view name, const ScalarExpr& replacement) const;
  /// Replace every name present in `bindings` by its numeric value.
  ScalarExpr bind(const Bindings& bindings) const;

  std::size_t node_count() const;

  friend bool operator==(const ScalarExpr& a, const ScalarExpr& b);
  friend bool operator!=(const ScalarExpr& a, const ScalarExpr& b) { return !(a == b); }

  /// Build nodes without constant folding. Used by the parser.
  static ScalarExpr raw_unary(Kind kind, const ScalarExpr& operand);
  static ScalarExpr raw_binary(Kind kind, const ScalarExpr& lhs, const ScalarExpr& rhs);
  static ScalarExpr raw_call(Function f, const ScalarExpr& arg);
  static ScalarExpr raw_number(double value);

  const Node* node() const { return node_.get(); }

 private:
  explicit ScalarExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Folding constructors: x+0 -> x, 1*x -> x, number op number -> number, ...
ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b);
ScalarExpr operator-(const ScalarExpr& a);
ScalarExpr pow(const ScalarExpr& base, const ScalarExpr& exponent);
ScalarExpr apply(Function f, const ScalarExpr& arg);
inline ScalarExpr operator+(const ScalarExpr& a, double b) { return a + ScalarExpr::constant(b); }
inline ScalarExpr operator+(double a, const ScalarExpr& b) { return ScalarExpr::constant(a) + b; }
inline ScalarExpr operator-(const ScalarExpr& a, double b) { return a - ScalarExpr::constant(b); }
inline ScalarExpr operator-(double a, const ScalarExpr& b) { return ScalarExpr::constant(a) - b; }
inline ScalarExpr operator*(double a, const ScalarExpr& b) { return ScalarExpr::constant(a) * b; }
inline ScalarExpr operator*(const ScalarExpr& a, double b) { return a * ScalarExpr::constant(b); }
inline ScalarExpr operator/(const ScalarExpr& a, double b) { return a / ScalarExpr::constant(b); }
inline ScalarExpr operator/(double a, const ScalarExpr& b) { return ScalarExpr::constant(a) / b; }
inline ScalarExpr pow(const ScalarExpr& base, double exponent) { return pow(base, ScalarExpr::constant(exponent)); }
inline ScalarExpr sqrt(const ScalarExpr& a) { return apply(Function::sqrt, a); }
inline ScalarExpr sin(const ScalarExpr& a) { return apply(Function::sin, a); }
inline ScalarExpr cos(const ScalarExpr& a) { return apply(Function::cos, a); }
inline ScalarExpr ln(const ScalarExpr& a) { return apply(Function::ln, a); }

struct ParseOptions {
  /// When non-empty, identifiers other than coordinates R<k>, `pi` and these
  /// names are rejected as unknown.
  std::set<std::string, std::less<>> known_names;
};

/// Grammar: expr := term (("+"|"-") term)*; term := unary (("*"|"/") unary)*;
/// unary := "-" unary | power; power := atom ("^" unary)?;
/// atom := number | ident | ident "(" expr ")" | "(" expr ")".
/// The Unicode minus sign U+2212 is accepted as "-".
ScalarExpr parse(std::string_view source, const ParseOptions& options = {});

/// Exact derivative with respect to `name`.
ScalarExpr differentiate(const ScalarExpr& e, std::string_view name);
ScalarExpr differentiate(const ScalarExpr& e, int axis);

std::string coordinate_name(int axis);

/// Flattened postfix form of an expression with names resolved to slots.
/// Evaluation never throws: domain violations and non-finite intermediates
/// yield NaN. Safe to share between threads.
class Program {
 public:
  Program() = default;
  /// Names not listed in `slots` must already be bound (throws EvalError otherwise).
  Program(const ScalarExpr& e, std::span<const std::string> slots);

  double operator()(std::span<const double> slots) const noexcept;

 private:
  struct Instr {
    std::uint8_t op;
    std::uint8_t fn;
    std::uint32_t slot;
    double value;
  };
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

/// Slot names R1..Rn.
std::vector<std::string> coordinate_slots(int n);

}  // namespace shapelab::expr
