#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "shapelab/expr.hpp"

using namespace shapelab;
using namespace shapelab::expr;

namespace {

ScalarExpr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> num(0.1, 3.0);
  const int choice = depth <= 0 ? pick(rng) % 3 : pick(rng);
  auto sub = [&] { return random_tree(rng, depth - 1); };
  switch (choice) {
    case 0: return ScalarExpr::raw_number(std::round(num(rng) * 100) / 100);
    case 1: return ScalarExpr::variable("R1");
    case 2: return ScalarExpr::variable("R2");
    case 3: return ScalarExpr::raw_binary(Kind::add, sub(), sub());
    case 4: return ScalarExpr::raw_binary(Kind::multiply, sub(), sub());
    case 5: return ScalarExpr::raw_binary(Kind::subtract, sub(), sub());
    // Denominators and radicands kept positive.
    case 6:
      return ScalarExpr::raw_binary(Kind::divide, sub(),
                                    ScalarExpr::raw_binary(Kind::add, ScalarExpr::raw_number(2.5),
                                                           ScalarExpr::raw_call(Function::cos, sub())));
    case 7: {
      std::uniform_int_distribution<int> f(0, 4);
      constexpr Function safe[] = {Function::sin, Function::cos, Function::tanh, Function::arctan, Function::exp};
      const Function fn = safe[f(rng)];
      if (fn == Function::exp) return ScalarExpr::raw_call(fn, ScalarExpr::raw_call(Function::sin, sub()));
      return ScalarExpr::raw_call(fn, sub());
    }
    case 8:
      return ScalarExpr::raw_call(
          Function::ln, ScalarExpr::raw_binary(Kind::add, ScalarExpr::raw_number(1.0),
                                               ScalarExpr::raw_binary(Kind::power, sub(), ScalarExpr::raw_number(2))));
    default: return ScalarExpr::raw_unary(Kind::negate, sub());
  }
}

}  // namespace

TEST_CASE("parse builds the expected trees") {
  const auto e = parse("sin(R1)^2");
  REQUIRE(e.kind() == Kind::power);
  CHECK(e.lhs().kind() == Kind::call);
  CHECK(e.lhs().function() == Function::sin);
  CHECK(e.lhs().lhs().name() == "R1");
  CHECK(e.rhs().is_number(2.0));

  const auto m = parse("1 + c/cos(R1)^2");
  REQUIRE(m.kind() == Kind::add);
  CHECK(m.rhs().kind() == Kind::divide);
  CHECK(m.rhs().rhs().kind() == Kind::power);

  const auto cubic = parse("R1^3 + a*R1^2 + b*R1 + c");
  CHECK(cubic.free_names() == std::set<std::string>{"R1", "a", "b", "c"});
}

TEST_CASE("operator precedence and associativity") {
  CHECK(parse("1 - 2 - 3").eval({}) == -4.0);
  CHECK(parse("8/2/2").eval({}) == 2.0);
  CHECK(parse("-2^2").eval({}) == -4.0);
  CHECK(parse("2^3^2").eval({}) == 512.0);
  CHECK(parse("2*-3").eval({}) == -6.0);
  CHECK(parse("2 \xE2\x88\x92 3").eval({}) == -1.0);
  CHECK(parse("pi").eval({}) == std::numbers::pi);
  CHECK(parse("1.5e-3*2").eval({}) == doctest::Approx(3e-3));
}

TEST_CASE("eval examples") {
  CHECK(parse("sin(R1)").eval({{"R1", std::numbers::pi / 2}}) == 1.0);
  CHECK(parse("R1^3+a*R1^2+b*R1+c").eval({{"R1", 1}, {"a", 0}, {"b", 0}, {"c", 0}}) == 1.0);
  CHECK(parse("2/cosh(R1+R2)^2").eval({{"R1", 0}, {"R2", 0}}) == 2.0);
}

TEST_CASE("eval errors name the offending subexpression") {
  CHECK_THROWS_AS(parse("R1 + x").eval({{"R1", 1.0}}), EvalError);
  try {
    parse("1 + sqrt(R1)").eval({{"R1", -1.0}});
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("sqrt(R1)") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("1/(R1-1)").eval({{"R1", 1.0}}), EvalError);
  CHECK_THROWS_AS(parse("ln(R1)").eval({{"R1", 0.0}}), EvalError);
  CHECK_THROWS_AS(parse("arcsin(R1)").eval({{"R1", 1.5}}), EvalError);
}

TEST_CASE("parse errors carry byte offsets") {
  try {
    parse("1 + * 2");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse("foo(R1)"), ParseError);
  CHECK_THROWS_AS(parse("sin"), ParseError);
  CHECK_THROWS_AS(parse("(R1"), ParseError);
  CHECK_THROWS_AS(parse("R1 R2"), ParseError);
  ParseOptions strict;
  strict.known_names = {"c"};
  CHECK_NOTHROW(parse("c*R2", strict));
  CHECK_THROWS_AS(parse("d*R2", strict), ParseError);
}

TEST_CASE("symbolic derivatives") {
  CHECK(differentiate(parse("sin(R1)"), "R1").str() == "cos(R1)");
  CHECK(differentiate(parse("sin(R1)"), "R2").str() == "0");
  CHECK(differentiate(parse("5"), 0).is_zero());

  const auto cubic = parse("R1^3 + a*R1^2 + b*R1 + c");
  const auto d = differentiate(cubic, "R1");
  const auto expected = parse("3*R1^2 + 2*a*R1 + b");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 5; ++i) {
    Bindings b{{"R1", u(rng)}, {"a", u(rng)}, {"b", u(rng)}, {"c", u(rng)}};
    CHECK(d.eval(b) == doctest::Approx(expected.eval(b)).epsilon(1e-12));
    const double h = 1e-5;
    auto shifted = [&](double dx) {
      Bindings c = b;
      c["R1"] += dx;
      return cubic.eval(c);
    };
    const double fd = (shifted(h) - shifted(-h)) / (2 * h);
    CHECK(std::abs(fd - d.eval(b)) <= 1e-6 * (1 + std::abs(d.eval(b))));
  }
}

TEST_CASE("property: print then parse is the identity on trees") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const auto e = random_tree(rng, 4);
    const auto back = parse(e.str());
    INFO(e.str());
    CHECK(back == e);
  }
  const auto folded = differentiate(parse("R1^2*sin(R2) - 3/R1"), 0);
  CHECK(parse(folded.str()) == folded);
}

TEST_CASE("property: symbolic derivative matches central differences") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const auto e = random_tree(rng, 4);
    const Bindings b{{"R1", pt(rng)}, {"R2", pt(rng)}};
    for (int axis = 0; axis < 2; ++axis) {
      const auto d = differentiate(e, axis);
      const std::string v = coordinate_name(axis);
      const double h = 1e-5;
      Bindings p = b, m = b;
      p[v] += h;
      m[v] -= h;
      const double fd = (e.eval(p) - e.eval(m)) / (2 * h);
      const double exact = d.eval(b);
      INFO(e.str());
      CHECK(std::abs(exact - fd) <= 1e-6 * (1 + std::abs(exact)));
      ++checked;
    }
  }
  CHECK(checked == 200);
}

TEST_CASE("compiled programs agree with tree evaluation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  const auto slots = coordinate_slots(2);
  for (int i = 0; i < 50; ++i) {
    const auto e = random_tree(rng, 5);
    const Program prog(e, slots);
    const double x[2] = {pt(rng), pt(rng)};
    const double tree = e.eval({{"R1", x[0]}, {"R2", x[1]}});
    CHECK(prog(x) == tree);
  }
  const Program bad(parse("sqrt(R1)"), slots);
  const double neg[2] = {-1.0, 0.0};
  CHECK(std::isnan(bad(neg)));
  CHECK_THROWS_AS(Program(parse("a*R1"), slots), EvalError);
}

TEST_CASE("bind and substitute") {
  const auto e = parse("a*R1 + b").bind({{"a", 2.0}, {"b", -1.0}});
  CHECK(e.free_names() == std::set<std::string>{"R1"});
  CHECK(e.eval({{"R1", 3.0}}) == 5.0);
  const auto s = parse("1 + psi").substitute("psi", parse("R2^2"));
  CHECK(s.eval({{"R2", 2.0}}) == 5.0);
}
