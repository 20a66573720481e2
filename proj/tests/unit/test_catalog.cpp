#include <cmath>
#include <random>

#include "doctest.h"
#include "shapelab/catalog.hpp"

using namespace shapelab;
using expr::parse;

namespace {

double max_abs_diff(const ScalarField& a, const ScalarField& b, const Grid& g) {
  const Field x = tabulate(a, g), y = tabulate(b, g);
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double at(const ScalarField& f, double u, double v) { return symbolic(f).eval({{"R1", u}, {"R2", v}}); }

}  // namespace

TEST_CASE("every example has curvature one for random parameter draws") {
  std::mt19937_64 rng(7);
  for (const auto& name : example_names()) {
    CAPTURE(name);
    for (int draw = 0; draw < 5; ++draw) {
      CAPTURE(draw);
      const auto params = random_params(name, rng);
      const auto b = make_example(name, params);
      CHECK(b.metric.riemannian());
      if (b.metric.dim() == 2) {
        CHECK(curvature_one_residual(b.metric).max() <= 1e-6);
      } else {
        std::vector<expr::ScalarExpr> H;
        for (const auto& g : b.metric.coefficients()) H.push_back(expr::sqrt(symbolic(g)));
        const auto rd = RotationData::from_lame(H, b.metric.grid());
        CHECK(lame_curvature_residual(rd, 1.0).max() <= 1e-6);
      }
    }
  }
}

TEST_CASE("printed Codazzi coefficients match the metric") {
  std::mt19937_64 rng(11);
  for (const auto& name : example_names()) {
    CAPTURE(name);
    const auto b = make_example(name, random_params(name, rng));
    const auto c = christoffel_ab(b.metric);
    REQUIRE(c.n == b.codazzi.n);
    for (int i = 0; i < c.n; ++i)
      for (int j = 0; j < c.n; ++j)
        if (i != j) CHECK(max_abs_diff(c.chi[i][j], b.codazzi.chi[i][j], b.metric.grid()) <= 1e-8);
  }
}

TEST_CASE("Codazzi coefficients do not depend on deformation constants") {
  for (const char* name : {"quadric", "dupin", "two_param", "one_param", "hyperquadric"}) {
    CAPTURE(name);
    const auto b = make_example(name);
    for (const auto& row : b.codazzi.chi)
      for (const auto& f : row)
        for (const auto& [k, v] : b.params.constants) CHECK_FALSE(symbolic(f).depends_on(k));
  }
}

TEST_CASE("printed coefficients of selected examples") {
  const auto d = make_example("dupin");
  CHECK(at(d.codazzi.a(), 2.5, 0.5) == doctest::Approx(0.5));
  CHECK(at(d.codazzi.b(), 2.5, 0.5) == doctest::Approx(-0.5));
  const auto o = make_example("one_param");
  CHECK(at(o.codazzi.a(), 0.2, 0.3) == doctest::Approx(-std::tanh(0.5)));
  CHECK(at(o.codazzi.b(), 0.2, 0.3) == doctest::Approx(-std::tanh(0.5)));
}

TEST_CASE("closed-form curvatures") {
  const auto q = closed_form_curvatures("quadric");
  CHECK(at(q.k[0], 4, 9) == doctest::Approx(1.0 / 24).epsilon(1e-14));
  CHECK(at(q.k[1], 4, 9) == doctest::Approx(1.0 / 54).epsilon(1e-14));
  const auto d = closed_form_curvatures("dupin");
  CHECK(at(d.k[0], 2.5, 0.5) == 0.5);
  CHECK(at(d.k[1], 2.5, 0.5) == 2.5);
  CHECK_THROWS_AS(closed_form_curvatures("monge"), ValidationError);
  try {
    closed_form_curvatures("moulding");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("cot") != std::string::npos);
  }
  CHECK(make_example("monge").ode_description.find("cot(R1)") != std::string::npos);
  CHECK_FALSE(make_example("moulding").curvatures.has_value());
  CHECK(make_example("one_param").curvatures.has_value());
}

TEST_CASE("conf_revolution with q = 1/p is the default branch") {
  ExampleParams p;
  p.functions["p"] = parse("1 + 0.1*sin(R2)");
  const auto implicit = closed_form_curvatures("conf_revolution", p);
  p.functions["q"] = parse("1/(1 + 0.1*sin(R2))");
  const auto explicit_q = closed_form_curvatures("conf_revolution", p);
  for (double u : {2.2, 2.7})
    for (double v : {0.1, 0.6}) {
      CHECK(at(implicit.k[0], u, v) == doctest::Approx(at(explicit_q.k[0], u, v)));
      CHECK(at(implicit.k[1], u, v) == doctest::Approx(at(explicit_q.k[1], u, v)));
    }
}

TEST_CASE("conf_revolution with p = R2 and inverted coordinates gives Dupin coefficients") {
  ExampleParams p;
  p.functions["p"] = parse("R2");
  const auto conf = make_example("conf_revolution", p);
  const auto dupin = make_example("dupin");
  // Under R^i = 1/S^i, chi_ij transforms to -chi_ij / (S^j)^2.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s1(2.0, 3.0), s2(0.2, 1.0);
  for (int t = 0; t < 20; ++t) {
    const double u = s1(rng), v = s2(rng);
    CHECK(-at(conf.codazzi.a(), 1 / u, 1 / v) / (v * v) == doctest::Approx(at(dupin.codazzi.a(), u, v)));
    CHECK(-at(conf.codazzi.b(), 1 / u, 1 / v) / (u * u) == doctest::Approx(at(dupin.codazzi.b(), u, v)));
  }
}

TEST_CASE("hyperquadric with n = 2 degenerates to the quadric example") {
  ExampleParams hp;
  hp.constants = {{"n", 2}, {"a1", 1}, {"a2", 2}, {"a3", 3}};
  const auto h = make_example("hyperquadric", hp);
  const auto q = make_example("quadric");
  REQUIRE(h.metric.dim() == 2);
  const Grid& g = q.metric.grid();
  CHECK(h.metric.grid() == g);
  for (int i = 0; i < 2; ++i) CHECK(max_abs_diff(h.metric.G(i), q.metric.G(i), g) <= 1e-12);
  CHECK(max_abs_diff(h.codazzi.a(), q.codazzi.a(), g) <= 1e-12);
  CHECK(max_abs_diff(h.codazzi.b(), q.codazzi.b(), g) <= 1e-12);
}

TEST_CASE("family dimensions") {
  const std::map<std::string, FamilyDim> expected = {
      {"monge", {1, 1}},     {"moulding", {0, 1}},  {"quadric", {3, 0}},  {"dupin", {3, 0}},
      {"conf_revolution", {3, 0}}, {"two_param", {2, 0}}, {"one_param", {1, 0}}, {"hyperquadric", {4, 0}}};
  for (const auto& name : example_names()) {
    CAPTURE(name);
    CHECK(make_example(name).family_dim == expected.at(name));
  }
}

TEST_CASE("parameter validation") {
  ExampleParams bad;
  bad.constants["zeta"] = 1;
  CHECK_THROWS_AS(make_example("quadric", bad), ValidationError);
  CHECK_THROWS_AS(make_example("no_such_example"), ValidationError);
  GridDomain crossing{{1.0, 1.5}, {2.0, 3.0}, {16, 16}};
  CHECK_THROWS_AS(make_example("quadric", {}, crossing), ValidationError);
}
