#include <cmath>
#include <random>

#include "doctest.h"
#include "shapelab/codazzi.hpp"

using namespace shapelab;
using expr::parse;
using expr::ScalarExpr;

namespace {

ScalarExpr swap12(const ScalarExpr& e) {
  return e.substitute("R1", ScalarExpr::variable("swap_tmp"))
      .substitute("R2", ScalarExpr::coordinate(0))
      .substitute("swap_tmp", ScalarExpr::coordinate(1));
}

double max_abs_diff(const ScalarField& a, const ScalarField& b, const Grid& g) {
  const Field x = tabulate(a, g), y = tabulate(b, g);
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

// k^i restricted to its own coordinate line through the grid origin.
std::vector<ScalarExpr> boundary_from(const CurvatureField& k, const Grid& g) {
  std::vector<ScalarExpr> out;
  for (int i = 0; i < g.dim(); ++i) {
    expr::Bindings b;
    for (int a = 0; a < g.dim(); ++a)
      if (a != i) b[expr::coordinate_name(a)] = g.origin(a);
    out.push_back(symbolic(k.k[i]).bind(b));
  }
  return out;
}

}  // namespace

TEST_CASE("closed-form radii satisfy the printed Codazzi equations") {
  const auto q = make_example("quadric");
  CHECK(codazzi_residual(*q.curvatures, q.codazzi, q.metric.grid()).max() <= 1e-8);
  const auto o = make_example("one_param");
  CHECK(codazzi_residual(*o.curvatures, o.codazzi, o.metric.grid()).max() <= 1e-8);
}

TEST_CASE("separated radii solve the system with vanishing coefficients") {
  const Grid g = Grid::from_domain({{0, 0}, {1, 1}, {32, 32}});
  CurvatureField k{{parse("1 + R1^2"), parse("3 + sin(R2)")}};
  const auto r = codazzi_residual(k, CodazziCoeffs::from_ab(ScalarExpr::constant(0), ScalarExpr::constant(0)), g);
  CHECK(r.max() == 0.0);
  CHECK(r.excluded == 0);
}

TEST_CASE("umbilic nodes are excluded and counted") {
  const Grid g = Grid::from_domain({{0, 0}, {1, 1}, {9, 9}, 0.0});
  CurvatureField k{{parse("R1"), parse("R2")}};
  const auto r = codazzi_residual(k, CodazziCoeffs::from_ab(ScalarExpr::constant(0), ScalarExpr::constant(0)), g);
  CHECK(r.excluded == 9);
}

TEST_CASE("closed forms close the loop through coefficients recomputed from the metric") {
  std::mt19937_64 rng(5);
  for (const auto& name : example_names()) {
    if (name == "monge" || name == "moulding") continue;
    CAPTURE(name);
    for (int draw = 0; draw < 3; ++draw) {
      const auto b = make_example(name, random_params(name, rng));
      CHECK(codazzi_residual(*b.curvatures, christoffel_ab(b.metric), b.metric.grid()).max() <= 1e-8);
    }
  }
}

TEST_CASE("integration reproduces the quadric radii") {
  const auto q = make_example("quadric");
  const Grid& g = q.metric.grid();
  const auto s = integrate_codazzi(q.codazzi, boundary_from(*q.curvatures, g), g);
  for (int i = 0; i < 2; ++i) CHECK(max_abs_diff(s.k.k[i], q.curvatures->k[i], g) <= 1e-5);
  CHECK(codazzi_residual(s.k, q.codazzi, g).max() <= 1e-5);
  CHECK(s.march.richardson_ratio >= 3.5);
}

TEST_CASE("vanishing coefficients extend the boundary data as a product") {
  const Grid g = Grid::from_domain({{0, 0}, {1, 1}, {16, 16}});
  const auto zero = CodazziCoeffs::from_ab(ScalarExpr::constant(0), ScalarExpr::constant(0));
  const auto s = integrate_codazzi(zero, {parse("1 + R1"), parse("2 + R2")}, g);
  CHECK(max_abs_diff(s.k.k[0], parse("1 + R1"), g) <= 1e-13);
  CHECK(max_abs_diff(s.k.k[1], parse("2 + R2"), g) <= 1e-13);
}

TEST_CASE("integration reproduces the general conf_revolution solution") {
  ExampleParams p;
  p.functions["p"] = parse("1 + 0.1*sin(R2)");
  p.functions["q"] = parse("2 + 0.3*R2");
  const auto b = make_example("conf_revolution", p);
  const auto exact = closed_form_curvatures("conf_revolution", p);
  const Grid& g = b.metric.grid();
  CHECK(codazzi_residual(exact, b.codazzi, g).max() <= 1e-8);
  const auto s = integrate_codazzi(b.codazzi, boundary_from(exact, g), g);
  for (int i = 0; i < 2; ++i) CHECK(max_abs_diff(s.k.k[i], exact.k[i], g) <= 1e-5);
}

TEST_CASE("integration does not depend on the marching order") {
  const auto q = make_example("dupin");
  const Grid& g = q.metric.grid();
  const auto boundary = boundary_from(*q.curvatures, g);
  const auto s = integrate_codazzi(q.codazzi, boundary, g);

  // Transposed problem: axis 1 becomes the slow marching axis.
  const Grid t({g.origin(1), g.origin(0)}, {g.step(1), g.step(0)}, {g.count(1), g.count(0)});
  const auto ct = CodazziCoeffs::from_ab(swap12(symbolic(q.codazzi.b())), swap12(symbolic(q.codazzi.a())));
  const auto st = integrate_codazzi(ct, {swap12(boundary[1]), swap12(boundary[0])}, t);
  double diff = 0;
  for (int i = 0; i < g.count(0); ++i)
    for (int j = 0; j < g.count(1); ++j) {
      diff = std::max(diff, std::abs(std::get<Field>(s.k.k[0]).at({i, j, 0}) -
                                     std::get<Field>(st.k.k[1]).at({j, i, 0})));
      diff = std::max(diff, std::abs(std::get<Field>(s.k.k[1]).at({i, j, 0}) -
                                     std::get<Field>(st.k.k[0]).at({j, i, 0})));
    }
  CHECK(diff <= 1e-6);
}

TEST_CASE("a sign change of k1 - k2 aborts with the locus") {
  const Grid g = Grid::from_domain({{0, 0}, {1, 1}, {16, 16}});
  const auto zero = CodazziCoeffs::from_ab(ScalarExpr::constant(0), ScalarExpr::constant(0));
  try {
    integrate_codazzi(zero, {parse("R1"), parse("0.5")}, g);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("changes sign") != std::string::npos);
    CHECK(std::string(e.what()).find("R1=0.5") != std::string::npos);
  }
  CHECK_THROWS_AS(integrate_codazzi(zero, {parse("R2"), parse("R2")}, g), ValidationError);
}

TEST_CASE("affine combinations of S-deformation metrics") {
  const auto q1 = make_example("quadric");
  ExampleParams other;
  const double r1 = 0.98, r2 = 1.97, r3 = 3.02;
  other.constants = {{"a", -(r1 + r2 + r3)}, {"b", r1 * r2 + r1 * r3 + r2 * r3}, {"c", -r1 * r2 * r3}};
  const auto q2 = make_example("quadric", other);
  CHECK(sdeform_span_check(q1.metric, q2.metric, 0.5).max() <= 1e-6);
  const auto same = sdeform_span_check(q1.metric, q1.metric, 0.3);
  CHECK(same.max() == doctest::Approx(curvature_one_residual(q1.metric).max()).epsilon(1e-6));
  CHECK_THROWS_AS(sdeform_span_check(q1.metric, make_example("dupin", {}, q1.domain).metric, 0.5), ValidationError);
}
