#include <cmath>
#include <numbers>

#include "doctest.h"
#include "shapelab/catalog.hpp"
#include "shapelab/metric.hpp"

using namespace shapelab;
using expr::parse;

namespace {

Grid square(double lo0, double hi0, double lo1, double hi1, int n = 32) {
  return Grid::from_domain({{lo0, lo1}, {hi0, hi1}, {n, n}});
}

DiagonalMetric sym(const char* g11, const char* g22, const Grid& g) {
  return DiagonalMetric({parse(g11), parse(g22)}, g);
}

double max_abs_diff(const ScalarField& a, const ScalarField& b, const Grid& g) {
  const Field x = tabulate(a, g), y = tabulate(b, g);
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

// Independent oracle: nested fourth-order differences of H_i = sqrt(G_ii).
double fd_curvature(const char* g11, const char* g22, double u, double v) {
  const auto G1 = parse(g11), G2 = parse(g22);
  auto H1 = [&](double x, double y) { return std::sqrt(G1.eval({{"R1", x}, {"R2", y}})); };
  auto H2 = [&](double x, double y) { return std::sqrt(G2.eval({{"R1", x}, {"R2", y}})); };
  const double h = 1e-3;
  auto d = [&](auto f, double x, double y, int axis) {
    auto at = [&](double s) { return axis == 0 ? f(x + s, y) : f(x, y + s); };
    return (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
  };
  auto A = [&](double x, double y) { return d(H2, x, y, 0) / H1(x, y); };
  auto B = [&](double x, double y) { return d(H1, x, y, 1) / H2(x, y); };
  return -(d(A, u, v, 0) + d(B, u, v, 1)) / (H1(u, v) * H2(u, v));
}

}  // namespace

TEST_CASE("christoffel fields of the round sphere and a constant metric") {
  const Grid g = square(0.3, 1.2, 0, 1);
  const auto c = christoffel_ab(sym("1", "sin(R1)^2", g));
  CHECK(max_abs_diff(c.a(), constant_field(0.0), g) == 0.0);
  CHECK(max_abs_diff(c.b(), parse("cos(R1)/sin(R1)"), g) < 1e-12);
  const auto flat = christoffel_ab(sym("1", "1", g));
  CHECK(symbolic(flat.a()).is_zero());
  CHECK(symbolic(flat.b()).is_zero());
}

TEST_CASE("christoffel fields of the quadric metric") {
  const auto b = make_example("quadric");
  const auto c = christoffel_ab(b.metric);
  const Grid& g = b.metric.grid();
  CHECK(max_abs_diff(c.a(), parse("1/(2*(R2 - R1))"), g) < 1e-10);
  CHECK(max_abs_diff(c.b(), parse("1/(2*(R1 - R2))"), g) < 1e-10);
}

TEST_CASE("christoffel_ab agrees with d_j ln sqrt(G_ii) by differences") {
  const auto b = make_example("conf_revolution");
  const auto c = christoffel_ab(b.metric);
  const auto& G1 = symbolic(b.metric.G(0));
  const double h = 1e-4;
  for (double u : {2.2, 2.5, 2.8}) {
    for (double v : {0.2, 0.5, 0.8}) {
      auto lnH = [&](double y) { return 0.5 * std::log(G1.eval({{"R1", u}, {"R2", y}})); };
      const double fd = (lnH(v - 2 * h) - 8 * lnH(v - h) + 8 * lnH(v + h) - lnH(v + 2 * h)) / (12 * h);
      CHECK(std::abs(symbolic(c.a()).eval({{"R1", u}, {"R2", v}}) - fd) < 1e-9);
    }
  }
}

TEST_CASE("Gaussian curvature") {
  const Grid g = square(0.3, 1.2, 0, 1);
  const double pt[2] = {std::numbers::pi / 3, 0.5};
  CHECK(gaussian_curvature(sym("1", "sin(R1)^2", g), pt) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gaussian_curvature(sym("1", "1", g), pt) == 0.0);
  const double k = gaussian_curvature(sym("1", "exp(2*R1)", g), pt);
  CHECK(k == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(k - fd_curvature("1", "exp(2*R1)", pt[0], pt[1])) < 1e-8);
  const auto b = make_example("dupin");
  const double q[2] = {2.4, 0.3};
  CHECK(std::abs(gaussian_curvature(b.metric, q) - fd_curvature(symbolic(b.metric.G(0)).str().c_str(),
                                                                symbolic(b.metric.G(1)).str().c_str(), q[0], q[1])) <
        1e-7);
}

TEST_CASE("curvature-one residual") {
  const Grid g = square(0.3, 1.2, 0, 1, 64);
  const auto monge = sym("1/(1 + 0.3/cos(R1)^2)", "sin(R1)^2/(1 + R2^2)", g);
  CHECK(curvature_one_residual(monge).max() <= 1e-8);

  ExampleParams two;
  two.constants = {{"a", 0.2}, {"c", 1.5}};
  const auto b = make_example("two_param", two);
  CHECK_FALSE(b.metric.riemannian());
  CHECK(curvature_one_residual(b.metric).max() <= 1e-8);

  const auto flat = curvature_one_residual(sym("1", "1", g));
  CHECK(flat.max() == doctest::Approx(1.0));
  CHECK(flat.equations[0].mean == doctest::Approx(1.0));
  CHECK(flat.excluded == 0);
}

TEST_CASE("tabulated metrics use finite differences and converge under refinement") {
  std::vector<double> err;
  for (int n : {32, 64, 128}) {
    const Grid g = square(0.3, 1.2, 0, 1, n);
    const DiagonalMetric m({sample(parse("1"), g), sample(parse("sin(R1)^2"), g)}, g);
    CHECK_FALSE(m.symbolic());
    err.push_back(curvature_one_residual(m).max());
  }
  CHECK(err[0] / err[1] > 8.0);
  CHECK(err[1] / err[2] > 8.0);
  CHECK(err[2] < 2e-3);
}

TEST_CASE("metric validation reports the locus") {
  const Grid g = square(-1, 1, 0, 1);
  try {
    sym("R1", "1", g);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("changes sign") != std::string::npos);
    CHECK(std::string(e.what()).find("R1=") != std::string::npos);
  }
  CHECK_THROWS_AS(sym("1/R2", "1", square(-1, 1, -0.5, 0.5, 9)), ValidationError);
}

TEST_CASE("flatness of classical coordinate systems") {
  const Grid g = Grid::from_domain({{1, 0.5, 0}, {2, 1.5, 1}, {16, 16, 16}});
  auto rd = RotationData::from_lame({parse("1"), parse("R1"), parse("R1*sin(R2)")}, g);
  CHECK(flatness_residual(rd).max() <= 1e-8);
  CHECK(lame_consistency_residual(rd).max() <= 1e-8);
  CHECK(flatness_residual(RotationData::trivial(3, g)).max() == 0.0);

  // Tabulated fields take the finite-difference path.
  RotationData tab = rd;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) tab.beta[i][j] = tabulate(rd.beta[i][j], g);
  CHECK(flatness_residual(tab).max() <= 1e-5);
}

TEST_CASE("pencil evaluation and admissible interval") {
  const Grid g = square(1, 2, 1, 2);
  const MetricPencil p({parse("1"), parse("1")}, {parse("R1"), parse("2*R2")}, g);
  CHECK(p.admissible_interval().first == doctest::Approx(-g.origin(0)));
  CHECK_THROWS_AS(p.evaluate(-1.5), ValidationError);
  CHECK_NOTHROW(p.evaluate(0.0));
  CHECK_THROWS_AS(MetricPencil({parse("1"), parse("1")}, {parse("R2"), parse("R2")}, g), ValidationError);
}
