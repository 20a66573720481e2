#include <cmath>

#include "doctest.h"
#include "shapelab/errors.hpp"
#include "shapelab/frames.hpp"
#include "shapelab/lame.hpp"

using namespace shapelab;
using expr::parse;
using expr::ScalarExpr;

namespace {

const Ex8Solution& ex8() {
  static const Ex8Solution s =
      solve_goursat_ex8(parse("0.3 + 0.2*R2"), parse("0.3 + 0.2*R1"), Grid({0, 0}, {1.0 / 64, 1.0 / 64}, {65, 65}));
  return s;
}

// The two-dimensional Goursat solution with eta shifted by one, which leaves its system unchanged.
RotationData ex8_shifted() {
  RotationData rd = ex8().rd;
  rd.eta = {ScalarExpr::constant(0.5), ScalarExpr::constant(1.5)};
  return rd;
}

const RotationData& triple_rd() {
  static const RotationData rd = triple_to_rotation(solve_triple_s2(
      parse("1 + 0.2*R1"), parse("0.1*R2"), parse("0.05 + 0.1*R3"), Grid({0, 0, 0}, {0.025, 0.025, 0.025}, {17, 17, 17}),
      {1.0, 2.0, 4.0}));
  return rd;
}

}  // namespace

TEST_CASE("trivial rotation data gives a constant frame and an affine radius-vector") {
  const Grid g({0.5, 1.0}, {0.1, 0.1}, {9, 9});
  RotationData rd = RotationData::trivial(2, g);
  rd.eta = {ScalarExpr::constant(1.0), ScalarExpr::constant(3.0)};
  const auto ff = integrate_frame(rd, 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto x = g.point(k);
    CHECK(ff.phi(k, 0)[0] == doctest::Approx(1.0));
    CHECK(ff.phi(k, 1)[0] == doctest::Approx(0.0));
    CHECK(ff.r(k)[0] == doctest::Approx((x[0] - 0.5) / std::sqrt(2.0)));
    CHECK(ff.r(k)[1] == doctest::Approx((x[1] - 1.0) / 2.0));
  }
  const auto shape = hypersurface_shape(ff, 1, 4);
  for (const auto& k : shape.weingarten.k)
    for (double v : std::get<Field>(k).values()) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("frames of the phi, psi solution stay orthonormal and reproduce the pencil metric") {
  const auto ff = integrate_frame(ex8().rd, 1.0);
  CHECK(ff.dim == 3);
  CHECK(ff.gram_drift.max() <= 1e-6);
  CHECK(ff.metric_match.max() <= 1e-5);
  CHECK(ff.compatibility.max() <= 1e-5);
  for (std::size_t k = 0; k < ff.grid.size(); ++k) {
    const double* r = ff.r(k);
    CHECK(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(integrate_frame(ex8().rd, 0.2), ValidationError);
}

TEST_CASE("principal curvatures of the phi, psi solution match the Weingarten quotient") {
  const auto ff = integrate_frame(ex8().rd, 1.0);
  const auto shape = hypersurface_shape(ff, 1, 32);
  CHECK(shape.agreement.max() <= 1e-5);
  CHECK(shape.agreement.excluded == 0);
}

TEST_CASE("frames are independent of the marching order") {
  const auto& rd = triple_rd();
  const auto a = integrate_frame(rd, 1.0);
  FrameOptions opt;
  opt.order = {2, 0, 1};
  const auto b = integrate_frame(rd, 1.0, opt);
  double diff = 0;
  for (std::size_t i = 0; i < a.position.size(); ++i) diff = std::max(diff, std::abs(a.position[i] - b.position[i]));
  for (std::size_t i = 0; i < a.frame.size(); ++i) diff = std::max(diff, std::abs(a.frame[i] - b.frame[i]));
  CHECK(diff <= 1e-5);
  CHECK(a.gram_drift.max() <= 1e-6);
  CHECK(a.metric_match.max() <= 1e-5);
  CHECK(a.compatibility.max() <= 1e-5);
}

TEST_CASE("global rotations commute with frame integration") {
  const auto& rd = triple_rd();
  const double c = std::cos(0.7), s = std::sin(0.7);
  FrameOptions opt;
  opt.frame0 = {{c, s, 0}, {-s, c, 0}, {0, 0, 1}};
  const auto a = integrate_frame(rd, 1.0);
  const auto b = integrate_frame(rd, 1.0, opt);
  double diff = 0;
  for (std::size_t k = 0; k < rd.grid.size(); ++k) {
    const double* ra = a.r(k);
    const double rot[3] = {c * ra[0] - s * ra[1], s * ra[0] + c * ra[1], ra[2]};
    for (int i = 0; i < 3; ++i) diff = std::max(diff, std::abs(b.r(k)[i] - rot[i]));
  }
  CHECK(diff <= 1e-12);
  opt.frame0 = {{1, 0, 0}, {0, 1, 0}, {0, 0.1, 1}};
  CHECK_THROWS_AS(integrate_frame(rd, 1.0, opt), ValidationError);
}

TEST_CASE("shape operators rescale by the printed factor") {
  const auto rd = ex8_shifted();
  CHECK(scaling_law_check(rd, 1.0, 1.0, 1, 32).max() <= 1e-12);
  CHECK(scaling_law_check(rd, 0.0, 1.0, 1, 32).max() <= 1e-5);
  CHECK(scaling_law_check(rd, 0.2, 2.0, 0, 20).max() <= 1e-5);
  const auto& t = triple_rd();
  CHECK(scaling_law_check(t, 0.2, 2.0, 2, 8).max() <= 1e-4);
  CHECK(scaling_law_check(t, 0.0, 1.0, 0, 8).max() <= 1e-4);
}

TEST_CASE("inconsistent rotation data aborts on orthonormality drift") {
  const Grid g({0, 0}, {0.5, 0.5}, {9, 9});
  RotationData rd = RotationData::trivial(2, g);
  rd.beta[0][1] = constant_field(20.0);
  rd.beta[1][0] = constant_field(-20.0);
  rd.eta = {ScalarExpr::constant(1.0), ScalarExpr::constant(2.0)};
  CHECK_THROWS_AS(integrate_frame(rd, 0.0), NumericalError);
}
