#include <cmath>
#include <random>

#include "../common/pencils.hpp"
#include "doctest.h"
#include "shapelab/compat.hpp"

using namespace shapelab;
using expr::parse;
using expr::ScalarExpr;

namespace {

OperatorField make_op(const std::vector<std::vector<std::string>>& r, const std::vector<std::string>& g_upper) {
  OperatorField op;
  op.n = static_cast<int>(g_upper.size());
  op.grid = testing::pencil_grid(op.n);
  for (const auto& row : r) {
    op.r.emplace_back();
    for (const auto& e : row) op.r.back().push_back(parse(e));
  }
  for (const auto& e : g_upper) op.g_upper.push_back(parse(e));
  return op;
}

double eval_at(const ScalarExpr& e, const std::vector<double>& x) {
  expr::Bindings b;
  for (std::size_t a = 0; a < x.size(); ++a) b[expr::coordinate_name(static_cast<int>(a))] = x[a];
  return e.eval(b);
}

double central(const ScalarExpr& e, std::vector<double> x, int axis) {
  const double h = 1e-5;
  x[axis] += h;
  const double p = eval_at(e, x);
  x[axis] -= 2 * h;
  return (p - eval_at(e, x)) / (2 * h);
}

// Nijenhuis tensor from central differences of the entries.
std::vector<double> fd_nijenhuis(const OperatorField& op, const std::vector<double>& x) {
  const int n = op.n;
  std::vector<double> N(n * n * n);
  auto r = [&](int i, int j) { return eval_at(op.r[i][j], x); };
  auto d = [&](int s, int i, int j) { return central(op.r[i][j], x, s); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = 0;
        for (int s = 0; s < n; ++s)
          v += r(s, j) * d(s, i, k) - r(s, k) * d(s, i, j) - r(i, s) * (d(j, s, k) - d(k, s, j));
        N[(i * n + j) * n + k] = v;
      }
  return N;
}

// -g~^is Gamma~^j_sk for diag(Gt) from central differences.
double fd_b(const std::vector<ScalarExpr>& Gt, const std::vector<double>& x, int i, int j, int k) {
  auto G = [&](int a) { return eval_at(Gt[a], x); };
  auto dG = [&](int a, int m) { return central(Gt[a], x, m); };
  // Gamma^j_ik = (d_i G_jk + d_k G_ji - d_j G_ik) / (2 G_j)
  double v = 0;
  if (j == k) v += dG(j, i);
  if (j == i) v += dG(j, k);
  if (i == k) v -= dG(i, j);
  return -(v / (2 * G(j))) / G(i);
}

}  // namespace

TEST_CASE("Nijenhuis tensor of constant and diagonal operators") {
  const auto c = make_op({{"2", "1"}, {"0.5", "3"}}, {"1", "1"});
  for (double v : nijenhuis(c, std::vector<double>{1.3, 1.7})) CHECK(v == 0.0);
  const auto d = make_op({{"R1^2 + 1", "0"}, {"0", "sin(R2) + 3"}}, {"1", "1"});
  const std::vector<double> x = {1.3, 1.7};
  const auto N = nijenhuis(d, x);
  const auto oracle = fd_nijenhuis(d, x);
  for (std::size_t e = 0; e < N.size(); ++e) {
    CHECK(N[e] == 0.0);
    CHECK(oracle[e] == doctest::Approx(0.0).epsilon(1e-8));
  }
}

TEST_CASE("an eigenvalue depending on the wrong coordinate gives a nonzero Nijenhuis tensor") {
  const auto op = make_op({{"R2", "0"}, {"0", "R1"}}, {"1", "1"});
  const std::vector<double> x = {1.2, 1.9};
  const auto N = nijenhuis(op, x);
  const auto oracle = fd_nijenhuis(op, x);
  CHECK(N[0 * 4 + 0 * 2 + 1] == doctest::Approx(x[1] - x[0]));
  for (std::size_t e = 0; e < N.size(); ++e) CHECK(N[e] == doctest::Approx(oracle[e]).epsilon(1e-7));
}

TEST_CASE("Nijenhuis antisymmetry holds exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::vector<std::string>> r(3, std::vector<std::string>(3));
    for (auto& row : r)
      for (auto& e : row)
        e = testing::num(u(rng)) + "*R1*R2 + " + testing::num(u(rng)) + "*R3^2 + " + testing::num(u(rng)) + "*R2";
    const auto op = make_op(r, {"1", "R1^2", "1 + R2^2"});
    const std::vector<double> x = {1 + 0.5 * (u(rng) + 1), 1 + 0.5 * (u(rng) + 1), 1 + 0.5 * (u(rng) + 1)};
    const auto N = nijenhuis(op, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) CHECK(N[(i * 3 + j) * 3 + k] == -N[(i * 3 + k) * 3 + j]);
  }
}

TEST_CASE("second covariant derivative condition") {
  CHECK(nabla_condition_residual(make_op({{"2", "1"}, {"1", "3"}}, {"1", "1"})).max() == 0.0);
  CHECK(nabla_condition_residual(make_op({{"R1", "0"}, {"0", "R2"}}, {"1", "1"})).max() <= 1e-8);
  // The same pencil written in polar coordinates.
  CHECK(nabla_condition_residual(make_op({{"2", "0"}, {"0", "2 + sin(R2)"}}, {"1", "1/R1^2"})).max() <= 1e-8);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<std::vector<std::string>> r(2, std::vector<std::string>(2));
    for (auto& row : r)
      for (auto& e : row)
        e = testing::num(u(rng)) + "*R1^2 + " + testing::num(u(rng)) + "*R1*R2 + " + testing::num(u(rng)) + "*R2^2";
    CHECK(nabla_condition_residual(make_op(r, {"1", "1"})).max() > 1e-3);
  }
}

TEST_CASE("b~ vanishes for a multiple of the identity") {
  const auto b = btilde_coeffs(make_op({{"3", "0"}, {"0", "3"}}, {"1", "1"}));
  for (const auto& f : b.c)
    for (double v : f.values()) CHECK(v == 0.0);
  CHECK(b.warnings.empty());
}

TEST_CASE("b~ reproduces the Christoffel coefficients of the second metric") {
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> cases = {
      {{"1", "1"}, {"R1", "R2"}}, {{"1", "R1^2"}, {"2", "2 + sin(R2)"}}, {{"1 + R1^2", "2 + cos(R2)"}, {"R1^2", "exp(R2)"}}};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, testing::pencil_grid(2).size() - 1);
  for (const auto& [G, eta] : cases) {
    const Grid grid = testing::pencil_grid(2);
    std::vector<ScalarExpr> Gs, Gt;
    for (int i = 0; i < 2; ++i) {
      Gs.push_back(parse(G[i]));
      Gt.push_back(parse(G[i]) / parse(eta[i]));
    }
    const DiagonalMetric g(testing::fields(Gs), grid), gt(testing::fields(Gt), grid);
    const auto op = OperatorField::from_metrics(g, gt);
    const auto b = btilde_coeffs(op);
    CHECK(b.warnings.empty());
    const auto direct = hamiltonian_b(gt);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t node = pick(rng);
      const auto x = grid.point(node);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k)
            CHECK(b.at(i, j, k)[node] == doctest::Approx(fd_b(Gt, {x.begin(), x.end()}, i, j, k)).epsilon(1e-7));
    }
    for (std::size_t e = 0; e < b.c.size(); ++e)
      for (std::size_t node = 0; node < grid.size(); ++node)
        CHECK(b.c[e][node] == doctest::Approx(direct.c[e][node]).epsilon(1e-10));
  }
}

TEST_CASE("b~ warns when the Nijenhuis tensor does not vanish") {
  const auto b = btilde_coeffs(make_op({{"R2", "0"}, {"0", "R1"}}, {"1", "1"}));
  CHECK(b.warnings.size() == 1);
}

TEST_CASE("compatibility verdict on valid pencils, identical metrics and negatives") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 6; ++k) {
    const auto p = testing::random_valid_pencil(rng, k);
    CAPTURE(p.label);
    const auto v = theorem1_report(p.g, p.gt);
    CHECK(v.accepted);
    CHECK(v.passed);
    CHECK(v.nabla <= 1e-6);
    CHECK(v.worst() <= 1e-6);
  }
  const auto q = testing::random_valid_pencil(rng, 0);
  const auto same = theorem1_report(q.g, q.g);
  CHECK(same.passed);
  CHECK(same.multiple_spectrum_nodes == q.g.grid().size());
  for (int k = 0; k < 3; ++k) {
    const auto p = testing::random_negative_pencil(rng, k);
    const auto v = theorem1_report(p.g, p.gt);
    CHECK(v.accepted);
    CHECK_FALSE(v.passed);
    CHECK(v.nijenhuis >= 1e-3);
  }
  const Grid grid = testing::pencil_grid(2);
  const DiagonalMetric e({constant_field(1), constant_field(1)}, grid);
  const DiagonalMetric bad({constant_field(1), parse("1 + R1*R2")}, grid);
  const auto v = theorem1_report(e, bad);
  CHECK_FALSE(v.accepted);
  CHECK_FALSE(v.passed);
  CHECK(v.worst() >= 1e-3);
  CHECK(v.to_json()["nijenhuis"].is_null());
}
