#pragma once

// Random diagonal metric pairs for the compatibility checks.

#include <random>
#include <sstream>
#include <string>

#include "shapelab/compat.hpp"

namespace shapelab::testing {

struct MetricPair {
  std::string label;
  DiagonalMetric g;
  DiagonalMetric gt;
};

inline Grid pencil_grid(int n) {
  GridDomain d;
  d.lo.assign(n, 1.0);
  d.hi.assign(n, 2.0);
  d.count.assign(n, 10);
  return Grid::from_domain(d);
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << v << ")";
  return os.str();
}

// Positive function of R^(axis+1) on [1, 2].
inline expr::ScalarExpr positive_profile(std::mt19937_64& rng, int axis) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  const std::string x = expr::coordinate_name(axis);
  return expr::parse(num(1.0 + u(rng)) + " + " + num(u(rng)) + "*" + x + "^2 + " + num(0.3 * u(rng)) + "*sin(" +
                     num(2.0 * u(rng)) + "*" + x + ")");
}

inline std::vector<ScalarField> fields(const std::vector<expr::ScalarExpr>& e) {
  return {e.begin(), e.end()};
}

/// g = G/(l1 + eta), g~ = G/(l2 + eta) for a separable or polar flat G with
/// eta_i depending on R^i only.
inline MetricPair random_valid_pencil(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double l1 = u(rng), l2 = 1.0 + 2.0 * u(rng);
  const int kind = index % 3;
  const int n = kind == 1 ? 3 : 2;
  std::vector<expr::ScalarExpr> G, eta;
  if (kind == 2) {
    G = {expr::parse("1"), expr::parse("R1^2")};
    eta = {expr::parse(num(0.5 + u(rng))), positive_profile(rng, 1)};
  } else {
    for (int i = 0; i < n; ++i) {
      G.push_back(positive_profile(rng, i));
      eta.push_back(positive_profile(rng, i));
    }
  }
  std::vector<expr::ScalarExpr> g, gt;
  for (int i = 0; i < n; ++i) {
    g.push_back(G[i] / (l1 + eta[i]));
    gt.push_back(G[i] / (l2 + eta[i]));
  }
  const char* names[] = {"separable", "separable 3d", "polar"};
  const Grid grid = pencil_grid(n);
  return {names[kind], DiagonalMetric(fields(g), grid), DiagonalMetric(fields(gt), grid)};
}

/// Flat pairs whose second eigenvalue of r depends on R1: g = diag(f1(R1), f2(R2)),
/// g~ = diag(k1, f2(R2) (R1 + s)^2 / k2).
inline MetricPair random_negative_pencil(std::mt19937_64& rng, int) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto f1 = positive_profile(rng, 0), f2 = positive_profile(rng, 1);
  const double k1 = 0.5 + u(rng), k2 = 0.5 + u(rng), s = u(rng);
  const Grid grid = pencil_grid(2);
  std::vector<expr::ScalarExpr> g = {f1, f2};
  std::vector<expr::ScalarExpr> gt = {expr::ScalarExpr::constant(k1),
                                      f2 * expr::parse("(R1 + " + num(s) + ")^2") / k2};
  return {"eigenvalue depends on a transverse coordinate", DiagonalMetric(fields(g), grid),
          DiagonalMetric(fields(gt), grid)};
}

}  // namespace shapelab::testing
