#include "shapelab/codazzi.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "shapelab/errors.hpp"
#include "shapelab/parallel.hpp"

namespace shapelab {

namespace {

bool umbilic(double ki, double kj) {
  return std::abs(ki - kj) < kUmbilicTolerance * std::max({1.0, std::abs(ki), std::abs(kj)});
}

std::string ki_name(int i) { return "k" + std::to_string(i + 1); }

}  // namespace

ResidualReport codazzi_residual(const CurvatureField& k, const CodazziCoeffs& c, const Grid& grid) {
  const int n = c.n;
  if (static_cast<int>(k.k.size()) != n || grid.dim() != n)
    throw ValidationError("codazzi: curvature, coefficient and grid dimensions differ");
  std::vector<Field> K;
  for (const auto& f : k.k) K.push_back(tabulate(f, grid));
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> pairs;
  std::vector<Field> dk, chi;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      names.push_back("d" + std::to_string(j + 1) + " " + ki_name(i));
      pairs.emplace_back(i, j);
      dk.push_back(tabulate(derivative(k.k[i], j), grid));
      chi.push_back(resample(c.chi[i][j], grid));
    }
  ReportBuilder rb("codazzi", grid, names);
  parallel_for(grid.size(), [&](std::size_t node) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (umbilic(K[i][node], K[j][node])) {
          rb.exclude(node);
          return;
        }
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      const auto [i, j] = pairs[e];
      rb.set(e, node, dk[e][node] / (K[j][node] - K[i][node]) - chi[e][node]);
    }
  });
  return rb.finish();
}

CodazziSolution integrate_codazzi(const CodazziCoeffs& c, const std::vector<expr::ScalarExpr>& boundary,
                                  const Grid& grid, const GoursatOptions& opt) {
  const int n = c.n;
  if (static_cast<int>(boundary.size()) != n || grid.dim() != n)
    throw ValidationError("codazzi: need one boundary function per coordinate");
  std::vector<double> corner(n);
  expr::Bindings at_origin;
  for (int a = 0; a < n; ++a) at_origin[expr::coordinate_name(a)] = grid.origin(a);
  for (int i = 0; i < n; ++i) {
    for (const auto& name : boundary[i].free_names())
      if (name != expr::coordinate_name(i))
        throw ValidationError("codazzi: boundary data for " + ki_name(i) + " may depend on " +
                              expr::coordinate_name(i) + " only, found " + name);
    corner[i] = boundary[i].eval(at_origin);
  }
  std::vector<int> sign(n * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (umbilic(corner[i], corner[j]))
        throw ValidationError("codazzi: boundary data is umbilic at the corner " + locus(grid, 0));
      sign[i * n + j] = corner[i] > corner[j] ? 1 : -1;
    }

  GoursatSystem sys;
  for (int i = 0; i < n; ++i) {
    sys.names.push_back(ki_name(i));
    std::vector<int> axes;
    for (int j = 0; j < n; ++j)
      if (j != i) axes.push_back(j);
    sys.axes.push_back(axes);
    sys.data.push_back(boundary[i]);
  }
  sys.bind = [&c, n](const Grid& g) -> GoursatRhs {
    auto chi = std::make_shared<std::vector<Field>>(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) (*chi)[i * n + j] = resample(c.chi[i][j], g);
    return [chi, n](const double* u, std::size_t node, const double*, double* out) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) out[i * n + j] = (*chi)[i * n + j][node] * (u[j] - u[i]);
    };
  };
  sys.monitor = [sign, n](const double* u) -> std::string {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((u[i] - u[j]) * sign[i * n + j] <= 0.0)
          return "codazzi: " + ki_name(i) + " - " + ki_name(j) + " changes sign";
    return {};
  };
  CodazziSolution s;
  s.march = march_goursat(sys, grid, opt);
  for (auto& f : s.march.fields) s.k.k.emplace_back(f);
  return s;
}

ResidualReport sdeform_span_check(const DiagonalMetric& m1, const DiagonalMetric& m2, double lambda) {
  if (!(m1.grid() == m2.grid()) || m1.dim() != m2.dim())
    throw ValidationError("span check: metrics live on different grids");
  const Grid& g = m1.grid();
  const CodazziCoeffs c1 = christoffel_ab(m1), c2 = christoffel_ab(m2);
  for (int i = 0; i < c1.n; ++i)
    for (int j = 0; j < c1.n; ++j) {
      if (i == j) continue;
      const Field x = tabulate(c1.chi[i][j], g), y = tabulate(c2.chi[i][j], g);
      for (std::size_t k = 0; k < x.size(); ++k)
        if (!(std::abs(x[k] - y[k]) <= 1e-8 * (1.0 + std::abs(x[k]))))
          throw ValidationError("span check: metrics have different Codazzi coefficients chi_" + std::to_string(i + 1) +
                                std::to_string(j + 1) + " at " + locus(g, k) +
                                "; they are not an S-deformation pair");
    }
  std::vector<ScalarField> G;
  for (int i = 0; i < m1.dim(); ++i) {
    if (m1.symbolic() && m2.symbolic()) {
      G.emplace_back(1.0 / (lambda / symbolic(m1.G(i)) + (1.0 - lambda) / symbolic(m2.G(i))));
    } else {
      const Field a = tabulate(m1.G(i), g), b = tabulate(m2.G(i), g);
      Field out(g);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = 1.0 / (lambda / a[k] + (1.0 - lambda) / b[k]);
      G.emplace_back(std::move(out));
    }
  }
  try {
    ResidualReport r = curvature_one_residual(DiagonalMetric(std::move(G), g));
    r.title = "s-deformation span lambda=" + std::to_string(lambda);
    return r;
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("span check: inverse-coefficient combination is degenerate: ") + e.what());
  }
}

}  // namespace shapelab
