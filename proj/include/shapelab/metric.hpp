#pragma once

// Diagonal metrics, their Christoffel fields, Gaussian curvature, the
// constant-curvature-one residual, metric pencils and Lame-form curvature.

#include <span>
#include <utility>
#include <vector>

#include "shapelab/field.hpp"
#include "shapelab/report.hpp"
#include "shapelab/rotation.hpp"

namespace shapelab {

class DiagonalMetric {
 public:
  DiagonalMetric() = default;
  /// Throws ValidationError when a coefficient is non-finite, vanishes or
  /// changes sign on the grid; the message names the locus.
  DiagonalMetric(std::vector<ScalarField> G, Grid grid);

  int dim() const { return static_cast<int>(G_.size()); }
  const Grid& grid() const { return grid_; }
  const ScalarField& G(int i) const { return G_[i]; }
  const std::vector<ScalarField>& coefficients() const { return G_; }
  /// Sign of each coefficient on the grid.
  const std::vector<int>& signs() const { return signs_; }
  bool riemannian() const;
  bool symbolic() const;

 private:
  std::vector<ScalarField> G_;
  Grid grid_;
  std::vector<int> signs_;
};

/// chi[i][j] = d_j ln sqrt(G_ii) for i != j. For n = 2, a = chi[0][1] and
/// b = chi[1][0] are the coefficients of the Codazzi equations.
struct CodazziCoeffs {
  int n = 0;
  std::vector<std::vector<ScalarField>> chi;

  const ScalarField& a() const { return chi[0][1]; }
  const ScalarField& b() const { return chi[1][0]; }
  static CodazziCoeffs from_ab(expr::ScalarExpr a, expr::ScalarExpr b);
};

CodazziCoeffs christoffel_ab(const DiagonalMetric& m);

/// K = -(1/(H1 H2)) [d1(d1 H2 / H1) + d2(d2 H1 / H2)] with H_i = sqrt(G_ii),
/// written in terms of G^ii so that it is rational. Symbolic metrics only.
double gaussian_curvature(const DiagonalMetric& m, std::span<const double> pt);
Field gaussian_curvature_field(const DiagonalMetric& m);

/// |(d2 a + a^2) G^22 + (a/2) d2 G^22 + (d1 b + b^2) G^11 + (b/2) d1 G^11 + 1|.
ResidualReport curvature_one_residual(const DiagonalMetric& m);

/// Metrics H_i^2 / (lambda + eta_i(R^i)).
class MetricPencil {
 public:
  MetricPencil(std::vector<ScalarField> H, std::vector<expr::ScalarExpr> eta, Grid grid);

  int dim() const { return static_cast<int>(H_.size()); }
  const Grid& grid() const { return grid_; }
  const std::vector<ScalarField>& H() const { return H_; }
  const std::vector<expr::ScalarExpr>& eta() const { return eta_; }
  /// Open interval (lo, +inf) of lambda with lambda + eta_i > 0 on the grid.
  std::pair<double, double> admissible_interval() const;
  /// Throws ValidationError with locus when lambda + eta_i <= 0 somewhere.
  DiagonalMetric evaluate(double lambda) const;

 private:
  std::vector<ScalarField> H_;
  std::vector<expr::ScalarExpr> eta_;
  Grid grid_;
  double lower_ = 0.0;
};

std::vector<ResidualReport> pencil_curvature_scan(const MetricPencil& p, const std::vector<double>& lambdas);

/// Curvature-K conditions in Lame form: d_k beta_ij = beta_ik beta_kj for
/// distinct i, j, k and d_i beta_ij + d_j beta_ji + sum_k beta_ki beta_kj
/// + K H_i H_j = 0. H is required when K != 0.
ResidualReport lame_curvature_residual(const RotationData& rd, double K);
ResidualReport flatness_residual(const RotationData& rd);
/// |d_i H_j - beta_ij H_i| for i != j.
ResidualReport lame_consistency_residual(const RotationData& rd);

}  // namespace shapelab
