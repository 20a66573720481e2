#pragma once

#include <vector>

#include "shapelab/field.hpp"

namespace shapelab {

/// Flat: the metric sum H_i^2/(lambda+eta_i) (dR^i)^2 is flat and frames live
/// in E^n. Sphere: n = 2 with the third row of the frame on the unit sphere.
enum class Geometry { flat, sphere };

/// Lame coefficients H_i, rotation coefficients beta_ij = d_i H_j / H_i and
/// the pencil functions eta_i(R^i) on a grid.
struct RotationData {
  int n = 0;
  Grid grid;
  std::vector<ScalarField> H;                  // empty when unknown
  std::vector<std::vector<ScalarField>> beta;  // n x n, diagonal unused
  std::vector<expr::ScalarExpr> eta;           // empty when unused
  Geometry geometry = Geometry::flat;

  bool has_H() const { return !H.empty(); }
  bool has_eta() const { return !eta.empty(); }

  /// beta_ij = d_i H_j / H_i computed symbolically.
  static RotationData from_lame(std::vector<expr::ScalarExpr> H, Grid grid);
  /// Zero beta, unit H.
  static RotationData trivial(int n, Grid grid);

  /// Throws ValidationError on inconsistent sizes or grids.
  void validate() const;
  /// Checks eta_i depends on R^i only (exact symbolic test).
  void validate_eta() const;
};

}  // namespace shapelab
