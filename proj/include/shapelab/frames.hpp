#pragma once

// Orthonormal frames and radius-vectors of the n-orthogonal systems with
// metric sum H_i^2/(lambda+eta_i) (dR^i)^2, shape operators of coordinate
// hypersurfaces and their rescaling with lambda.

#include <vector>

#include "shapelab/catalog.hpp"
#include "shapelab/report.hpp"
#include "shapelab/rotation.hpp"

namespace shapelab {

struct FrameOptions {
  /// Radius-vector at the grid corner (flat geometry); zero when empty.
  std::vector<double> base;
  /// Rows are the initial frame vectors; identity when empty. For sphere
  /// geometry the third row is the initial point on the unit sphere.
  std::vector<std::vector<double>> frame0;
  /// Axis marching order; 0, 1, ..., n-1 when empty.
  std::vector<int> order;
  /// Gram-Schmidt projection after every step.
  bool reorthonormalize = false;
};

/// d_j phi_i = sqrt((lambda+eta_i)/(lambda+eta_j)) beta_ij phi_j,
/// d_i phi_i = -sum_k sqrt((lambda+eta_k)/(lambda+eta_i)) beta_ki phi_k,
/// d_i r = H_i / sqrt(lambda+eta_i) phi_i. For sphere geometry (n = 2) the
/// radius-vector lies on the unit sphere of E^3 and d_i phi_i gains the term
/// -H_i / sqrt(lambda+eta_i) r.
struct FrameField {
  double lambda = 0.0;
  int n = 0;
  /// Ambient dimension: n, or 3 for sphere geometry.
  int dim = 0;
  Grid grid;
  RotationData source;
  /// phi_i at node k: frame[(k * n + i) * dim + a].
  std::vector<double> frame;
  /// r at node k: position[k * dim + a].
  std::vector<double> position;
  /// max |(phi_i, phi_j) - delta_ij|.
  ResidualReport gram_drift;
  /// |(d_i r, d_j r) - H_i^2/(lambda+eta_i) delta_ij| with finite differences of r.
  ResidualReport metric_match;
  /// |d_j (H_i/w_i phi_i) - d_i (H_j/w_j phi_j)| with finite differences.
  ResidualReport compatibility;

  const double* phi(std::size_t node, int i) const { return &frame[(node * n + i) * dim]; }
  const double* r(std::size_t node) const { return &position[node * dim]; }
};

/// Throws ValidationError when lambda + eta_i <= 0 somewhere or frame0 is not
/// orthonormal to 1e-12, and NumericalError when the Gram drift exceeds 1e-4.
FrameField integrate_frame(const RotationData& rd, double lambda, const FrameOptions& opt = {});

struct HypersurfaceShape {
  /// Grid of the slice R^(axis+1) = coordinate of `level`, without that axis.
  Grid slice;
  /// k^i = beta_(axis)i / H_i * sqrt(lambda + eta_axis) for i != axis, in axis order.
  CurvatureField formula;
  /// (d_i phi_axis, d_i r) / |d_i r|^2 from the integrated fields.
  CurvatureField weingarten;
  /// |formula - weingarten|; nodes with |H_i| < 1e-8 are excluded.
  ResidualReport agreement;
};

HypersurfaceShape hypersurface_shape(const FrameField& ff, int axis, int level);

/// max over the slice of |k^i(lambda1)/k^i(lambda2) - sqrt((lambda1+eta)/(lambda2+eta))|
/// with Weingarten curvatures of frames integrated at both lambda, over
/// nodes with |k^i(lambda2)| > 1e-8, and for n >= 3 the normalised
/// off-diagonal shape operator entries |(d_i phi_axis, d_j r)| / (|d_i r| |d_j r|)
/// at both lambda.
ResidualReport scaling_law_check(const RotationData& rd, double lambda1, double lambda2, int axis, int level);

}  // namespace shapelab
