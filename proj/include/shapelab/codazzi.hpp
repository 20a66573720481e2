#pragma once

// The linear Codazzi system d_j k^i / (k^j - k^i) = chi_ij for the radii of
// principal curvature, its integration from characteristic data, and the
// affine structure of S-deformation families.

#include <vector>

#include "shapelab/catalog.hpp"
#include "shapelab/goursat.hpp"

namespace shapelab {

/// Nodes with |k^i - k^j| < kUmbilicTolerance * max(1, |k^i|, |k^j|) are umbilic.
inline constexpr double kUmbilicTolerance = 1e-9;

/// max |d_j k^i / (k^j - k^i) - chi_ij| over i != j. Umbilic nodes are
/// excluded and counted.
ResidualReport codazzi_residual(const CurvatureField& k, const CodazziCoeffs& c, const Grid& grid);

struct CodazziSolution {
  CurvatureField k;
  GoursatResult march;
};

/// boundary[i] prescribes k^i on the i-th coordinate line through the grid
/// origin, as a function of R^(i+1) alone. Throws NumericalError with the
/// locus when k^i - k^j changes sign during marching.
CodazziSolution integrate_codazzi(const CodazziCoeffs& c, const std::vector<expr::ScalarExpr>& boundary,
                                  const Grid& grid, const GoursatOptions& opt = {});

/// Curvature-one residual of G^ii = lambda G1^ii + (1 - lambda) G2^ii. Throws
/// ValidationError unless m1 and m2 share their Codazzi coefficients to 1e-8.
ResidualReport sdeform_span_check(const DiagonalMetric& m1, const DiagonalMetric& m2, double lambda);

}  // namespace shapelab
