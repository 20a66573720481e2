#pragma once

// Rotation-coefficient systems: the two-dimensional system with its Lax
// pairs, the n-dimensional Darboux-type system, constant-eta integrals and
// the Monge-Ampere reductions.

#include <vector>

#include "shapelab/goursat.hpp"
#include "shapelab/metric.hpp"
#include "shapelab/rotation.hpp"

namespace shapelab {

/// For n = 2 and H, eta present:
///   d1 H2 = beta12 H1,  d2 H1 = beta21 H2,  d1 beta12 + d2 beta21 = 0,
///   eta1 d1 beta12 + eta2 d2 beta21 + eta1'/2 beta12 + eta2'/2 beta21 + H1 H2 = 0.
ResidualReport system4_residual(const RotationData& rd);

/// three_by_three and two_by_two are the sphere-frame Lax pairs of the n = 2
/// system; ndim is the n x n pair d_j psi_i = beta_ij psi_j,
/// d_i psi_i = -eta_i'/(2(lambda+eta_i)) psi_i - sum_k (lambda+eta_k)/(lambda+eta_i) beta_ki psi_k.
enum class LaxForm { three_by_three, two_by_two, ndim };

/// max-entry norm of d_b A_a - d_a A_b + [A_a, A_b] over axis pairs. Square
/// roots of lambda + eta_i use the principal complex branch, so lambda may lie
/// below -eta_i as long as lambda + eta_i keeps its sign on the grid.
/// Throws ValidationError when lambda + eta_i vanishes or changes sign.
ResidualReport lax_zero_curvature_residual(const RotationData& rd, double lambda, LaxForm form);

/// Residuals of d_k beta_ij = beta_ik beta_kj (distinct i, j, k) and
/// d_i beta_ij = [eta_i'/2 beta_ij + eta_j'/2 beta_ji
///               + sum_k (eta_k - eta_j) beta_ki beta_kj] / (eta_j - eta_i),
/// with + H_i H_j / (eta_j - eta_i) added for sphere geometry. Nodes with
/// eta_i = eta_j are excluded.
ResidualReport darboux_residual(const RotationData& rd);

struct DarbouxSolution {
  RotationData rd;
  GoursatResult march;
};

/// boundary[i][j] (i != j) prescribes beta_ij on the j-th coordinate line
/// through the grid origin as a function of R^(j+1); H_boundary[j] prescribes
/// H_j there (unit when empty). n = 3 integrates the flat system, n = 2 the
/// sphere system including H. Throws NumericalError at the blow-up front.
DarbouxSolution integrate_darboux(const std::vector<expr::ScalarExpr>& eta,
                                  const std::vector<std::vector<expr::ScalarExpr>>& boundary, const Grid& grid,
                                  const std::vector<expr::ScalarExpr>& H_boundary = {},
                                  const GoursatOptions& opt = {});

/// Integrals for constant eta_i = c_i:
///   P_i = sum_{k != i} (c_k - c_i) beta_ki^2 (+ H_i^2 for sphere geometry),
/// each a function of R^i alone.
struct ConstEtaData {
  std::vector<double> c;
  std::vector<Field> P;
  /// Largest range of P_i along a coordinate line transverse to R^i.
  std::vector<double> P_variation;
  std::vector<std::string> angle_names;
  std::vector<Field> angles;
  std::vector<double> mu;
};

ConstEtaData const_eta_integrals(const RotationData& rd);

struct Ex8Solution {
  Field phi;
  Field psi;
  /// H1 = sin psi, H2 = sinh phi, beta12 = cosh phi, beta21 = cos psi, eta = (-1/2, 1/2).
  RotationData rd;
  GoursatResult march;
  ResidualReport first_order;
  /// d1 d2 phi = sinh phi sqrt(1 - (d1 phi)^2), d1 d2 psi = sin psi sqrt(1 + (d2 psi)^2).
  /// Nodes off the chart (cos psi < 0) or with radicand below 1e-6 are excluded and noted.
  ResidualReport monge_ampere;
};

/// d1 phi = sin psi, d2 psi = sinh phi with phi0(R2) on {R1 = lo1} and
/// psi0(R1) on {R2 = lo2}.
Ex8Solution solve_goursat_ex8(const expr::ScalarExpr& phi0, const expr::ScalarExpr& psi0, const Grid& grid,
                              const GoursatOptions& opt = {});

/// mu_1 = sqrt((c3-c2)/((c2-c1)(c3-c1))), mu_2 = sqrt((c3-c1)/((c2-c1)(c3-c2))),
/// mu_3 = sqrt((c2-c1)/((c3-c1)(c3-c2))). Requires c1 < c2 < c3.
std::vector<double> triple_mu(const std::vector<double>& c);

struct TripleSolution {
  /// Rescaled coordinates R_i = mu_i x_i in which the system has unit coefficients.
  Grid grid;
  Field p, q, r;
  /// Lame coefficients with unit data on their own coordinate lines.
  std::vector<Field> H;
  std::vector<double> c;
  std::vector<double> mu;
  GoursatResult march;
  ResidualReport first_order;
  /// d1 d2 q = cosh q sqrt(1 - q1^2), d1 d3 q = -sqrt(1 - q1^2) sqrt(1 - q3^2),
  /// d2 d3 q = sinh q sqrt(1 - q3^2); off-chart nodes are excluded and noted.
  ResidualReport monge_ampere;
  /// |d_b F_a - d_a F_b| for the fields carrying two equations.
  ResidualReport commutativity;
};

/// d1 q = cos p, d1 r = -sin p, d2 p = -cosh q, d2 r = sinh q, d3 p = cos r,
/// d3 q = sin r with p0(R1), q0(R2), r0(R3) on the coordinate axes through
/// the grid origin.
TripleSolution solve_triple_s2(const expr::ScalarExpr& p0, const expr::ScalarExpr& q0, const expr::ScalarExpr& r0,
                               const Grid& grid, const std::vector<double>& c = {0.0, 1.0, 3.0},
                               const GoursatOptions& opt = {});

/// beta_21 = sin p/sqrt(c2-c1), beta_31 = cos p/sqrt(c3-c1),
/// beta_12 = sinh q/sqrt(c2-c1), beta_32 = cosh q/sqrt(c3-c2),
/// beta_13 = sin r/sqrt(c3-c1), beta_23 = cos r/sqrt(c3-c2), on the grid of
/// original coordinates x_i = R_i / mu_i with eta_i = c_i.
RotationData triple_to_rotation(const TripleSolution& s);

/// Original-coordinate grid of a triple solution.
Grid triple_original_grid(const Grid& rescaled, const std::vector<double>& mu);

}  // namespace shapelab
