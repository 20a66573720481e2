#pragma once

// Compatibility of two hydrodynamic-type Hamiltonian operators given by flat
// metrics g and g~: the Nijenhuis tensor of r^i_j = g~^is g_sj, the second
// covariant derivative condition and the coefficients b~^ij_k.

#include <span>
#include <string>
#include <vector>

#include "shapelab/metric.hpp"

namespace shapelab {

/// r^i_j with symbolic entries and the diagonal contravariant metric g^ii.
struct OperatorField {
  int n = 0;
  Grid grid;
  std::vector<std::vector<expr::ScalarExpr>> r;  // r[i][j] = r^i_j
  std::vector<expr::ScalarExpr> g_upper;         // g^ii

  /// r^i_j = g~^ii g_ii on the diagonal. Both metrics must be symbolic.
  static OperatorField from_metrics(const DiagonalMetric& g, const DiagonalMetric& gt);
  /// Throws ValidationError on inconsistent sizes.
  void validate() const;
  /// max |r^i_s g^sj - r^j_s g^si| over the grid.
  double symmetry_defect() const;
};

/// Field with components indexed (i, j, k) at (i * n + j) * n + k.
struct Rank3Field {
  int n = 0;
  Grid grid;
  std::vector<Field> c;
  std::vector<std::string> warnings;

  const Field& at(int i, int j, int k) const { return c[(i * n + j) * n + k]; }
  Field& at(int i, int j, int k) { return c[(i * n + j) * n + k]; }
};

/// N^i_jk = r^s_j d_s r^i_k - r^s_k d_s r^i_j - r^i_s (d_j r^s_k - d_k r^s_j),
/// returned at index (i * n + j) * n + k.
std::vector<double> nijenhuis(const OperatorField& op, std::span<const double> pt);

/// max over nodes and index quadruples of
/// |D^i D^j r^kl + D^k D^l r^ij - D^i D^k r^jl - D^j D^l r^ik| with
/// r^ij = r^i_s g^sj and D the Levi-Civita connection of g.
ResidualReport nabla_condition_residual(const OperatorField& op);

/// 2 b~^ij_k = D^i r^j_k - D^j r^i_k + D_k r^ij + 2 b^sj_k r^i_s. A warning is
/// attached when the Nijenhuis tensor exceeds 1e-6 somewhere on the grid.
Rank3Field btilde_coeffs(const OperatorField& op);

/// b^ij_k = -g^is Gamma^j_sk of a symbolic diagonal metric.
Rank3Field hamiltonian_b(const DiagonalMetric& m);

inline constexpr double kCompatTolerance = 1e-6;

struct Theorem1Verdict {
  double flatness_g = 0.0;
  double flatness_gt = 0.0;
  /// False when a metric fails the flatness check; the conditions are then skipped.
  bool accepted = false;
  double symmetry = 0.0;
  double nijenhuis = 0.0;
  double nabla = 0.0;
  /// max |btilde_coeffs - hamiltonian_b(g~)|.
  double btilde_consistency = 0.0;
  /// Nodes where two eigenvalues of r agree to 1e-8 relative.
  std::size_t multiple_spectrum_nodes = 0;
  bool passed = false;
  std::vector<std::string> notes;

  /// Largest condition residual, or the larger flatness residual when rejected.
  double worst() const;
  nlohmann::json to_json() const;
};

/// Both metrics are rescaled to unit maximum coefficient magnitude, checked
/// for flatness in Lame form, then tested against the three conditions at
/// kCompatTolerance.
Theorem1Verdict theorem1_report(const DiagonalMetric& g, const DiagonalMetric& gt);

}  // namespace shapelab
