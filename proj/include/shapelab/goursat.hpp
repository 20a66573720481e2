#pragma once

// Characteristic (Goursat) initial value problems for first-order systems
// d_a u_c = F_ca(u, R), a in axes[c], with u_c prescribed on the coordinate
// subspace {R^a = lo_a : a in axes[c]}. Implicit trapezoid marching on nested
// grids followed by Richardson extrapolation.

#include <functional>
#include <string>
#include <vector>

#include "shapelab/expr.hpp"
#include "shapelab/field.hpp"

namespace shapelab {

/// out[c * dim + a] = F_ca at a node of the marching grid; only entries with
/// a in axes[c] are read.
using GoursatRhs = std::function<void(const double* u, std::size_t node, const double* x, double* out)>;

struct GoursatSystem {
  std::vector<std::string> names;
  std::vector<std::vector<int>> axes;
  std::vector<expr::ScalarExpr> data;
  /// Builds the right-hand side for one marching grid, typically by
  /// tabulating coefficient fields on it.
  std::function<GoursatRhs(const Grid&)> bind;
  /// Optional per-node check; a non-empty message aborts the march.
  std::function<std::string(const double* u)> monitor;
};

struct GoursatOptions {
  /// Number of nested grids (1 to 4); each halves the step.
  int levels = 3;
  double blowup = 1e6;
  int max_iterations = 50;
};

struct GoursatResult {
  Grid grid;
  std::vector<Field> fields;
  /// max |u_h - u_{h/2}| / max |u_{h/2} - u_{h/4}|; NaN with fewer than 3 levels.
  double richardson_ratio = 0.0;
  /// max |u_{h/2^l} - u_{h/2^(l+1)}| on the target nodes.
  std::vector<double> level_differences;
};

/// Marches on `grid`, whose origin carries the data. Throws NumericalError
/// with the locus on blow-up, non-finite values or monitor failure.
GoursatResult march_goursat(const GoursatSystem& sys, const Grid& grid, const GoursatOptions& opt = {});

/// Single-level march returning interleaved values u[node * C + c].
std::vector<double> march_level(const GoursatSystem& sys, const Grid& grid, const GoursatOptions& opt = {});

}  // namespace shapelab
