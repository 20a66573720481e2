#pragma once

// RK4 transport of a matrix state S along grid lines, d_a S = M_a S, with the
// generator sampled on the twice-refined grid so that midpoints are nodes.

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

#include "shapelab/errors.hpp"
#include "shapelab/grid.hpp"
#include "shapelab/parallel.hpp"

namespace shapelab::detail {

using Generator = std::function<Eigen::MatrixXd(int axis, std::size_t fine_node)>;

inline void gram_schmidt(Eigen::MatrixXd& S, int rows) {
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < i; ++j) S.row(i) -= S.row(i).dot(S.row(j)) * S.row(j);
    S.row(i).normalize();
  }
}

/// Marches along order[0] from the corner, then along order[1] from every node
/// reached so far, and so on. `orthonormal_rows` > 0 enables Gram-Schmidt on
/// the leading rows after every step.
inline std::vector<Eigen::MatrixXd> march_lines(const Grid& grid, const Eigen::MatrixXd& S0, const std::vector<int>& order,
                                                const Generator& M, int orthonormal_rows = 0) {
  const Grid fine = grid.refined(2);
  const int n = grid.dim();
  std::vector<Eigen::MatrixXd> state(grid.size());
  state[0] = S0;
  for (std::size_t stage = 0; stage < order.size(); ++stage) {
    const int a = order[stage];
    const double h = grid.step(a);
    std::vector<std::size_t> starts;
    for (std::size_t node = 0; node < grid.size(); ++node) {
      const Index idx = grid.unflatten(node);
      bool start = idx[a] == 0;
      for (std::size_t t = stage + 1; t < order.size(); ++t) start = start && idx[order[t]] == 0;
      if (start) starts.push_back(node);
    }
    parallel_for(starts.size(), [&](std::size_t s) {
      std::size_t node = starts[s];
      Index fidx = grid.unflatten(node);
      for (int b = 0; b < n; ++b) fidx[b] *= 2;
      std::size_t f = fine.flat(fidx);
      const std::size_t fs = fine.stride(a);
      for (int k = 0; k + 1 < grid.count(a); ++k) {
        const Eigen::MatrixXd& S = state[node];
        const Eigen::MatrixXd M0 = M(a, f), Mh = M(a, f + fs), M1 = M(a, f + 2 * fs);
        const Eigen::MatrixXd k1 = M0 * S;
        const Eigen::MatrixXd k2 = Mh * (S + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = Mh * (S + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = M1 * (S + h * k3);
        Eigen::MatrixXd next = S + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (orthonormal_rows > 0) gram_schmidt(next, orthonormal_rows);
        node += grid.stride(a);
        f += 2 * fs;
        state[node] = std::move(next);
      }
    });
  }
  return state;
}

inline std::vector<int> axis_order(const std::vector<int>& order, int n) {
  std::vector<int> out = order;
  if (out.empty())
    for (int a = 0; a < n; ++a) out.push_back(a);
  std::vector<int> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  for (int a = 0; a < n; ++a)
    if (static_cast<int>(sorted.size()) != n || sorted[a] != a)
      throw ValidationError("order must be a permutation of the axes");
  return out;
}

}  // namespace shapelab::detail
