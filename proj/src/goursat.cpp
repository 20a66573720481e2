#include "shapelab/goursat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shapelab/errors.hpp"

namespace shapelab {

namespace {

constexpr std::size_t kMaxNodes = 4'000'000;

void check_system(const GoursatSystem& sys, const Grid& grid) {
  const std::size_t C = sys.names.size();
  if (C == 0 || sys.axes.size() != C || sys.data.size() != C)
    throw ValidationError("goursat: names, axes and data must have one entry per component");
  if (!sys.bind) throw ValidationError("goursat: missing right-hand side");
  for (std::size_t c = 0; c < C; ++c) {
    if (sys.axes[c].empty()) throw ValidationError("goursat: component " + sys.names[c] + " has no derivative axes");
    for (int a : sys.axes[c])
      if (a < 0 || a >= grid.dim()) throw ValidationError("goursat: derivative axis out of range");
  }
}

}  // namespace

std::vector<double> march_level(const GoursatSystem& sys, const Grid& grid, const GoursatOptions& opt) {
  check_system(sys, grid);
  if (grid.size() > kMaxNodes) throw ValidationError("goursat: marching grid too large (" + grid.describe() + ")");
  const int dim = grid.dim();
  const std::size_t C = sys.names.size();
  const std::size_t N = grid.size();
  const auto slots = expr::coordinate_slots(dim);
  std::vector<expr::Program> data;
  for (const auto& d : sys.data) data.emplace_back(d, slots);
  const GoursatRhs rhs = sys.bind(grid);

  std::vector<double> u(N * C, 0.0);
  // F at recent nodes: the furthest back neighbour is one stride of axis 0.
  const std::size_t window = grid.stride(0) + 1;
  const std::size_t fw = C * dim;
  std::vector<double> F(window * fw, 0.0);
  std::vector<double> Fx(fw), un(C), x(dim);

  for (std::size_t node = 0; node < N; ++node) {
    const Index idx = grid.unflatten(node);
    grid.point(node, x.data());
    double* uc = &u[node * C];
    std::vector<bool> fixed(C, false);
    for (std::size_t c = 0; c < C; ++c) {
      int used = 0;
      double guess = 0.0;
      for (int a : sys.axes[c]) {
        if (idx[a] == 0) continue;
        const std::size_t prev = node - grid.stride(a);
        guess += u[prev * C + c] + grid.step(a) * F[(prev % window) * fw + c * dim + a];
        ++used;
      }
      if (used == 0) {
        uc[c] = data[c](x);
        fixed[c] = true;
      } else {
        uc[c] = guess / used;
      }
    }
    for (int it = 0;; ++it) {
      rhs(uc, node, x.data(), Fx.data());
      double change = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        if (fixed[c]) {
          un[c] = uc[c];
          continue;
        }
        int used = 0;
        double v = 0.0;
        for (int a : sys.axes[c]) {
          if (idx[a] == 0) continue;
          const std::size_t prev = node - grid.stride(a);
          v += u[prev * C + c] + 0.5 * grid.step(a) * (F[(prev % window) * fw + c * dim + a] + Fx[c * dim + a]);
          ++used;
        }
        un[c] = v / used;
        change = std::max(change, std::abs(un[c] - uc[c]) / (1.0 + std::abs(un[c])));
      }
      std::copy(un.begin(), un.end(), uc);
      if (change <= 1e-15 || it + 1 >= opt.max_iterations) break;
    }
    rhs(uc, node, x.data(), Fx.data());
    std::copy(Fx.begin(), Fx.end(), F.begin() + (node % window) * fw);
    for (std::size_t c = 0; c < C; ++c) {
      if (!std::isfinite(uc[c]) || std::abs(uc[c]) > opt.blowup)
        throw NumericalError("goursat: " + sys.names[c] + " diverged at " + locus(grid, node));
    }
    if (sys.monitor) {
      const std::string msg = sys.monitor(uc);
      if (!msg.empty()) throw NumericalError(msg + " at " + locus(grid, node));
    }
  }
  return u;
}

GoursatResult march_goursat(const GoursatSystem& sys, const Grid& grid, const GoursatOptions& opt) {
  check_system(sys, grid);
  if (opt.levels < 1 || opt.levels > 4) throw ValidationError("goursat: levels must be between 1 and 4");
  const std::size_t C = sys.names.size();
  const std::size_t N = grid.size();
  const int dim = grid.dim();

  // table[l][k]: level l extrapolated k times, restricted to the target nodes.
  std::vector<std::vector<std::vector<double>>> table(opt.levels);
  for (int l = 0; l < opt.levels; ++l) {
    const int factor = 1 << l;
    const Grid fine = grid.refined(factor);
    const std::vector<double> u = march_level(sys, fine, opt);
    std::vector<double> coarse(N * C);
    for (std::size_t node = 0; node < N; ++node) {
      Index idx = grid.unflatten(node);
      for (int a = 0; a < dim; ++a) idx[a] *= factor;
      const std::size_t f = fine.flat(idx);
      for (std::size_t c = 0; c < C; ++c) coarse[node * C + c] = u[f * C + c];
    }
    table[l].push_back(std::move(coarse));
    for (int k = 1; k <= l; ++k) {
      const auto& hi = table[l][k - 1];
      const auto& lo = table[l - 1][k - 1];
      const double w = 1.0 / (std::pow(4.0, k) - 1.0);
      std::vector<double> t(N * C);
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = hi[i] + (hi[i] - lo[i]) * w;
      table[l].push_back(std::move(t));
    }
  }

  GoursatResult r;
  r.grid = grid;
  for (int l = 0; l + 1 < opt.levels; ++l) {
    double m = 0.0;
    for (std::size_t i = 0; i < N * C; ++i) m = std::max(m, std::abs(table[l][0][i] - table[l + 1][0][i]));
    r.level_differences.push_back(m);
  }
  r.richardson_ratio = r.level_differences.size() >= 2 ? r.level_differences[0] / r.level_differences[1]
                                                       : std::numeric_limits<double>::quiet_NaN();
  const auto& best = table.back().back();
  for (std::size_t c = 0; c < C; ++c) {
    Field f(grid);
    for (std::size_t node = 0; node < N; ++node) f[node] = best[node * C + c];
    r.fields.push_back(std::move(f));
  }
  return r;
}

}  // namespace shapelab
