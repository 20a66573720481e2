#include "shapelab/compat.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "shapelab/errors.hpp"
#include "shapelab/parallel.hpp"

namespace shapelab {

namespace {

using expr::ScalarExpr;
using expr::Program;

std::vector<ScalarExpr> symbolic_coefficients(const DiagonalMetric& m, const char* what) {
  if (!m.symbolic()) throw ValidationError(std::string(what) + ": metric must be given by expressions");
  std::vector<ScalarExpr> out;
  for (const auto& f : m.coefficients()) out.push_back(symbolic(f));
  return out;
}

// Christoffel symbols Gamma^k_ij of diag(G) at index (k * n + i) * n + j.
std::vector<ScalarExpr> christoffel(const std::vector<ScalarExpr>& G) {
  const int n = static_cast<int>(G.size());
  std::vector<ScalarExpr> out(n * n * n, ScalarExpr::constant(0.0));
  auto at = [&](int k, int i, int j) -> ScalarExpr& { return out[(k * n + i) * n + j]; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const ScalarExpr dGi = expr::differentiate(G[i], j);
      if (i == j) {
        at(i, i, i) = dGi / (2.0 * G[i]);
      } else {
        at(i, i, j) = dGi / (2.0 * G[i]);
        at(i, j, i) = at(i, i, j);
        at(j, i, i) = -dGi / (2.0 * G[j]);
      }
    }
  return out;
}

// Compiled symbolic data of an operator; evaluated node by node.
class Compiled {
 public:
  explicit Compiled(const OperatorField& op) : n_(op.n) {
    op.validate();
    slots_ = expr::coordinate_slots(n_);
    const int n = n_;
    std::vector<ScalarExpr> G;
    for (const auto& gu : op.g_upper) G.push_back(1.0 / gu);
    const auto gamma = christoffel(G);
    for (int i = 0; i < n; ++i) {
      add(g_, op.g_upper[i]);
      for (int j = 0; j < n; ++j) {
        add(r_, op.r[i][j]);
        const ScalarExpr T = op.r[i][j] * op.g_upper[j];
        add(T_, T);
      }
    }
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          add(dr_, expr::differentiate(op.r[i][j], m));
          const ScalarExpr dT = expr::differentiate(op.r[i][j] * op.g_upper[j], m);
          add(dT_, dT);
          for (int l = 0; l < n; ++l) add(ddT_, expr::differentiate(dT, l));
        }
    for (const auto& c : gamma) add(Gamma_, c);
    for (int l = 0; l < n; ++l)
      for (const auto& c : gamma) add(dGamma_, expr::differentiate(c, l));
  }

  struct Point {
    int n;
    std::vector<double> g, r, T, dr, dT, ddT, Gamma, dGamma;
    double rr(int i, int j) const { return r[i * n + j]; }
    double TT(int i, int j) const { return T[i * n + j]; }
    // d_m r^i_j
    double Dr(int m, int i, int j) const { return dr[(m * n + i) * n + j]; }
    double DT(int m, int i, int j) const { return dT[(m * n + i) * n + j]; }
    // d_l d_m T^ij
    double DDT(int l, int m, int i, int j) const { return ddT[((m * n + i) * n + j) * n + l]; }
    double Gm(int k, int i, int j) const { return Gamma[(k * n + i) * n + j]; }
    double DGm(int l, int k, int i, int j) const { return dGamma[((l * n + k) * n + i) * n + j]; }
  };

  Point at(std::span<const double> x) const {
    Point p;
    p.n = n_;
    eval(g_, x, p.g);
    eval(r_, x, p.r);
    eval(T_, x, p.T);
    eval(dr_, x, p.dr);
    eval(dT_, x, p.dT);
    eval(ddT_, x, p.ddT);
    eval(Gamma_, x, p.Gamma);
    eval(dGamma_, x, p.dGamma);
    return p;
  }

 private:
  void add(std::vector<Program>& v, const ScalarExpr& e) { v.emplace_back(e, slots_); }
  static void eval(const std::vector<Program>& v, std::span<const double> x, std::vector<double>& out) {
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i](x);
  }

  int n_;
  std::vector<std::string> slots_;
  std::vector<Program> g_, r_, T_, dr_, dT_, ddT_, Gamma_, dGamma_;
};

std::vector<double> nijenhuis_at(const Compiled::Point& p) {
  const int n = p.n;
  std::vector<double> N(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double a = 0.0, b = 0.0, c = 0.0;
        for (int s = 0; s < n; ++s) {
          a += p.rr(s, j) * p.Dr(s, i, k);
          b += p.rr(s, k) * p.Dr(s, i, j);
          c += p.rr(i, s) * (p.Dr(j, s, k) - p.Dr(k, s, j));
        }
        N[(i * n + j) * n + k] = (a - b) - c;
      }
  return N;
}

// nT[(m * n + i) * n + j] = D_m T^ij.
std::vector<double> nabla_T(const Compiled::Point& p) {
  const int n = p.n;
  std::vector<double> out(n * n * n);
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = p.DT(m, i, j);
        for (int s = 0; s < n; ++s) v += p.Gm(i, m, s) * p.TT(s, j) + p.Gm(j, m, s) * p.TT(i, s);
        out[(m * n + i) * n + j] = v;
      }
  return out;
}

// D_m r^j_k for the mixed tensor, at (m * n + j) * n + k.
std::vector<double> nabla_r(const Compiled::Point& p) {
  const int n = p.n;
  std::vector<double> out(n * n * n);
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = p.Dr(m, j, k);
        for (int s = 0; s < n; ++s) v += p.Gm(j, m, s) * p.rr(s, k) - p.Gm(s, m, k) * p.rr(j, s);
        out[(m * n + j) * n + k] = v;
      }
  return out;
}

double nabla_condition_at(const Compiled::Point& p) {
  const int n = p.n;
  const auto nT = nabla_T(p);
  auto NT = [&](int m, int i, int j) { return nT[(m * n + i) * n + j]; };
  // D[l][m][i][j] = D_l D_m T^ij.
  std::vector<double> D(n * n * n * n);
  auto DD = [&](int l, int m, int i, int j) -> double& { return D[((l * n + m) * n + i) * n + j]; };
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = p.DDT(l, m, i, j);
          for (int s = 0; s < n; ++s) {
            v += p.DGm(l, i, m, s) * p.TT(s, j) + p.Gm(i, m, s) * p.DT(l, s, j);
            v += p.DGm(l, j, m, s) * p.TT(i, s) + p.Gm(j, m, s) * p.DT(l, i, s);
            v -= p.Gm(s, l, m) * NT(s, i, j);
            v += p.Gm(i, l, s) * NT(m, s, j) + p.Gm(j, l, s) * NT(m, i, s);
          }
          DD(l, m, i, j) = v;
        }
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = p.g[i] * p.g[j] * DD(i, j, k, l) + p.g[k] * p.g[l] * DD(k, l, i, j) -
                           p.g[i] * p.g[k] * DD(i, k, j, l) - p.g[j] * p.g[l] * DD(j, l, i, k);
          worst = std::max(worst, std::abs(v));
        }
  return worst;
}

std::vector<double> btilde_at(const Compiled::Point& p) {
  const int n = p.n;
  const auto nT = nabla_T(p);
  const auto nr = nabla_r(p);
  std::vector<double> out(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = p.g[i] * nr[(i * n + j) * n + k] - p.g[j] * nr[(j * n + i) * n + k] + nT[(k * n + i) * n + j];
        for (int s = 0; s < n; ++s) v += 2.0 * (-p.g[s] * p.Gm(j, s, k)) * p.rr(i, s);
        out[(i * n + j) * n + k] = 0.5 * v;
      }
  return out;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Rank3Field make_rank3(int n, const Grid& g) {
  Rank3Field f;
  f.n = n;
  f.grid = g;
  f.c.assign(n * n * n, Field(g));
  return f;
}

}  // namespace

OperatorField OperatorField::from_metrics(const DiagonalMetric& g, const DiagonalMetric& gt) {
  if (g.dim() != gt.dim() || !(g.grid() == gt.grid())) throw ValidationError("compat: metrics differ in dimension or grid");
  const auto G = symbolic_coefficients(g, "compat");
  const auto Gt = symbolic_coefficients(gt, "compat");
  OperatorField op;
  op.n = g.dim();
  op.grid = g.grid();
  op.r.assign(op.n, std::vector<ScalarExpr>(op.n, ScalarExpr::constant(0.0)));
  for (int i = 0; i < op.n; ++i) {
    op.r[i][i] = G[i] / Gt[i];
    op.g_upper.push_back(1.0 / G[i]);
  }
  return op;
}

void OperatorField::validate() const {
  if (n < 1 || n > 3 || grid.dim() != n) throw ValidationError("compat: operator dimension must match a 1..3 grid");
  if (static_cast<int>(r.size()) != n || static_cast<int>(g_upper.size()) != n)
    throw ValidationError("compat: r must be n x n and g diagonal of size n");
  for (const auto& row : r)
    if (static_cast<int>(row.size()) != n) throw ValidationError("compat: r must be n x n");
}

double OperatorField::symmetry_defect() const {
  validate();
  const auto slots = expr::coordinate_slots(n);
  std::vector<Program> r_p, g_p;
  for (int i = 0; i < n; ++i) {
    g_p.emplace_back(g_upper[i], slots);
    for (int j = 0; j < n; ++j) r_p.emplace_back(r[i][j], slots);
  }
  std::vector<double> worst(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t node) {
    double x[3];
    grid.point(node, x);
    const std::span<const double> pt(x, n);
    double w = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        w = std::max(w, std::abs(r_p[i * n + j](pt) * g_p[j](pt) - r_p[j * n + i](pt) * g_p[i](pt)));
    worst[node] = w;
  });
  return *std::max_element(worst.begin(), worst.end());
}

std::vector<double> nijenhuis(const OperatorField& op, std::span<const double> pt) {
  const Compiled c(op);
  if (static_cast<int>(pt.size()) != op.n) throw ValidationError("nijenhuis: point dimension mismatch");
  return nijenhuis_at(c.at(pt));
}

ResidualReport nabla_condition_residual(const OperatorField& op) {
  const Compiled c(op);
  const Grid& g = op.grid;
  ReportBuilder rb("second covariant derivative condition", g, {"D D r condition"});
  parallel_for(g.size(), [&](std::size_t node) {
    double x[3];
    g.point(node, x);
    rb.set(0, node, nabla_condition_at(c.at(std::span<const double>(x, op.n))));
  });
  return rb.finish();
}

Rank3Field btilde_coeffs(const OperatorField& op) {
  const Compiled c(op);
  const Grid& g = op.grid;
  const int n = op.n;
  Rank3Field out = make_rank3(n, g);
  std::vector<double> nij(g.size(), 0.0);
  parallel_for(g.size(), [&](std::size_t node) {
    double x[3];
    g.point(node, x);
    const auto p = c.at(std::span<const double>(x, n));
    const auto b = btilde_at(p);
    for (std::size_t e = 0; e < b.size(); ++e) out.c[e][node] = b[e];
    nij[node] = max_abs(nijenhuis_at(p));
  });
  const auto worst = std::max_element(nij.begin(), nij.end());
  if (!(*worst <= kCompatTolerance))
    out.warnings.push_back("Nijenhuis tensor reaches " + std::to_string(*worst) + " at " +
                           locus(g, static_cast<std::size_t>(worst - nij.begin())) +
                           "; the b~ formula assumes it vanishes");
  return out;
}

Rank3Field hamiltonian_b(const DiagonalMetric& m) {
  const auto G = symbolic_coefficients(m, "hamiltonian_b");
  const int n = m.dim();
  const auto gamma = christoffel(G);
  const auto slots = expr::coordinate_slots(n);
  std::vector<Program> prog;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) prog.emplace_back(-gamma[(j * n + i) * n + k] / G[i], slots);
  const Grid& g = m.grid();
  Rank3Field out = make_rank3(n, g);
  parallel_for(g.size(), [&](std::size_t node) {
    double x[3];
    g.point(node, x);
    for (std::size_t e = 0; e < prog.size(); ++e) out.c[e][node] = prog[e](std::span<const double>(x, n));
  });
  return out;
}

double Theorem1Verdict::worst() const {
  if (!accepted) return std::max(flatness_g, flatness_gt);
  return std::max({symmetry, nijenhuis, nabla, btilde_consistency});
}

nlohmann::json Theorem1Verdict::to_json() const {
  auto num = [&](double v) { return accepted ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"flatness_g", flatness_g},
          {"flatness_gt", flatness_gt},
          {"accepted", accepted},
          {"symmetry", num(symmetry)},
          {"nijenhuis", num(nijenhuis)},
          {"nabla", num(nabla)},
          {"btilde_consistency", num(btilde_consistency)},
          {"multiple_spectrum_nodes", multiple_spectrum_nodes},
          {"tolerance", kCompatTolerance},
          {"passed", passed},
          {"notes", notes}};
}

namespace {

DiagonalMetric unit_scaled(const DiagonalMetric& m) {
  double scale = 0.0;
  for (const auto& f : m.coefficients()) {
    const Field t = tabulate(f, m.grid());
    for (double v : t.values()) scale = std::max(scale, std::abs(v));
  }
  std::vector<ScalarField> G;
  for (const auto& f : m.coefficients()) G.emplace_back(symbolic(f) / scale);
  return DiagonalMetric(std::move(G), m.grid());
}

double lame_flatness(const DiagonalMetric& m, const char* what) {
  if (!m.riemannian()) throw ValidationError(std::string("theorem1: ") + what + " must be positive definite");
  std::vector<ScalarExpr> H;
  for (const auto& f : m.coefficients()) H.push_back(expr::apply(expr::Function::sqrt, symbolic(f)));
  const auto rd = RotationData::from_lame(std::move(H), m.grid());
  return flatness_residual(rd).max();
}

}  // namespace

Theorem1Verdict theorem1_report(const DiagonalMetric& g_in, const DiagonalMetric& gt_in) {
  symbolic_coefficients(g_in, "theorem1");
  symbolic_coefficients(gt_in, "theorem1");
  if (g_in.dim() != gt_in.dim() || !(g_in.grid() == gt_in.grid()))
    throw ValidationError("theorem1: metrics differ in dimension or grid");
  const DiagonalMetric g = unit_scaled(g_in), gt = unit_scaled(gt_in);
  Theorem1Verdict v;
  v.flatness_g = lame_flatness(g, "g");
  v.flatness_gt = lame_flatness(gt, "g~");
  v.accepted = v.flatness_g <= kCompatTolerance && v.flatness_gt <= kCompatTolerance;
  if (!v.accepted) {
    v.notes.push_back("rejected: a metric is not flat (flatness residuals " + std::to_string(v.flatness_g) + ", " +
                      std::to_string(v.flatness_gt) + ")");
    return v;
  }
  const OperatorField op = OperatorField::from_metrics(g, gt);
  const int n = op.n;
  v.symmetry = op.symmetry_defect();
  const Compiled c(op);
  const Rank3Field b_direct = hamiltonian_b(gt);
  const Grid& grid = op.grid;
  std::vector<double> nij(grid.size()), nab(grid.size()), cons(grid.size());
  std::vector<char> multiple(grid.size(), 0);
  parallel_for(grid.size(), [&](std::size_t node) {
    double x[3];
    grid.point(node, x);
    const auto p = c.at(std::span<const double>(x, n));
    nij[node] = max_abs(nijenhuis_at(p));
    nab[node] = nabla_condition_at(p);
    const auto b = btilde_at(p);
    double w = 0.0;
    for (std::size_t e = 0; e < b.size(); ++e) w = std::max(w, std::abs(b[e] - b_direct.c[e][node]));
    cons[node] = w;
    Eigen::MatrixXd R(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R(i, j) = p.rr(i, j);
    const Eigen::VectorXcd ev = R.eigenvalues();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(ev[i] - ev[j]) <= 1e-8 * std::max({1.0, std::abs(ev[i]), std::abs(ev[j])})) multiple[node] = 1;
  });
  v.nijenhuis = *std::max_element(nij.begin(), nij.end());
  v.nabla = *std::max_element(nab.begin(), nab.end());
  v.btilde_consistency = *std::max_element(cons.begin(), cons.end());
  v.multiple_spectrum_nodes = static_cast<std::size_t>(std::count(multiple.begin(), multiple.end(), 1));
  if (v.multiple_spectrum_nodes > 0)
    v.notes.push_back(std::to_string(v.multiple_spectrum_nodes) +
                      " nodes have a repeated eigenvalue of r; the conditions are evaluated but the spectrum is not simple there");
  v.passed = v.worst() <= kCompatTolerance;
  return v;
}

}  // namespace shapelab
