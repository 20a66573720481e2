#include "shapelab/lame.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

#include "shapelab/errors.hpp"
#include "shapelab/parallel.hpp"

namespace shapelab {

namespace {

using expr::ScalarExpr;
using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;

Field tab(const ScalarField& f, const Grid& g) { return tabulate(f, g, SampleMode::lenient); }
Field dtab(const ScalarField& f, int axis, const Grid& g) { return tab(derivative(f, axis), g); }

std::string ij(int i, int j) { return std::to_string(i + 1) + std::to_string(j + 1); }

void require_function_of(const ScalarExpr& e, int axis, const std::string& what) {
  for (const auto& name : e.free_names())
    if (name != expr::coordinate_name(axis))
      throw ValidationError(what + " may depend on " + expr::coordinate_name(axis) + " only, found '" + name + "'");
}

struct EtaTables {
  std::vector<Field> eta, deta;
};

EtaTables eta_tables(const std::vector<ScalarExpr>& eta, const Grid& g) {
  EtaTables t;
  for (int i = 0; i < static_cast<int>(eta.size()); ++i) {
    t.eta.push_back(sample(eta[i], g, SampleMode::strict));
    t.deta.push_back(sample(expr::differentiate(eta[i], i), g, SampleMode::strict));
  }
  return t;
}

void require_H_eta(const RotationData& rd, const char* what) {
  rd.validate();
  if (!rd.has_H()) throw ValidationError(std::string(what) + ": Lame coefficients H are required");
  if (!rd.has_eta()) throw ValidationError(std::string(what) + ": eta functions are required");
  rd.validate_eta();
}

// Largest range of f along lines parallel to `axis`.
double line_variation(const Field& f, int axis) {
  const Grid& g = f.grid();
  double worst = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (g.unflatten(node)[axis] != 0) continue;
    double lo = f[node], hi = f[node];
    for (int k = 1; k < g.count(axis); ++k) {
      const double v = f[node + k * g.stride(axis)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

// Entry-wise finite differences of a matrix field.
std::vector<CMat> fd_matrix(const std::vector<CMat>& A, const Grid& g, int axis) {
  const int m = static_cast<int>(A[0].rows());
  std::vector<CMat> out(A.size(), CMat::Zero(m, m));
  Field re(g), im(g);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      for (std::size_t k = 0; k < A.size(); ++k) {
        re[k] = A[k](r, c).real();
        im[k] = A[k](r, c).imag();
      }
      const Field dre = fd_derivative(re, axis), dim = fd_derivative(im, axis);
      for (std::size_t k = 0; k < A.size(); ++k) out[k](r, c) = cd(dre[k], dim[k]);
    }
  return out;
}

std::string first_locus(const std::vector<std::size_t>& nodes, const Grid& g) {
  return nodes.empty() ? std::string() : locus(g, nodes.front());
}

}  // namespace

ResidualReport system4_residual(const RotationData& rd) {
  require_H_eta(rd, "system4");
  if (rd.n != 2) throw ValidationError("system4: n must be 2");
  const Grid& g = rd.grid;
  const Field H1 = tab(rd.H[0], g), H2 = tab(rd.H[1], g);
  const Field b12 = tab(rd.beta[0][1], g), b21 = tab(rd.beta[1][0], g);
  const Field d1H2 = dtab(rd.H[1], 0, g), d2H1 = dtab(rd.H[0], 1, g);
  const Field d1b12 = dtab(rd.beta[0][1], 0, g), d2b21 = dtab(rd.beta[1][0], 1, g);
  const EtaTables e = eta_tables(rd.eta, g);
  ReportBuilder rb("system4", g,
                   {"d1 H2 = beta12 H1", "d2 H1 = beta21 H2", "d1 beta12 + d2 beta21 = 0", "eta-weighted constraint"});
  parallel_for(g.size(), [&](std::size_t k) {
    rb.set(0, k, d1H2[k] - b12[k] * H1[k]);
    rb.set(1, k, d2H1[k] - b21[k] * H2[k]);
    rb.set(2, k, d1b12[k] + d2b21[k]);
    rb.set(3, k,
           e.eta[0][k] * d1b12[k] + e.eta[1][k] * d2b21[k] + 0.5 * e.deta[0][k] * b12[k] +
               0.5 * e.deta[1][k] * b21[k] + H1[k] * H2[k]);
  });
  return rb.finish();
}

ResidualReport lax_zero_curvature_residual(const RotationData& rd, double lambda, LaxForm form) {
  rd.validate();
  if (!rd.has_eta()) throw ValidationError("lax: eta functions are required");
  rd.validate_eta();
  const int n = rd.n;
  if (form != LaxForm::ndim && (n != 2 || !rd.has_H()))
    throw ValidationError("lax: the 3x3 and 2x2 forms need n = 2 and Lame coefficients");
  const Grid& g = rd.grid;
  const std::size_t N = g.size();
  const EtaTables e = eta_tables(rd.eta, g);
  for (int i = 0; i < n; ++i) {
    int sign = 0;
    for (std::size_t k = 0; k < N; ++k) {
      const double s = lambda + e.eta[i][k];
      const int sk = s > 1e-12 ? 1 : (s < -1e-12 ? -1 : 0);
      if (sk == 0 || (sign != 0 && sk != sign))
        throw ValidationError("lambda = " + std::to_string(lambda) + " outside the admissible interval: lambda + eta_" +
                              std::to_string(i + 1) + " vanishes near " + locus(g, k));
      sign = sk;
    }
  }
  std::vector<std::vector<Field>> beta(n, std::vector<Field>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) beta[i][j] = tab(rd.beta[i][j], g);
  std::vector<Field> H;
  if (rd.has_H())
    for (const auto& h : rd.H) H.push_back(tab(h, g));

  const int m = form == LaxForm::three_by_three ? 3 : (form == LaxForm::two_by_two ? 2 : n);
  std::vector<std::vector<CMat>> A(n, std::vector<CMat>(N, CMat::Zero(m, m)));
  const cd I(0.0, 1.0);
  parallel_for(N, [&](std::size_t k) {
    std::vector<cd> w(n);
    for (int i = 0; i < n; ++i) w[i] = std::sqrt(cd(lambda + e.eta[i][k], 0.0));
    if (form == LaxForm::three_by_three) {
      const cd s21 = w[1] / w[0], s12 = w[0] / w[1];
      const cd h1 = H[0][k] / w[0], h2 = H[1][k] / w[1];
      CMat& U = A[0][k];
      U(0, 1) = -s21 * beta[1][0][k];
      U(1, 0) = s21 * beta[1][0][k];
      U(0, 2) = h1;
      U(2, 0) = -h1;
      CMat& V = A[1][k];
      V(0, 1) = s12 * beta[0][1][k];
      V(1, 0) = -s12 * beta[0][1][k];
      V(1, 2) = h2;
      V(2, 1) = -h2;
    } else if (form == LaxForm::two_by_two) {
      CMat& U = A[0][k];
      U(0, 0) = I * w[1] * beta[1][0][k];
      U(0, 1) = H[0][k];
      U(1, 0) = -H[0][k];
      U(1, 1) = -I * w[1] * beta[1][0][k];
      U /= 2.0 * w[0];
      CMat& V = A[1][k];
      V(0, 0) = -w[0] * beta[0][1][k];
      V(0, 1) = H[1][k];
      V(1, 0) = H[1][k];
      V(1, 1) = w[0] * beta[0][1][k];
      V *= I / (2.0 * w[1]);
    } else {
      for (int a = 0; a < n; ++a) {
        CMat& M = A[a][k];
        const double la = lambda + e.eta[a][k];
        M(a, a) = -e.deta[a][k] / (2.0 * la);
        for (int i = 0; i < n; ++i) {
          if (i == a) continue;
          M(i, a) = beta[i][a][k];
          M(a, i) = -(lambda + e.eta[i][k]) / la * beta[i][a][k];
        }
      }
    }
  });

  std::vector<std::string> names;
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      names.push_back("zero curvature " + ij(a, b));
      pairs.emplace_back(a, b);
    }
  const char* label = form == LaxForm::three_by_three ? "3x3" : (form == LaxForm::two_by_two ? "2x2" : "ndim");
  ReportBuilder rb(std::string("lax ") + label + " lambda=" + std::to_string(lambda), g, names);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    const auto dAa = fd_matrix(A[a], g, b);
    const auto dAb = fd_matrix(A[b], g, a);
    parallel_for(N, [&](std::size_t k) {
      const CMat R = dAa[k] - dAb[k] + A[a][k] * A[b][k] - A[b][k] * A[a][k];
      rb.set(p, k, R.cwiseAbs().maxCoeff());
    });
  }
  return rb.finish();
}

ResidualReport darboux_residual(const RotationData& rd) {
  rd.validate();
  if (!rd.has_eta()) throw ValidationError("darboux: eta functions are required");
  rd.validate_eta();
  const bool sphere = rd.geometry == Geometry::sphere;
  if (sphere && !rd.has_H()) throw ValidationError("darboux: sphere geometry needs Lame coefficients");
  const int n = rd.n;
  const Grid& g = rd.grid;
  const EtaTables e = eta_tables(rd.eta, g);
  std::vector<std::vector<Field>> beta(n, std::vector<Field>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) beta[i][j] = tab(rd.beta[i][j], g);
  std::vector<Field> H;
  if (sphere)
    for (const auto& h : rd.H) H.push_back(tab(h, g));

  struct Eq {
    int i, j, k;
  };
  std::vector<Eq> eqs;
  std::vector<std::string> names;
  std::vector<Field> lhs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        eqs.push_back({i, j, k});
        names.push_back("d" + std::to_string(k + 1) + " beta" + ij(i, j));
        lhs.push_back(dtab(rd.beta[i][j], k, g));
      }
    }
  ReportBuilder rb("darboux", g, names);
  parallel_for(g.size(), [&](std::size_t node) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(e.eta[j][node] - e.eta[i][node]) < 1e-12) {
          rb.exclude(node);
          return;
        }
    for (std::size_t q = 0; q < eqs.size(); ++q) {
      const auto [i, j, k] = eqs[q];
      double rhs;
      if (k != i) {
        rhs = beta[i][k][node] * beta[k][j][node];
      } else {
        double num = 0.5 * e.deta[i][node] * beta[i][j][node] + 0.5 * e.deta[j][node] * beta[j][i][node];
        for (int l = 0; l < n; ++l)
          if (l != i && l != j) num += (e.eta[l][node] - e.eta[j][node]) * beta[l][i][node] * beta[l][j][node];
        if (sphere) num += H[i][node] * H[j][node];
        rhs = num / (e.eta[j][node] - e.eta[i][node]);
      }
      rb.set(q, node, lhs[q][node] - rhs);
    }
  });
  return rb.finish();
}

DarbouxSolution integrate_darboux(const std::vector<ScalarExpr>& eta, const std::vector<std::vector<ScalarExpr>>& boundary,
                                  const Grid& grid, const std::vector<ScalarExpr>& H_boundary,
                                  const GoursatOptions& opt) {
  const int n = grid.dim();
  if (n != 2 && n != 3) throw ValidationError("darboux: n must be 2 or 3");
  if (static_cast<int>(eta.size()) != n) throw ValidationError("darboux: need one eta per coordinate");
  if (static_cast<int>(boundary.size()) != n) throw ValidationError("darboux: boundary must be n x n");
  if (!H_boundary.empty() && static_cast<int>(H_boundary.size()) != n)
    throw ValidationError("darboux: need one H boundary function per coordinate");
  RotationData probe;
  probe.n = n;
  probe.eta = eta;
  probe.validate_eta();
  {
    const EtaTables e = eta_tables(eta, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          if (std::abs(e.eta[i][k] - e.eta[j][k]) < 1e-12)
            throw ValidationError("darboux: eta_" + std::to_string(i + 1) + " = eta_" + std::to_string(j + 1) +
                                  " at " + locus(grid, k));
  }
  const bool sphere = n == 2;

  // Components: beta_ij (i != j) row by row, then H_1..H_n.
  GoursatSystem sys;
  std::vector<int> slot(n * n, -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (static_cast<int>(boundary[i].size()) != n) throw ValidationError("darboux: boundary must be n x n");
      require_function_of(boundary[i][j], j, "darboux: boundary data for beta" + ij(i, j));
      slot[i * n + j] = static_cast<int>(sys.names.size());
      sys.names.push_back("beta" + ij(i, j));
      std::vector<int> axes;
      for (int k = 0; k < n; ++k)
        if (k != j) axes.push_back(k);
      sys.axes.push_back(axes);
      sys.data.push_back(boundary[i][j]);
    }
  const int h0 = static_cast<int>(sys.names.size());
  for (int j = 0; j < n; ++j) {
    sys.names.push_back("H" + std::to_string(j + 1));
    std::vector<int> axes;
    for (int i = 0; i < n; ++i)
      if (i != j) axes.push_back(i);
    sys.axes.push_back(axes);
    ScalarExpr d = H_boundary.empty() ? ScalarExpr::constant(1.0) : H_boundary[j];
    require_function_of(d, j, "darboux: boundary data for H" + std::to_string(j + 1));
    sys.data.push_back(d);
  }
  sys.bind = [&eta, slot, h0, n, sphere](const Grid& g) -> GoursatRhs {
    auto e = std::make_shared<EtaTables>(eta_tables(eta, g));
    return [e, slot, h0, n, sphere](const double* u, std::size_t node, const double*, double* out) {
      auto b = [&](int i, int j) { return u[slot[i * n + j]]; };
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          double* o = out + slot[i * n + j] * n;
          for (int k = 0; k < n; ++k) {
            if (k == j) continue;
            if (k != i) {
              o[k] = b(i, k) * b(k, j);
              continue;
            }
            const double ei = e->eta[i][node], ej = e->eta[j][node];
            double num = 0.5 * e->deta[i][node] * b(i, j) + 0.5 * e->deta[j][node] * b(j, i);
            for (int l = 0; l < n; ++l)
              if (l != i && l != j) num += (e->eta[l][node] - ej) * b(l, i) * b(l, j);
            if (sphere) num += u[h0 + i] * u[h0 + j];
            o[k] = num / (ej - ei);
          }
        }
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          if (i != j) out[(h0 + j) * n + i] = b(i, j) * u[h0 + i];
    };
  };

  DarbouxSolution s;
  s.march = march_goursat(sys, grid, opt);
  s.rd.n = n;
  s.rd.grid = grid;
  s.rd.eta = eta;
  s.rd.geometry = sphere ? Geometry::sphere : Geometry::flat;
  s.rd.beta.assign(n, std::vector<ScalarField>(n, constant_field(0.0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s.rd.beta[i][j] = s.march.fields[slot[i * n + j]];
  for (int j = 0; j < n; ++j) s.rd.H.emplace_back(s.march.fields[h0 + j]);
  return s;
}

ConstEtaData const_eta_integrals(const RotationData& rd) {
  rd.validate();
  if (!rd.has_eta()) throw ValidationError("integrals: eta functions are required");
  const bool sphere = rd.geometry == Geometry::sphere;
  if (sphere && !rd.has_H()) throw ValidationError("integrals: sphere geometry needs Lame coefficients");
  const int n = rd.n;
  const Grid& g = rd.grid;
  ConstEtaData d;
  for (int i = 0; i < n; ++i) {
    if (!rd.eta[i].free_names().empty())
      throw ValidationError("integrals: eta_" + std::to_string(i + 1) + " = " + rd.eta[i].str() + " is not constant");
    d.c.push_back(rd.eta[i].eval({}));
  }
  std::vector<std::vector<Field>> beta(n, std::vector<Field>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) beta[i][j] = tab(rd.beta[i][j], g);
  std::vector<Field> H;
  if (sphere)
    for (const auto& h : rd.H) H.push_back(tab(h, g));
  for (int i = 0; i < n; ++i) {
    Field P(g);
    for (std::size_t k = 0; k < P.size(); ++k) {
      double v = sphere ? H[i][k] * H[i][k] : 0.0;
      for (int l = 0; l < n; ++l)
        if (l != i) v += (d.c[l] - d.c[i]) * beta[l][i][k] * beta[l][i][k];
      P[k] = v;
    }
    double var = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) var = std::max(var, line_variation(P, j));
    d.P.push_back(std::move(P));
    d.P_variation.push_back(var);
  }
  auto make = [&](auto fn) {
    Field f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = fn(k);
    return f;
  };
  if (n == 2 && sphere && d.c[1] > d.c[0]) {
    const double s = std::sqrt(d.c[1] - d.c[0]);
    d.angle_names = {"phi", "psi"};
    d.angles.push_back(make([&](std::size_t k) { return std::atanh(H[1][k] / (s * beta[0][1][k])); }));
    d.angles.push_back(make([&](std::size_t k) { return std::atan2(H[0][k], s * beta[1][0][k]); }));
  } else if (n == 3 && d.c[0] < d.c[1] && d.c[1] < d.c[2]) {
    const double s21 = std::sqrt(d.c[1] - d.c[0]), s31 = std::sqrt(d.c[2] - d.c[0]), s32 = std::sqrt(d.c[2] - d.c[1]);
    d.angle_names = {"p", "q", "r"};
    d.angles.push_back(make([&](std::size_t k) { return std::atan2(s21 * beta[1][0][k], s31 * beta[2][0][k]); }));
    d.angles.push_back(make([&](std::size_t k) { return std::asinh(s21 * beta[0][1][k]); }));
    d.angles.push_back(make([&](std::size_t k) { return std::atan2(s31 * beta[0][2][k], s32 * beta[1][2][k]); }));
    d.mu = triple_mu(d.c);
  }
  return d;
}

Ex8Solution solve_goursat_ex8(const ScalarExpr& phi0, const ScalarExpr& psi0, const Grid& grid,
                              const GoursatOptions& opt) {
  if (grid.dim() != 2) throw ValidationError("goursat ex8: grid must be two-dimensional");
  require_function_of(phi0, 1, "goursat ex8: phi0");
  require_function_of(psi0, 0, "goursat ex8: psi0");
  GoursatSystem sys;
  sys.names = {"phi", "psi"};
  sys.axes = {{0}, {1}};
  sys.data = {phi0, psi0};
  sys.bind = [](const Grid&) -> GoursatRhs {
    return [](const double* u, std::size_t, const double*, double* out) {
      out[0 * 2 + 0] = std::sin(u[1]);
      out[1 * 2 + 1] = std::sinh(u[0]);
    };
  };
  Ex8Solution s;
  s.march = march_goursat(sys, grid, opt);
  s.phi = s.march.fields[0];
  s.psi = s.march.fields[1];
  const std::size_t N = grid.size();

  auto make = [&](auto fn) {
    Field f(grid);
    for (std::size_t k = 0; k < N; ++k) f[k] = fn(k);
    return f;
  };
  s.rd.n = 2;
  s.rd.grid = grid;
  s.rd.geometry = Geometry::sphere;
  s.rd.eta = {ScalarExpr::constant(-0.5), ScalarExpr::constant(0.5)};
  s.rd.H = {make([&](std::size_t k) { return std::sin(s.psi[k]); }),
            make([&](std::size_t k) { return std::sinh(s.phi[k]); })};
  s.rd.beta.assign(2, std::vector<ScalarField>(2, constant_field(0.0)));
  s.rd.beta[0][1] = make([&](std::size_t k) { return std::cosh(s.phi[k]); });
  s.rd.beta[1][0] = make([&](std::size_t k) { return std::cos(s.psi[k]); });

  const Field phi1 = fd_derivative(s.phi, 0), psi2 = fd_derivative(s.psi, 1);
  {
    ReportBuilder rb("ex8 first-order system", grid, {"d1 phi = sin psi", "d2 psi = sinh phi"});
    for (std::size_t k = 0; k < N; ++k) {
      rb.set(0, k, phi1[k] - std::sin(s.psi[k]));
      rb.set(1, k, psi2[k] - std::sinh(s.phi[k]));
    }
    s.first_order = rb.finish();
  }
  {
    const Field phi12 = fd_derivative(phi1, 1), psi12 = fd_derivative(psi2, 0);
    ReportBuilder rb("ex8 Monge-Ampere", grid,
                     {"d1 d2 phi = sinh phi sqrt(1 - (d1 phi)^2)", "d1 d2 psi = sin psi sqrt(1 + (d2 psi)^2)"});
    std::vector<std::size_t> off;
    for (std::size_t k = 0; k < N; ++k) {
      const double rad = 1.0 - phi1[k] * phi1[k];
      if (std::cos(s.psi[k]) < 0.0 || rad < 1e-6) {
        off.push_back(k);
        rb.exclude(k);
        continue;
      }
      rb.set(0, k, phi12[k] - std::sinh(s.phi[k]) * std::sqrt(rad));
      rb.set(1, k, psi12[k] - std::sin(s.psi[k]) * std::sqrt(1.0 + psi2[k] * psi2[k]));
    }
    if (!off.empty())
      rb.note(std::to_string(off.size()) + " nodes leave the parametrization chart, first at " +
              first_locus(off, grid));
    s.monge_ampere = rb.finish();
  }
  return s;
}

std::vector<double> triple_mu(const std::vector<double>& c) {
  if (c.size() != 3 || !(c[0] < c[1] && c[1] < c[2])) throw ValidationError("triple: need c1 < c2 < c3");
  const double d21 = c[1] - c[0], d31 = c[2] - c[0], d32 = c[2] - c[1];
  return {std::sqrt(d32 / (d21 * d31)), std::sqrt(d31 / (d21 * d32)), std::sqrt(d21 / (d31 * d32))};
}

Grid triple_original_grid(const Grid& rescaled, const std::vector<double>& mu) {
  std::vector<double> origin, step;
  for (int a = 0; a < 3; ++a) {
    origin.push_back(rescaled.origin(a) / mu[a]);
    step.push_back(rescaled.step(a) / mu[a]);
  }
  return Grid(origin, step, rescaled.counts());
}

namespace {

// beta_ij from the angles; index [i][j].
void triple_beta(double p, double q, double r, const std::vector<double>& c, double b[3][3]) {
  const double s21 = std::sqrt(c[1] - c[0]), s31 = std::sqrt(c[2] - c[0]), s32 = std::sqrt(c[2] - c[1]);
  b[0][0] = b[1][1] = b[2][2] = 0.0;
  b[1][0] = std::sin(p) / s21;
  b[2][0] = std::cos(p) / s31;
  b[0][1] = std::sinh(q) / s21;
  b[2][1] = std::cosh(q) / s32;
  b[0][2] = std::sin(r) / s31;
  b[1][2] = std::cos(r) / s32;
}

}  // namespace

TripleSolution solve_triple_s2(const ScalarExpr& p0, const ScalarExpr& q0, const ScalarExpr& r0, const Grid& grid,
                               const std::vector<double>& c, const GoursatOptions& opt) {
  if (grid.dim() != 3) throw ValidationError("triple: grid must be three-dimensional");
  require_function_of(p0, 0, "triple: p0");
  require_function_of(q0, 1, "triple: q0");
  require_function_of(r0, 2, "triple: r0");
  const std::vector<double> mu = triple_mu(c);
  GoursatSystem sys;
  sys.names = {"p", "q", "r", "H1", "H2", "H3"};
  sys.axes = {{1, 2}, {0, 2}, {0, 1}, {1, 2}, {0, 2}, {0, 1}};
  sys.data = {p0, q0, r0, ScalarExpr::constant(1.0), ScalarExpr::constant(1.0), ScalarExpr::constant(1.0)};
  sys.bind = [c, mu](const Grid&) -> GoursatRhs {
    return [c, mu](const double* u, std::size_t, const double*, double* out) {
      const double p = u[0], q = u[1], r = u[2];
      out[0 * 3 + 1] = -std::cosh(q);
      out[0 * 3 + 2] = std::cos(r);
      out[1 * 3 + 0] = std::cos(p);
      out[1 * 3 + 2] = std::sin(r);
      out[2 * 3 + 0] = -std::sin(p);
      out[2 * 3 + 1] = std::sinh(q);
      double b[3][3];
      triple_beta(p, q, r, c, b);
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
          if (i != j) out[(3 + j) * 3 + i] = b[i][j] * u[3 + i] / mu[i];
    };
  };
  TripleSolution s;
  s.grid = grid;
  s.c = c;
  s.mu = mu;
  s.march = march_goursat(sys, grid, opt);
  s.p = s.march.fields[0];
  s.q = s.march.fields[1];
  s.r = s.march.fields[2];
  s.H = {s.march.fields[3], s.march.fields[4], s.march.fields[5]};
  const std::size_t N = grid.size();

  const Field p2 = fd_derivative(s.p, 1), p3 = fd_derivative(s.p, 2);
  const Field q1 = fd_derivative(s.q, 0), q3 = fd_derivative(s.q, 2);
  const Field r1 = fd_derivative(s.r, 0), r2 = fd_derivative(s.r, 1);
  {
    ReportBuilder rb("triple first-order system", grid,
                     {"d1 q = cos p", "d1 r = -sin p", "d2 p = -cosh q", "d2 r = sinh q", "d3 p = cos r",
                      "d3 q = sin r"});
    parallel_for(N, [&](std::size_t k) {
      const double p = s.p[k], q = s.q[k], r = s.r[k];
      rb.set(0, k, q1[k] - std::cos(p));
      rb.set(1, k, r1[k] + std::sin(p));
      rb.set(2, k, p2[k] + std::cosh(q));
      rb.set(3, k, r2[k] - std::sinh(q));
      rb.set(4, k, p3[k] - std::cos(r));
      rb.set(5, k, q3[k] - std::sin(r));
    });
    s.first_order = rb.finish();
  }
  {
    const Field q12 = fd_derivative(q1, 1), q13 = fd_derivative(q1, 2), q23 = fd_derivative(fd_derivative(s.q, 1), 2);
    ReportBuilder rb("triple Monge-Ampere", grid,
                     {"d1 d2 q = cosh q sqrt(1 - q1^2)", "d1 d3 q = -sqrt(1 - q1^2) sqrt(1 - q3^2)",
                      "d2 d3 q = sinh q sqrt(1 - q3^2)"});
    std::vector<std::size_t> off;
    for (std::size_t k = 0; k < N; ++k) {
      const double a = 1.0 - q1[k] * q1[k], b = 1.0 - q3[k] * q3[k];
      if (a < 1e-6 || b < 1e-6 || std::sin(s.p[k]) < 0.0 || std::cos(s.r[k]) < 0.0) {
        off.push_back(k);
        rb.exclude(k);
        continue;
      }
      rb.set(0, k, q12[k] - std::cosh(s.q[k]) * std::sqrt(a));
      rb.set(1, k, q13[k] + std::sqrt(a) * std::sqrt(b));
      rb.set(2, k, q23[k] - std::sinh(s.q[k]) * std::sqrt(b));
    }
    if (!off.empty())
      rb.note(std::to_string(off.size()) + " nodes leave the chart |d1 q| < 1, |d3 q| < 1, first at " +
              first_locus(off, grid));
    s.monge_ampere = rb.finish();
  }
  {
    auto make = [&](auto fn) {
      Field f(grid);
      for (std::size_t k = 0; k < N; ++k) f[k] = fn(k);
      return f;
    };
    // F_p = (., -cosh q, cos r), F_q = (cos p, ., sin r), F_r = (-sin p, sinh q, .).
    const Field Fp2 = make([&](std::size_t k) { return -std::cosh(s.q[k]); });
    const Field Fp3 = make([&](std::size_t k) { return std::cos(s.r[k]); });
    const Field Fq1 = make([&](std::size_t k) { return std::cos(s.p[k]); });
    const Field Fq3 = make([&](std::size_t k) { return std::sin(s.r[k]); });
    const Field Fr1 = make([&](std::size_t k) { return -std::sin(s.p[k]); });
    const Field Fr2 = make([&](std::size_t k) { return std::sinh(s.q[k]); });
    const Field cp_a = fd_derivative(Fp2, 2), cp_b = fd_derivative(Fp3, 1);
    const Field cq_a = fd_derivative(Fq1, 2), cq_b = fd_derivative(Fq3, 0);
    const Field cr_a = fd_derivative(Fr1, 1), cr_b = fd_derivative(Fr2, 0);
    ReportBuilder rb("triple cross-derivative commutativity", grid, {"p: d3 d2 = d2 d3", "q: d3 d1 = d1 d3", "r: d2 d1 = d1 d2"});
    for (std::size_t k = 0; k < N; ++k) {
      rb.set(0, k, cp_a[k] - cp_b[k]);
      rb.set(1, k, cq_a[k] - cq_b[k]);
      rb.set(2, k, cr_a[k] - cr_b[k]);
    }
    s.commutativity = rb.finish();
  }
  return s;
}

RotationData triple_to_rotation(const TripleSolution& s) {
  RotationData rd;
  rd.n = 3;
  rd.grid = triple_original_grid(s.grid, s.mu);
  rd.geometry = Geometry::flat;
  for (double c : s.c) rd.eta.push_back(ScalarExpr::constant(c));
  rd.beta.assign(3, std::vector<ScalarField>(3, constant_field(0.0)));
  std::vector<std::vector<Field>> b(3, std::vector<Field>(3, Field(rd.grid)));
  for (std::size_t k = 0; k < rd.grid.size(); ++k) {
    double v[3][3];
    triple_beta(s.p[k], s.q[k], s.r[k], s.c, v);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) b[i][j][k] = v[i][j];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) rd.beta[i][j] = std::move(b[i][j]);
  for (const auto& h : s.H) rd.H.emplace_back(Field(rd.grid, h.values()));
  return rd;
}

}  // namespace shapelab
