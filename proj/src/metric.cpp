#include "shapelab/metric.hpp"

#include <cmath>
#include <limits>

#include "shapelab/errors.hpp"
#include "shapelab/parallel.hpp"

namespace shapelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string coefficient_name(int i) { return "G_" + std::to_string(i + 1) + std::to_string(i + 1); }

// 1/f, symbolic or nodewise.
ScalarField reciprocal(const ScalarField& f) {
  if (is_symbolic(f)) return 1.0 / symbolic(f);
  Field out = std::get<Field>(f);
  for (auto& v : out.values()) v = 1.0 / v;
  return out;
}

Field tab(const ScalarField& f, const Grid& g) { return tabulate(f, g, SampleMode::lenient); }

}  // namespace

DiagonalMetric::DiagonalMetric(std::vector<ScalarField> G, Grid grid) : G_(std::move(G)), grid_(std::move(grid)) {
  if (G_.empty() || static_cast<int>(G_.size()) != grid_.dim())
    throw ValidationError("metric dimension does not match grid dimension");
  for (int i = 0; i < dim(); ++i) {
    const Field v = tab(G_[i], grid_);
    int sign = 0;
    std::size_t first = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double x = v[k];
      if (!std::isfinite(x) || x == 0.0)
        throw ValidationError("singular metric coefficient " + coefficient_name(i) + " at " + locus(grid_, k));
      const int s = x > 0 ? 1 : -1;
      if (sign == 0) {
        sign = s;
        first = k;
      } else if (s != sign) {
        throw ValidationError("metric coefficient " + coefficient_name(i) + " changes sign between " +
                              locus(grid_, first) + " and " + locus(grid_, k));
      }
    }
    signs_.push_back(sign);
  }
}

bool DiagonalMetric::riemannian() const {
  for (int s : signs_)
    if (s < 0) return false;
  return true;
}

bool DiagonalMetric::symbolic() const {
  for (const auto& g : G_)
    if (!is_symbolic(g)) return false;
  return true;
}

CodazziCoeffs CodazziCoeffs::from_ab(expr::ScalarExpr a, expr::ScalarExpr b) {
  CodazziCoeffs c;
  c.n = 2;
  c.chi.assign(2, std::vector<ScalarField>(2, constant_field(0.0)));
  c.chi[0][1] = std::move(a);
  c.chi[1][0] = std::move(b);
  return c;
}

CodazziCoeffs christoffel_ab(const DiagonalMetric& m) {
  CodazziCoeffs c;
  c.n = m.dim();
  c.chi.assign(c.n, std::vector<ScalarField>(c.n, constant_field(0.0)));
  for (int i = 0; i < c.n; ++i) {
    for (int j = 0; j < c.n; ++j) {
      if (i == j) continue;
      if (is_symbolic(m.G(i))) {
        const auto& g = symbolic(m.G(i));
        c.chi[i][j] = expr::differentiate(g, j) / (2.0 * g);
      } else {
        const Field& g = std::get<Field>(m.G(i));
        Field d = fd_derivative(g, j);
        for (std::size_t k = 0; k < d.size(); ++k) d[k] /= 2.0 * g[k];
        c.chi[i][j] = std::move(d);
      }
    }
  }
  return c;
}

namespace {

// Values of G^11, G^22 and the derivatives entering the curvature formula.
struct CurvatureJet {
  double P, P1, P2, P22, Q, Q1, Q2, Q11;
};

double curvature_bracket(const CurvatureJet& j) {
  const double a = -j.P2 / (2 * j.P);
  const double a2 = -(j.P22 * j.P - j.P2 * j.P2) / (2 * j.P * j.P);
  const double b = -j.Q1 / (2 * j.Q);
  const double b1 = -(j.Q11 * j.Q - j.Q1 * j.Q1) / (2 * j.Q * j.Q);
  return (a2 + a * a) * j.Q + 0.5 * a * j.Q2 + (b1 + b * b) * j.P + 0.5 * b * j.P1;
}

struct JetTables {
  Field P, P1, P2, P22, Q, Q1, Q2, Q11;
  CurvatureJet at(std::size_t k) const { return {P[k], P1[k], P2[k], P22[k], Q[k], Q1[k], Q2[k], Q11[k]}; }
};

JetTables jet_tables(const DiagonalMetric& m) {
  if (m.dim() != 2) throw ValidationError("Gaussian curvature requires a two-dimensional metric");
  const Grid& g = m.grid();
  const ScalarField P = reciprocal(m.G(0));
  const ScalarField Q = reciprocal(m.G(1));
  const ScalarField P2 = derivative(P, 1);
  const ScalarField Q1 = derivative(Q, 0);
  JetTables t;
  t.P = tab(P, g);
  t.Q = tab(Q, g);
  t.P1 = tab(derivative(P, 0), g);
  t.P2 = tab(P2, g);
  t.P22 = tab(second_derivative(P, 1), g);
  t.Q1 = tab(Q1, g);
  t.Q2 = tab(derivative(Q, 1), g);
  t.Q11 = tab(second_derivative(Q, 0), g);
  return t;
}

}  // namespace

double gaussian_curvature(const DiagonalMetric& m, std::span<const double> pt) {
  if (m.dim() != 2) throw ValidationError("Gaussian curvature requires a two-dimensional metric");
  if (!m.symbolic()) throw ValidationError("pointwise Gaussian curvature requires closed-form coefficients");
  const auto P = 1.0 / symbolic(m.G(0));
  const auto Q = 1.0 / symbolic(m.G(1));
  const auto P2 = expr::differentiate(P, 1);
  const auto Q1 = expr::differentiate(Q, 0);
  expr::Bindings b{{"R1", pt[0]}, {"R2", pt[1]}};
  try {
    const CurvatureJet j{P.eval(b),  expr::differentiate(P, 0).eval(b), P2.eval(b), expr::differentiate(P2, 1).eval(b),
                         Q.eval(b),  Q1.eval(b), expr::differentiate(Q, 1).eval(b), expr::differentiate(Q1, 0).eval(b)};
    return -curvature_bracket(j);
  } catch (const EvalError& e) {
    throw EvalError(std::string("singular metric at ") + locus(pt) + ": " + e.what());
  }
}

Field gaussian_curvature_field(const DiagonalMetric& m) {
  const JetTables t = jet_tables(m);
  Field K(m.grid());
  for (std::size_t k = 0; k < K.size(); ++k) K[k] = -curvature_bracket(t.at(k));
  return K;
}

ResidualReport curvature_one_residual(const DiagonalMetric& m) {
  const JetTables t = jet_tables(m);
  ReportBuilder rb("curvature-one", m.grid(), {"curvature"});
  for (std::size_t k = 0; k < m.grid().size(); ++k) rb.set(0, k, curvature_bracket(t.at(k)) + 1.0);
  return rb.finish();
}

MetricPencil::MetricPencil(std::vector<ScalarField> H, std::vector<expr::ScalarExpr> eta, Grid grid)
    : H_(std::move(H)), eta_(std::move(eta)), grid_(std::move(grid)) {
  if (H_.size() != eta_.size() || static_cast<int>(H_.size()) != grid_.dim())
    throw ValidationError("pencil: need one H and one eta per axis");
  RotationData probe;
  probe.n = dim();
  probe.eta = eta_;
  probe.validate_eta();
  lower_ = -std::numeric_limits<double>::infinity();
  for (const auto& e : eta_) {
    const Field v = sample(e, grid_, SampleMode::strict);
    for (double x : v.values()) lower_ = std::max(lower_, -x);
  }
}

std::pair<double, double> MetricPencil::admissible_interval() const {
  return {lower_, std::numeric_limits<double>::infinity()};
}

DiagonalMetric MetricPencil::evaluate(double lambda) const {
  std::vector<ScalarField> G;
  for (int i = 0; i < dim(); ++i) {
    const Field shift = sample(eta_[i], grid_, SampleMode::strict);
    for (std::size_t k = 0; k < shift.size(); ++k) {
      if (!(lambda + shift[k] > 0.0))
        throw ValidationError("lambda = " + std::to_string(lambda) + " outside the admissible interval: lambda + eta_" +
                              std::to_string(i + 1) + " <= 0 at " + locus(grid_, k));
    }
    if (is_symbolic(H_[i])) {
      G.emplace_back(expr::pow(symbolic(H_[i]), 2.0) / (lambda + eta_[i]));
    } else {
      Field h = std::get<Field>(H_[i]);
      for (std::size_t k = 0; k < h.size(); ++k) h[k] = h[k] * h[k] / (lambda + shift[k]);
      G.emplace_back(std::move(h));
    }
  }
  return DiagonalMetric(std::move(G), grid_);
}

std::vector<ResidualReport> pencil_curvature_scan(const MetricPencil& p, const std::vector<double>& lambdas) {
  std::vector<ResidualReport> out(lambdas.size());
  // Validate every lambda before any work so that a bad entry fails fast.
  for (double l : lambdas) {
    if (!(l > p.admissible_interval().first)) p.evaluate(l);
  }
  parallel_for(lambdas.size(), [&](std::size_t i) {
    out[i] = curvature_one_residual(p.evaluate(lambdas[i]));
    out[i].title = "curvature-one lambda=" + std::to_string(lambdas[i]);
  });
  return out;
}

namespace {

struct RotationTables {
  int n;
  std::vector<Field> H;
  std::vector<std::vector<Field>> beta;
  // dbeta[i][j][k] = d_k beta_ij
  std::vector<std::vector<std::vector<Field>>> dbeta;
};

RotationTables rotation_tables(const RotationData& rd, bool need_H) {
  rd.validate();
  if (need_H && !rd.has_H()) throw ValidationError("Lame coefficients H are required");
  RotationTables t;
  t.n = rd.n;
  const Grid& g = rd.grid;
  if (rd.has_H())
    for (const auto& h : rd.H) t.H.push_back(tab(h, g));
  t.beta.assign(rd.n, std::vector<Field>(rd.n));
  t.dbeta.assign(rd.n, std::vector<std::vector<Field>>(rd.n, std::vector<Field>(rd.n)));
  for (int i = 0; i < rd.n; ++i)
    for (int j = 0; j < rd.n; ++j) {
      if (i == j) continue;
      t.beta[i][j] = tab(rd.beta[i][j], g);
      for (int k = 0; k < rd.n; ++k) t.dbeta[i][j][k] = tab(derivative(rd.beta[i][j], k), g);
    }
  return t;
}

std::string ij(int i, int j) { return std::to_string(i + 1) + std::to_string(j + 1); }

}  // namespace

ResidualReport lame_curvature_residual(const RotationData& rd, double K) {
  const RotationTables t = rotation_tables(rd, K != 0.0);
  const int n = rd.n;
  std::vector<std::string> names;
  struct F1 {
    int i, j, k;
  };
  std::vector<F1> f1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (i != j && j != k && i != k) {
          f1.push_back({i, j, k});
          names.push_back("d" + std::to_string(k + 1) + " beta" + ij(i, j));
        }
  std::vector<std::pair<int, int>> f2;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      f2.push_back({i, j});
      names.push_back("curvature " + ij(i, j));
    }
  ReportBuilder rb(K == 0.0 ? "flatness" : "lame-curvature K=" + std::to_string(K), rd.grid, names);
  parallel_for(rd.grid.size(), [&](std::size_t p) {
    std::size_t e = 0;
    for (const auto& q : f1) rb.set(e++, p, t.dbeta[q.i][q.j][q.k][p] - t.beta[q.i][q.k][p] * t.beta[q.k][q.j][p]);
    for (const auto& [i, j] : f2) {
      double r = t.dbeta[i][j][i][p] + t.dbeta[j][i][j][p];
      for (int k = 0; k < n; ++k)
        if (k != i && k != j) r += t.beta[k][i][p] * t.beta[k][j][p];
      if (K != 0.0) r += K * t.H[i][p] * t.H[j][p];
      rb.set(e++, p, r);
    }
  });
  return rb.finish();
}

ResidualReport flatness_residual(const RotationData& rd) { return lame_curvature_residual(rd, 0.0); }

ResidualReport lame_consistency_residual(const RotationData& rd) {
  const RotationTables t = rotation_tables(rd, true);
  const int n = rd.n;
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<Field>> dH(n, std::vector<Field>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        pairs.push_back({i, j});
        names.push_back("d" + std::to_string(i + 1) + " H" + std::to_string(j + 1));
        dH[i][j] = tab(derivative(rd.H[j], i), rd.grid);
      }
  ReportBuilder rb("lame-consistency", rd.grid, names);
  for (std::size_t p = 0; p < rd.grid.size(); ++p) {
    std::size_t e = 0;
    for (const auto& [i, j] : pairs) rb.set(e++, p, dH[i][j][p] - t.beta[i][j][p] * t.H[i][p]);
  }
  return rb.finish();
}

}  // namespace shapelab
