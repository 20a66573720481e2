#include "shapelab/frames.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "shapelab/errors.hpp"
#include "shapelab/parallel.hpp"
#include "linear_march.hpp"

namespace shapelab {

namespace {

using Mat = Eigen::MatrixXd;

constexpr double kDriftAbort = 1e-4;

// Coefficient tables on the twice-refined grid, so that RK4 midpoints are nodes.
struct Coefficients {
  int n;
  bool sphere;
  Grid fine;
  std::vector<std::vector<Field>> beta;
  std::vector<Field> H, w;

  Coefficients(const RotationData& rd, double lambda)
      : n(rd.n), sphere(rd.geometry == Geometry::sphere), fine(rd.grid.refined(2)) {
    beta.assign(n, std::vector<Field>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) beta[i][j] = resample(rd.beta[i][j], fine);
    for (int i = 0; i < n; ++i) {
      H.push_back(resample(rd.H[i], fine));
      Field wi = sample(rd.eta[i], fine, SampleMode::strict);
      for (std::size_t k = 0; k < wi.size(); ++k) wi[k] = std::sqrt(lambda + wi[k]);
      w.push_back(std::move(wi));
    }
  }

  // Generator M of d_a S = M S for the state rows (phi_1..phi_n, r).
  Mat generator(int a, std::size_t f) const {
    const int m = n + 1;
    Mat M = Mat::Zero(m, m);
    for (int i = 0; i < n; ++i) {
      if (i == a) continue;
      const double up = w[i][f] / w[a][f] * beta[i][a][f];
      M(i, a) = up;
      M(a, i) = -w[i][f] / w[a][f] * beta[i][a][f];
    }
    const double s = H[a][f] / w[a][f];
    M(n, a) = s;
    if (sphere) M(a, n) = -s;
    return M;
  }
};

void check_orthonormal(const Mat& F, const char* what) {
  const double e = (F * F.transpose() - Mat::Identity(F.rows(), F.rows())).cwiseAbs().maxCoeff();
  if (!(e <= 1e-12)) throw ValidationError(std::string(what) + " is not orthonormal (defect " + std::to_string(e) + ")");
}

Field component(const std::vector<double>& v, std::size_t stride, std::size_t offset, const Grid& g) {
  Field f(g);
  for (std::size_t k = 0; k < g.size(); ++k) f[k] = v[k * stride + offset];
  return f;
}

}  // namespace

FrameField integrate_frame(const RotationData& rd, double lambda, const FrameOptions& opt) {
  rd.validate();
  if (!rd.has_H()) throw ValidationError("frames: Lame coefficients H are required");
  if (!rd.has_eta()) throw ValidationError("frames: eta functions are required");
  rd.validate_eta();
  const bool sphere = rd.geometry == Geometry::sphere;
  if (sphere && rd.n != 2) throw ValidationError("frames: sphere geometry needs n = 2");
  const int n = rd.n;
  const int dim = sphere ? 3 : n;
  const Grid& grid = rd.grid;
  for (int i = 0; i < n; ++i) {
    const Field e = sample(rd.eta[i], grid, SampleMode::strict);
    for (std::size_t k = 0; k < e.size(); ++k)
      if (!(lambda + e[k] > 0.0))
        throw ValidationError("frames: lambda + eta_" + std::to_string(i + 1) + " <= 0 at " + locus(grid, k) +
                              " for lambda = " + std::to_string(lambda));
  }

  Mat F0 = Mat::Identity(dim, dim);
  if (!opt.frame0.empty()) {
    if (static_cast<int>(opt.frame0.size()) != dim) throw ValidationError("frames: frame0 must be dim x dim");
    for (int i = 0; i < dim; ++i) {
      if (static_cast<int>(opt.frame0[i].size()) != dim) throw ValidationError("frames: frame0 must be dim x dim");
      for (int a = 0; a < dim; ++a) F0(i, a) = opt.frame0[i][a];
    }
  }
  check_orthonormal(F0, "frames: frame0");
  const std::vector<int> order = detail::axis_order(opt.order, n);

  // State rows: phi_1..phi_n and r.
  const int m = n + 1;
  Mat S0 = Mat::Zero(m, dim);
  if (sphere) {
    S0 = F0;
  } else {
    S0.topRows(n) = F0;
    if (!opt.base.empty()) {
      if (static_cast<int>(opt.base.size()) != dim) throw ValidationError("frames: base must have n components");
      for (int a = 0; a < dim; ++a) S0(n, a) = opt.base[a];
    }
  }

  const Coefficients co(rd, lambda);
  const int frame_rows = sphere ? 3 : n;
  const std::vector<Mat> state = detail::march_lines(
      grid, S0, order, [&co](int a, std::size_t f) { return co.generator(a, f); },
      opt.reorthonormalize ? frame_rows : 0);

  FrameField ff;
  ff.lambda = lambda;
  ff.n = n;
  ff.dim = dim;
  ff.grid = grid;
  ff.source = rd;
  ff.frame.resize(grid.size() * n * dim);
  ff.position.resize(grid.size() * dim);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Mat& S = state[k];
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < dim; ++a) ff.frame[(k * n + i) * dim + a] = S(i, a);
    for (int a = 0; a < dim; ++a) ff.position[k * dim + a] = S(n, a);
  }

  {
    ReportBuilder rb("frame Gram drift lambda=" + std::to_string(lambda), grid, {"(phi_i, phi_j) = delta_ij"});
    std::size_t worst_node = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Mat F = state[k].topRows(frame_rows);
      const double e = (F * F.transpose() - Mat::Identity(frame_rows, frame_rows)).cwiseAbs().maxCoeff();
      rb.set(0, k, e);
      if (!(e <= worst)) {
        worst = e;
        worst_node = k;
      }
    }
    if (!(worst <= kDriftAbort))
      throw NumericalError("frames: orthonormality drift " + std::to_string(worst) + " at " + locus(grid, worst_node) +
                           "; the rotation data is inconsistent");
    ff.gram_drift = rb.finish();
  }

  // Finite-difference checks on the integrated fields.
  std::vector<std::vector<Field>> dr(n);
  for (int c = 0; c < dim; ++c) {
    const Field rc = component(ff.position, dim, c, grid);
    for (int a = 0; a < n; ++a) dr[a].push_back(fd_derivative(rc, a));
  }
  std::vector<Field> H, w;
  for (int i = 0; i < n; ++i) {
    H.push_back(tabulate(rd.H[i], grid));
    Field wi = sample(rd.eta[i], grid, SampleMode::strict);
    for (std::size_t k = 0; k < wi.size(); ++k) wi[k] = std::sqrt(lambda + wi[k]);
    w.push_back(std::move(wi));
  }
  {
    ReportBuilder rb("frame metric match lambda=" + std::to_string(lambda), grid, {"(d_i r, d_j r) = H_i^2/(lambda+eta_i) delta_ij"});
    parallel_for(grid.size(), [&](std::size_t k) {
      double e = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double dot = 0.0;
          for (int c = 0; c < dim; ++c) dot += dr[i][c][k] * dr[j][c][k];
          const double expect = i == j ? H[i][k] * H[i][k] / (w[i][k] * w[i][k]) : 0.0;
          e = std::max(e, std::abs(dot - expect));
        }
      rb.set(0, k, e);
    });
    ff.metric_match = rb.finish();
  }
  {
    // v_i = H_i/w_i phi_i
    std::vector<std::vector<Field>> v(n);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < dim; ++c) {
        Field f(grid);
        for (std::size_t k = 0; k < grid.size(); ++k) f[k] = H[i][k] / w[i][k] * ff.phi(k, i)[c];
        v[i].push_back(std::move(f));
      }
    std::vector<std::string> names;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        names.push_back("d" + std::to_string(j + 1) + " d" + std::to_string(i + 1) + " r symmetric");
        pairs.emplace_back(i, j);
      }
    ReportBuilder rb("frame compatibility lambda=" + std::to_string(lambda), grid, names);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [i, j] = pairs[p];
      std::vector<Field> a, b;
      for (int c = 0; c < dim; ++c) {
        a.push_back(fd_derivative(v[i][c], j));
        b.push_back(fd_derivative(v[j][c], i));
      }
      for (std::size_t k = 0; k < grid.size(); ++k) {
        double e = 0.0;
        for (int c = 0; c < dim; ++c) e = std::max(e, std::abs(a[c][k] - b[c][k]));
        rb.set(p, k, e);
      }
    }
    ff.compatibility = rb.finish();
  }
  return ff;
}

namespace {

struct SliceMap {
  Grid slice;
  std::vector<int> axes;            // full-grid axes kept, in order
  std::vector<std::size_t> nodes;   // full-grid node of each slice node
};

SliceMap make_slice(const Grid& g, int axis, int level) {
  if (axis < 0 || axis >= g.dim()) throw ValidationError("slice: axis out of range");
  if (level < 0 || level >= g.count(axis)) throw ValidationError("slice: level out of range");
  SliceMap s;
  std::vector<double> origin, step;
  std::vector<int> count;
  for (int a = 0; a < g.dim(); ++a) {
    if (a == axis) continue;
    s.axes.push_back(a);
    origin.push_back(g.origin(a));
    step.push_back(g.step(a));
    count.push_back(g.count(a));
  }
  s.slice = Grid(origin, step, count);
  for (std::size_t k = 0; k < s.slice.size(); ++k) {
    const Index si = s.slice.unflatten(k);
    Index idx{0, 0, 0};
    for (std::size_t t = 0; t < s.axes.size(); ++t) idx[s.axes[t]] = si[t];
    idx[axis] = level;
    s.nodes.push_back(g.flat(idx));
  }
  return s;
}

// Shape operator entries (d_i phi_axis, d_j r) and |d_i r|^2 on the full grid.
struct ShapeTables {
  std::vector<std::vector<Field>> second;  // [i][j]
  std::vector<Field> norm2;
};

ShapeTables shape_tables(const FrameField& ff, int axis) {
  const Grid& g = ff.grid;
  const int n = ff.n, dim = ff.dim;
  std::vector<std::vector<Field>> dphi(n), dr(n);
  for (int c = 0; c < dim; ++c) {
    Field pc(g), rc(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      pc[k] = ff.phi(k, axis)[c];
      rc[k] = ff.r(k)[c];
    }
    for (int i = 0; i < n; ++i) {
      dphi[i].push_back(fd_derivative(pc, i));
      dr[i].push_back(fd_derivative(rc, i));
    }
  }
  ShapeTables t;
  t.second.assign(n, std::vector<Field>(n));
  t.norm2.assign(n, Field(g));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Field f(g);
      for (std::size_t k = 0; k < g.size(); ++k) {
        double d = 0.0;
        for (int c = 0; c < dim; ++c) d += dphi[i][c][k] * dr[j][c][k];
        f[k] = d;
        if (i == j) {
          double nn = 0.0;
          for (int c = 0; c < dim; ++c) nn += dr[i][c][k] * dr[i][c][k];
          t.norm2[i][k] = nn;
        }
      }
      t.second[i][j] = std::move(f);
    }
  return t;
}

}  // namespace

HypersurfaceShape hypersurface_shape(const FrameField& ff, int axis, int level) {
  const SliceMap s = make_slice(ff.grid, axis, level);
  const RotationData& rd = ff.source;
  const Grid& g = ff.grid;
  const ShapeTables t = shape_tables(ff, axis);
  const Field eta = sample(rd.eta[axis], g, SampleMode::strict);
  HypersurfaceShape out;
  out.slice = s.slice;
  std::vector<std::string> names;
  std::vector<Field> formula, weingarten, Hs;
  for (int i : s.axes) {
    names.push_back("k" + std::to_string(i + 1));
    const Field beta = tabulate(rd.beta[axis][i], g), H = tabulate(rd.H[i], g);
    Field kf(s.slice), kw(s.slice), hs(s.slice);
    for (std::size_t k = 0; k < s.nodes.size(); ++k) {
      const std::size_t node = s.nodes[k];
      kf[k] = beta[node] / H[node] * std::sqrt(ff.lambda + eta[node]);
      kw[k] = t.second[i][i][node] / t.norm2[i][node];
      hs[k] = H[node];
    }
    formula.push_back(std::move(kf));
    weingarten.push_back(std::move(kw));
    Hs.push_back(std::move(hs));
  }
  ReportBuilder rb("hypersurface R" + std::to_string(axis + 1) + " level " + std::to_string(level), s.slice, names);
  for (std::size_t k = 0; k < s.nodes.size(); ++k) {
    bool skip = false;
    for (const auto& h : Hs) skip = skip || std::abs(h[k]) < 1e-8;
    if (skip) {
      rb.exclude(k);
      continue;
    }
    for (std::size_t e = 0; e < names.size(); ++e) rb.set(e, k, formula[e][k] - weingarten[e][k]);
  }
  out.agreement = rb.finish();
  for (auto& f : formula) out.formula.k.emplace_back(std::move(f));
  for (auto& f : weingarten) out.weingarten.k.emplace_back(std::move(f));
  return out;
}

ResidualReport scaling_law_check(const RotationData& rd, double lambda1, double lambda2, int axis, int level) {
  const FrameField f1 = integrate_frame(rd, lambda1), f2 = integrate_frame(rd, lambda2);
  const SliceMap s = make_slice(rd.grid, axis, level);
  const ShapeTables t1 = shape_tables(f1, axis), t2 = shape_tables(f2, axis);
  const Field eta = sample(rd.eta[axis], rd.grid, SampleMode::strict);
  std::vector<std::string> names;
  for (int i : s.axes) names.push_back("k" + std::to_string(i + 1) + " ratio");
  const bool offdiag = s.axes.size() >= 2;
  if (offdiag) names.push_back("principal directions");
  ReportBuilder rb("scaling law R" + std::to_string(axis + 1) + " level " + std::to_string(level) + " lambda " +
                       std::to_string(lambda1) + " / " + std::to_string(lambda2),
                   s.slice, names);
  std::size_t small = 0;
  for (std::size_t k = 0; k < s.nodes.size(); ++k) {
    const std::size_t node = s.nodes[k];
    const double factor = std::sqrt((lambda1 + eta[node]) / (lambda2 + eta[node]));
    for (std::size_t e = 0; e < s.axes.size(); ++e) {
      const int i = s.axes[e];
      const double k1 = t1.second[i][i][node] / t1.norm2[i][node];
      const double k2 = t2.second[i][i][node] / t2.norm2[i][node];
      if (std::abs(k2) > 1e-8)
        rb.set(e, k, k1 / k2 - factor);
      else
        ++small;
    }
    if (offdiag) {
      double worst = 0.0;
      for (int i : s.axes)
        for (int j : s.axes) {
          if (i == j) continue;
          for (const ShapeTables* t : {&t1, &t2})
            worst = std::max(worst, std::abs(t->second[i][j][node]) / std::sqrt(t->norm2[i][node] * t->norm2[j][node]));
        }
      rb.set(s.axes.size(), k, worst);
    }
  }
  if (small > 0) rb.note(std::to_string(small) + " curvature samples with |k(lambda2)| <= 1e-8 skipped");
  return rb.finish();
}

}  // namespace shapelab
