#include "shapelab/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shapelab/errors.hpp"
#include "shapelab/parallel.hpp"

namespace shapelab {

Field::Field(Grid grid, double fill) : grid_(std::move(grid)), values_(grid_.size(), fill) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ValidationError("field: value count does not match grid");
}

std::string locus(std::span<const double> x) {
  std::ostringstream os;
  os.precision(10);
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (a) os << ", ";
    os << expr::coordinate_name(static_cast<int>(a)) << "=" << x[a];
  }
  return os.str();
}

std::string locus(const Grid& grid, std::size_t flat) {
  const auto p = grid.point(flat);
  return locus(p);
}

Field sample(const expr::ScalarExpr& e, const Grid& grid, SampleMode mode) {
  const auto slots = expr::coordinate_slots(grid.dim());
  const expr::Program prog(e, slots);
  Field out(grid);
  parallel_for(grid.size(), [&](std::size_t i) {
    double x[3];
    grid.point(i, x);
    out[i] = prog(std::span<const double>(x, grid.dim()));
  });
  if (mode == SampleMode::strict) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!std::isfinite(out[i])) {
        // Re-evaluate through the tree to obtain the offending subexpression.
        const auto p = grid.point(i);
        expr::Bindings b;
        for (int a = 0; a < grid.dim(); ++a) b[slots[a]] = p[a];
        try {
          e.eval(b);
        } catch (const EvalError& err) {
          throw EvalError(std::string(err.what()) + " at " + locus(p));
        }
        throw EvalError("non-finite value of '" + e.str() + "' at " + locus(p));
      }
    }
  }
  return out;
}

namespace {

// Fornberg weights for derivative `order` at node `at` of the window 0..m-1.
std::vector<double> fornberg(int order, int at, int m) {
  std::vector<std::vector<double>> c(m, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0, c4 = -at;
  c[0][0] = 1.0;
  for (int i = 1; i < m; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = i - at;
    for (int j = 0; j < i; ++j) {
      const double c3 = i - j;
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) w[i] = c[i][order];
  return w;
}

// Sixth-order stencils: seven-point central, one-sided windows on the three
// outermost layers (seven points for the first derivative, eight for the second).
struct Stencils {
  std::vector<double> central;
  std::vector<std::vector<double>> edge;
  int half = 3;
  int window;

  explicit Stencils(int order) : window(order == 1 ? 7 : 8) {
    central = fornberg(order, 3, 7);
    for (int i = 0; i < half; ++i) edge.push_back(fornberg(order, i, window));
  }
};

Field fd_apply(const Field& f, int axis, int order) {
  static const Stencils first(1), second(2);
  const Stencils& st = order == 1 ? first : second;
  const Grid& g = f.grid();
  const int n = g.count(axis);
  if (n < st.window) throw ValidationError("finite differences need at least " + std::to_string(st.window) + " nodes per axis");
  const double inv = 1.0 / std::pow(g.step(axis), order);
  const double sign = order == 1 ? -1.0 : 1.0;
  const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(g.stride(axis));
  Field out(g);
  parallel_for(g.size(), [&](std::size_t flat) {
    const int i = g.unflatten(flat)[axis];
    const double* v = f.values().data() + flat;
    double d = 0;
    if (i >= st.half && i <= n - 1 - st.half) {
      for (int k = 0; k < 7; ++k) d += st.central[k] * v[(k - 3) * s];
    } else if (i < st.half) {
      for (int k = 0; k < st.window; ++k) d += st.edge[i][k] * v[(k - i) * s];
    } else {
      const int r = n - 1 - i;
      double e = 0;
      for (int k = 0; k < st.window; ++k) e += st.edge[r][k] * v[(r - k) * s];
      d = sign * e;
    }
    out[flat] = d * inv;
  });
  return out;
}

}  // namespace

Field fd_derivative(const Field& f, int axis) { return fd_apply(f, axis, 1); }

Field fd_second_derivative(const Field& f, int axis) { return fd_apply(f, axis, 2); }


namespace {

// Weights of the six-point Lagrange interpolant through nodes 0..5 at t.
void lagrange6(double t, double w[6]) {
  for (int j = 0; j < 6; ++j) {
    double p = 1.0;
    for (int m = 0; m < 6; ++m)
      if (m != j) p *= (t - m) / (j - m);
    w[j] = p;
  }
}

int stencil_start(double t, int n) {
  const int s = static_cast<int>(std::floor(t)) - 2;
  return std::clamp(s, 0, std::max(0, n - 6));
}

Field refine_axis(const Field& f, int axis, int factor) {
  const Grid& g = f.grid();
  std::vector<double> origin, step;
  std::vector<int> count = g.counts();
  for (int a = 0; a < g.dim(); ++a) {
    origin.push_back(g.origin(a));
    step.push_back(a == axis ? g.step(a) / factor : g.step(a));
  }
  count[axis] = (count[axis] - 1) * factor + 1;
  Grid fine(origin, step, count);
  Field out(fine);
  const int n = g.count(axis);
  if (n < 6) throw ValidationError("interpolation needs at least 6 nodes per axis");
  parallel_for(fine.size(), [&](std::size_t flat) {
    Index idx = fine.unflatten(flat);
    const int fi = idx[axis];
    if (fi % factor == 0) {
      idx[axis] = fi / factor;
      out[flat] = f.at(idx);
      return;
    }
    const double t = static_cast<double>(fi) / factor;
    const int s = stencil_start(t, n);
    double w[6];
    lagrange6(t - s, w);
    double acc = 0;
    for (int k = 0; k < 6; ++k) {
      idx[axis] = s + k;
      acc += w[k] * f.at(idx);
    }
    out[flat] = acc;
  });
  return out;
}

}  // namespace

Field refine(const Field& f, int factor) {
  Field out = f;
  for (int a = 0; a < f.grid().dim(); ++a) out = refine_axis(out, a, factor);
  return out;
}

double interpolate(const Field& f, std::span<const double> x) {
  const Grid& g = f.grid();
  const int d = g.dim();
  int start[3] = {0, 0, 0};
  double w[3][6] = {};
  int width[3] = {1, 1, 1};
  for (int a = 0; a < d; ++a) {
    const double t = (x[a] - g.origin(a)) / g.step(a);
    const int n = g.count(a);
    if (n < 6) throw ValidationError("interpolation needs at least 6 nodes per axis");
    start[a] = stencil_start(t, n);
    lagrange6(t - start[a], w[a]);
    width[a] = 6;
  }
  for (int a = d; a < 3; ++a) w[a][0] = 1.0;
  double acc = 0;
  Index idx{0, 0, 0};
  for (int i = 0; i < width[0]; ++i) {
    for (int j = 0; j < width[1]; ++j) {
      for (int k = 0; k < width[2]; ++k) {
        idx = {start[0] + i, start[1] + j, start[2] + k};
        acc += w[0][i] * w[1][j] * w[2][k] * f.at(idx);
      }
    }
  }
  return acc;
}

ScalarField constant_field(double v) { return expr::ScalarExpr::constant(v); }

Field tabulate(const ScalarField& f, const Grid& grid, SampleMode mode) {
  if (is_symbolic(f)) return sample(symbolic(f), grid, mode);
  const Field& t = std::get<Field>(f);
  if (!(t.grid() == grid)) throw ValidationError("tabulated field lives on a different grid");
  if (mode == SampleMode::strict) {
    for (std::size_t i = 0; i < t.size(); ++i)
      if (!std::isfinite(t[i])) throw NumericalError("non-finite tabulated value at " + locus(grid, i));
  }
  return t;
}

ScalarField derivative(const ScalarField& f, int axis) {
  if (is_symbolic(f)) return expr::differentiate(symbolic(f), axis);
  return fd_derivative(std::get<Field>(f), axis);
}

ScalarField second_derivative(const ScalarField& f, int axis) {
  if (is_symbolic(f)) return expr::differentiate(expr::differentiate(symbolic(f), axis), axis);
  return fd_second_derivative(std::get<Field>(f), axis);
}

Field resample(const ScalarField& f, const Grid& grid) {
  if (is_symbolic(f)) return sample(symbolic(f), grid);
  const Field& t = std::get<Field>(f);
  if (t.grid() == grid) return t;
  for (int k = 2; k <= 16; k *= 2)
    if (t.grid().refined(k) == grid) return refine(t, k);
  Field out(grid);
  parallel_for(grid.size(), [&](std::size_t i) { out[i] = interpolate(t, grid.point(i)); });
  return out;
}

std::string describe(const ScalarField& f) {
  if (is_symbolic(f)) return symbolic(f).str();
  return "<tabulated " + std::get<Field>(f).grid().describe() + ">";
}

}  // namespace shapelab
