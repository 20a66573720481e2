#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shapelab/expr.hpp"
#include "shapelab/grid.hpp"

namespace shapelab {

/// Values tabulated on the nodes of a grid.
class Field {
 public:
  Field() = default;
  explicit Field(Grid grid, double fill = 0.0);
  Field(Grid grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(const Index& idx) const { return values_[grid_.flat(idx)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Strict sampling throws at the first node where evaluation fails and names
/// the node; lenient sampling stores NaN there.
enum class SampleMode { strict, lenient };

Field sample(const expr::ScalarExpr& e, const Grid& grid, SampleMode mode = SampleMode::lenient);

/// Sixth-order finite difference along `axis`: central in the interior,
/// one-sided seven-point stencils on the three outermost layers.
Field fd_derivative(const Field& f, int axis);

/// Sixth-order second derivative along `axis`: central in the interior,
/// one-sided eight-point stencils on the three outermost layers.
Field fd_second_derivative(const Field& f, int axis);

/// Sixth-order Lagrange interpolation onto the grid refined by `factor`.
Field refine(const Field& f, int factor = 2);

/// Tensor-product six-point Lagrange interpolation at an arbitrary point.
double interpolate(const Field& f, std::span<const double> x);

/// A coefficient given either in closed form or as tabulated data. Closed
/// forms are differentiated exactly, tabulated data by `fd_derivative`.
using ScalarField = std::variant<expr::ScalarExpr, Field>;

inline bool is_symbolic(const ScalarField& f) { return std::holds_alternative<expr::ScalarExpr>(f); }
inline const expr::ScalarExpr& symbolic(const ScalarField& f) { return std::get<expr::ScalarExpr>(f); }

ScalarField constant_field(double v);
/// Values on `grid`. A tabulated field must live on exactly this grid.
Field tabulate(const ScalarField& f, const Grid& grid, SampleMode mode = SampleMode::lenient);
ScalarField derivative(const ScalarField& f, int axis);
ScalarField second_derivative(const ScalarField& f, int axis);
/// Values on an arbitrary grid inside the field's box: closed forms are
/// sampled, tabulated data refined or interpolated.
Field resample(const ScalarField& f, const Grid& grid);
std::string describe(const ScalarField& f);

/// "R1=0.5, R2=1.25"
std::string locus(const Grid& grid, std::size_t flat);
std::string locus(std::span<const double> x);

}  // namespace shapelab
