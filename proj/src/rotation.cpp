#include "shapelab/rotation.hpp"

#include "shapelab/errors.hpp"

namespace shapelab {

RotationData RotationData::from_lame(std::vector<expr::ScalarExpr> H, Grid grid) {
  RotationData rd;
  rd.n = static_cast<int>(H.size());
  rd.grid = std::move(grid);
  rd.beta.assign(rd.n, std::vector<ScalarField>(rd.n, constant_field(0.0)));
  for (int i = 0; i < rd.n; ++i)
    for (int j = 0; j < rd.n; ++j)
      if (i != j) rd.beta[i][j] = expr::differentiate(H[j], i) / H[i];
  for (auto& h : H) rd.H.emplace_back(std::move(h));
  return rd;
}

RotationData RotationData::trivial(int n, Grid grid) {
  RotationData rd;
  rd.n = n;
  rd.grid = std::move(grid);
  rd.H.assign(n, constant_field(1.0));
  rd.beta.assign(n, std::vector<ScalarField>(n, constant_field(0.0)));
  return rd;
}

void RotationData::validate() const {
  if (n < 2 || n > 3) throw ValidationError("rotation data: n must be 2 or 3");
  if (grid.dim() != n) throw ValidationError("rotation data: grid dimension differs from n");
  if (geometry == Geometry::sphere && n != 2) throw ValidationError("rotation data: sphere geometry requires n = 2");
  if (!H.empty() && static_cast<int>(H.size()) != n) throw ValidationError("rotation data: need n Lame coefficients");
  if (!eta.empty() && static_cast<int>(eta.size()) != n) throw ValidationError("rotation data: need n eta functions");
  if (static_cast<int>(beta.size()) != n) throw ValidationError("rotation data: beta must be n x n");
  auto check = [&](const ScalarField& f, const char* what) {
    if (!is_symbolic(f) && !(std::get<Field>(f).grid() == grid))
      throw ValidationError(std::string("rotation data: ") + what + " is tabulated on a different grid");
  };
  for (const auto& row : beta) {
    if (static_cast<int>(row.size()) != n) throw ValidationError("rotation data: beta must be n x n");
    for (const auto& f : row) check(f, "beta");
  }
  for (const auto& f : H) check(f, "H");
}

void RotationData::validate_eta() const {
  for (int i = 0; i < static_cast<int>(eta.size()); ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (!expr::differentiate(eta[i], j).is_zero())
        throw ValidationError("eta_" + std::to_string(i + 1) + " = " + eta[i].str() + " depends on " +
                              expr::coordinate_name(j));
    }
    for (const auto& name : eta[i].free_names())
      if (name != expr::coordinate_name(i))
        throw ValidationError("eta_" + std::to_string(i + 1) + " has unbound name '" + name + "'");
  }
}

}  // namespace shapelab
