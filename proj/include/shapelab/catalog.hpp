#pragma once

// Example third fundamental forms with their Codazzi coefficients, closed-form
// radii of principal curvature, default parameters and safe domain boxes.

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shapelab/metric.hpp"

namespace shapelab {

/// Radii of principal curvature k^1..k^n.
struct CurvatureField {
  std::vector<ScalarField> k;
};

struct ExampleParams {
  expr::Bindings constants;
  /// Free functions of one coordinate, e.g. psi(R2).
  std::map<std::string, expr::ScalarExpr> functions;
};

struct FamilyDim {
  int constants = 0;
  int functions = 0;
  friend bool operator==(const FamilyDim&, const FamilyDim&) = default;
};

struct ExampleBundle {
  std::string name;
  ExampleParams params;
  GridDomain domain;
  DiagonalMetric metric;
  /// Coefficients as printed for the example, independent of the deformation
  /// parameters; compare with christoffel_ab(metric).
  CodazziCoeffs codazzi;
  std::optional<CurvatureField> curvatures;
  FamilyDim family_dim;
  /// Codazzi system in words, for examples without a closed-form solution.
  std::string ode_description;
};

/// monge, moulding, quadric, dupin, conf_revolution, two_param, one_param, hyperquadric.
const std::vector<std::string>& example_names();

ExampleParams default_params(const std::string& name);
GridDomain default_domain(const std::string& name, const ExampleParams& params, int samples = 0);

/// Missing parameters take their defaults; unknown names are rejected. The
/// domain defaults to default_domain(). Throws ValidationError when a
/// coefficient is singular or changes sign on the domain.
ExampleBundle make_example(const std::string& name, const ExampleParams& params = {},
                           const std::optional<GridDomain>& domain = std::nullopt);

/// Throws ValidationError for monge and moulding (no closed form); the message
/// carries the Codazzi system. For conf_revolution the function q defaults to 1/p.
CurvatureField closed_form_curvatures(const std::string& name, const ExampleParams& params = {});

/// A random admissible parameter draw near the defaults: the resulting metric
/// is Riemannian on the default domain.
ExampleParams random_params(const std::string& name, std::mt19937_64& rng);

}  // namespace shapelab
