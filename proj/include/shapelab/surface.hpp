#pragma once

// Surfaces in E^3 rebuilt from a third fundamental form and radii of principal
// curvature, finite-difference fundamental forms of meshes, OBJ export and
// S-deformation families.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shapelab/catalog.hpp"
#include "shapelab/report.hpp"

namespace shapelab {

using Vec3 = std::array<double, 3>;

struct SurfaceMesh {
  Grid grid;
  /// Row-major over the grid.
  std::vector<Vec3> r;
  std::vector<Vec3> normal;
  nlohmann::json provenance = nlohmann::json::object();
  ResidualReport drift;
  ResidualReport mixed_partials;

  /// Two triangles per grid cell, row-major vertex indices.
  std::vector<std::array<std::size_t, 3>> triangles() const;
};

struct SurfaceBase {
  /// r at the grid corner.
  Vec3 origin{0.0, 0.0, 0.0};
  /// Rows e1, e2, n at the grid corner.
  std::array<Vec3, 3> frame{Vec3{1.0, 0.0, 0.0}, Vec3{0.0, 1.0, 0.0}, Vec3{0.0, 0.0, 1.0}};
};

/// Marches d_i n = sqrt(G_i) e_i, d_j e_i = beta_ij e_j, d_i e_i = -beta_ji e_j
/// - sqrt(G_i) n and d_i r = k^i d_i n over m.grid(). Throws ValidationError
/// when m is not a curvature-one form (1e-6), k violates the Codazzi
/// equations (1e-5) or |k^i| < 1e-6 somewhere, and NumericalError with locus
/// when the frame drifts by more than 1e-4 or the mixed partials disagree:
/// marching R1 then R2 and R2 then R1 must give frames within 1e-5 and
/// positions within 1e-5 * max(1, mesh extent).
SurfaceMesh reconstruct_surface(const DiagonalMetric& m, const CurvatureField& k, const SurfaceBase& base = {});

/// Curvatures below this magnitude are reported as infinite radii.
inline constexpr double kFlatCurvature = 1e-8;

/// Second-order central differences at interior nodes; boundary nodes are NaN.
struct MeshForms {
  Grid grid;
  std::vector<double> E, F, G, L, M, N;
  /// Radii of principal curvature -1/kappa attached to the coordinate
  /// direction closest to their eigenvector; +inf where |kappa| < kFlatCurvature.
  std::array<std::vector<double>, 2> radius;
  std::array<std::vector<char>, 2> flat;
  std::vector<double> mean_curvature;
  /// (d_i n, d_j n) from differences of the unit normals, at nodes at least
  /// two layers inside.
  std::vector<double> III11, III12, III22;

  bool interior(std::size_t node) const;
};

/// Throws NumericalError at a node with degenerate tangent plane. Normals are
/// oriented along mesh.normal when present.
MeshForms mesh_fundamental_forms(const SurfaceMesh& mesh);

/// |radius_i - k^i| / max(1, |k^i|) over interior nodes.
ResidualReport radii_agreement(const MeshForms& forms, const CurvatureField& k);
/// |III_ij - m_ij| / max(1, |m_ii|) where III is defined.
ResidualReport third_form_agreement(const MeshForms& forms, const DiagonalMetric& m);

struct QuadricFit {
  /// Coefficients of x^2, y^2, z^2, xy, xz, yz, x, y, z, 1 in original
  /// coordinates, unit norm.
  std::array<double, 10> coeffs{};
  /// max |q(x)| / |grad q(x)| over the points, divided by their diameter.
  double relative_residual = 0.0;
};

QuadricFit fit_quadric(const std::vector<Vec3>& points);

/// "v", "vn" and "f a//a b//b c//c" records with 9 significant digits.
std::string obj_text(const SurfaceMesh& mesh);
void export_obj(const SurfaceMesh& mesh, const std::string& path);

struct ObjData {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<std::array<std::size_t, 3>> faces;  // zero-based
};

/// Throws ParseError on malformed records.
ObjData parse_obj(const std::string& text);
ObjData import_obj(const std::string& path);

struct FamilyMember {
  std::string label;
  DiagonalMetric metric;
  nlohmann::json parameters = nlohmann::json::object();
};

struct DeformationFamily {
  std::vector<SurfaceMesh> meshes;
  std::vector<std::string> labels;
  /// One line per member that failed validation or reconstruction.
  std::vector<std::string> skipped;
  /// Pairwise |radius_i(a) - radius_i(b)| / max(1, |radius_i|) over interior
  /// nodes, max over pairs; empty for fewer than two meshes.
  ResidualReport radii_spread;

  nlohmann::json manifest() const;
};

/// Members must share one grid. Members whose Codazzi coefficients differ from
/// `shared` by more than 1e-8, or that fail reconstruction, are skipped.
DeformationFamily deformation_family(const std::vector<FamilyMember>& members, const CurvatureField& k,
                                     const CodazziCoeffs& shared, const SurfaceBase& base = {});

/// Catalog example under each parameter set with the closed-form radii of the
/// first set, on `domain` or else the default domain of the first set.
DeformationFamily deformation_family(const std::string& example, const std::vector<ExampleParams>& params,
                                     const std::optional<GridDomain>& domain = std::nullopt, const SurfaceBase& base = {});

/// Third forms G^ii = lambda G1^ii + (1 - lambda) G2^ii.
DeformationFamily deformation_family(const DiagonalMetric& m1, const DiagonalMetric& m2, const std::vector<double>& lambdas,
                                     const CurvatureField& k, const SurfaceBase& base = {});

}  // namespace shapelab
