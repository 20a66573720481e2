#include "shapelab/surface.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "linear_march.hpp"
#include "shapelab/codazzi.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/io.hpp"
#include "shapelab/parallel.hpp"

namespace shapelab {

namespace {

using Mat = Eigen::MatrixXd;

constexpr double kDriftAbort = 1e-4;
constexpr double kMixedAbort = 1e-5;
constexpr double kMinRadius = 1e-6;
constexpr double kCurvatureOneGate = 1e-6;
constexpr double kCodazziGate = 1e-5;
constexpr double kSharedCoefficients = 1e-8;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// sqrt(G_i), chi_ij and k^i on the twice-refined grid.
struct SurfaceTables {
  Grid fine;
  std::array<Field, 2> H, k;
  std::array<Field, 2> beta;  // beta[0] = beta_12, beta[1] = beta_21

  SurfaceTables(const DiagonalMetric& m, const CodazziCoeffs& chi, const CurvatureField& kf)
      : fine(m.grid().refined(2)) {
    for (int i = 0; i < 2; ++i) {
      H[i] = resample(m.G(i), fine);
      for (std::size_t f = 0; f < fine.size(); ++f) H[i][f] = std::sqrt(H[i][f]);
      k[i] = resample(kf.k[i], fine);
    }
    // beta_ij = d_i H_j / H_i = H_j chi_ji / H_i
    const Field chi21 = resample(chi.chi[1][0], fine), chi12 = resample(chi.chi[0][1], fine);
    beta[0] = Field(fine);
    beta[1] = Field(fine);
    for (std::size_t f = 0; f < fine.size(); ++f) {
      beta[0][f] = H[1][f] * chi21[f] / H[0][f];
      beta[1][f] = H[0][f] * chi12[f] / H[1][f];
    }
  }

  // State rows e1, e2, n, r.
  Mat generator(int a, std::size_t f) const {
    Mat M = Mat::Zero(4, 4);
    const int b = 1 - a;
    M(a, b) = -beta[b][f];
    M(b, a) = beta[b][f];
    M(a, 2) = -H[a][f];
    M(2, a) = H[a][f];
    M(3, a) = k[a][f] * H[a][f];
    return M;
  }
};

void check_base(const SurfaceBase& base) {
  double e = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e = std::max(e, std::abs(dot(base.frame[i], base.frame[j]) - (i == j ? 1.0 : 0.0)));
  if (!(e <= 1e-12)) throw ValidationError("surface: base frame is not orthonormal (defect " + std::to_string(e) + ")");
  for (double x : base.origin)
    if (!std::isfinite(x)) throw ValidationError("surface: base origin is not finite");
}

nlohmann::json base_json(const SurfaceBase& base) {
  nlohmann::json j;
  j["origin"] = base.origin;
  j["frame"] = base.frame;
  return j;
}

// Second-order first derivative of node data along `axis`, one-sided at the ends.
template <class Get>
Vec3 diff1(const Grid& g, std::size_t node, int axis, Get get) {
  const Index idx = g.unflatten(node);
  const std::size_t s = g.stride(axis);
  const double h = g.step(axis);
  const int i = idx[axis], last = g.count(axis) - 1;
  if (i == 0) return scale(add(sub(scale(get(node + s), 4.0), scale(get(node), 3.0)), scale(get(node + 2 * s), -1.0)), 1.0 / (2 * h));
  if (i == last) return scale(add(sub(scale(get(node), 3.0), scale(get(node - s), 4.0)), get(node - 2 * s)), 1.0 / (2 * h));
  return scale(sub(get(node + s), get(node - s)), 1.0 / (2 * h));
}

}  // namespace

std::vector<std::array<std::size_t, 3>> SurfaceMesh::triangles() const {
  std::vector<std::array<std::size_t, 3>> t;
  if (grid.dim() != 2) return t;
  const std::size_t n0 = grid.count(0), n1 = grid.count(1);
  t.reserve(2 * (n0 - 1) * (n1 - 1));
  for (std::size_t i = 0; i + 1 < n0; ++i)
    for (std::size_t j = 0; j + 1 < n1; ++j) {
      const std::size_t v00 = i * n1 + j, v10 = v00 + n1, v01 = v00 + 1, v11 = v10 + 1;
      t.push_back({v00, v10, v11});
      t.push_back({v00, v11, v01});
    }
  return t;
}

SurfaceMesh reconstruct_surface(const DiagonalMetric& m, const CurvatureField& k, const SurfaceBase& base) {
  if (m.dim() != 2) throw ValidationError("surface: the third form must be two-dimensional");
  if (k.k.size() != 2) throw ValidationError("surface: two radii of principal curvature are required");
  if (!m.riemannian()) throw ValidationError("surface: the third form must be positive definite");
  check_base(base);
  const Grid& grid = m.grid();

  const ResidualReport one = curvature_one_residual(m);
  if (!one.passes(kCurvatureOneGate))
    throw ValidationError("surface: third form is not of curvature one (residual " + std::to_string(one.max()) + ")");
  const CodazziCoeffs chi = christoffel_ab(m);
  const ResidualReport cod = codazzi_residual(k, chi, grid);
  if (!cod.passes(kCodazziGate))
    throw ValidationError("surface: radii violate the Codazzi equations (residual " + std::to_string(cod.max()) + ")");

  const SurfaceTables tab(m, chi, k);
  for (int i = 0; i < 2; ++i)
    for (std::size_t f = 0; f < tab.fine.size(); ++f)
      if (!(std::abs(tab.k[i][f]) >= kMinRadius))
        throw ValidationError("surface: |k^" + std::to_string(i + 1) + "| < 1e-6 at " + locus(tab.fine, f) +
                              "; the Gauss map is critical there");

  Mat S0(4, 3);
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 3; ++i) S0(i, a) = base.frame[i][a];
    S0(3, a) = base.origin[a];
  }
  const std::vector<Mat> state =
      detail::march_lines(grid, S0, {0, 1}, [&tab](int a, std::size_t f) { return tab.generator(a, f); });

  SurfaceMesh mesh;
  mesh.grid = grid;
  mesh.r.resize(grid.size());
  mesh.normal.resize(grid.size());
  {
    ReportBuilder rb("surface frame drift", grid, {"(e_i, e_j) = delta_ij"});
    std::size_t worst_node = 0;
    double worst = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
      const Mat F = state[node].topRows(3);
      const double e = (F * F.transpose() - Mat::Identity(3, 3)).cwiseAbs().maxCoeff();
      rb.set(0, node, e);
      if (!(e <= worst)) {
        worst = e;
        worst_node = node;
      }
      Vec3 n{F(2, 0), F(2, 1), F(2, 2)};
      mesh.normal[node] = scale(n, 1.0 / norm(n));
      mesh.r[node] = {state[node](3, 0), state[node](3, 1), state[node](3, 2)};
    }
    if (!(worst <= kDriftAbort))
      throw NumericalError("surface: frame drift " + std::to_string(worst) + " at " + locus(grid, worst_node) +
                           "; the third form and radii are inconsistent");
    mesh.drift = rb.finish();
  }
  {
    // Integrability of d_i r = k^i d_i n shows up as dependence on the marching order.
    const std::vector<Mat> swapped =
        detail::march_lines(grid, S0, {1, 0}, [&tab](int a, std::size_t f) { return tab.generator(a, f); });
    double extent = 0.0;
    for (const auto& p : mesh.r) extent = std::max(extent, norm(sub(p, mesh.r.front())));
    const double s = std::max(1.0, extent);
    ReportBuilder rb("surface mixed partials", grid, {"r independent of marching order", "frame independent of marching order"});
    std::size_t worst_node = 0;
    double worst = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
      const Mat d = state[node] - swapped[node];
      const double er = d.row(3).cwiseAbs().maxCoeff() / s, ef = d.topRows(3).cwiseAbs().maxCoeff();
      rb.set(0, node, er);
      rb.set(1, node, ef);
      if (!(std::max(er, ef) <= worst)) {
        worst = std::max(er, ef);
        worst_node = node;
      }
    }
    if (!(worst <= kMixedAbort))
      throw NumericalError("surface: mixed partials disagree; marching orders differ by " + std::to_string(worst) + " at " +
                           locus(grid, worst_node));
    mesh.mixed_partials = rb.finish();
  }
  mesh.provenance["grid"] = grid.describe();
  mesh.provenance["base"] = base_json(base);
  return mesh;
}

bool MeshForms::interior(std::size_t node) const { return !grid.on_boundary(grid.unflatten(node)); }

MeshForms mesh_fundamental_forms(const SurfaceMesh& mesh) {
  const Grid& g = mesh.grid;
  if (g.dim() != 2 || mesh.r.size() != g.size()) throw ValidationError("mesh forms: positions must cover a 2d grid");
  if (g.count(0) < 3 || g.count(1) < 3) throw ValidationError("mesh forms: need at least 3 nodes per axis");
  const bool oriented = mesh.normal.size() == g.size();
  const std::size_t size = g.size();
  MeshForms out;
  out.grid = g;
  for (auto* v : {&out.E, &out.F, &out.G, &out.L, &out.M, &out.N, &out.mean_curvature, &out.III11, &out.III12,
                  &out.III22, &out.radius[0], &out.radius[1]})
    v->assign(size, kNaN);
  out.flat[0].assign(size, 0);
  out.flat[1].assign(size, 0);

  auto pos = [&](std::size_t i) { return mesh.r[i]; };
  std::vector<Vec3> unit(size);
  for (std::size_t node = 0; node < size; ++node) {
    const Vec3 ru = diff1(g, node, 0, pos), rv = diff1(g, node, 1, pos);
    Vec3 c = cross(ru, rv);
    const double len = norm(c);
    if (!(len > 1e-14 * std::max(1.0, dot(ru, ru) + dot(rv, rv))))
      throw NumericalError("mesh forms: degenerate tangent plane at " + locus(g, node));
    c = scale(c, 1.0 / len);
    if (oriented && dot(c, mesh.normal[node]) < 0) c = scale(c, -1.0);
    unit[node] = c;
  }
  auto nrm = [&](std::size_t i) { return unit[i]; };

  const std::size_t s0 = g.stride(0), s1 = g.stride(1);
  const double h0 = g.step(0), h1 = g.step(1);
  for (std::size_t node = 0; node < size; ++node) {
    if (!out.interior(node)) continue;
    const Vec3 ru = diff1(g, node, 0, pos), rv = diff1(g, node, 1, pos);
    const Vec3 ruu = scale(sub(add(mesh.r[node + s0], mesh.r[node - s0]), scale(mesh.r[node], 2.0)), 1.0 / (h0 * h0));
    const Vec3 rvv = scale(sub(add(mesh.r[node + s1], mesh.r[node - s1]), scale(mesh.r[node], 2.0)), 1.0 / (h1 * h1));
    const Vec3 ruv = scale(sub(add(mesh.r[node + s0 + s1], mesh.r[node - s0 - s1]), add(mesh.r[node + s0 - s1], mesh.r[node - s0 + s1])),
                           1.0 / (4 * h0 * h1));
    const Vec3& n = unit[node];
    const double E = dot(ru, ru), F = dot(ru, rv), G = dot(rv, rv);
    const double L = dot(ruu, n), M = dot(ruv, n), N = dot(rvv, n);
    out.E[node] = E;
    out.F[node] = F;
    out.G[node] = G;
    out.L[node] = L;
    out.M[node] = M;
    out.N[node] = N;
    // Shape operator I^-1 II.
    const double det = E * G - F * F;
    const double a = (G * L - F * M) / det, b = (G * M - F * N) / det;
    const double c = (E * M - F * L) / det, d = (E * N - F * M) / det;
    const double mean = 0.5 * (a + d);
    const double disc = std::sqrt(std::max(0.0, mean * mean - (a * d - b * c)));
    const double kap[2] = {mean + disc, mean - disc};
    out.mean_curvature[node] = mean;
    // Coordinate weight of the eigenvector of kap[0] along axis 0.
    double v0, v1;
    if (std::abs(b) + std::abs(kap[0] - a) >= std::abs(kap[0] - d) + std::abs(c)) {
      v0 = b;
      v1 = kap[0] - a;
    } else {
      v0 = kap[0] - d;
      v1 = c;
    }
    const bool first_on_axis0 = std::abs(v0) * std::sqrt(E) >= std::abs(v1) * std::sqrt(G) || (v0 == 0 && v1 == 0);
    const double along[2] = {first_on_axis0 ? kap[0] : kap[1], first_on_axis0 ? kap[1] : kap[0]};
    for (int i = 0; i < 2; ++i) {
      if (std::abs(along[i]) < kFlatCurvature) {
        out.radius[i][node] = std::numeric_limits<double>::infinity();
        out.flat[i][node] = 1;
      } else {
        out.radius[i][node] = -1.0 / along[i];
      }
    }
    if (g.on_boundary(g.unflatten(node), 2)) continue;
    const Vec3 nu = diff1(g, node, 0, nrm), nv = diff1(g, node, 1, nrm);
    out.III11[node] = dot(nu, nu);
    out.III12[node] = dot(nu, nv);
    out.III22[node] = dot(nv, nv);
  }
  return out;
}

ResidualReport radii_agreement(const MeshForms& forms, const CurvatureField& k) {
  const Grid& g = forms.grid;
  ReportBuilder rb("mesh radii vs k", g, {"radius_1 = k^1", "radius_2 = k^2"});
  const Field k1 = tabulate(k.k[0], g), k2 = tabulate(k.k[1], g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!forms.interior(node)) {
      rb.exclude(node);
      continue;
    }
    const double kv[2] = {k1[node], k2[node]};
    for (int i = 0; i < 2; ++i) rb.set(i, node, (forms.radius[i][node] - kv[i]) / std::max(1.0, std::abs(kv[i])));
  }
  return rb.finish();
}

ResidualReport third_form_agreement(const MeshForms& forms, const DiagonalMetric& m) {
  const Grid& g = forms.grid;
  if (!(g == m.grid())) throw ValidationError("third form check: mesh and metric grids differ");
  ReportBuilder rb("mesh third form vs metric", g, {"III_11 = G_1", "III_12 = 0", "III_22 = G_2"});
  const Field G1 = tabulate(m.G(0), g), G2 = tabulate(m.G(1), g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!std::isfinite(forms.III11[node])) {
      rb.exclude(node);
      continue;
    }
    const double s = std::max({1.0, std::abs(G1[node]), std::abs(G2[node])});
    rb.set(0, node, (forms.III11[node] - G1[node]) / s);
    rb.set(1, node, forms.III12[node] / s);
    rb.set(2, node, (forms.III22[node] - G2[node]) / s);
  }
  return rb.finish();
}

QuadricFit fit_quadric(const std::vector<Vec3>& points) {
  if (points.size() < 10) throw ValidationError("quadric fit: need at least 10 points");
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  for (const auto& p : points) center += Eigen::Vector3d(p[0], p[1], p[2]);
  center /= static_cast<double>(points.size());
  double radius = 0.0;
  for (const auto& p : points) radius = std::max(radius, (Eigen::Vector3d(p[0], p[1], p[2]) - center).norm());
  if (!(radius > 0.0)) throw ValidationError("quadric fit: points coincide");

  auto monomials = [](const Eigen::Vector3d& y) {
    Eigen::Matrix<double, 10, 1> m;
    m << y[0] * y[0], y[1] * y[1], y[2] * y[2], y[0] * y[1], y[0] * y[2], y[1] * y[2], y[0], y[1], y[2], 1.0;
    return m;
  };
  Mat A(points.size(), 10);
  for (std::size_t i = 0; i < points.size(); ++i)
    A.row(i) = monomials((Eigen::Vector3d(points[i][0], points[i][1], points[i][2]) - center) / radius).transpose();
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinV);
  const Eigen::VectorXd q = svd.matrixV().col(9);

  // Homogeneous form in normalised coordinates, then in original ones.
  Eigen::Matrix4d Qy;
  Qy << q[0], q[3] / 2, q[4] / 2, q[6] / 2, q[3] / 2, q[1], q[5] / 2, q[7] / 2, q[4] / 2, q[5] / 2, q[2], q[8] / 2,
      q[6] / 2, q[7] / 2, q[8] / 2, q[9];
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity() / radius;
  T.block<3, 1>(0, 3) = -center / radius;
  T(3, 3) = 1.0;
  const Eigen::Matrix4d Qx = T.transpose() * Qy * T;

  QuadricFit fit;
  Eigen::Matrix<double, 10, 1> c;
  c << Qx(0, 0), Qx(1, 1), Qx(2, 2), 2 * Qx(0, 1), 2 * Qx(0, 2), 2 * Qx(1, 2), 2 * Qx(0, 3), 2 * Qx(1, 3), 2 * Qx(2, 3),
      Qx(3, 3);
  c.normalize();
  for (int i = 0; i < 10; ++i) fit.coeffs[i] = c[i];

  double worst = 0.0;
  for (const auto& p : points) {
    const Eigen::Vector3d y = (Eigen::Vector3d(p[0], p[1], p[2]) - center) / radius;
    const double value = monomials(y).dot(q);
    const Eigen::Vector3d grad(2 * q[0] * y[0] + q[3] * y[1] + q[4] * y[2] + q[6],
                               2 * q[1] * y[1] + q[3] * y[0] + q[5] * y[2] + q[7],
                               2 * q[2] * y[2] + q[4] * y[0] + q[5] * y[1] + q[8]);
    worst = std::max(worst, std::abs(value) / grad.norm());
  }
  // The normalised cloud has diameter at most 2 and at least 1.
  double diameter = 0.0;
  {
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e300), hi = -lo;
    for (const auto& p : points) {
      const Eigen::Vector3d y = (Eigen::Vector3d(p[0], p[1], p[2]) - center) / radius;
      lo = lo.cwiseMin(y);
      hi = hi.cwiseMax(y);
    }
    diameter = (hi - lo).norm();
  }
  fit.relative_residual = worst / diameter;
  return fit;
}

std::string obj_text(const SurfaceMesh& mesh) {
  std::string out;
  char buf[128];
  for (const auto& p : mesh.r) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p[0], p[1], p[2]);
    out += buf;
  }
  for (const auto& n : mesh.normal) {
    std::snprintf(buf, sizeof buf, "vn %.9g %.9g %.9g\n", n[0], n[1], n[2]);
    out += buf;
  }
  const bool normals = mesh.normal.size() == mesh.r.size();
  for (const auto& t : mesh.triangles()) {
    if (normals)
      std::snprintf(buf, sizeof buf, "f %zu//%zu %zu//%zu %zu//%zu\n", t[0] + 1, t[0] + 1, t[1] + 1, t[1] + 1, t[2] + 1,
                    t[2] + 1);
    else
      std::snprintf(buf, sizeof buf, "f %zu %zu %zu\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += buf;
  }
  return out;
}

void export_obj(const SurfaceMesh& mesh, const std::string& path) { write_file_atomic(path, obj_text(mesh)); }

ObjData parse_obj(const std::string& text) {
  ObjData d;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v" || tag == "vn") {
      Vec3 p;
      if (!(ls >> p[0] >> p[1] >> p[2])) throw ParseError("obj: malformed '" + tag + "' record", line_offset);
      (tag == "v" ? d.vertices : d.normals).push_back(p);
    } else if (tag == "f") {
      std::array<std::size_t, 3> f{};
      for (auto& idx : f) {
        std::string tok;
        if (!(ls >> tok)) throw ParseError("obj: face needs three vertices", line_offset);
        std::size_t used = 0;
        unsigned long v = 0;
        try {
          v = std::stoul(tok, &used);
        } catch (const std::exception&) {
          throw ParseError("obj: bad face index '" + tok + "'", line_offset);
        }
        if (v == 0 || v > d.vertices.size()) throw ParseError("obj: face index out of range", line_offset);
        idx = v - 1;
      }
      std::string extra;
      if (ls >> extra) throw ParseError("obj: only triangular faces are supported", line_offset);
      d.faces.push_back(f);
    }
  }
  return d;
}

ObjData import_obj(const std::string& path) { return parse_obj(read_file(path)); }

nlohmann::json DeformationFamily::manifest() const {
  nlohmann::json j;
  j["members"] = nlohmann::json::array();
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    nlohmann::json m = meshes[i].provenance;
    m["label"] = labels[i];
    j["members"].push_back(m);
  }
  j["skipped"] = skipped;
  if (!radii_spread.grid.counts().empty()) j["radii_spread"] = radii_spread.to_json();
  return j;
}

DeformationFamily deformation_family(const std::vector<FamilyMember>& members, const CurvatureField& k,
                                     const CodazziCoeffs& shared, const SurfaceBase& base) {
  DeformationFamily fam;
  if (members.empty()) return fam;
  const Grid& g = members.front().metric.grid();
  std::vector<MeshForms> forms;
  for (const auto& mem : members) {
    try {
      if (!(mem.metric.grid() == g)) throw ValidationError("grid differs from the first member");
      const CodazziCoeffs c = christoffel_ab(mem.metric);
      for (int i = 0; i < 2; ++i) {
        const int j = 1 - i;
        const Field x = tabulate(c.chi[i][j], g), y = tabulate(shared.chi[i][j], g);
        for (std::size_t node = 0; node < g.size(); ++node)
          if (!(std::abs(x[node] - y[node]) <= kSharedCoefficients * (1.0 + std::abs(y[node]))))
            throw ValidationError("Codazzi coefficient chi_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                  " differs from the shared one at " + locus(g, node));
      }
      SurfaceMesh mesh = reconstruct_surface(mem.metric, k, base);
      mesh.provenance["label"] = mem.label;
      mesh.provenance["parameters"] = mem.parameters;
      forms.push_back(mesh_fundamental_forms(mesh));
      fam.meshes.push_back(std::move(mesh));
      fam.labels.push_back(mem.label);
    } catch (const Error& e) {
      fam.skipped.push_back(mem.label + ": " + e.what());
    }
  }
  if (fam.meshes.size() < 2) return fam;
  ReportBuilder rb("family radii spread", g, {"radius_1 agrees", "radius_2 agrees"});
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!forms.front().interior(node)) {
      rb.exclude(node);
      continue;
    }
    for (int i = 0; i < 2; ++i) {
      double e = 0.0;
      for (std::size_t a = 0; a < forms.size(); ++a)
        for (std::size_t b = a + 1; b < forms.size(); ++b) {
          const double x = forms[a].radius[i][node], y = forms[b].radius[i][node];
          if (forms[a].flat[i][node] || forms[b].flat[i][node])
            e = std::max(e, forms[a].flat[i][node] == forms[b].flat[i][node] ? 0.0 : 1.0);
          else
            e = std::max(e, std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)}));
        }
      rb.set(i, node, e);
    }
  }
  fam.radii_spread = rb.finish();
  return fam;
}

DeformationFamily deformation_family(const std::string& example, const std::vector<ExampleParams>& params,
                                     const std::optional<GridDomain>& domain, const SurfaceBase& base) {
  if (params.empty()) throw ValidationError("family: no parameter sets");
  const ExampleBundle first = make_example(example, params.front(), domain);
  if (!first.curvatures) throw ValidationError("family: '" + example + "' has no closed-form radii");
  std::vector<FamilyMember> members;
  std::vector<std::string> skipped;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string label = example + "[" + std::to_string(i) + "]";
    nlohmann::json pj = nlohmann::json::object();
    for (const auto& [name, v] : params[i].constants) pj[name] = v;
    try {
      const ExampleBundle b = make_example(example, params[i], first.domain);
      members.push_back({label, b.metric, pj});
    } catch (const Error& e) {
      skipped.push_back(label + ": " + e.what());
    }
  }
  DeformationFamily fam = deformation_family(members, *first.curvatures, first.codazzi, base);
  for (auto& m : fam.meshes) m.provenance["bundle"] = example;
  fam.skipped.insert(fam.skipped.begin(), skipped.begin(), skipped.end());
  return fam;
}

DeformationFamily deformation_family(const DiagonalMetric& m1, const DiagonalMetric& m2, const std::vector<double>& lambdas,
                                     const CurvatureField& k, const SurfaceBase& base) {
  if (!(m1.grid() == m2.grid()) || m1.dim() != 2 || m2.dim() != 2)
    throw ValidationError("family: the two third forms must share a 2d grid");
  const Grid& g = m1.grid();
  std::vector<FamilyMember> members;
  std::vector<std::string> skipped;
  for (double lambda : lambdas) {
    const std::string label = "lambda=" + std::to_string(lambda);
    try {
      std::vector<ScalarField> G;
      for (int i = 0; i < 2; ++i) {
        if (m1.symbolic() && m2.symbolic()) {
          G.emplace_back(1.0 / (lambda / symbolic(m1.G(i)) + (1.0 - lambda) / symbolic(m2.G(i))));
        } else {
          const Field a = tabulate(m1.G(i), g), b = tabulate(m2.G(i), g);
          Field out(g);
          for (std::size_t node = 0; node < out.size(); ++node) out[node] = 1.0 / (lambda / a[node] + (1.0 - lambda) / b[node]);
          G.emplace_back(std::move(out));
        }
      }
      members.push_back({label, DiagonalMetric(std::move(G), g), {{"lambda", lambda}}});
    } catch (const Error& e) {
      skipped.push_back(label + ": " + e.what());
    }
  }
  DeformationFamily fam = deformation_family(members, k, christoffel_ab(m1), base);
  fam.skipped.insert(fam.skipped.begin(), skipped.begin(), skipped.end());
  return fam;
}

}  // namespace shapelab
