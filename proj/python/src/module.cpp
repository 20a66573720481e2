#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shapelab/catalog.hpp"
#include "shapelab/cli.hpp"
#include "shapelab/codazzi.hpp"
#include "shapelab/compat.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/frames.hpp"
#include "shapelab/lame.hpp"
#include "shapelab/surface.hpp"

namespace py = pybind11;
using namespace shapelab;

namespace {

py::array_t<double> to_array(const std::vector<double>& v, const std::vector<int>& shape) {
  std::vector<py::ssize_t> dims(shape.begin(), shape.end());
  py::array_t<double> out(dims);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> field_array(const Field& f) { return to_array(f.values(), f.grid().counts()); }

py::array_t<double> vec3_array(const std::vector<Vec3>& v) {
  py::array_t<double> out({static_cast<py::ssize_t>(v.size()), py::ssize_t{3}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int a = 0; a < 3; ++a) m(i, a) = v[i][a];
  return out;
}

std::vector<Vec3> points_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw ValidationError("points must have shape (N, 3)");
  auto m = a.unchecked<2>();
  std::vector<Vec3> out(a.shape(0));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = {m(i, 0), m(i, 1), m(i, 2)};
  return out;
}

ExampleParams params_from(const std::map<std::string, double>& constants,
                          const std::map<std::string, std::string>& functions) {
  ExampleParams p;
  for (const auto& [k, v] : constants) p.constants[k] = v;
  for (const auto& [k, v] : functions) p.functions[k] = expr::parse(v);
  return p;
}

ExampleBundle bundle(const std::string& name, const std::map<std::string, double>& constants,
                     const std::map<std::string, std::string>& functions, const std::vector<int>& grid,
                     std::optional<double> margin) {
  const ExampleParams p = params_from(constants, functions);
  GridDomain d = default_domain(name, p);
  if (!grid.empty()) d.count = grid;
  if (margin) d.margin = *margin;
  return make_example(name, p, d);
}

Grid unit_box(const std::vector<int>& count, double lo, double hi) {
  std::vector<double> origin(count.size(), lo), step;
  for (int c : count) step.push_back((hi - lo) / (c - 1));
  return Grid(origin, step, count);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Curvature-one third forms, Lame systems, compatibility checks and surface reconstruction.";

  static const py::handle error = py::exception<Error>(m, "Error", PyExc_RuntimeError).release();
  static const py::handle parse_error = py::exception<ParseError>(m, "ParseError", error.ptr()).release();
  static const py::handle eval_error = py::exception<EvalError>(m, "EvalError", error.ptr()).release();
  static const py::handle validation_error =
      py::exception<ValidationError>(m, "ValidationError", error.ptr()).release();
  static const py::handle numerical_error = py::exception<NumericalError>(m, "NumericalError", error.ptr()).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::object exc = parse_error(e.what());
      exc.attr("offset") = e.offset();
      PyErr_SetObject(parse_error.ptr(), exc.ptr());
    } catch (const EvalError& e) {
      py::set_error(eval_error, e.what());
    } catch (const ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    } catch (const nlohmann::json::exception& e) {
      py::set_error(validation_error, e.what());
    }
  });

  py::class_<expr::ScalarExpr>(m, "Expr")
      .def(py::init([](const std::string& s) { return expr::parse(s); }), py::arg("source"))
      .def("eval", [](const expr::ScalarExpr& e, const std::map<std::string, double>& b) {
        return e.eval(expr::Bindings(b.begin(), b.end()));
      }, py::arg("bindings") = std::map<std::string, double>{})
      .def("diff", [](const expr::ScalarExpr& e, const std::string& name) { return expr::differentiate(e, name); })
      .def("depends_on", &expr::ScalarExpr::depends_on)
      .def("free_names", &expr::ScalarExpr::free_names)
      .def("__str__", &expr::ScalarExpr::str)
      .def("__repr__", [](const expr::ScalarExpr& e) { return "Expr('" + e.str() + "')"; })
      .def("__eq__", [](const expr::ScalarExpr& a, const expr::ScalarExpr& b) { return a == b; });

  py::class_<ResidualReport>(m, "Report")
      .def_readonly("title", &ResidualReport::title)
      .def_readonly("excluded", &ResidualReport::excluded)
      .def_readonly("notes", &ResidualReport::notes)
      .def_property_readonly("max", &ResidualReport::max)
      .def_property_readonly("mean", &ResidualReport::mean)
      .def("passes", &ResidualReport::passes, py::arg("tol"))
      .def_property_readonly("node_residual",
                             [](const ResidualReport& r) { return to_array(r.node_residual, r.grid.counts()); })
      .def("to_json", [](const ResidualReport& r) { return r.to_json().dump(); })
      .def("write_csv", &ResidualReport::write_csv)
      .def("__repr__", [](const ResidualReport& r) {
        return "<Report '" + r.title + "' max=" + std::to_string(r.max()) + ">";
      });

  m.def("example_names", &example_names);

  m.def(
      "curvature_residual",
      [](const std::string& name, const std::map<std::string, double>& constants,
         const std::map<std::string, std::string>& functions, const std::vector<int>& grid) {
        const ExampleBundle b = bundle(name, constants, functions, grid, std::nullopt);
        if (b.metric.dim() == 2) return curvature_one_residual(b.metric);
        std::vector<expr::ScalarExpr> H;
        for (const auto& g : b.metric.coefficients()) H.push_back(expr::sqrt(symbolic(g)));
        return lame_curvature_residual(RotationData::from_lame(H, b.metric.grid()), 1.0);
      },
      py::arg("name"), py::arg("constants") = std::map<std::string, double>{},
      py::arg("functions") = std::map<std::string, std::string>{}, py::arg("grid") = std::vector<int>{});

  m.def(
      "codazzi_residual",
      [](const std::string& name, const std::map<std::string, double>& constants) {
        const ExampleBundle b = bundle(name, constants, {}, {}, std::nullopt);
        if (!b.curvatures) throw ValidationError("'" + name + "' has no closed-form radii: " + b.ode_description);
        return codazzi_residual(*b.curvatures, b.codazzi, b.metric.grid());
      },
      py::arg("name"), py::arg("constants") = std::map<std::string, double>{});

  m.def(
      "solve_goursat_ex8",
      [](const std::string& phi0, const std::string& psi0, int n) {
        const Ex8Solution s = solve_goursat_ex8(expr::parse(phi0), expr::parse(psi0), unit_box({n, n}, 0.0, 1.0));
        py::dict out;
        out["phi"] = field_array(s.phi);
        out["psi"] = field_array(s.psi);
        out["first_order"] = s.first_order;
        out["monge_ampere"] = s.monge_ampere;
        out["richardson_ratio"] = s.march.richardson_ratio;
        out["system4"] = system4_residual(s.rd);
        return out;
      },
      py::arg("phi0") = "0.3 + 0.2*R2", py::arg("psi0") = "0.3 + 0.2*R1", py::arg("n") = 129);

  m.def(
      "reconstruct",
      [](const std::string& name, const std::map<std::string, double>& constants, const std::vector<int>& grid,
         std::optional<double> margin) {
        const ExampleBundle b = bundle(name, constants, {}, grid, margin);
        if (!b.curvatures) throw ValidationError("'" + name + "' has no closed-form radii: " + b.ode_description);
        const SurfaceMesh mesh = reconstruct_surface(b.metric, *b.curvatures);
        const MeshForms forms = mesh_fundamental_forms(mesh);
        std::vector<double> tri;
        for (const auto& t : mesh.triangles()) tri.insert(tri.end(), t.begin(), t.end());
        py::dict out;
        out["vertices"] = vec3_array(mesh.r);
        out["normals"] = vec3_array(mesh.normal);
        out["faces"] = to_array(tri, {static_cast<int>(tri.size() / 3), 3}).attr("astype")("int64");
        out["radii"] = radii_agreement(forms, *b.curvatures);
        out["mean_curvature"] = to_array(forms.mean_curvature, forms.grid.counts());
        out["drift"] = mesh.drift;
        out["obj"] = obj_text(mesh);
        return out;
      },
      py::arg("name"), py::arg("constants") = std::map<std::string, double>{}, py::arg("grid") = std::vector<int>{},
      py::arg("margin") = py::none());

  m.def(
      "fit_quadric",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
        const QuadricFit f = fit_quadric(points_from(points));
        return py::make_tuple(std::vector<double>(f.coeffs.begin(), f.coeffs.end()), f.relative_residual);
      },
      py::arg("points"));

  m.def(
      "compatibility",
      [](const std::vector<std::string>& g, const std::vector<std::string>& gt, int samples) {
        if (g.size() != gt.size()) throw ValidationError("g and gt must have the same length");
        const Grid grid = unit_box(std::vector<int>(g.size(), samples), 1.0, 2.0);
        std::vector<ScalarField> a, b;
        for (const auto& s : g) a.emplace_back(expr::parse(s));
        for (const auto& s : gt) b.emplace_back(expr::parse(s));
        return theorem1_report(DiagonalMetric(a, grid), DiagonalMetric(b, grid)).to_json().dump();
      },
      py::arg("g"), py::arg("gt"), py::arg("samples") = 10);

  m.def(
      "run_scene",
      [](const std::string& scene_json, const std::string& out_dir) {
        const RunResult r = run_scene(parse_scene(nlohmann::json::parse(scene_json)), out_dir);
        return py::make_tuple(r.exit_code, r.summary.dump());
      },
      py::arg("scene_json"), py::arg("out_dir"));

  m.def("scene_defaults", [] { return scene_defaults().dump(); });
}
