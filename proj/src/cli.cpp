#include "shapelab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "shapelab/codazzi.hpp"
#include "shapelab/compat.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/frames.hpp"
#include "shapelab/io.hpp"
#include "shapelab/lame.hpp"
#include "shapelab/surface.hpp"

namespace shapelab {

namespace {

using nlohmann::json;

// Gate kinds: an upper bound on a residual, or a lower bound (Richardson ratio).
enum class Bound { upper, lower };

struct GateSpec {
  std::string name;
  double tol;
  Bound bound = Bound::upper;
};

struct ModeSpec {
  std::string name;
  std::string summary;
  std::vector<std::string> required;
  std::vector<std::string> optional;
  /// Gates in order; the first is the one --tol overrides.
  std::vector<GateSpec> gates;
  std::vector<int> grid;
  std::vector<double> lambdas;
  /// Grid default when it depends on the inputs.
  std::string grid_rule;
};

const std::vector<std::string> kCommonKeys = {"mode", "name", "grid", "tol", "lambda", "tolerances"};

// Every numeric default of the command-line front end.
const std::vector<ModeSpec>& mode_table() {
  static const std::vector<ModeSpec> table = {
      {"verify-curvature",
       "curvature-one residual of a catalog third form (Lame form for n = 3)",
       {"example"},
       {"params", "functions", "margin"},
       {{"curvature", 1e-6}},
       {},
       {},
       "catalog default: 64 per axis, 24 for n = 3"},
      {"codazzi",
       "Codazzi residual of closed-form radii and printed coefficients, or radii integrated from boundary data",
       {"example"},
       {"params", "functions", "margin", "boundary"},
       {{"codazzi", 1e-8}, {"christoffel", 1e-8}, {"integrated", 1e-5}},
       {},
       {},
       "catalog default: 64 per axis, 24 for n = 3"},
      {"pencil-scan",
       "curvature of the eta-pencil of the two-dimensional Goursat solution, its rotation system and Lax pairs",
       {},
       {"phi0", "psi0", "box", "lax_lambda"},
       {{"pencil", 1e-6}, {"system4", 1e-6}, {"lax", 1e-5}},
       {129, 129},
       {0.6, 1.0, 2.0, 5.0, 10.0},
       ""},
      {"darboux",
       "Darboux system integrated from characteristic data",
       {"eta", "boundary"},
       {"H_boundary", "box"},
       {{"darboux", 1e-6}},
       {},
       {},
       "65 per axis for n = 2, 17 for n = 3"},
      {"goursat",
       "two-dimensional Goursat problem for phi, psi with its Monge-Ampere reduction",
       {},
       {"phi0", "psi0", "box"},
       {{"first_order", 1e-6}, {"monge_ampere", 1e-5}, {"richardson", 3.5, Bound::lower}},
       {129, 129},
       {},
       ""},
      {"triple",
       "three-dimensional constant-eta system",
       {},
       {"p0", "q0", "r0", "c", "box"},
       {{"first_order", 1e-6}, {"monge_ampere", 1e-5}, {"commutativity", 1e-5}, {"richardson", 3.5, Bound::lower}},
       {17, 17, 17},
       {},
       ""},
      {"compat",
       "compatibility conditions for a pair of diagonal metrics",
       {"g", "gt"},
       {"box"},
       {{"theorem1", 1e-6}},
       {},
       {},
       "10 per axis"},
      {"frames",
       "orthonormal frames, radius-vectors and shape-operator scaling",
       {},
       {"system", "phi0", "psi0", "p0", "q0", "r0", "c", "eta_shift", "box", "scaling", "axis", "level"},
       {{"drift", 1e-6}, {"metric", 1e-5}, {"scaling", 1e-4}},
       {},
       {1.0},
       "65x65 for system ex8, 17x17x17 for triple"},
      {"reconstruct",
       "surface from a catalog third form and radii, with the mesh oracle",
       {"example"},
       {"params", "functions", "margin", "boundary", "base", "checks"},
       {{"radii", 1e-3}, {"third_form", 1e-3}, {"quadric", 1e-4}, {"minimal", 1e-3}},
       {},
       {},
       "catalog default: 64 per axis"},
      {"family",
       "S-deformation family of a catalog example",
       {"example", "members"},
       {"margin", "base"},
       {{"spread", 1e-3}},
       {},
       {},
       "catalog default of the first member: 64 per axis"},
  };
  return table;
}

const ModeSpec& find_mode(const std::string& mode) {
  for (const auto& m : mode_table())
    if (m.name == mode) return m;
  std::string known;
  for (const auto& m : mode_table()) known += (known.empty() ? "" : ", ") + m.name;
  throw ValidationError("unknown mode '" + mode + "' (expected one of " + known + ")");
}

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
}

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ValidationError("'" + key + "' must be a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) throw ValidationError("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, key));
  return out;
}

expr::ScalarExpr expression(const json& j, const std::string& key) {
  if (j.is_number()) return expr::ScalarExpr::constant(j.get<double>());
  if (!j.is_string()) throw ValidationError("'" + key + "' must be an expression string");
  try {
    return expr::parse(j.get<std::string>());
  } catch (const ParseError& e) {
    std::string msg = e.what();
    const auto cut = msg.rfind(" at offset ");
    if (cut != std::string::npos) msg.resize(cut);
    throw ParseError("scene key '" + key + "': " + msg, e.offset());
  }
}

std::vector<expr::ScalarExpr> expressions(const json& j, const std::string& key) {
  if (!j.is_array()) throw ValidationError("'" + key + "' must be an array of expressions");
  std::vector<expr::ScalarExpr> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(expression(j[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

// Accessors with the scene's value or a fallback.
struct Inputs {
  const json& j;
  bool has(const std::string& k) const { return j.contains(k); }
  expr::ScalarExpr expr_or(const std::string& k, const std::string& fallback) const {
    return has(k) ? expression(j.at(k), k) : expr::parse(fallback);
  }
  double number_or(const std::string& k, double fallback) const { return has(k) ? number(j.at(k), k) : fallback; }
  std::vector<double> numbers_or(const std::string& k, std::vector<double> fallback) const {
    return has(k) ? numbers(j.at(k), k) : fallback;
  }
};

ExampleParams example_params(const json& params, const json& functions) {
  ExampleParams p;
  if (!params.is_null()) {
    if (!params.is_object()) throw ValidationError("'params' must be an object of numbers");
    for (const auto& [k, v] : params.items()) p.constants[k] = number(v, "params." + k);
  }
  if (!functions.is_null()) {
    if (!functions.is_object()) throw ValidationError("'functions' must be an object of expressions");
    for (const auto& [k, v] : functions.items()) p.functions[k] = expression(v, "functions." + k);
  }
  return p;
}

json get_or_null(const json& j, const std::string& k) { return j.contains(k) ? j.at(k) : json(); }

GridDomain catalog_domain(const SceneConfig& cfg, const std::string& example, const ExampleParams& p) {
  GridDomain d = default_domain(example, p);
  if (!cfg.grid.empty()) {
    if (static_cast<int>(cfg.grid.size()) != d.dim())
      throw ValidationError("grid has " + std::to_string(cfg.grid.size()) + " axes but '" + example + "' needs " +
                            std::to_string(d.dim()));
    d.count = cfg.grid;
  }
  Inputs in{cfg.inputs};
  d.margin = in.number_or("margin", d.margin);
  d.validate();
  return d;
}

ExampleBundle catalog_bundle(const SceneConfig& cfg) {
  const auto& in = cfg.inputs;
  if (!in.at("example").is_string()) throw ValidationError("'example' must be a string");
  const std::string example = in.at("example").get<std::string>();
  const ExampleParams p = example_params(get_or_null(in, "params"), get_or_null(in, "functions"));
  return make_example(example, p, catalog_domain(cfg, example, p));
}

Grid box_grid(const SceneConfig& cfg, int dim, double lo, double hi) {
  std::vector<double> blo(dim, lo), bhi(dim, hi);
  if (cfg.inputs.contains("box")) {
    const json& b = cfg.inputs.at("box");
    require_keys(b, "'box'", {"lo", "hi"});
    if (b.contains("lo")) blo = numbers(b.at("lo"), "box.lo");
    if (b.contains("hi")) bhi = numbers(b.at("hi"), "box.hi");
  }
  std::vector<int> count = cfg.grid;
  if (count.empty()) count.assign(dim, dim == 3 ? 17 : 65);
  if (static_cast<int>(blo.size()) != dim || static_cast<int>(bhi.size()) != dim ||
      static_cast<int>(count.size()) != dim)
    throw ValidationError("box and grid must have " + std::to_string(dim) + " axes");
  std::vector<double> step;
  for (int a = 0; a < dim; ++a) {
    if (!(bhi[a] > blo[a])) throw ValidationError("box: hi must exceed lo on every axis");
    if (count[a] < 2) throw ValidationError("grid: need at least 2 nodes per axis");
    step.push_back((bhi[a] - blo[a]) / (count[a] - 1));
  }
  return Grid(blo, step, count);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

class Run {
 public:
  Run(const SceneConfig& cfg, std::string out_dir) : cfg_(cfg), spec_(find_mode(cfg.mode)), out_(std::move(out_dir)) {
    std::filesystem::create_directories(out_);
    summary_["mode"] = cfg.mode;
    summary_["name"] = cfg.name;
    summary_["gates"] = json::array();
    summary_["reports"] = json::object();
    summary_["details"] = json::object();
  }

  double tol(const std::string& gate) const {
    for (std::size_t i = 0; i < spec_.gates.size(); ++i) {
      const auto& g = spec_.gates[i];
      if (g.name != gate) continue;
      if (cfg_.inputs.contains("tolerances") && cfg_.inputs.at("tolerances").contains(gate))
        return cfg_.inputs.at("tolerances").at(gate).get<double>();
      if (i == 0 && cfg_.tol > 0.0) return cfg_.tol;
      return g.tol;
    }
    throw ValidationError("internal: no gate '" + gate + "' for mode " + cfg_.mode);
  }

  std::string file(const std::string& suffix) const { return cfg_.name + "." + suffix; }
  std::string path(const std::string& file) const { return (std::filesystem::path(out_) / file).string(); }

  void artifact(const std::string& file) { artifacts_.push_back(file); }

  // Gate `gate` of the mode table applied to `report`, keyed `label` in the summary.
  void report_gate(const std::string& gate, const std::string& label, const ResidualReport& report) {
    const std::string csv = file(slug(label) + ".csv");
    report.write_csv(path(csv));
    artifact(csv);
    summary_["reports"][label] = report.to_json();
    const double t = tol(gate);
    add_gate(label, report.max(), t, report.passes(t), csv);
  }

  void value_gate(const std::string& gate, const std::string& label, double value, bool extra = true) {
    const double t = tol(gate);
    Bound bound = Bound::upper;
    for (const auto& g : spec_.gates)
      if (g.name == gate) bound = g.bound;
    const bool ok = extra && std::isfinite(value) && (bound == Bound::upper ? value <= t : value >= t);
    add_gate(label, value, t, ok, "");
    summary_["gates"].back()["bound"] = bound == Bound::upper ? "max" : "min";
  }

  json& details() { return summary_["details"]; }

  // Records a numerical abort as a failed gate so the summary still names it.
  void abort(const std::string& message) {
    summary_["error"] = message;
    add_gate("numerical", 1.0, 0.0, false, "");
  }

  RunResult finish() {
    RunResult r;
    bool passed = true;
    for (const auto& g : summary_["gates"]) passed = passed && g["passed"].get<bool>();
    summary_["passed"] = passed;
    summary_["config"] = {{"grid", cfg_.grid}, {"tol", cfg_.tol}, {"lambda", cfg_.lambdas}, {"inputs", cfg_.inputs}};
    const std::string sum = file("summary.json");
    artifacts_.push_back(sum);
    summary_["artifacts"] = artifacts_;
    write_file_atomic(path(sum), summary_.dump(2) + "\n");
    r.exit_code = passed ? 0 : 1;
    r.summary = summary_;
    for (const auto& a : artifacts_) r.artifacts.push_back(path(a));
    if (!failing_.empty()) r.failing_report = path(failing_);
    return r;
  }

  const SceneConfig& cfg() const { return cfg_; }

 private:
  static std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
    return out;
  }

  void add_gate(const std::string& label, double value, double t, bool ok, const std::string& report) {
    json g = {{"name", label}, {"value", value}, {"tol", t}, {"passed", ok}};
    if (!report.empty()) g["report"] = report;
    summary_["gates"].push_back(g);
    if (!ok && failing_.empty()) failing_ = report.empty() ? file("summary.json") : report;
  }

  const SceneConfig& cfg_;
  const ModeSpec& spec_;
  std::string out_;
  json summary_;
  std::vector<std::string> artifacts_;
  std::string failing_;
};

void save_fields(Run& run, const std::vector<NamedField>& fields) {
  const std::string f = run.file("fields.grid");
  save_grid_fields(run.path(f), fields);
  run.artifact(f);
}

void rotation_fields(const RotationData& rd, std::vector<NamedField>& out) {
  for (int i = 0; i < rd.n; ++i)
    for (int j = 0; j < rd.n; ++j)
      if (i != j) out.emplace_back("beta" + std::to_string(i + 1) + std::to_string(j + 1), tabulate(rd.beta[i][j], rd.grid));
  if (rd.has_H())
    for (int i = 0; i < rd.n; ++i) out.emplace_back("H" + std::to_string(i + 1), tabulate(rd.H[i], rd.grid));
}

Ex8Solution ex8_from(const SceneConfig& cfg) {
  Inputs in{cfg.inputs};
  return solve_goursat_ex8(in.expr_or("phi0", "0.3 + 0.2*R2"), in.expr_or("psi0", "0.3 + 0.2*R1"), box_grid(cfg, 2, 0.0, 1.0));
}

TripleSolution triple_from(const SceneConfig& cfg, std::vector<double> c_default) {
  Inputs in{cfg.inputs};
  return solve_triple_s2(in.expr_or("p0", "1 + 0.2*R1"), in.expr_or("q0", "0.1*R2"), in.expr_or("r0", "0.05 + 0.1*R3"),
                         box_grid(cfg, 3, 0.0, 0.4), in.numbers_or("c", std::move(c_default)));
}

void run_verify_curvature(Run& run) {
  const ExampleBundle b = catalog_bundle(run.cfg());
  run.details()["example"] = b.name;
  run.details()["grid"] = b.metric.grid().describe();
  run.details()["riemannian"] = b.metric.riemannian();
  if (b.metric.dim() == 2) {
    run.report_gate("curvature", "curvature", curvature_one_residual(b.metric));
  } else {
    std::vector<expr::ScalarExpr> H;
    for (const auto& g : b.metric.coefficients()) H.push_back(expr::sqrt(symbolic(g)));
    run.report_gate("curvature", "curvature", lame_curvature_residual(RotationData::from_lame(H, b.metric.grid()), 1.0));
  }
}

ResidualReport christoffel_match(const ExampleBundle& b) {
  const Grid& g = b.metric.grid();
  const CodazziCoeffs c = christoffel_ab(b.metric);
  std::vector<std::string> names;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j)
      if (i != j) {
        names.push_back("chi_" + std::to_string(i + 1) + std::to_string(j + 1) + " printed");
        pairs.emplace_back(i, j);
      }
  ReportBuilder rb("christoffel vs printed coefficients", g, names);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const Field x = tabulate(c.chi[i][j], g), y = tabulate(b.codazzi.chi[i][j], g);
    for (std::size_t k = 0; k < g.size(); ++k) rb.set(p, k, x[k] - y[k]);
  }
  return rb.finish();
}

void run_codazzi(Run& run) {
  const ExampleBundle b = catalog_bundle(run.cfg());
  const Grid& g = b.metric.grid();
  run.details()["example"] = b.name;
  run.details()["grid"] = g.describe();
  const bool boundary = run.cfg().inputs.contains("boundary");
  if (!b.curvatures && !boundary)
    throw ValidationError("codazzi: '" + b.name + "' has no closed-form radii; give 'boundary' data (" +
                          b.ode_description + ")");
  if (b.curvatures) run.report_gate("codazzi", "codazzi", codazzi_residual(*b.curvatures, b.codazzi, g));
  if (b.metric.dim() == 2) run.report_gate("christoffel", "christoffel", christoffel_match(b));
  if (boundary) {
    const auto data = expressions(run.cfg().inputs.at("boundary"), "boundary");
    const CodazziSolution s = integrate_codazzi(b.codazzi, data, g);
    run.report_gate("integrated", "integrated", codazzi_residual(s.k, b.codazzi, g));
    run.details()["richardson_ratio"] = s.march.richardson_ratio;
    std::vector<NamedField> fields;
    for (std::size_t i = 0; i < s.k.k.size(); ++i) fields.emplace_back("k" + std::to_string(i + 1), tabulate(s.k.k[i], g));
    save_fields(run, fields);
  }
}

void run_pencil_scan(Run& run) {
  const Ex8Solution s = ex8_from(run.cfg());
  const MetricPencil pencil(s.rd.H, s.rd.eta, s.rd.grid);
  run.details()["grid"] = s.rd.grid.describe();
  run.details()["admissible_lower"] = pencil.admissible_interval().first;
  const auto scan = pencil_curvature_scan(pencil, run.cfg().lambdas);
  for (std::size_t i = 0; i < scan.size(); ++i)
    run.report_gate("pencil", "pencil lambda=" + fmt(run.cfg().lambdas[i]), scan[i]);
  run.report_gate("system4", "system4", system4_residual(s.rd));
  Inputs in{run.cfg().inputs};
  for (double lambda : in.numbers_or("lax_lambda", {0.1, 1.0, 10.0})) {
    run.report_gate("lax", "lax3 lambda=" + fmt(lambda), lax_zero_curvature_residual(s.rd, lambda, LaxForm::three_by_three));
    run.report_gate("lax", "lax2 lambda=" + fmt(lambda), lax_zero_curvature_residual(s.rd, lambda, LaxForm::two_by_two));
  }
}

void run_darboux(Run& run) {
  const auto& in = run.cfg().inputs;
  const auto eta = expressions(in.at("eta"), "eta");
  const int n = static_cast<int>(eta.size());
  if (n != 2 && n != 3) throw ValidationError("darboux: 'eta' must have 2 or 3 entries");
  const json& bj = in.at("boundary");
  if (!bj.is_array() || static_cast<int>(bj.size()) != n)
    throw ValidationError("darboux: 'boundary' must be an n x n array of expressions");
  std::vector<std::vector<expr::ScalarExpr>> boundary;
  for (int i = 0; i < n; ++i) {
    boundary.push_back(expressions(bj[i], "boundary[" + std::to_string(i) + "]"));
    if (static_cast<int>(boundary.back().size()) != n)
      throw ValidationError("darboux: 'boundary' must be an n x n array of expressions");
  }
  std::vector<expr::ScalarExpr> H;
  if (in.contains("H_boundary")) H = expressions(in.at("H_boundary"), "H_boundary");
  const DarbouxSolution d = integrate_darboux(eta, boundary, box_grid(run.cfg(), n, 0.0, 1.0), H);
  run.details()["grid"] = d.rd.grid.describe();
  run.details()["richardson_ratio"] = d.march.richardson_ratio;
  run.report_gate("darboux", "darboux", darboux_residual(d.rd));
  std::vector<NamedField> fields;
  rotation_fields(d.rd, fields);
  save_fields(run, fields);
}

void run_goursat(Run& run) {
  const Ex8Solution s = ex8_from(run.cfg());
  run.details()["grid"] = s.rd.grid.describe();
  run.details()["level_differences"] = s.march.level_differences;
  run.report_gate("first_order", "first_order", s.first_order);
  run.report_gate("monge_ampere", "monge_ampere", s.monge_ampere);
  run.value_gate("richardson", "richardson", s.march.richardson_ratio);
  std::vector<NamedField> fields = {{"phi", s.phi}, {"psi", s.psi}};
  rotation_fields(s.rd, fields);
  save_fields(run, fields);
}

void run_triple(Run& run) {
  const TripleSolution s = triple_from(run.cfg(), {0.0, 1.0, 3.0});
  run.details()["grid"] = s.grid.describe();
  run.details()["c"] = s.c;
  run.details()["mu"] = s.mu;
  run.details()["level_differences"] = s.march.level_differences;
  run.report_gate("first_order", "first_order", s.first_order);
  run.report_gate("monge_ampere", "monge_ampere", s.monge_ampere);
  run.report_gate("commutativity", "commutativity", s.commutativity);
  run.value_gate("richardson", "richardson", s.march.richardson_ratio);
  std::vector<NamedField> fields = {{"p", s.p}, {"q", s.q}, {"r", s.r}};
  for (std::size_t i = 0; i < s.H.size(); ++i) fields.emplace_back("H" + std::to_string(i + 1), s.H[i]);
  save_fields(run, fields);
}

void run_compat(Run& run) {
  const auto& in = run.cfg().inputs;
  const auto g = expressions(in.at("g"), "g"), gt = expressions(in.at("gt"), "gt");
  if (g.size() != gt.size() || g.size() < 2 || g.size() > 3)
    throw ValidationError("compat: 'g' and 'gt' must list the same 2 or 3 diagonal coefficients");
  SceneConfig cfg = run.cfg();
  if (cfg.grid.empty()) cfg.grid.assign(g.size(), 10);
  const Grid grid = box_grid(cfg, static_cast<int>(g.size()), 1.0, 2.0);
  auto fields = [](const std::vector<expr::ScalarExpr>& e) {
    std::vector<ScalarField> out(e.begin(), e.end());
    return out;
  };
  const Theorem1Verdict v = theorem1_report(DiagonalMetric(fields(g), grid), DiagonalMetric(fields(gt), grid));
  run.details()["grid"] = grid.describe();
  run.details()["verdict"] = v.to_json();
  run.value_gate("theorem1", "theorem1", v.worst(), v.passed);
}

void run_frames(Run& run) {
  const auto& in = run.cfg().inputs;
  Inputs inp{in};
  std::string system = "ex8";
  if (in.contains("system")) {
    if (!in.at("system").is_string()) throw ValidationError("'system' must be \"ex8\" or \"triple\"");
    system = in.at("system").get<std::string>();
  }
  RotationData rd;
  int axis = 0, level = 0;
  if (system == "ex8") {
    SceneConfig cfg = run.cfg();
    if (cfg.grid.empty()) cfg.grid = {65, 65};
    rd = ex8_from(cfg).rd;
    const double shift = inp.number_or("eta_shift", 1.0);
    for (auto& e : rd.eta) e = e + shift;
    axis = 1;
  } else if (system == "triple") {
    rd = triple_to_rotation(triple_from(run.cfg(), {1.0, 2.0, 4.0}));
    const double shift = inp.number_or("eta_shift", 0.0);
    for (auto& e : rd.eta) e = e + shift;
    axis = 2;
  } else {
    throw ValidationError("'system' must be \"ex8\" or \"triple\"");
  }
  axis = static_cast<int>(inp.number_or("axis", axis));
  if (axis < 0 || axis >= rd.n) throw ValidationError("'axis' must be a coordinate index below n");
  level = static_cast<int>(inp.number_or("level", rd.grid.count(axis) / 2));
  run.details()["system"] = system;
  run.details()["grid"] = rd.grid.describe();
  for (double lambda : run.cfg().lambdas) {
    const FrameField ff = integrate_frame(rd, lambda);
    run.report_gate("drift", "drift lambda=" + fmt(lambda), ff.gram_drift);
    run.report_gate("metric", "metric lambda=" + fmt(lambda), ff.metric_match);
  }
  json pairs = in.contains("scaling") ? in.at("scaling") : json::parse("[[0, 1], [0.2, 2]]");
  if (!pairs.is_array()) throw ValidationError("'scaling' must be an array of [lambda1, lambda2] pairs");
  for (const auto& p : pairs) {
    const auto l = numbers(p, "scaling");
    if (l.size() != 2) throw ValidationError("'scaling' must be an array of [lambda1, lambda2] pairs");
    run.report_gate("scaling", "scaling " + fmt(l[0]) + "/" + fmt(l[1]), scaling_law_check(rd, l[0], l[1], axis, level));
  }
}

SurfaceBase surface_base(const json& in) {
  SurfaceBase base;
  if (!in.contains("base")) return base;
  const json& b = in.at("base");
  require_keys(b, "'base'", {"origin", "frame"});
  if (b.contains("origin")) {
    const auto o = numbers(b.at("origin"), "base.origin");
    if (o.size() != 3) throw ValidationError("'base.origin' must have 3 entries");
    base.origin = {o[0], o[1], o[2]};
  }
  if (b.contains("frame")) {
    const json& f = b.at("frame");
    if (!f.is_array() || f.size() != 3) throw ValidationError("'base.frame' must be 3 rows of 3 numbers");
    for (int i = 0; i < 3; ++i) {
      const auto row = numbers(f[i], "base.frame");
      if (row.size() != 3) throw ValidationError("'base.frame' must be 3 rows of 3 numbers");
      base.frame[i] = {row[0], row[1], row[2]};
    }
  }
  return base;
}

CurvatureField radii_for(const ExampleBundle& b, const json& in) {
  if (in.contains("boundary"))
    return integrate_codazzi(b.codazzi, expressions(in.at("boundary"), "boundary"), b.metric.grid()).k;
  if (!b.curvatures)
    throw ValidationError("'" + b.name + "' has no closed-form radii; give 'boundary' data (" + b.ode_description + ")");
  return *b.curvatures;
}

void run_reconstruct(Run& run) {
  const auto& in = run.cfg().inputs;
  const ExampleBundle b = catalog_bundle(run.cfg());
  if (b.metric.dim() != 2) throw ValidationError("reconstruct: '" + b.name + "' is not a surface example");
  const CurvatureField k = radii_for(b, in);
  const SurfaceMesh mesh = reconstruct_surface(b.metric, k, surface_base(in));
  const MeshForms forms = mesh_fundamental_forms(mesh);
  const std::string obj = run.file("obj");
  export_obj(mesh, run.path(obj));
  run.artifact(obj);
  run.details()["example"] = b.name;
  run.details()["grid"] = mesh.grid.describe();
  run.details()["frame_drift"] = mesh.drift.max();
  run.details()["mixed_partials"] = mesh.mixed_partials.max();
  run.details()["vertices"] = mesh.r.size();
  run.details()["faces"] = mesh.triangles().size();
  run.report_gate("radii", "radii", radii_agreement(forms, k));
  std::set<std::string> checks;
  if (in.contains("checks")) {
    if (!in.at("checks").is_array()) throw ValidationError("'checks' must be an array of strings");
    for (const auto& c : in.at("checks")) {
      if (!c.is_string()) throw ValidationError("'checks' must be an array of strings");
      const std::string s = c.get<std::string>();
      if (s != "third_form" && s != "quadric" && s != "minimal")
        throw ValidationError("unknown check '" + s + "' (expected third_form, quadric or minimal)");
      checks.insert(s);
    }
  }
  if (checks.count("third_form")) run.report_gate("third_form", "third_form", third_form_agreement(forms, b.metric));
  if (checks.count("quadric")) {
    const QuadricFit fit = fit_quadric(mesh.r);
    run.details()["quadric_coefficients"] = fit.coeffs;
    run.value_gate("quadric", "quadric", fit.relative_residual);
  }
  if (checks.count("minimal")) {
    double h = 0.0;
    for (std::size_t node = 0; node < forms.mean_curvature.size(); ++node)
      if (forms.interior(node)) h = std::max(h, std::abs(forms.mean_curvature[node]));
    run.value_gate("minimal", "minimal", h);
  }
}

void run_family(Run& run) {
  const auto& in = run.cfg().inputs;
  if (!in.at("example").is_string()) throw ValidationError("'example' must be a string");
  const std::string example = in.at("example").get<std::string>();
  const json& mj = in.at("members");
  if (!mj.is_array() || mj.empty()) throw ValidationError("'members' must be a non-empty array");
  std::vector<ExampleParams> params;
  for (const auto& m : mj) {
    require_keys(m, "a family member", {"params", "functions"});
    params.push_back(example_params(get_or_null(m, "params"), get_or_null(m, "functions")));
  }
  const GridDomain domain = catalog_domain(run.cfg(), example, params.front());
  const SurfaceBase base = surface_base(in);
  DeformationFamily fam;
  if (run.cfg().lambdas.empty()) {
    fam = deformation_family(example, params, domain, base);
  } else {
    if (params.size() != 2) throw ValidationError("family: a lambda list needs exactly two members");
    const ExampleBundle b1 = make_example(example, params[0], domain), b2 = make_example(example, params[1], domain);
    if (!b1.curvatures) throw ValidationError("family: '" + example + "' has no closed-form radii");
    fam = deformation_family(b1.metric, b2.metric, run.cfg().lambdas, *b1.curvatures, base);
  }
  json manifest = fam.manifest();
  manifest["example"] = example;
  if (const auto k = make_example(example, params.front(), domain).curvatures)
    for (const auto& f : k->k) manifest["curvature"].push_back(describe(f));
  for (std::size_t i = 0; i < fam.meshes.size(); ++i) {
    const std::string obj = run.file("member" + std::to_string(i) + ".obj");
    export_obj(fam.meshes[i], run.path(obj));
    run.artifact(obj);
    manifest["members"][i]["file"] = obj;
  }
  const std::string mf = run.file("manifest.json");
  write_file_atomic(run.path(mf), manifest.dump(2) + "\n");
  run.artifact(mf);
  run.details()["members"] = fam.labels;
  run.details()["skipped"] = fam.skipped;
  if (fam.meshes.size() >= 2) {
    run.report_gate("spread", "spread", fam.radii_spread);
  } else {
    run.value_gate("spread", "spread", 0.0, !fam.meshes.empty());
  }
}

}  // namespace

const std::vector<std::string>& scene_modes() {
  static const std::vector<std::string> modes = [] {
    std::vector<std::string> out;
    for (const auto& m : mode_table()) out.push_back(m.name);
    return out;
  }();
  return modes;
}

const nlohmann::json& scene_defaults() {
  static const json table = [] {
    json t = json::object();
    for (const auto& m : mode_table()) {
      json g = json::object();
      for (const auto& gate : m.gates) g[gate.name] = {{"tol", gate.tol}, {"bound", gate.bound == Bound::upper ? "max" : "min"}};
      t[m.name] = {{"summary", m.summary}, {"required", m.required}, {"optional", m.optional}, {"gates", g},
                   {"primary", m.gates.front().name}, {"lambda", m.lambdas}};
      if (m.grid.empty()) t[m.name]["grid"] = m.grid_rule;
      else t[m.name]["grid"] = m.grid;
    }
    return t;
  }();
  return table;
}

SceneConfig parse_scene(const nlohmann::json& scene) {
  if (!scene.is_object()) throw ValidationError("scene must be a JSON object");
  if (!scene.contains("mode") || !scene.at("mode").is_string()) throw ValidationError("scene needs a string 'mode'");
  SceneConfig cfg;
  cfg.mode = scene.at("mode").get<std::string>();
  const ModeSpec& spec = find_mode(cfg.mode);
  std::set<std::string> allowed(kCommonKeys.begin(), kCommonKeys.end());
  allowed.insert(spec.required.begin(), spec.required.end());
  allowed.insert(spec.optional.begin(), spec.optional.end());
  require_keys(scene, "scene for mode '" + cfg.mode + "'", allowed);
  for (const auto& key : spec.required)
    if (!scene.contains(key)) throw ValidationError("mode '" + cfg.mode + "' requires '" + key + "'");

  cfg.name = cfg.mode;
  if (scene.contains("name")) {
    if (!scene.at("name").is_string() || scene.at("name").get<std::string>().empty())
      throw ValidationError("'name' must be a non-empty string");
    cfg.name = scene.at("name").get<std::string>();
    if (cfg.name.find_first_of("/\\") != std::string::npos) throw ValidationError("'name' must not contain path separators");
  }
  cfg.grid = spec.grid;
  if (scene.contains("grid")) {
    cfg.grid.clear();
    for (double v : numbers(scene.at("grid"), "grid")) {
      if (v != std::floor(v) || v < 2) throw ValidationError("'grid' entries must be integers >= 2");
      cfg.grid.push_back(static_cast<int>(v));
    }
  }
  if (scene.contains("tol")) {
    cfg.tol = number(scene.at("tol"), "tol");
    if (!(cfg.tol > 0.0)) throw ValidationError("'tol' must be positive");
  }
  cfg.lambdas = spec.lambdas;
  if (scene.contains("lambda")) cfg.lambdas = numbers(scene.at("lambda"), "lambda");
  if (scene.contains("tolerances")) {
    std::set<std::string> gates;
    for (const auto& g : spec.gates) gates.insert(g.name);
    require_keys(scene.at("tolerances"), "'tolerances'", gates);
    for (const auto& [k, v] : scene.at("tolerances").items()) number(v, "tolerances." + k);
  }
  for (const auto& [key, value] : scene.items())
    if (!std::count(kCommonKeys.begin(), kCommonKeys.end(), key) || key == "tolerances") cfg.inputs[key] = value;
  cfg.inputs.erase("mode");
  return cfg;
}

SceneConfig load_scene(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("scene '" + path + "' is not valid JSON: " + e.what(), e.byte);
  }
  return parse_scene(j);
}

std::vector<int> parse_grid_spec(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || v < 2) throw ValidationError("bad --grid '" + spec + "' (expected n1xn2[xn3])");
    out.push_back(v);
  }
  if (out.size() < 2 || out.size() > 3) throw ValidationError("bad --grid '" + spec + "' (expected n1xn2[xn3])");
  return out;
}

std::vector<double> parse_lambda_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || !std::isfinite(v))
      throw ValidationError("bad --lambda '" + spec + "' (expected a comma-separated list of numbers)");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("bad --lambda '" + spec + "'");
  return out;
}

RunResult run_scene(const SceneConfig& config, const std::string& out_dir) {
  Run run(config, out_dir);
  static const std::map<std::string, void (*)(Run&)> runners = {
      {"verify-curvature", run_verify_curvature}, {"codazzi", run_codazzi}, {"pencil-scan", run_pencil_scan},
      {"darboux", run_darboux},   {"goursat", run_goursat},   {"triple", run_triple},
      {"compat", run_compat},     {"frames", run_frames},     {"reconstruct", run_reconstruct},
      {"family", run_family},
  };
  try {
    runners.at(config.mode)(run);
  } catch (const NumericalError& e) {
    run.abort(e.what());
  }
  return run.finish();
}

int cli_main(int argc, char** argv) {
  CLI::App app{"shapelab: checks and constructions for S-deformable surfaces and orthogonal systems"};
  app.require_subcommand(0, 1);
  std::string scene, out = ".", grid, lambda;
  double tol = 0.0;
  bool defaults = false;
  app.add_flag("--defaults", defaults, "Print the defaults table as JSON and exit");
  for (const auto& m : mode_table()) {
    auto* sub = app.add_subcommand(m.name, m.summary);
    sub->add_option("--scene", scene, "Scene JSON file");
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    sub->add_option("--tol", tol, "Tolerance of the primary gate");
    sub->add_option("--grid", grid, "Samples per axis, n1xn2[xn3]");
    sub->add_option("--lambda", lambda, "Comma-separated lambda values");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (defaults) {
    std::cout << scene_defaults().dump(2) << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help() << "shapelab: a mode subcommand is required\n";
    return 2;
  }
  try {
    const std::string mode = app.get_subcommands().front()->get_name();
    json j = json{{"mode", mode}};
    if (!scene.empty()) {
      const SceneConfig parsed = load_scene(scene);
      if (parsed.mode != mode)
        throw ValidationError("scene '" + scene + "' is for mode '" + parsed.mode + "', not '" + mode + "'");
      j = json::parse(read_file(scene));
    }
    SceneConfig cfg = parse_scene(j);
    if (!grid.empty()) cfg.grid = parse_grid_spec(grid);
    if (!lambda.empty()) cfg.lambdas = parse_lambda_list(lambda);
    if (tol != 0.0) {
      if (!(tol > 0.0)) throw ValidationError("--tol must be positive");
      cfg.tol = tol;
    }
    const RunResult r = run_scene(cfg, out);
    for (const auto& g : r.summary["gates"]) {
      std::cout << (g["passed"].get<bool>() ? "PASS " : "FAIL ") << g["name"].get<std::string>() << " = "
                << g["value"].dump() << " (" << (g.value("bound", "max") == "max" ? "tol " : "min ") << g["tol"].dump()
                << ")\n";
    }
    std::cout << "summary: " << r.artifacts.back() << "\n";
    if (r.exit_code != 0) std::cerr << "shapelab: gate failed; report: " << r.failing_report << "\n";
    return r.exit_code;
  } catch (const ValidationError& e) {
    std::cerr << "shapelab: invalid input: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "shapelab: parse error: " << e.what() << "\n";
    return 2;
  } catch (const EvalError& e) {
    std::cerr << "shapelab: evaluation error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "shapelab: numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "shapelab: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace shapelab
