#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "shapelab/cli.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/io.hpp"
#include "shapelab/surface.hpp"

using namespace shapelab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("shapelab_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string scene_path(const std::string& name) { return std::string(SHAPELAB_SOURCE_DIR) + "/scenes/" + name; }

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "shapelab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string write_scene(const TempDir& dir, const std::string& name, const std::string& text) {
  const std::string p = (dir.path / name).string();
  write_file_atomic(p, text);
  return p;
}

}  // namespace

TEST_CASE("cli: defaults table covers every mode with gates") {
  const json& t = scene_defaults();
  CHECK(scene_modes().size() == 10);
  for (const auto& m : scene_modes()) {
    REQUIRE(t.contains(m));
    CHECK(!t[m]["gates"].empty());
    CHECK(t[m]["required"].is_array());
  }
  CHECK(t["goursat"]["grid"] == json::array({129, 129}));
  CHECK(t["pencil-scan"]["lambda"].size() == 5);
  CHECK(t["reconstruct"]["gates"]["radii"]["tol"] == doctest::Approx(1e-3));
  CHECK(t["reconstruct"]["primary"] == "radii");
  CHECK(t["compat"]["grid"].is_string());
}

TEST_CASE("cli: scene validation") {
  CHECK_THROWS_AS(parse_scene(json{{"mode", "bogus"}}), ValidationError);
  CHECK_THROWS_AS(parse_scene(json{{"example", "dupin"}}), ValidationError);
  CHECK_THROWS_AS(parse_scene(json{{"mode", "verify-curvature"}}), ValidationError);
  CHECK_THROWS_AS(parse_scene(json{{"mode", "verify-curvature"}, {"example", "dupin"}, {"colour", 1}}), ValidationError);
  CHECK_THROWS_AS(parse_scene(json{{"mode", "goursat"}, {"tolerances", {{"lax", 1e-3}}}}), ValidationError);
  CHECK_THROWS_AS(parse_scene(json{{"mode", "goursat"}, {"grid", {65.5, 65}}}), ValidationError);
  CHECK_THROWS_AS(parse_scene(json{{"mode", "goursat"}, {"tol", -1}}), ValidationError);
  CHECK_THROWS_AS(parse_scene(json{{"mode", "goursat"}, {"name", "../x"}}), ValidationError);

  const SceneConfig c = parse_scene(json{{"mode", "pencil-scan"}});
  CHECK(c.name == "pencil-scan");
  CHECK(c.grid == std::vector<int>{129, 129});
  CHECK(c.lambdas == std::vector<double>{0.6, 1.0, 2.0, 5.0, 10.0});

  const SceneConfig d = load_scene(scene_path("dupin_reconstruct.json"));
  CHECK(d.mode == "reconstruct");
  CHECK(d.inputs["example"] == "dupin");
  CHECK(!d.inputs.contains("mode"));
}

TEST_CASE("cli: every shipped scene parses") {
  for (const auto& entry : fs::directory_iterator(std::string(SHAPELAB_SOURCE_DIR) + "/scenes")) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_scene(entry.path().string()));
  }
}

TEST_CASE("cli: grid and lambda flags") {
  CHECK(parse_grid_spec("64x64") == std::vector<int>{64, 64});
  CHECK(parse_grid_spec("17x17x17") == std::vector<int>{17, 17, 17});
  CHECK_THROWS_AS(parse_grid_spec("64"), ValidationError);
  CHECK_THROWS_AS(parse_grid_spec("64xa"), ValidationError);
  CHECK_THROWS_AS(parse_grid_spec("1x64"), ValidationError);
  CHECK(parse_lambda_list("0.1,1,10") == std::vector<double>{0.1, 1.0, 10.0});
  CHECK_THROWS_AS(parse_lambda_list("0.1,,1"), ValidationError);
  CHECK_THROWS_AS(parse_lambda_list("x"), ValidationError);
}

TEST_CASE("cli: verify-curvature on the quadric exits 0 with a summary") {
  TempDir out;
  CHECK(run_cli({"verify-curvature", "--scene", scene_path("quadric_curvature.json"), "--out", out.str()}) == 0);
  const json s = json::parse(read_file((out.path / "quadric_curvature.summary.json").string()));
  CHECK(s["passed"] == true);
  CHECK(s["gates"][0]["name"] == "curvature");
  CHECK(s["gates"][0]["value"].get<double>() <= 1e-6);
  CHECK(s["reports"]["curvature"]["max"].get<double>() == s["gates"][0]["value"].get<double>());
  CHECK(fs::exists(out.path / "quadric_curvature.curvature.csv"));
}

TEST_CASE("cli: reconstruct on Dupin writes a mesh and the oracle report") {
  TempDir out;
  const RunResult r = run_scene(load_scene(scene_path("dupin_reconstruct.json")), out.str());
  CHECK(r.exit_code == 0);
  const ObjData obj = import_obj((out.path / "dupin_reconstruct.obj").string());
  CHECK(obj.vertices.size() == 64 * 64);
  CHECK(obj.faces.size() == 2 * 63 * 63);
  CHECK(fs::exists(out.path / "dupin_reconstruct.radii.csv"));
  CHECK(r.summary["reports"]["radii"]["max"].get<double>() <= 1e-3);
  CHECK(r.artifacts.back() == (out.path / "dupin_reconstruct.summary.json").string());
}

TEST_CASE("cli: malformed expression exits 2 with its offset") {
  TempDir dir;
  const std::string scene = write_scene(dir, "bad.json", R"({"mode": "goursat", "phi0": "0.3 + * R2"})");
  CHECK(run_cli({"goursat", "--scene", scene, "--out", dir.str()}) == 2);
  try {
    run_scene(load_scene(scene), dir.str());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 6);
    CHECK(std::string(e.what()).find("phi0") != std::string::npos);
    CHECK(std::string(e.what()).find("offset 6") != std::string::npos);
  }
}

TEST_CASE("cli: validation failures exit 2") {
  TempDir dir;
  CHECK(run_cli({"goursat", "--scene", write_scene(dir, "a.json", R"({"mode": "goursat", "phi": "1"})"), "--out",
                 dir.str()}) == 2);
  CHECK(run_cli({"triple", "--scene", write_scene(dir, "b.json", R"({"mode": "goursat"})"), "--out", dir.str()}) == 2);
  CHECK(run_cli({"goursat", "--scene", write_scene(dir, "c.json", R"({"mode": "goursat",)"), "--out", dir.str()}) == 2);
  CHECK(run_cli({"goursat", "--scene", (dir.path / "missing.json").string()}) == 2);
  CHECK(run_cli({"goursat", "--bogus"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"goursat", "--grid", "12", "--out", dir.str()}) == 2);
  CHECK(run_cli({"codazzi", "--scene",
                 write_scene(dir, "d.json", R"({"mode": "codazzi", "example": "monge"})"), "--out", dir.str()}) == 2);
}

TEST_CASE("cli: a failing gate exits 1 and names the report") {
  TempDir out;
  SceneConfig c = load_scene(scene_path("quadric_curvature.json"));
  c.tol = 1e-20;
  const RunResult r = run_scene(c, out.str());
  CHECK(r.exit_code == 1);
  CHECK(r.summary["passed"] == false);
  CHECK(r.failing_report == (out.path / "quadric_curvature.curvature.csv").string());
  CHECK(run_cli({"verify-curvature", "--scene", scene_path("quadric_curvature.json"), "--out", out.str(), "--tol",
                 "1e-20"}) == 1);
}

TEST_CASE("cli: flags override the scene") {
  TempDir out;
  CHECK(run_cli({"goursat", "--out", out.str(), "--grid", "33x33"}) == 0);
  const json s = json::parse(read_file((out.path / "goursat.summary.json").string()));
  CHECK(s["config"]["grid"] == json::array({33, 33}));
  const auto fields = load_grid_fields((out.path / "goursat.fields.grid").string());
  REQUIRE(!fields.empty());
  CHECK(fields[0].first == "phi");
  CHECK(fields[0].second.grid().count(0) == 33);

  CHECK(run_cli({"frames", "--out", out.str(), "--lambda", "0.5,3", "--grid", "33x33"}) == 0);
  const json f = json::parse(read_file((out.path / "frames.summary.json").string()));
  CHECK(f["gates"][0]["name"] == "drift lambda=0.5");
  CHECK(f["gates"][2]["name"] == "drift lambda=3");
}

TEST_CASE("cli: identical scenes give byte-identical summaries") {
  TempDir a, b;
  const SceneConfig c = load_scene(scene_path("ex8_frames.json"));
  run_scene(c, a.str());
  run_scene(c, b.str());
  CHECK(read_file((a.path / "ex8_frames.summary.json").string()) == read_file((b.path / "ex8_frames.summary.json").string()));
  const std::string text = read_file((a.path / "ex8_frames.summary.json").string());
  CHECK(text.find(a.str()) == std::string::npos);
}

TEST_CASE("cli: family writes one mesh per member and a manifest") {
  TempDir out;
  const RunResult r = run_scene(load_scene(scene_path("quadric_family.json")), out.str());
  CHECK(r.exit_code == 0);
  for (int i = 0; i < 3; ++i) CHECK(fs::exists(out.path / ("quadric_family.member" + std::to_string(i) + ".obj")));
  const json m = json::parse(read_file((out.path / "quadric_family.manifest.json").string()));
  CHECK(m["members"].size() == 3);
  CHECK(m["members"][1]["file"] == "quadric_family.member1.obj");
  CHECK(m["curvature"].size() == 2);
}

TEST_CASE("cli: a numerical abort is recorded in the summary and exits 1") {
  TempDir out;
  const std::string scene = write_scene(out, "blow.json", R"({"mode": "goursat", "phi0": "40 + R2", "psi0": "40 + R1"})");
  const RunResult r = run_scene(load_scene(scene), out.str());
  CHECK(r.exit_code == 1);
  CHECK(r.summary["passed"] == false);
  CHECK(r.summary.contains("error"));
  CHECK(r.failing_report == (out.path / "goursat.summary.json").string());
}
