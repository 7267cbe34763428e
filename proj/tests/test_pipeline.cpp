#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "relcoh/config.hpp"
#include "relcoh/error.hpp"
#include "relcoh/pipeline.hpp"
#include "relcoh/render.hpp"
#include "relcoh/verify.hpp"

namespace fs = std::filesystem;
using namespace relcoh;

namespace {

const char* kSmall = R"(
flow:
  kind: double-gyre
  params: {A: 0.25, epsilon: 0.25, omega: 6.283185307179586}
  t0: 0
  tau: 2
  integrator_step: 0.05
domain:
  rect: [0, 2, 0, 1]
  grid: [10, 5]
sampling:
  n_points: 20000
  seed: 3
tree:
  rho0: 0.8
  max_depth: 2
  min_mass: 0.05
)";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() /
             ("relcoh_" + name + "_" + std::to_string(static_cast<long>(::getpid())))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_config(const fs::path& out) {
  RunConfig c = parse_config(kSmall);
  c.output = out.string();
  return c;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const RunConfig c = parse_config(kSmall);
  CHECK(c.flow.kind == FlowKind::double_gyre);
  CHECK(c.domain_nx == 10);
  CHECK(c.n_points == 20000);
  CHECK(c.rho0 == 0.8);
  CHECK(c.image_mode == ImageMode::same);
  CHECK_FALSE(c.open());

  std::string zero = kSmall;
  zero.replace(zero.find("20000"), 5, "0");
  try {
    parse_config(zero).validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
  }
  std::string bad_rho = kSmall;
  bad_rho.replace(bad_rho.find("rho0: 0.8"), 9, "rho0: 1.5");
  CHECK_THROWS_AS(parse_config(bad_rho).validate(), Error);
  try {
    parse_config("flow: [unbalanced");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
  }
}

TEST_CASE("config round trip") {
  const RunConfig c = parse_config(kSmall);
  std::ostringstream a;
  write_config(a, c);
  const RunConfig r = parse_config(a.str());
  std::ostringstream b;
  write_config(b, r);
  CHECK(a.str() == b.str());
  CHECK(r.flow.params == c.flow.params);
  CHECK(r.domain_rect == c.domain_rect);
}

TEST_CASE("pipeline bundle verifies and is worker independent") {
  TempDir tmp("pipeline");
  std::map<std::string, std::string> reference;
  for (unsigned w : {1u, 4u, 8u}) {
    RunConfig c = small_config(tmp.path / ("w" + std::to_string(w)));
    c.workers = w;
    const PipelineResult r = run_pipeline(c);
    CHECK(fs::exists(fs::path(r.directory) / bundle::kTree));
    CHECK_FALSE(fs::exists(tmp.path / ("w" + std::to_string(w) + ".partial")));
    CHECK(r.tree.root.rho_star.has_value());
    const VerifyReport rep = verify_bundle(r.directory);
    for (const auto& check : rep.checks) CHECK_MESSAGE(check.passed, check.name << ": " << check.detail);
    for (const auto& entry : fs::directory_iterator(r.directory)) {
      const std::string name = entry.path().filename().string();
      if (reference.count(name) == 0) reference[name] = slurp(entry.path());
      else CHECK_MESSAGE(reference[name] == slurp(entry.path()), name);
    }
  }
  CHECK(reference.size() == 10);
}

TEST_CASE("stage errors are tagged and leave no partial bundle") {
  TempDir tmp("stage");
  RunConfig c = small_config(tmp.path / "bad");
  c.flow.integrator_step = -1.0;
  try {
    run_pipeline(c);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(std::string(e.what()).rfind(e.stage() + ": ", 0) == 0);
  }
  CHECK_FALSE(fs::exists(tmp.path / "bad"));
  CHECK_FALSE(fs::exists(tmp.path / "bad.partial"));

  RunConfig off = small_config(tmp.path / "off");
  off.image_mode = ImageMode::occupancy;
  off.image_rect = {10, 11, 10, 11};
  off.image_nx = off.image_ny = 2;
  try {
    run_pipeline(off);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "matrix");
    CHECK(e.code() == ErrorCode::empty_partition);
  }
  CHECK_FALSE(fs::exists(tmp.path / "off"));
}

TEST_CASE("staged CLI entry points match the full run") {
  TempDir tmp("staged");
  const RunConfig full = small_config(tmp.path / "full");
  run_pipeline(full);
  const std::string dir = (tmp.path / "staged").string();
  stage_advect(full, dir);
  stage_matrix(full, dir);
  stage_tree(full, dir);
  for (const char* f : {bundle::kMatrix, bundle::kOutflow, bundle::kTree, bundle::kLabelsX})
    CHECK_MESSAGE(slurp(tmp.path / "full" / f) == slurp(fs::path(dir) / f), f);
  CHECK(verify_bundle(dir).ok());
}

TEST_CASE("verify catches injected faults") {
  TempDir tmp("faults");
  const RunConfig c = small_config(tmp.path / "b");
  run_pipeline(c);
  const fs::path b = tmp.path / "b";

  SUBCASE("corrupted matrix row") {
    std::string m = slurp(b / bundle::kMatrix);
    std::istringstream lines(m);
    std::string header, dims, first;
    std::getline(lines, header);
    std::getline(lines, dims);
    std::getline(lines, first);
    std::istringstream f(first);
    std::size_t i, j;
    double v;
    f >> i >> j >> v;
    const std::string replacement = std::to_string(i) + " " + std::to_string(j) + " " + "0.999";
    m.replace(m.find(first), first.size(), replacement);
    std::ofstream(b / bundle::kMatrix, std::ios::binary) << m;
    const VerifyReport r = verify_bundle(b.string());
    const CheckResult* rows = r.find("row-conservation");
    REQUIRE(rows != nullptr);
    CHECK_FALSE(rows->passed);
    CHECK(rows->detail.find("row " + std::to_string(i) + ":") != std::string::npos);
    CHECK_FALSE(r.ok());
  }

  SUBCASE("internal node below rho0") {
    std::string t = slurp(b / bundle::kTree);
    const std::size_t at = t.find("node root");
    REQUIRE(at != std::string::npos);
    const std::size_t rs = t.find("rho_star ", at) + 9;
    const std::size_t end = t.find(' ', rs);
    REQUIRE(t.substr(at, rs - at).find("status split") != std::string::npos);
    t.replace(rs, end - rs, "0.5");
    std::ofstream(b / bundle::kTree, std::ios::binary) << t;
    const VerifyReport r = verify_bundle(b.string());
    const CheckResult* stop = r.find("stopping-soundness");
    REQUIRE(stop != nullptr);
    CHECK_FALSE(stop->passed);
    CHECK(stop->detail.find("root") != std::string::npos);
  }

  SUBCASE("unreadable bundle") {
    try {
      verify_bundle((tmp.path / "missing").string());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::io);
    }
  }
}

TEST_CASE("render colors") {
  const TriMesh mesh = build_uniform({0, 1, 0, 1}, 1, 1);
  HierarchyTree tree;
  tree.max_depth = 1;
  tree.n_rows = tree.n_cols = 2;
  tree.root.status = NodeStatus::split;
  tree.root.rho_star = 1.0;
  tree.root.rows = tree.root.cols = {0, 1};
  HierarchyNode a, b;
  a.label = "1";
  a.depth = b.depth = 1;
  a.rows = a.cols = {0};
  b.label = "2";
  b.rows = b.cols = {1};
  tree.root.children = {a, b};

  RenderSpec spec;
  spec.format = RenderFormat::svg;
  std::ostringstream svg;
  render(svg, tree, {"1", "2"}, mesh, spec);
  std::set<std::string> fills;
  const std::string s = svg.str();
  for (std::size_t at = s.find("fill=\""); at != std::string::npos; at = s.find("fill=\"", at + 1))
    fills.insert(s.substr(at + 6, 7));
  CHECK(fills.size() == 2);

  std::ostringstream again;
  render(again, tree, {"1", "2"}, mesh, spec);
  CHECK(again.str() == s);

  spec.format = RenderFormat::ppm;
  spec.width = 4;
  std::ostringstream ppm;
  render(ppm, tree, {"1", kUnassigned}, mesh, spec);
  const std::string p = ppm.str();
  REQUIRE(p.rfind("P6\n4 4\n255\n", 0) == 0);
  const std::string pixels = p.substr(std::string("P6\n4 4\n255\n").size());
  REQUIRE(pixels.size() == 48);
  // Top-left pixel lies in the upper triangle, which is unassigned.
  CHECK(static_cast<unsigned char>(pixels[0]) == kUnassignedColor[0]);
  CHECK(static_cast<unsigned char>(pixels[1]) == kUnassignedColor[1]);
  // Bottom-right pixel lies in the lower triangle.
  const std::size_t br = 3 * 15;
  CHECK_FALSE((static_cast<unsigned char>(pixels[br]) == kUnassignedColor[0] &&
               static_cast<unsigned char>(pixels[br + 1]) == kUnassignedColor[1] &&
               static_cast<unsigned char>(pixels[br + 2]) == kUnassignedColor[2]));

  try {
    render(ppm, tree, {"1"}, mesh, spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
  }
  spec.depth = 3;
  CHECK_THROWS_AS(render(ppm, tree, {"1", "2"}, mesh, spec), Error);

  const auto palette = make_palette(tree, 0, 7);
  CHECK(palette.size() == 2);
  CHECK(palette.at("1") != palette.at("2"));
  CHECK(make_palette(tree, 0, 7) == palette);
}
