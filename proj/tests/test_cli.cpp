#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "lowdim/error.hpp"
#include "lowdim/io.hpp"
#include "lowdim/scenario.hpp"

using namespace lowdim;
namespace fs = std::filesystem;

namespace {

std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("lowdim_test_" + name);
    fs::remove_all(dir);
    return dir;
}

const char* kMinimal = R"({
  "name": "segments",
  "kind": "stationary",
  "structure": {"components": [
    {"type": "segment", "p0": [-1, 0, 0], "p1": [1, 0, 0]},
    {"type": "segment", "p0": [0, -1, 0], "p1": [0, 1, 0]}]},
  "f": ["x", "0"],
  "mesh": {"h": 0.125},
  "assertions": [{"metric": "l2_error", "op": "<=", "value": 1e-2}]
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("VTK for the crossing segments") {
    const Mesh m = build_mesh(fixtures::crossing_segments(), 0.5);
    const std::string geometry = vtk_string(m, {});
    CHECK(geometry.find("POINTS 9 double\n") != std::string::npos);
    CHECK(geometry.find("CELLS 8 24\n") != std::string::npos);
    CHECK(geometry.find("CELL_TYPES 8\n") != std::string::npos);
    CHECK(geometry.find("POINT_DATA") == std::string::npos);
    CHECK(geometry.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
    const DiscreteField u(std::vector<double>(9, 0.1));
    const std::string with_u = vtk_string(m, {{"u", u}});
    CHECK(with_u.find("POINT_DATA 9\nSCALARS u double 1\nLOOKUP_TABLE default\n0.10000000000000001\n") != std::string::npos);
    CHECK_THROWS_AS(vtk_string(m, {{"u", DiscreteField(std::size_t{3})}}), Error);
    CHECK_THROWS_AS(vtk_string(m, {{"bad name", u}}), Error);
    const auto dir = scratch("vtk");
    emit_vtk(m, {{"u", u}}, dir / "sub" / "u.vtk");
    CHECK(read(dir / "sub" / "u.vtk") == with_u);
}

TEST_CASE("scenario parsing and canonical round trip") {
    const Scenario s = parse_scenario(kMinimal);
    CHECK(s.components.size() == 2);
    CHECK(s.f.size() == 2);
    CHECK(*s.h == 0.125);
    const std::string canonical = serialize_scenario(s);
    CHECK(serialize_scenario(parse_scenario(canonical)) == canonical);
    for (const auto& entry : fs::directory_iterator(LOWDIM_SCENARIO_DIR)) {
        const std::string text = read(entry.path());
        CHECK_MESSAGE(serialize_scenario(parse_scenario(text)) == text, entry.path().string());
    }
}

TEST_CASE("schema errors") {
    auto kind = [](const std::string& text) {
        try {
            parse_scenario(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::IoError;
    };
    CHECK(kind("{") == ErrorKind::ScenarioError);
    CHECK(kind(R"({"name": "a", "kind": "bogus", "structure": {"components": []}})") == ErrorKind::ScenarioError);
    CHECK(kind(R"({"name": "a", "kind": "validate", "structure": {"components": []}, "extra": 1})") ==
          ErrorKind::ScenarioError);
    CHECK(kind(R"({"name": "a", "kind": "parabolic", "structure": {"components": []}})") == ErrorKind::ScenarioError);
    CHECK(kind(R"({"name": "a", "kind": "validate", "structure": {"components": []}, "f": ["1+"]})") ==
          ErrorKind::ParseError);
    CHECK(kind(R"({"name": "a", "kind": "validate", "structure": {"components": [{"type": "cube"}]}})") ==
          ErrorKind::ScenarioError);
}

TEST_CASE("running a scenario") {
    Scenario s = parse_scenario(kMinimal);
    s.exact = {Expression::parse("-x^3/6 + x/2"), Expression::parse("0")};
    s.csv_output = "u.csv";
    const auto dir = scratch("run");
    RunOverrides o;
    o.out_dir = dir;
    const auto report = run_scenario(s, o);
    CHECK(report.passed);
    REQUIRE(report.written.size() == 1);
    CHECK(read(dir / "u.csv").rfind("dof,x,y,z,u\n", 0) == 0);
    const auto summary = nlohmann::json::parse(report.summary_json);
    CHECK(summary["metrics"]["n_dofs"] == 33);
    CHECK(summary["assertions"][0]["pass"] == true);

    // A missing metric fails its assertion.
    s.exact.clear();
    CHECK_FALSE(run_scenario(s, o).passed);
    // Kind override reports without asserting.
    o.kind = "validate";
    const auto v = nlohmann::json::parse(run_scenario(s, o).summary_json);
    CHECK(v["metrics"]["class_count"] == 1);
    CHECK(v["passed"] == true);
}

TEST_CASE("bundled scenarios are deterministic") {
    for (const char* name : {"crossing_segments_poisson.json", "mixed_dim_poincare.json", "crossing_discs_parabolic.json"}) {
        const Scenario s = load_scenario(fs::path(LOWDIM_SCENARIO_DIR) / name);
        REQUIRE(s.csv_output);
        RunOverrides a, b;
        a.out_dir = scratch(std::string("det_a_") + name);
        b.out_dir = scratch(std::string("det_b_") + name);
        const auto ra = run_scenario(s, a);
        const auto rb = run_scenario(s, b);
        CHECK(ra.passed);
        CHECK(rb.passed);
        const std::string ca = read(*a.out_dir / *s.csv_output);
        CHECK_FALSE(ca.empty());
        CHECK(ca == read(*b.out_dir / *s.csv_output));
    }
}

TEST_CASE("spectrum scenario") {
    const Scenario s = parse_scenario(R"({"name": "table", "kind": "spectrum", "spectrum": {"n_max": 2, "k_max": 3},
                                          "assertions": [{"metric": "rows", "op": "==", "value": 9}]})");
    CHECK(run_scenario(s).passed);
}

}
