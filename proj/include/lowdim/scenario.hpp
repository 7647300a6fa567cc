#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lowdim/expression.hpp"
#include "lowdim/geometry.hpp"

namespace lowdim {

struct ComponentSpec {
    enum class Type { Segment, Disc };
    Type type = Type::Segment;
    Vec3 p0, p1;                     // segment
    Vec3 center;                     // disc
    double radius = 1.0;
    std::optional<Vec3> normal;      // disc, frame completed automatically
    std::optional<std::array<Vec3, 2>> frame;  // disc, explicit e1, e2
};

struct BSpec {
    enum class Kind { Identity, Constant, Expressions };
    Kind kind = Kind::Identity;
    std::array<std::array<double, 3>, 3> constant{};
    std::array<std::array<Expression, 3>, 3> entries{};  // ambient x, y, z
    double floor = 1.0;
};

struct U0Spec {
    enum class Kind { Zero, Random, Expressions };
    Kind kind = Kind::Zero;
    std::uint64_t seed = 1;
    bool zero_mean = true;
    std::vector<Expression> expressions;  // per component, local variables
};

struct TimeSpec {
    double dt = 0.01;
    double T = 1.0;
    double theta = 1.0;
};

struct Assertion {
    std::string metric;
    std::string op;  // <=, <, >=, >, ==
    double value = 0.0;
};

struct Scenario {
    std::string name;
    std::string kind;  // validate | stationary | parabolic | poincare | spectrum
    std::vector<ComponentSpec> components;
    BSpec B;
    std::vector<Expression> f;  // per component; empty means f = 0
    std::optional<U0Spec> u0;
    std::optional<TimeSpec> time;
    std::optional<double> h;
    std::optional<double> tol;
    std::vector<Expression> exact;  // per component
    std::vector<std::pair<std::string, std::vector<Expression>>> references;
    std::optional<std::string> target;  // "stationary"
    std::optional<std::pair<int, int>> spectrum;  // n_max, k_max
    std::vector<Assertion> assertions;
    std::optional<std::string> csv_output;
    std::optional<std::string> vtk_output;
};

/// Parses scenario JSON. Throws ScenarioError (schema) or ParseError (expressions).
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON: fixed key order, two-space indent, trailing newline.
std::string serialize_scenario(const Scenario& s);

std::vector<ComponentShape> build_components(const std::vector<ComponentSpec>& specs);

struct RunOverrides {
    std::optional<double> h, dt, T, theta, tol;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::string> kind;  // run as another problem kind
};

struct RunReport {
    std::string summary_json;  // pretty-printed, trailing newline
    bool passed = true;
    std::vector<std::filesystem::path> written;
};

/// Runs the scenario pipeline, writes the requested outputs, and evaluates its
/// assertions. Library errors propagate.
RunReport run_scenario(const Scenario& s, const RunOverrides& overrides = {});

/// Mesh-only run: quality report and an optional VTK of the mesh.
RunReport run_mesh(const Scenario& s, const RunOverrides& overrides = {});

}  // namespace lowdim
