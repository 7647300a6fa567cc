#include "lowdim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lowdim/error.hpp"
#include "lowdim/io.hpp"
#include "lowdim/linalg.hpp"
#include "lowdim/solvers.hpp"
#include "lowdim/spectral_oracle.hpp"

namespace lowdim {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorKind::ScenarioError, "cli", message); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            fail("unknown key '" + key + "' in " + where);
        }
    }
}

const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) fail("missing '" + std::string(key) + "' in " + where);
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where + " must be a number");
    return j.get<double>();
}

Vec3 vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) fail(where + " must be an array of three numbers");
    return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Expression expression(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where + " must be an expression string");
    try {
        return Expression::parse(j.get<std::string>());
    } catch (const ParseError& e) {
        std::string message = e.what();
        const std::string prefix = "ParseError [cli]: ";
        if (message.starts_with(prefix)) message.erase(0, prefix.size());
        throw ParseError(e.offset(), e.expected(), where + ": " + message);
    }
}

std::vector<Expression> expression_list(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where + " must be an array of expressions");
    std::vector<Expression> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(expression(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json expression_list_json(const std::vector<Expression>& list) {
    json out = json::array();
    for (const auto& e : list) out.push_back(e.to_string());
    return out;
}

ComponentSpec parse_component(const json& j, const std::string& where) {
    ComponentSpec c;
    const std::string type = require(j, "type", where).is_string() ? j.at("type").get<std::string>() : "";
    if (type == "segment") {
        check_keys(j, where, {"type", "p0", "p1"});
        c.type = ComponentSpec::Type::Segment;
        c.p0 = vec3(require(j, "p0", where), where + ".p0");
        c.p1 = vec3(require(j, "p1", where), where + ".p1");
    } else if (type == "disc") {
        check_keys(j, where, {"type", "center", "radius", "normal", "e1", "e2"});
        c.type = ComponentSpec::Type::Disc;
        c.center = vec3(require(j, "center", where), where + ".center");
        c.radius = number(require(j, "radius", where), where + ".radius");
        if (j.contains("normal")) {
            if (j.contains("e1") || j.contains("e2")) fail(where + " gives both a normal and a frame");
            c.normal = vec3(j.at("normal"), where + ".normal");
        } else {
            c.frame = std::array<Vec3, 2>{vec3(require(j, "e1", where), where + ".e1"),
                                          vec3(require(j, "e2", where), where + ".e2")};
        }
    } else {
        fail(where + ".type must be \"segment\" or \"disc\"");
    }
    return c;
}

json component_json(const ComponentSpec& c) {
    json j;
    if (c.type == ComponentSpec::Type::Segment) {
        j["type"] = "segment";
        j["p0"] = vec3_json(c.p0);
        j["p1"] = vec3_json(c.p1);
        return j;
    }
    j["type"] = "disc";
    j["center"] = vec3_json(c.center);
    j["radius"] = c.radius;
    if (c.normal) {
        j["normal"] = vec3_json(*c.normal);
    } else if (c.frame) {
        j["e1"] = vec3_json((*c.frame)[0]);
        j["e2"] = vec3_json((*c.frame)[1]);
    }
    return j;
}

// Tiny wrapper keeping metrics in insertion order.
struct Metrics {
    json values = json::object();
    template <class T>
    void set(const std::string& key, T v) {
        values[key] = v;
    }
};

CoefficientMatrixB make_b(const BSpec& spec) {
    switch (spec.kind) {
        case BSpec::Kind::Identity: return CoefficientMatrixB::identity();
        case BSpec::Kind::Constant: {
            Mat3 m;
            for (int i = 0; i < 3; ++i) {
                for (int k = 0; k < 3; ++k) m[i][k] = spec.constant[i][k];
            }
            return CoefficientMatrixB::constant(m, spec.floor);
        }
        case BSpec::Kind::Expressions: {
            const auto entries = spec.entries;
            return {[entries](const Vec3& p) {
                        const Variables v = ambient_variables(p, 0.0);
                        Mat3 m;
                        for (int i = 0; i < 3; ++i) {
                            for (int k = 0; k < 3; ++k) m[i][k] = entries[i][k].evaluate(v);
                        }
                        return m;
                    },
                    spec.floor};
        }
    }
    return CoefficientMatrixB::identity();
}

void check_per_component(const std::vector<Expression>& list, std::size_t count, const std::string& what) {
    if (list.size() != count) {
        fail(what + " needs one expression per component (" + std::to_string(count) + "), got " +
             std::to_string(list.size()));
    }
}

SourceFunction make_source(const std::vector<Expression>& f) {
    if (f.empty()) return {};
    return [f](const PointContext& at, double t) { return f[at.component].evaluate(local_variables(at, t)); };
}

NodalFunction make_nodal(const std::vector<Expression>& g) {
    return [g](const PointContext& at) { return g[at.component].evaluate(local_variables(at, 0.0)); };
}

bool non_increasing(const std::vector<double>& v, double slack) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1] + slack) return false;
    }
    return true;
}

std::string nodal_csv(const Mesh& mesh, const DiscreteField& u) {
    std::string out = "dof,x,y,z,u\n";
    for (int i = 0; i < mesh.n_dofs; ++i) {
        const Vec3& p = mesh.dof_points[i];
        out += std::to_string(i) + ',' + format_double(p.x) + ',' + format_double(p.y) + ',' + format_double(p.z) +
               ',' + format_double(u[i]) + '\n';
    }
    return out;
}

struct Context {
    const Scenario& s;
    const RunOverrides& o;
    RunReport& report;
    Metrics& metrics;
    json& warnings;

    std::filesystem::path resolve(const std::string& p) const {
        return o.out_dir ? *o.out_dir / p : std::filesystem::path(p);
    }
    void write(const std::string& rel, const std::string& text) const {
        const auto path = resolve(rel);
        write_text(path, text);
        report.written.push_back(path);
    }
    double h() const {
        if (o.h) return *o.h;
        if (!s.h) fail("scenario has no mesh.h and no --h was given");
        return *s.h;
    }
    double tol() const { return o.tol.value_or(s.tol.value_or(1e-10)); }
};

Discretization make_discretization(const Context& c) {
    const auto structure = validate_structure(build_components(c.s.components));
    return discretize(structure, c.h(), make_b(c.s.B));
}

void run_validate(const Context& c) {
    const auto structure = validate_structure(build_components(c.s.components));
    const auto classes = coupling_classes(structure);
    int coupled = 0;
    for (const auto& j : structure.junctions) coupled += j.coupled ? 1 : 0;
    c.metrics.set("components", static_cast<int>(structure.components.size()));
    c.metrics.set("junctions", static_cast<int>(structure.junctions.size()));
    c.metrics.set("coupled_junctions", coupled);
    c.metrics.set("class_count", classes.count());
    c.metrics.set("total_measure", structure.total_measure);
}

void run_stationary(const Context& c) {
    const Discretization d = make_discretization(c);
    check_per_component(c.s.f, d.mesh.parts.size(), "f");
    StationaryOptions opts;
    opts.tol = c.tol();
    opts.seed = c.o.seed;
    const auto result = solve_stationary(d, make_source(c.s.f), opts);
    const auto quality = mesh_quality(d.mesh);

    c.metrics.set("n_dofs", d.n_dofs());
    c.metrics.set("class_count", d.class_count());
    c.metrics.set("h_max", quality.h_max);
    if (quality.min_angle_deg) c.metrics.set("min_angle_deg", *quality.min_angle_deg);
    c.metrics.set("cg_iterations", result.report.iterations);
    c.metrics.set("cg_residual", result.report.final_residual);
    double max_mean = 0.0;
    for (double m : d.projector.means(result.u)) max_mean = std::max(max_mean, std::abs(m));
    c.metrics.set("max_abs_class_mean", max_mean);
    std::vector<int> refs(d.n_dofs(), 0);
    for (const auto& part : d.mesh.parts) {
        for (int dof : part.dofs) ++refs[dof];
    }
    c.metrics.set("shared_junction_dofs", static_cast<int>(std::count_if(refs.begin(), refs.end(), [](int r) { return r > 1; })));
    const auto flux = boundary_flux_residual(d, result.u);
    c.metrics.set("boundary_flux_max", flux.empty() ? 0.0 : *std::max_element(flux.begin(), flux.end()));
    if (!c.s.exact.empty()) {
        check_per_component(c.s.exact, d.mesh.parts.size(), "exact");
        c.metrics.set("l2_error", l2_error(d.mesh, result.u, make_nodal(c.s.exact)));
    }
    for (const auto& [name, exprs] : c.s.references) {
        check_per_component(exprs, d.mesh.parts.size(), "references." + name);
        c.metrics.set("shifted_distance_" + name, shifted_l2_distance(d.mesh, result.u, make_nodal(exprs)));
    }
    if (c.s.csv_output) c.write(*c.s.csv_output, nodal_csv(d.mesh, result.u));
    if (c.s.vtk_output) c.write(*c.s.vtk_output, vtk_string(d.mesh, {{"u", result.u}}));
}

DiscreteField initial_state(const Context& c, const Discretization& d) {
    const U0Spec spec = c.s.u0.value_or(U0Spec{});
    switch (spec.kind) {
        case U0Spec::Kind::Zero: return DiscreteField(static_cast<std::size_t>(d.n_dofs()));
        case U0Spec::Kind::Random: {
            std::mt19937_64 rng(c.o.seed.value_or(spec.seed));
            std::uniform_real_distribution<double> uni(-1.0, 1.0);
            DiscreteField u(static_cast<std::size_t>(d.n_dofs()));
            for (double& v : u.values) v = uni(rng);
            return spec.zero_mean ? d.projector.remove_means(u) : u;
        }
        case U0Spec::Kind::Expressions:
            check_per_component(spec.expressions, d.mesh.parts.size(), "u0");
            return interpolate(d.mesh, make_nodal(spec.expressions));
    }
    return {};
}

void run_parabolic_kind(const Context& c) {
    const Discretization d = make_discretization(c);
    if (!c.s.f.empty()) check_per_component(c.s.f, d.mesh.parts.size(), "f");
    const TimeSpec ts = c.s.time.value_or(TimeSpec{});
    ParabolicOptions opts;
    opts.dt = c.o.dt.value_or(ts.dt);
    opts.T = c.o.T.value_or(ts.T);
    opts.theta = c.o.theta.value_or(ts.theta);
    opts.tol = c.tol();
    opts.time_independent_source =
        std::none_of(c.s.f.begin(), c.s.f.end(), [](const Expression& e) { return e.depends_on_time(); });
    const SourceFunction f = make_source(c.s.f);
    if (c.s.target) {
        if (*c.s.target != "stationary") fail("target must be \"stationary\"");
        if (!opts.time_independent_source) fail("a stationary target needs a time-independent source");
        if (f) {
            StationaryOptions so;
            so.tol = std::min(opts.tol, 1e-12);
            opts.target = solve_stationary(d, f, so).u;
        } else {
            opts.target = DiscreteField(static_cast<std::size_t>(d.n_dofs()));
        }
    }
    const DiscreteField u0 = initial_state(c, d);
    const Trajectory traj = run_parabolic(d, f, u0, opts);
    for (const auto& w : traj.warnings) c.warnings.push_back(w);

    const bool has_target = opts.target.has_value();
    const auto& dist = has_target ? traj.dist_l2 : traj.l2_norm;
    const auto& energy_seq = has_target ? traj.dist_energy : traj.energy;
    c.metrics.set("n_dofs", d.n_dofs());
    c.metrics.set("class_count", d.class_count());
    c.metrics.set("steps", static_cast<int>(traj.times.size()) - 1);
    c.metrics.set("dt", opts.dt);
    c.metrics.set("theta", opts.theta);
    c.metrics.set("monotone_decay", non_increasing(dist, 1e-12 * dist.front()));
    c.metrics.set("monotone_energy", non_increasing(energy_seq, 1e-12 * std::max(energy_seq.front(), 1e-300)));

    const auto pairs = smallest_eigenpairs(d.stiffness, d.mass, d.class_count() + 1);
    const double lambda2 = pairs.back().value;
    const double rate = fitted_decay_rate(traj.times, dist, 0.25 * opts.T, 1e-10 * dist.front());
    c.metrics.set("lambda2", lambda2);
    c.metrics.set("measured_rate", rate);
    c.metrics.set("rate_relative_error", std::abs(rate - lambda2) / lambda2);
    if (has_target) c.metrics.set("final_dist_h1_ratio", traj.dist_h1.back() / traj.dist_h1.front());
    double drift = 0.0;
    for (std::size_t i = 1; i < traj.class_means.size(); ++i) {
        for (std::size_t k = 0; k < traj.class_means[i].size(); ++k) {
            drift = std::max(drift, std::abs(traj.class_means[i][k] - traj.class_means[i - 1][k]));
        }
    }
    c.metrics.set("max_class_mean_drift", drift);
    if (c.s.csv_output) c.write(*c.s.csv_output, trajectory_csv(traj));
    if (c.s.vtk_output) c.write(*c.s.vtk_output, vtk_string(d.mesh, {{"u0", u0}, {"u", traj.final_state}}));
}

void run_poincare(const Context& c) {
    const Discretization d = make_discretization(c);
    const auto entries = poincare_constant(d.stiffness, d.mass, d.projector.dof_class(), d.class_count());
    const auto pairs = smallest_eigenpairs(d.stiffness, d.mass, d.class_count() + 1);
    const double threshold = 1e-8 * d.stiffness.trace() / d.mass.trace();
    int kernel = 0;
    for (const auto& p : pairs) kernel += p.value < threshold ? 1 : 0;

    c.metrics.set("n_dofs", d.n_dofs());
    c.metrics.set("class_count", d.class_count());
    c.metrics.set("kernel_dim", kernel);
    std::string csv = "class,constant,lambda2,residual,dofs\n";
    for (const auto& e : entries) {
        c.metrics.set("poincare_constant_" + std::to_string(e.class_index), e.constant);
        c.metrics.set("lambda2_" + std::to_string(e.class_index), e.lambda2);
        csv += std::to_string(e.class_index) + ',' + format_double(e.constant) + ',' + format_double(e.lambda2) + ',' +
               format_double(e.residual) + ',' + std::to_string(e.dofs) + '\n';
    }

    // Random sweep of the discrete inequality ||u - P_k u||^2 <= C_k E_k(u).
    std::mt19937_64 rng(c.o.seed.value_or(0x5eed));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        DiscreteField u(static_cast<std::size_t>(d.n_dofs()));
        for (double& v : u.values) v = uni(rng);
        const DiscreteField w = d.projector.remove_means(u);
        const Vector mw = d.mass.multiply(w.values);
        const Vector kw = d.stiffness.multiply(w.values);
        std::vector<double> l2(d.class_count(), 0.0), grad(d.class_count(), 0.0);
        for (int i = 0; i < d.n_dofs(); ++i) {
            const int k = d.projector.dof_class()[i];
            l2[k] += w[i] * mw[i];
            grad[k] += w[i] * kw[i];
        }
        for (int k = 0; k < d.class_count(); ++k) worst = std::max(worst, l2[k] / (entries[k].constant * grad[k]));
    }
    c.metrics.set("poincare_sweep_max_ratio", worst);
    if (c.s.csv_output) c.write(*c.s.csv_output, csv);
}

void run_spectrum(const Context& c) {
    const auto [n_max, k_max] = c.s.spectrum.value_or(std::pair{5, 5});
    const std::string csv = spectrum_csv(n_max, k_max);
    c.metrics.set("rows", (n_max + 1) * k_max);
    c.metrics.set("root_1_1", bessel_jprime_root(1, 1));
    c.metrics.set("j1_at_root_1_1", bessel_j(1, bessel_jprime_root(1, 1)));
    if (c.s.csv_output) c.write(*c.s.csv_output, csv);
}

bool compare(double actual, const std::string& op, double value) {
    if (op == "<=") return actual <= value;
    if (op == "<") return actual < value;
    if (op == ">=") return actual >= value;
    if (op == ">") return actual > value;
    if (op == "==") return actual == value;
    return false;
}

}  // namespace

std::vector<ComponentShape> build_components(const std::vector<ComponentSpec>& specs) {
    std::vector<ComponentShape> out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& c = specs[i];
        const int id = static_cast<int>(i);
        if (c.type == ComponentSpec::Type::Segment) {
            out.push_back(make_segment(id, c.p0, c.p1));
        } else if (c.normal) {
            out.push_back(make_disc(id, c.center, c.radius, *c.normal));
        } else {
            out.push_back(make_disc(id, c.center, c.radius, (*c.frame)[0], (*c.frame)[1]));
        }
    }
    return out;
}

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    check_keys(j, "scenario", {"name", "kind", "structure", "B", "f", "u0", "time", "mesh", "solver", "exact",
                               "references", "target", "spectrum", "assertions", "outputs"});
    Scenario s;
    const json& name = require(j, "name", "scenario");
    const json& kind = require(j, "kind", "scenario");
    if (!name.is_string() || !kind.is_string()) fail("name and kind must be strings");
    s.name = name.get<std::string>();
    s.kind = kind.get<std::string>();
    static const char* kinds[] = {"validate", "stationary", "parabolic", "poincare", "spectrum"};
    if (std::none_of(std::begin(kinds), std::end(kinds), [&](const char* k) { return s.kind == k; })) {
        fail("unknown kind '" + s.kind + "'");
    }

    if (j.contains("structure")) {
        const json& st = j.at("structure");
        check_keys(st, "structure", {"components"});
        const json& comps = require(st, "components", "structure");
        if (!comps.is_array()) fail("structure.components must be an array");
        for (std::size_t i = 0; i < comps.size(); ++i) {
            s.components.push_back(parse_component(comps[i], "structure.components[" + std::to_string(i) + "]"));
        }
    } else if (s.kind != "spectrum") {
        fail("missing 'structure' in scenario");
    }

    if (j.contains("B")) {
        const json& b = j.at("B");
        if (b.is_string()) {
            if (b.get<std::string>() != "identity") fail("B must be \"identity\" or an object");
            s.B.kind = BSpec::Kind::Identity;
        } else {
            check_keys(b, "B", {"constant", "expressions", "floor"});
            s.B.floor = number(require(b, "floor", "B"), "B.floor");
            const bool constant = b.contains("constant");
            const json& rows = constant ? b.at("constant") : require(b, "expressions", "B");
            if (!rows.is_array() || rows.size() != 3) fail("B matrix must have three rows");
            for (int i = 0; i < 3; ++i) {
                if (!rows[i].is_array() || rows[i].size() != 3) fail("B matrix rows must have three entries");
                for (int k = 0; k < 3; ++k) {
                    const std::string where = "B[" + std::to_string(i) + "][" + std::to_string(k) + "]";
                    if (constant) {
                        s.B.constant[i][k] = number(rows[i][k], where);
                    } else {
                        s.B.entries[i][k] = expression(rows[i][k], where);
                    }
                }
            }
            s.B.kind = constant ? BSpec::Kind::Constant : BSpec::Kind::Expressions;
        }
    }

    if (j.contains("f")) s.f = expression_list(j.at("f"), "f");

    if (j.contains("u0")) {
        const json& u = j.at("u0");
        U0Spec spec;
        if (u.is_string()) {
            if (u.get<std::string>() != "zero") fail("u0 must be \"zero\" or an object");
        } else {
            check_keys(u, "u0", {"random", "expressions"});
            if (u.contains("random")) {
                const json& r = u.at("random");
                check_keys(r, "u0.random", {"seed", "zero_mean"});
                const json& seed = require(r, "seed", "u0.random");
                if (!seed.is_number_unsigned()) fail("u0.random.seed must be a nonnegative integer");
                spec.kind = U0Spec::Kind::Random;
                spec.seed = seed.get<std::uint64_t>();
                const json& zm = require(r, "zero_mean", "u0.random");
                if (!zm.is_boolean()) fail("u0.random.zero_mean must be a boolean");
                spec.zero_mean = zm.get<bool>();
            } else {
                spec.kind = U0Spec::Kind::Expressions;
                spec.expressions = expression_list(require(u, "expressions", "u0"), "u0.expressions");
            }
        }
        s.u0 = spec;
    }

    if (j.contains("time")) {
        const json& t = j.at("time");
        check_keys(t, "time", {"dt", "T", "theta"});
        TimeSpec ts;
        ts.dt = number(require(t, "dt", "time"), "time.dt");
        ts.T = number(require(t, "T", "time"), "time.T");
        ts.theta = number(require(t, "theta", "time"), "time.theta");
        s.time = ts;
    } else if (s.kind == "parabolic") {
        fail("parabolic scenarios need 'time'");
    }

    if (j.contains("mesh")) {
        check_keys(j.at("mesh"), "mesh", {"h"});
        s.h = number(require(j.at("mesh"), "h", "mesh"), "mesh.h");
    }
    if (j.contains("solver")) {
        check_keys(j.at("solver"), "solver", {"tol"});
        s.tol = number(require(j.at("solver"), "tol", "solver"), "solver.tol");
    }
    if (j.contains("exact")) s.exact = expression_list(j.at("exact"), "exact");
    if (j.contains("references")) {
        const json& refs = j.at("references");
        if (!refs.is_object()) fail("references must be an object");
        for (const auto& [key, value] : refs.items()) {
            s.references.emplace_back(key, expression_list(value, "references." + key));
        }
    }
    if (j.contains("target")) {
        if (!j.at("target").is_string()) fail("target must be a string");
        s.target = j.at("target").get<std::string>();
    }
    if (j.contains("spectrum")) {
        const json& sp = j.at("spectrum");
        check_keys(sp, "spectrum", {"n_max", "k_max"});
        const json& n = require(sp, "n_max", "spectrum");
        const json& k = require(sp, "k_max", "spectrum");
        if (!n.is_number_integer() || !k.is_number_integer()) fail("spectrum bounds must be integers");
        s.spectrum = std::pair{n.get<int>(), k.get<int>()};
    }
    if (j.contains("assertions")) {
        const json& as = j.at("assertions");
        if (!as.is_array()) fail("assertions must be an array");
        for (std::size_t i = 0; i < as.size(); ++i) {
            const std::string where = "assertions[" + std::to_string(i) + "]";
            check_keys(as[i], where, {"metric", "op", "value"});
            Assertion a;
            const json& metric = require(as[i], "metric", where);
            const json& op = require(as[i], "op", where);
            if (!metric.is_string() || !op.is_string()) fail(where + " metric and op must be strings");
            a.metric = metric.get<std::string>();
            a.op = op.get<std::string>();
            if (a.op != "<=" && a.op != "<" && a.op != ">=" && a.op != ">" && a.op != "==") {
                fail(where + " has unknown op '" + a.op + "'");
            }
            a.value = number(require(as[i], "value", where), where + ".value");
            s.assertions.push_back(a);
        }
    }
    if (j.contains("outputs")) {
        const json& out = j.at("outputs");
        check_keys(out, "outputs", {"csv", "vtk"});
        for (const char* key : {"csv", "vtk"}) {
            if (!out.contains(key)) continue;
            if (!out.at(key).is_string()) fail(std::string("outputs.") + key + " must be a path string");
            (std::string(key) == "csv" ? s.csv_output : s.vtk_output) = out.at(key).get<std::string>();
        }
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cli", "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["kind"] = s.kind;
    if (!s.components.empty() || s.kind != "spectrum") {
        json comps = json::array();
        for (const auto& c : s.components) comps.push_back(component_json(c));
        j["structure"]["components"] = comps;
    }
    if (s.B.kind == BSpec::Kind::Identity) {
        j["B"] = "identity";
    } else {
        json rows = json::array();
        for (int i = 0; i < 3; ++i) {
            json row = json::array();
            for (int k = 0; k < 3; ++k) {
                if (s.B.kind == BSpec::Kind::Constant) {
                    row.push_back(s.B.constant[i][k]);
                } else {
                    row.push_back(s.B.entries[i][k].to_string());
                }
            }
            rows.push_back(row);
        }
        j["B"][s.B.kind == BSpec::Kind::Constant ? "constant" : "expressions"] = rows;
        j["B"]["floor"] = s.B.floor;
    }
    if (!s.f.empty()) j["f"] = expression_list_json(s.f);
    if (s.u0) {
        switch (s.u0->kind) {
            case U0Spec::Kind::Zero: j["u0"] = "zero"; break;
            case U0Spec::Kind::Random:
                j["u0"]["random"]["seed"] = s.u0->seed;
                j["u0"]["random"]["zero_mean"] = s.u0->zero_mean;
                break;
            case U0Spec::Kind::Expressions: j["u0"]["expressions"] = expression_list_json(s.u0->expressions); break;
        }
    }
    if (s.time) {
        j["time"]["dt"] = s.time->dt;
        j["time"]["T"] = s.time->T;
        j["time"]["theta"] = s.time->theta;
    }
    if (s.h) j["mesh"]["h"] = *s.h;
    if (s.tol) j["solver"]["tol"] = *s.tol;
    if (!s.exact.empty()) j["exact"] = expression_list_json(s.exact);
    if (!s.references.empty()) {
        json refs = json::object();
        for (const auto& [name, list] : s.references) refs[name] = expression_list_json(list);
        j["references"] = refs;
    }
    if (s.target) j["target"] = *s.target;
    if (s.spectrum) {
        j["spectrum"]["n_max"] = s.spectrum->first;
        j["spectrum"]["k_max"] = s.spectrum->second;
    }
    json as = json::array();
    for (const auto& a : s.assertions) as.push_back(json{{"metric", a.metric}, {"op", a.op}, {"value", a.value}});
    j["assertions"] = as;
    if (s.csv_output || s.vtk_output) {
        json out = json::object();
        if (s.csv_output) out["csv"] = *s.csv_output;
        if (s.vtk_output) out["vtk"] = *s.vtk_output;
        j["outputs"] = out;
    }
    return j.dump(2) + "\n";
}

RunReport run_scenario(const Scenario& s, const RunOverrides& overrides) {
    RunReport report;
    Metrics metrics;
    json warnings = json::array();
    const Context ctx{s, overrides, report, metrics, warnings};
    const std::string kind = overrides.kind.value_or(s.kind);
    const auto start = std::chrono::steady_clock::now();
    if (kind == "validate") {
        run_validate(ctx);
    } else if (kind == "stationary") {
        run_stationary(ctx);
    } else if (kind == "parabolic") {
        run_parabolic_kind(ctx);
    } else if (kind == "poincare") {
        run_poincare(ctx);
    } else if (kind == "spectrum") {
        run_spectrum(ctx);
    } else {
        fail("unknown kind '" + kind + "'");
    }
    metrics.set("runtime_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

    json summary;
    summary["scenario"] = s.name;
    summary["kind"] = kind;
    summary["metrics"] = metrics.values;
    json results = json::array();
    // Assertions belong to the declared kind; a kind override only reports metrics.
    const std::vector<Assertion> none;
    for (const auto& a : kind == s.kind ? s.assertions : none) {
        json r{{"metric", a.metric}, {"op", a.op}, {"value", a.value}};
        bool pass = false;
        if (metrics.values.contains(a.metric)) {
            const json& v = metrics.values.at(a.metric);
            const double actual = v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : v.is_number() ? v.get<double>() : NAN;
            r["actual"] = v;
            pass = compare(actual, a.op, a.value);
        } else {
            r["actual"] = nullptr;
        }
        r["pass"] = pass;
        report.passed = report.passed && pass;
        results.push_back(r);
    }
    summary["assertions"] = results;
    summary["passed"] = report.passed;
    summary["warnings"] = warnings;
    json written = json::array();
    for (const auto& p : report.written) written.push_back(p.string());
    summary["outputs"] = written;
    report.summary_json = summary.dump(2) + "\n";
    return report;
}

RunReport run_mesh(const Scenario& s, const RunOverrides& overrides) {
    RunReport report;
    Metrics metrics;
    json warnings = json::array();
    const Context ctx{s, overrides, report, metrics, warnings};
    const auto structure = validate_structure(build_components(s.components));
    const Mesh mesh = build_mesh(structure, ctx.h());
    const auto q = mesh_quality(mesh);
    metrics.set("n_dofs", q.n_dofs);
    metrics.set("h_max", q.h_max);
    metrics.set("max_aspect", q.max_aspect);
    if (q.min_angle_deg) metrics.set("min_angle_deg", *q.min_angle_deg);
    if (overrides.out_dir) ctx.write("mesh.vtk", vtk_string(mesh, {}));
    json summary;
    summary["scenario"] = s.name;
    summary["kind"] = "mesh";
    summary["metrics"] = metrics.values;
    json written = json::array();
    for (const auto& p : report.written) written.push_back(p.string());
    summary["outputs"] = written;
    report.summary_json = summary.dump(2) + "\n";
    return report;
}

}  // namespace lowdim
