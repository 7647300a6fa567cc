// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lowdim/assembly.hpp"
#include "lowdim/error.hpp"
#include "lowdim/expression.hpp"
#include "lowdim/geometry.hpp"
#include "lowdim/linalg.hpp"
#include "lowdim/solvers.hpp"
#include "lowdim/spectral_oracle.hpp"

using namespace lowdim;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.141592653589793;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!ok) detail += " [failed: " + what + "]";
    }
    void note(const char* fmt, double v) {
        char buf[96];
        std::snprintf(buf, sizeof buf, fmt, v);
        detail += buf;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ValidatedStructure crossing_segments() {
    return validate_structure({make_segment(0, {-1, 0, 0}, {1, 0, 0}), make_segment(1, {0, -1, 0}, {0, 1, 0})});
}

ValidatedStructure crossing_discs() {
    return validate_structure({make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1}), make_disc(1, {0, 0, 0}, 1.0, {0, 1, 0})});
}

double lap_w(const PointContext& at) {
    if (at.component != 0) return 0.0;
    const double r2 = at.local[0] * at.local[0] + at.local[1] * at.local[1];
    return -4 * kPi * std::sin(kPi * r2) - 4 * kPi * kPi * r2 * std::cos(kPi * r2);
}

DiscreteField random_field(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    DiscreteField u(static_cast<std::size_t>(n));
    for (double& v : u.values) v = uni(rng);
    return u;
}

int kernel_dimension(const Discretization& d, int probe) {
    const auto pairs = smallest_eigenpairs(d.stiffness, d.mass, probe);
    const double threshold = 1e-8 * d.stiffness.trace() / d.mass.trace();
    int count = 0;
    for (const auto& p : pairs) count += p.value < threshold ? 1 : 0;
    return count;
}

// Worst ratio ||u - P u||_M^2 / (C_k E_k(u)) over random fields, per class.
double poincare_sweep(const Discretization& d, const std::vector<PoincareEntry>& c, int trials) {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto w = d.projector.remove_means(random_field(d.n_dofs(), 1000 + t));
        const auto mw = d.mass.multiply(w.values), kw = d.stiffness.multiply(w.values);
        std::vector<double> l2(d.class_count()), grad(d.class_count());
        for (int i = 0; i < d.n_dofs(); ++i) {
            l2[d.projector.dof_class()[i]] += w[i] * mw[i];
            grad[d.projector.dof_class()[i]] += w[i] * kw[i];
        }
        for (int k = 0; k < d.class_count(); ++k) worst = std::max(worst, l2[k] / (c[k].constant * grad[k]));
    }
    return worst;
}

Outcome criterion1() {
    Outcome o;
    const SourceFunction f = [](const PointContext& at, double) { return at.component == 0 ? at.local[0] : 0.0; };
    const NodalFunction exact = [](const PointContext& at) {
        const double y = at.local[0];
        return at.component == 0 ? -y * y * y / 6 + y / 2 : 0.0;
    };
    std::vector<double> errs;
    double runtime = 0.0;
    for (int n : {64, 128, 256}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto d = discretize(crossing_segments(), 2.0 / n);
        const auto u = solve_stationary(d, f, {.tol = 1e-12}).u;
        runtime = seconds_since(t0);
        errs.push_back(l2_error(d.mesh, u, exact));
    }
    o.note("l2_error(h=2/256)=%.3e", errs.back());
    o.note(" factors=%.3f", errs[0] / errs[1]);
    o.note("/%.3f", errs[1] / errs[2]);
    o.note(" runtime=%.4fs", runtime);
    o.require(errs.back() <= 5e-5, "l2_error <= 5e-5");
    o.require(errs[0] / errs[1] >= 3.6 && errs[1] / errs[2] >= 3.6, "convergence factor >= 3.6");
    o.require(runtime < 1.0, "runtime < 1 s");

    // Printed formula: Neumann ends, continuity at the junction, zero total mean.
    const auto u1 = Expression::parse("-21/1080 - x^4/12 + x^3/6 + x^2/6 - x/2");
    const double u2 = -21.0 / 1080;
    const auto at = [&](double x) {
        Variables v;
        v.x = x;
        return u1.evaluate(v);
    };
    const double d = 1e-5;
    const double slope_l = (at(-1 + d) - at(-1 - d)) / (2 * d), slope_r = (at(1 + d) - at(1 - d)) / (2 * d);
    const double g[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}, gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
    double integral = 0.0;
    for (int i = 0; i < 3; ++i) integral += gw[i] * at(g[i]);  // exact for quartics
    o.note(" printed: u1'(+-1)=%.1e", std::max(std::abs(slope_l), std::abs(slope_r)));
    o.note(" int u1=%.6f", integral);
    o.note(" total mean=%.1e", integral + 2 * u2);
    o.require(std::abs(slope_l) < 1e-8 && std::abs(slope_r) < 1e-8, "printed u1'(+-1) = 0");
    o.require(std::abs(at(0.0) - u2) < 1e-15, "printed u1(0) = u2");
    o.require(std::abs(integral - 7.0 / 180) < 1e-14, "printed integral 7/180");
    o.require(std::abs(integral + 2 * u2) < 1e-14, "printed total mean 0");
    return o;
}

Outcome criterion2() {
    Outcome o;
    const SourceFunction f = [](const PointContext& at, double) { return lap_w(at); };
    const NodalFunction w = [](const PointContext& at) {
        const double r2 = at.local[0] * at.local[0] + at.local[1] * at.local[1];
        return at.component == 0 ? std::cos(kPi * r2) : 0.0;
    };
    const NodalFunction minus_w = [&](const PointContext& at) { return -w(at); };
    std::vector<double> dist;
    double runtime = 0.0, mean = 0.0, dist_minus = 0.0;
    bool shared = true;
    for (double h : {0.06, 0.03}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto d = discretize(crossing_discs(), h);
        const auto u = solve_stationary(d, f).u;
        runtime = seconds_since(t0);
        dist.push_back(shifted_l2_distance(d.mesh, u, w));
        dist_minus = shifted_l2_distance(d.mesh, u, minus_w);
        mean = std::abs(d.projector.mean(u, 0));
        // Every DOF on the chord is referenced by both discs.
        std::vector<int> refs(d.n_dofs());
        for (const auto& part : d.mesh.parts) {
            for (int dof : part.dofs) ++refs[dof];
        }
        for (int i = 0; i < d.n_dofs(); ++i) {
            const Vec3& p = d.mesh.dof_points[i];
            const bool on_chord = std::abs(p.y) < 1e-12 && std::abs(p.z) < 1e-12;
            shared = shared && (on_chord == (refs[i] == 2));
        }
    }
    const double change = std::abs(dist[1] - dist[0]) / dist[0];
    o.note("dist(w,0)=%.5f", dist[1]);
    o.note(" change=%.2f%%", 100 * change);
    o.note(" dist(-w,0)=%.5f", dist_minus);
    o.note(" class_mean=%.1e", mean);
    o.note(" runtime(h=0.03)=%.2fs", runtime);
    o.require(shared, "chord DOFs shared");
    o.require(mean <= 1e-10, "zero class mean");
    o.require(dist[1] >= 0.05, "distance >= 0.05");
    o.require(change < 0.10, "distance stable under refinement");
    o.require(runtime < 30.0, "runtime < 30 s");
    return o;
}

Outcome criterion3() {
    Outcome o;
    const auto seg = discretize(validate_structure({make_segment(0, {-1, 0, 0}, {1, 0, 0})}), 2.0 / 256);
    const auto cs = poincare_constant(seg.stiffness, seg.mass, seg.projector.dof_class(), 1);
    const auto disc = discretize(validate_structure({make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1})}), 0.02);
    const auto cd = poincare_constant(disc.stiffness, disc.mass, disc.projector.dof_class(), 1);
    const double jp = bessel_jprime_root(1, 1);
    const double rel_s = std::abs(cs[0].constant / (4 / (kPi * kPi)) - 1);
    const double rel_d = std::abs(cd[0].constant * jp * jp - 1);
    const double sweep = std::max(poincare_sweep(seg, cs, 1000), poincare_sweep(disc, cd, 1000));
    o.note("C_interval=%.6f", cs[0].constant);
    o.note(" (%.3f%%)", 100 * rel_s);
    o.note(" C_disc=%.6f", cd[0].constant);
    o.note(" (%.3f%%)", 100 * rel_d);
    o.note(" j'11=%.9f", jp);
    o.note(" sweep max ratio=%.3e", sweep);
    o.require(rel_s < 0.01, "interval constant within 1%");
    o.require(rel_d < 0.01, "disc constant within 1%");
    o.require(std::abs(jp - 1.8411838) <= 1e-6, "j'11");
    o.require(sweep <= 1.0 + 1e-8, "random sweep");
    return o;
}

Outcome criterion4() {
    Outcome o;
    const auto with_segment = validate_structure(
        {make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1}), make_segment(1, {0.2, 0.1, -0.5}, {0.2, 0.1, 0.5})});
    // The disc in the plane x = 0.2 that contains the segment and shares a full chord with the first disc.
    const auto with_disc = validate_structure(
        {make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1}), make_disc(1, {0.2, 0, 0}, std::sqrt(0.96), {1, 0, 0})});
    const auto d1 = discretize(with_segment, 0.05);
    const auto d2 = discretize(with_disc, 0.05);
    const int k1 = kernel_dimension(d1, 4), k2 = kernel_dimension(d2, 4);
    o.note("kernel(disc+segment)=%.0f", k1);
    o.note(" classes=%.0f", d1.class_count());
    o.note(" kernel(disc+disc)=%.0f", k2);
    o.require(k1 == 2 && d1.class_count() == 2, "mixed kernel 2");
    o.require(k2 == 1 && d2.class_count() == 1, "crossing discs kernel 1");
    return o;
}

Outcome criterion5() {
    Outcome o;
    const auto d = discretize(crossing_discs(), 0.08);
    const auto u0 = d.projector.remove_means(random_field(d.n_dofs(), 5));
    for (double theta : {0.5, 1.0}) {
        ParabolicOptions opts{.dt = 0.005, .T = 1.0, .theta = theta};
        opts.target = DiscreteField(static_cast<std::size_t>(d.n_dofs()));
        const auto traj = run_parabolic(d, {}, u0, opts);
        bool mono_l2 = true, mono_e = true;
        for (std::size_t i = 1; i < traj.times.size(); ++i) {
            mono_l2 = mono_l2 && traj.dist_l2[i] <= traj.dist_l2[i - 1] + 1e-12 * traj.dist_l2[0];
            mono_e = mono_e && traj.dist_energy[i] <= traj.dist_energy[i - 1] + 1e-12 * traj.dist_energy[0];
        }
        o.note(theta == 0.5 ? "theta=0.5: steps=%.0f" : " theta=1: steps=%.0f", traj.times.size() - 1.0);
        o.note(" final/initial=%.2e", traj.dist_l2.back() / traj.dist_l2.front());
        o.require(traj.times.size() == 201, "200 steps");
        o.require(mono_l2, "M-norm non-increasing");
        o.require(mono_e, "energy non-increasing");
    }
    return o;
}

Outcome criterion6() {
    Outcome o;
    const auto d = discretize(crossing_discs(), 0.1);
    const SourceFunction f = [](const PointContext& at, double) { return lap_w(at); };
    const double lambda2 = smallest_eigenpairs(d.stiffness, d.mass, 2)[1].value;
    const double T = 20.0 / lambda2;
    ParabolicOptions opts{.dt = T / 1000, .T = T, .theta = 1.0, .tol = 1e-12, .time_independent_source = true};
    opts.target = solve_stationary(d, f, {.tol = 1e-13}).u;
    const auto traj = run_parabolic(d, f, DiscreteField(static_cast<std::size_t>(d.n_dofs())), opts);
    const double ratio = traj.dist_h1.back() / traj.dist_h1.front();
    const double rate = fitted_decay_rate(traj.times, traj.dist_l2, 0.25 * T, 1e-8 * traj.dist_l2.front());
    const double rel = std::abs(rate - lambda2) / lambda2;
    o.note("lambda2=%.5f", lambda2);
    o.note(" T=%.3f", T);
    o.note(" H1 ratio=%.2e", ratio);
    o.note(" fitted rate=%.5f", rate);
    o.note(" (%.2f%%)", 100 * rel);
    o.require(ratio <= 1e-6, "H1 distance ratio <= 1e-6");
    o.require(rel <= 0.05, "rate within 5%");
    return o;
}

Outcome criterion7() {
    Outcome o;
    const auto d = discretize(crossing_discs(), 0.1);
    const auto u0 = d.projector.remove_means(random_field(d.n_dofs(), 8));
    const double dev = propagator_composition_check(d.mass, d.stiffness, 0.01, 1.0, 128, 128, u0, 1e-10);
    const double scale = weighted_norm(d.mass, u0);
    o.note("deviation=%.3e", dev);
    o.note(" bound=%.3e", 1e-8 * scale);
    o.require(dev <= 1e-8 * scale, "composition deviation");
    return o;
}

Outcome criterion8() {
    Outcome o;
    double worst = 0.0;
    // Crossing discs with the mean-free Laplacian of w, and a two-class structure.
    {
        const auto d = discretize(crossing_discs(), 0.1);
        const SourceFunction f = [](const PointContext& at, double) { return lap_w(at); };
        const auto u0 = random_field(d.n_dofs(), 3);
        const auto traj = run_parabolic(d, f, u0, {.dt = 0.01, .T = 1.0, .time_independent_source = true});
        for (std::size_t i = 1; i < traj.class_means.size(); ++i) {
            worst = std::max(worst, std::abs(traj.class_means[i][0] - traj.class_means[i - 1][0]));
        }
    }
    {
        const auto d = discretize(validate_structure({make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1}),
                                                      make_segment(1, {0.2, 0.1, -1}, {0.2, 0.1, 1})}),
                                  0.08);
        const SourceFunction f = [](const PointContext& at, double t) {
            return at.component == 0 ? at.local[0] * std::cos(t) : std::sin(kPi * at.local[0]);
        };
        const auto u0 = random_field(d.n_dofs(), 4);
        const auto traj = run_parabolic(d, f, u0, {.dt = 0.01, .T = 1.0, .theta = 0.5});
        for (std::size_t i = 1; i < traj.class_means.size(); ++i) {
            for (int k = 0; k < 2; ++k) {
                worst = std::max(worst, std::abs(traj.class_means[i][k] - traj.class_means[i - 1][k]));
            }
        }
        o.require(traj.warnings.empty(), "no compatibility warnings");
    }
    o.note("max per-step class mean drift=%.2e", worst);
    o.require(worst <= 1e-12, "drift <= 1e-12");
    return o;
}

Outcome criterion9() {
    Outcome o;
    double cg_dev = 0.0, eig_dev = 0.0;
    int systems = 0;
    std::vector<SparseMatrixSym> Ks, Ms;
    for (const auto& [s, h] : std::vector<std::pair<ValidatedStructure, double>>{
             {crossing_segments(), 0.025},
             {validate_structure({make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1}), make_segment(1, {0.2, 0.1, -1}, {0.2, 0.1, 1})}), 0.3},
             {crossing_discs(), 0.3},
             {validate_structure({make_disc(0, {0, 0, 0}, 1.0, {0, 0, 1})}), 0.2}}) {
        const auto d = discretize(s, h);
        if (d.n_dofs() > 200) {
            o.require(false, "system size <= 200");
            continue;
        }
        // Shifted SPD system (mass + dt stiffness) with a random right-hand side.
        const auto A = SparseMatrixSym::combine(1.0, d.mass, 0.05, d.stiffness);
        const auto b = random_field(d.n_dofs(), 77 + systems).values;
        const auto [x, rep] = cg_solve(A, b, {.tol = 1e-13});
        const auto ref = dense_ldlt_solve(DenseMatrix::from_sparse(A), b);
        double scale = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            diff = std::max(diff, std::abs(x[i] - ref[i]));
            scale = std::max(scale, std::abs(ref[i]));
        }
        cg_dev = std::max(cg_dev, diff / scale);
        const auto dense = dense_generalized_eigenvalues(DenseMatrix::from_sparse(d.stiffness), DenseMatrix::from_sparse(d.mass));
        const auto pairs = smallest_eigenpairs(d.stiffness, d.mass, 5);
        for (int i = 0; i < 5; ++i) {
            eig_dev = std::max(eig_dev, std::abs(pairs[i].value - dense[i]) / std::max(1.0, dense[i]));
        }
        ++systems;
    }
    std::mt19937_64 rng(123);
    for (int n : {10, 60, 200}) {
        std::uniform_real_distribution<double> w(0.1, 1.0);
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::vector<Triplet> t;
        for (int i = 0; i < n; ++i) t.push_back({i, i, w(rng)});
        for (int e = 0; e < 3 * n; ++e) {
            const int i = pick(rng), j = pick(rng);
            if (i == j) continue;
            const double v = w(rng);
            t.push_back({i, i, v});
            t.push_back({j, j, v});
            t.push_back({std::min(i, j), std::max(i, j), -v});
        }
        const auto A = SparseMatrixSym::from_triplets(n, t);
        const auto b = random_field(n, n).values;
        const auto [x, rep] = cg_solve(A, b, {.tol = 1e-13});
        const auto ref = dense_ldlt_solve(DenseMatrix::from_sparse(A), b);
        double scale = 0.0, diff = 0.0;
        for (int i = 0; i < n; ++i) {
            diff = std::max(diff, std::abs(x[i] - ref[i]));
            scale = std::max(scale, std::abs(ref[i]));
        }
        cg_dev = std::max(cg_dev, diff / scale);
        ++systems;
    }
    o.note("systems=%.0f", systems);
    o.note(" cg max rel dev=%.2e", cg_dev);
    o.note(" eigen max rel dev=%.2e", eig_dev);
    o.require(cg_dev <= 1e-8, "CG vs dense");
    o.require(eig_dev <= 1e-8, "eigen vs dense");
    return o;
}

std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion10() {
    Outcome o;
    int compared = 0;
    const fs::path base = fs::temp_directory_path() / "lowdim_acceptance_determinism";
    fs::remove_all(base);
    fs::create_directories(base);
    for (const auto& entry : fs::directory_iterator(LOWDIM_SCENARIO_DIR)) {
        const std::string name = entry.path().stem().string();
        std::vector<fs::path> dirs{base / (name + "_a"), base / (name + "_b")};
        for (const auto& dir : dirs) {
            const std::string cmd = std::string("\"") + LOWDIM_CLI_PATH + "\" scenario \"" + entry.path().string() +
                                    "\" --out-dir \"" + dir.string() + "\" > \"" + (dir.string() + ".json") + "\"";
            const int rc = std::system(cmd.c_str());
            o.require(rc == 0, name + " exit code");
        }
        for (const auto& file : fs::directory_iterator(dirs[0])) {
            if (file.path().extension() != ".csv") continue;
            const std::string a = read(file.path()), b = read(dirs[1] / file.path().filename());
            o.require(!a.empty() && a == b, file.path().filename().string() + " identical");
            ++compared;
        }
    }
    o.note("csv files compared=%.0f", compared);
    o.require(compared >= 4, "all bundled scenarios write CSV");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"crossing segments vs closed form", criterion1},
        {"crossing discs Poisson", criterion2},
        {"generalized Poincare inequality", criterion3},
        {"mixed-dimension kernel", criterion4},
        {"energy decay", criterion5},
        {"asymptotic convergence", criterion6},
        {"propagator composition", criterion7},
        {"class mean conservation", criterion8},
        {"linear algebra oracle equivalence", criterion9},
        {"determinism", criterion10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        failed += out.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    out.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
