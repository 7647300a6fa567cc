#include "lowdim/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

#include "lowdim/error.hpp"

namespace lowdim {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& message) { throw Error(kind, "solvers", message); }

bool compatible(const std::pair<double, double>& integral) {
    return std::abs(integral.first) <= 1e-8 * integral.second;
}

DiscreteField zero_field(int n) { return DiscreteField(static_cast<std::size_t>(n)); }

struct Moments {
    double measure = 0.0;
    double first = 0.0;   // integral of e
    double second = 0.0;  // integral of e^2
};

// Per-component integrals of e = u_h - g.
std::vector<Moments> error_moments(const Mesh& mesh, const DiscreteField& u, const NodalFunction& g) {
    constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    // Strang-Fix 6-point rule, degree 4; weights sum to 1.
    constexpr double ta = 0.445948490915965, tb = 0.091576213509771;
    constexpr double wa = 0.223381589678011, wb = 0.109951743655322;
    constexpr double tri_pts[6][3] = {{1 - 2 * ta, ta, ta}, {ta, 1 - 2 * ta, ta}, {ta, ta, 1 - 2 * ta},
                                      {1 - 2 * tb, tb, tb}, {tb, 1 - 2 * tb, tb}, {tb, tb, 1 - 2 * tb}};
    constexpr double tri_w[6] = {wa, wa, wa, wb, wb, wb};

    std::vector<Moments> out(mesh.parts.size());
    for (const auto& part : mesh.parts) {
        Moments& m = out[part.component];
        for (const auto& e : part.edges) {
            const double s0 = part.local[e[0]][0], s1 = part.local[e[1]][0];
            const double len = std::abs(s1 - s0);
            const double u0 = u[part.dofs[e[0]]], u1 = u[part.dofs[e[1]]];
            for (int q = 0; q < 4; ++q) {
                const double t = 0.5 * (1.0 + gx[q]);
                PointContext ctx{part.component, 1, {(1 - t) * s0 + t * s1, 0.0},
                                 (1 - t) * part.points[e[0]] + t * part.points[e[1]]};
                const double err = (1 - t) * u0 + t * u1 - g(ctx);
                const double w = 0.5 * len * gw[q];
                m.first += w * err;
                m.second += w * err * err;
            }
            m.measure += len;
        }
        for (const auto& tri : part.triangles) {
            const auto& a = part.local[tri[0]];
            const auto& b = part.local[tri[1]];
            const auto& c = part.local[tri[2]];
            const double area = 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
            for (int q = 0; q < 6; ++q) {
                PointContext ctx;
                ctx.component = part.component;
                ctx.dim = 2;
                double uh = 0.0;
                for (int i = 0; i < 3; ++i) {
                    ctx.local[0] += tri_pts[q][i] * part.local[tri[i]][0];
                    ctx.local[1] += tri_pts[q][i] * part.local[tri[i]][1];
                    ctx.point += tri_pts[q][i] * part.points[tri[i]];
                    uh += tri_pts[q][i] * u[part.dofs[tri[i]]];
                }
                const double err = uh - g(ctx);
                m.first += area * tri_w[q] * err;
                m.second += area * tri_w[q] * err * err;
            }
            m.measure += area;
        }
    }
    return out;
}

}  // namespace

Discretization discretize(const ValidatedStructure& structure, double h, const CoefficientMatrixB& B) {
    Discretization d;
    d.structure = structure;
    d.classes = coupling_classes(structure);
    d.mesh = build_mesh(structure, h);
    d.B = B;
    d.mass = assemble_mass(d.mesh);
    d.stiffness = assemble_stiffness(d.mesh, B);
    d.projector = ClassProjector(d.mass, dof_classes(d.mesh, d.classes), d.classes.count());
    return d;
}

StationaryResult solve_stationary(const Discretization& disc, const SourceFunction& f,
                                  const StationaryOptions& options) {
    const auto integrals = class_integrals(disc.mesh.shapes, disc.classes, f, 0.0);
    for (int k = 0; k < disc.class_count(); ++k) {
        if (!compatible(integrals[k])) {
            std::ostringstream msg;
            msg << "source has mean integral " << integrals[k].first << " on class " << k;
            fail(ErrorKind::IncompatibleData, msg.str());
        }
    }

    DiscreteField b = assemble_load(disc.mesh, f, 0.0);
    CgOptions cg;
    cg.tol = options.tol;
    for (int k = 0; k < disc.class_count(); ++k) {
        const DiscreteField chi = disc.projector.indicator(k);
        const Vector mchi = disc.mass.multiply(chi.values);
        const double c = dot(chi.values, b.values) / disc.projector.measure(k);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= c * mchi[i];
        cg.kernel.push_back(chi.values);
    }
    if (options.seed) {
        std::mt19937_64 rng(*options.seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        Vector guess(b.size());
        for (double& g : guess) g = uni(rng);
        cg.initial_guess = std::move(guess);
    }
    auto [x, report] = cg_solve(disc.stiffness, b.values, cg);
    return {disc.projector.remove_means(DiscreteField(std::move(x))), report};
}

ThetaStepper::ThetaStepper(const SparseMatrixSym& M, const SparseMatrixSym& K, double dt, double theta,
                           std::vector<int> dof_class, int class_count, double tol)
    : dt_(dt), theta_(theta), tol_(tol), dof_class_(std::move(dof_class)), class_mass_(class_count, 0.0) {
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::DomainError, "dt must be positive");
    if (!(theta >= 0.5 && theta <= 1.0)) fail(ErrorKind::DomainError, "theta must lie in [1/2, 1]");
    if (static_cast<int>(dof_class_.size()) != M.size()) fail(ErrorKind::DomainError, "class map has the wrong size");
    lhs_ = SparseMatrixSym::combine(1.0, M, theta * dt, K);
    rhs_op_ = SparseMatrixSym::combine(1.0, M, -(1.0 - theta) * dt, K);
    const Vector ones(M.size(), 1.0);
    const Vector row_mass = M.multiply(ones);
    for (std::size_t i = 0; i < dof_class_.size(); ++i) class_mass_[dof_class_[i]] += row_mass[i];
}

DiscreteField ThetaStepper::step(const DiscreteField& u0, const DiscreteField& load0,
                                 const DiscreteField& load1) const {
    const std::size_t n = u0.size();
    Vector rhs = rhs_op_.multiply(u0.values);
    for (std::size_t i = 0; i < n; ++i) rhs[i] += dt_ * (theta_ * load1[i] + (1.0 - theta_) * load0[i]);
    CgOptions cg;
    cg.tol = tol_;
    cg.initial_guess = u0.values;
    auto [x, report] = cg_solve(lhs_, rhs, cg);
    last_iterations_ = report.iterations;

    // Exact class balance: chi_k^T lhs chi_k = chi_k^T M chi_k since K chi_k = 0.
    const Vector ax = lhs_.multiply(x);
    std::vector<double> defect(class_mass_.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) defect[dof_class_[i]] += rhs[i] - ax[i];
    for (std::size_t i = 0; i < n; ++i) x[i] += defect[dof_class_[i]] / class_mass_[dof_class_[i]];
    return DiscreteField(std::move(x));
}

DiscreteField ThetaStepper::step(const DiscreteField& u0) const {
    const DiscreteField zero(u0.size());
    return step(u0, zero, zero);
}

DiscreteField step_theta(const SparseMatrixSym& M, const SparseMatrixSym& K, const DiscreteField& u_n,
                         const DiscreteField& load_n, const DiscreteField& load_np1, double dt, double theta) {
    const ThetaStepper stepper(M, K, dt, theta, std::vector<int>(M.size(), 0), 1);
    return stepper.step(u_n, load_n, load_np1);
}

Trajectory run_parabolic(const Discretization& disc, const SourceFunction& f, const DiscreteField& u0,
                         const ParabolicOptions& options) {
    const int n = disc.n_dofs();
    if (static_cast<int>(u0.size()) != n) fail(ErrorKind::DomainError, "u0 has the wrong size");
    if (!(options.T > 0.0)) fail(ErrorKind::DomainError, "T must be positive");
    for (double v : u0.values) {
        if (!std::isfinite(v)) fail(ErrorKind::DomainError, "u0 is not finite");
    }
    if (options.target && static_cast<int>(options.target->size()) != n) {
        fail(ErrorKind::DomainError, "target has the wrong size");
    }
    const long long steps = std::llround(options.T / options.dt);
    if (steps < 1) fail(ErrorKind::DomainError, "T / dt rounds to zero steps");

    const ThetaStepper stepper(disc.mass, disc.stiffness, options.dt, options.theta, disc.projector.dof_class(),
                               disc.class_count(), options.tol);
    Trajectory traj;

    std::vector<bool> remove_mean(disc.class_count(), true);
    if (f) {
        std::vector<double> check_times{0.0};
        if (!options.time_independent_source) check_times.push_back(steps * options.dt);
        for (double t : check_times) {
            const auto integrals = class_integrals(disc.mesh.shapes, disc.classes, f, t);
            for (int k = 0; k < disc.class_count(); ++k) {
                if (compatible(integrals[k])) continue;
                remove_mean[k] = false;
                std::ostringstream msg;
                msg << "source has nonzero mean on class " << k << " at t=" << t << " (integral "
                    << integrals[k].first << "); the class mean drifts";
                traj.warnings.push_back(msg.str());
            }
        }
    }
    std::vector<Vector> class_weights;
    for (int k = 0; k < disc.class_count(); ++k) {
        class_weights.push_back(disc.mass.multiply(disc.projector.indicator(k).values));
    }
    auto load_at = [&](double t) {
        if (!f) return zero_field(n);
        DiscreteField b = assemble_load(disc.mesh, f, t);
        for (int k = 0; k < disc.class_count(); ++k) {
            if (!remove_mean[k]) continue;
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                if (disc.projector.dof_class()[i] == k) sum += b[i];
            }
            const double c = sum / disc.projector.measure(k);
            for (int i = 0; i < n; ++i) b[i] -= c * class_weights[k][i];
        }
        return b;
    };

    auto record = [&](double t, const DiscreteField& u) {
        traj.times.push_back(t);
        traj.l2_norm.push_back(weighted_norm(disc.mass, u));
        traj.energy.push_back(energy(disc.stiffness, u));
        traj.class_means.push_back(disc.projector.means(u));
        if (options.target) {
            DiscreteField e = u;
            for (int i = 0; i < n; ++i) e[i] -= (*options.target)[i];
            const double l2 = disc.mass.bilinear(e.values, e.values);
            const double grad = disc.stiffness.bilinear(e.values, e.values);
            traj.dist_l2.push_back(std::sqrt(std::max(0.0, l2)));
            traj.dist_h1.push_back(std::sqrt(std::max(0.0, l2 + grad)));
            traj.dist_energy.push_back(grad);
        } else {
            traj.dist_l2.push_back(std::numeric_limits<double>::quiet_NaN());
            traj.dist_h1.push_back(std::numeric_limits<double>::quiet_NaN());
            traj.dist_energy.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        if (!std::isfinite(traj.l2_norm.back()) || !std::isfinite(traj.energy.back())) {
            fail(ErrorKind::NoConvergence, "state became non-finite");
        }
    };

    DiscreteField u = u0;
    DiscreteField load0 = load_at(0.0);
    record(0.0, u);
    if (options.snapshot_every > 0) {
        traj.snapshot_times.push_back(0.0);
        traj.snapshots.push_back(u);
    }
    for (long long s = 1; s <= steps; ++s) {
        const double t = s * options.dt;
        DiscreteField load1 = (!f || options.time_independent_source) ? load0 : load_at(t);
        u = stepper.step(u, load0, load1);
        load0 = std::move(load1);
        record(t, u);
        if (options.snapshot_every > 0 && (s % options.snapshot_every == 0 || s == steps)) {
            traj.snapshot_times.push_back(t);
            traj.snapshots.push_back(u);
        }
    }
    traj.final_state = std::move(u);
    return traj;
}

std::vector<PoincareEntry> poincare_constant(const SparseMatrixSym& K, const SparseMatrixSym& M,
                                             const std::vector<int>& dof_class, int class_count) {
    std::vector<PoincareEntry> out;
    for (int k = 0; k < class_count; ++k) {
        std::vector<int> idx;
        for (int i = 0; i < static_cast<int>(dof_class.size()); ++i) {
            if (dof_class[i] == k) idx.push_back(i);
        }
        if (idx.size() < 2) fail(ErrorKind::DomainError, "class " + std::to_string(k) + " has fewer than two DOFs");
        const auto pairs = smallest_eigenpairs(K.submatrix(idx), M.submatrix(idx), 2);
        PoincareEntry e;
        e.class_index = k;
        e.lambda2 = pairs[1].value;
        e.constant = 1.0 / pairs[1].value;
        e.residual = pairs[1].residual;
        e.dofs = static_cast<int>(idx.size());
        out.push_back(e);
    }
    return out;
}

double energy(const SparseMatrixSym& K, const DiscreteField& u) { return K.bilinear(u.values, u.values); }

double weighted_norm(const SparseMatrixSym& A, const DiscreteField& v) {
    return std::sqrt(std::max(0.0, A.bilinear(v.values, v.values)));
}

double propagator_composition_check(const SparseMatrixSym& M, const SparseMatrixSym& K, double dt, double theta,
                                    int steps_a, int steps_b, const DiscreteField& u0, double tol) {
    const std::vector<int> one_class(M.size(), 0);
    const ThetaStepper full(M, K, dt, theta, one_class, 1, tol);
    DiscreteField direct = u0;
    for (int s = 0; s < steps_a + steps_b; ++s) direct = full.step(direct);

    DiscreteField composed = u0;
    {
        const ThetaStepper leg_b(M, K, dt, theta, one_class, 1, tol);
        for (int s = 0; s < steps_b; ++s) composed = leg_b.step(composed);
    }
    {
        const ThetaStepper leg_a(M, K, dt, theta, one_class, 1, tol);
        for (int s = 0; s < steps_a; ++s) composed = leg_a.step(composed);
    }
    for (std::size_t i = 0; i < direct.size(); ++i) direct[i] -= composed[i];
    return weighted_norm(M, direct);
}

std::vector<double> boundary_flux_residual(const Discretization& disc, const DiscreteField& u) {
    std::vector<double> out;
    for (const auto& part : disc.mesh.parts) {
        const ComponentShape& shape = disc.mesh.shapes.at(part.component);
        const auto values = restrict_to(disc.mesh, u, part.component);
        if (part.dim == 1) {
            const int last = part.node_count() - 1;
            const Vec3 t = normalized(shape.segment().p1 - shape.segment().p0);
            double acc = 0.0;
            for (auto [end, inner, sign] : {std::tuple{0, 1, -1.0}, std::tuple{last, last - 1, 1.0}}) {
                const double slope = (values[end] - values[inner]) / (part.local[end][0] - part.local[inner][0]);
                const double btt = dot(t, disc.B.evaluator(part.points[end]) * t);
                acc += std::abs(sign * btt * slope);
            }
            out.push_back(0.5 * acc);
            continue;
        }
        // Rim edges join angularly adjacent boundary nodes.
        std::vector<int> rim = part.boundary_nodes;
        std::sort(rim.begin(), rim.end(), [&](int a, int b) {
            return std::atan2(part.local[a][1], part.local[a][0]) < std::atan2(part.local[b][1], part.local[b][0]);
        });
        std::vector<std::pair<int, int>> rim_edges;
        for (std::size_t i = 0; i < rim.size(); ++i) {
            const int a = rim[i], b = rim[(i + 1) % rim.size()];
            rim_edges.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(rim_edges.begin(), rim_edges.end());
        const Vec3 e1 = shape.disc().e1;
        const Vec3 e2 = shape.disc().e2;
        double acc = 0.0, length = 0.0;
        for (const auto& tri : part.triangles) {
            const auto& a = part.local[tri[0]];
            const auto& b = part.local[tri[1]];
            const auto& c = part.local[tri[2]];
            const double area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            const double g[3][2] = {{(b[1] - c[1]) / area2, (c[0] - b[0]) / area2},
                                    {(c[1] - a[1]) / area2, (a[0] - c[0]) / area2},
                                    {(a[1] - b[1]) / area2, (b[0] - a[0]) / area2}};
            double grad[2] = {0.0, 0.0};
            for (int i = 0; i < 3; ++i) {
                grad[0] += values[tri[i]] * g[i][0];
                grad[1] += values[tri[i]] * g[i][1];
            }
            for (int i = 0; i < 3; ++i) {
                const int p = tri[i], q = tri[(i + 1) % 3];
                if (!std::binary_search(rim_edges.begin(), rim_edges.end(), std::pair{std::min(p, q), std::max(p, q)})) {
                    continue;
                }
                const double mx = 0.5 * (part.local[p][0] + part.local[q][0]);
                const double my = 0.5 * (part.local[p][1] + part.local[q][1]);
                const double len = std::hypot(part.local[p][0] - part.local[q][0], part.local[p][1] - part.local[q][1]);
                const double rn = std::hypot(mx, my);
                const Mat3 bm = disc.B.evaluator(0.5 * (part.points[p] + part.points[q]));
                const Vec3 flux3 = bm * (grad[0] * e1 + grad[1] * e2);
                const double flux = (mx * dot(e1, flux3) + my * dot(e2, flux3)) / rn;
                acc += std::abs(flux) * len;
                length += len;
            }
        }
        out.push_back(length > 0.0 ? acc / length : 0.0);
    }
    return out;
}

double l2_error(const Mesh& mesh, const DiscreteField& u, const NodalFunction& g) {
    double acc = 0.0;
    for (const auto& m : error_moments(mesh, u, g)) acc += m.second;
    return std::sqrt(std::max(0.0, acc));
}

double shifted_l2_distance(const Mesh& mesh, const DiscreteField& u, const NodalFunction& g) {
    double acc = 0.0;
    for (const auto& m : error_moments(mesh, u, g)) acc += m.second - m.first * m.first / m.measure;
    return std::sqrt(std::max(0.0, acc));
}

double fitted_decay_rate(const std::vector<double>& times, const std::vector<double>& values, double from_time,
                         double floor) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < times.size() && i < values.size(); ++i) {
        if (times[i] < from_time || !(values[i] > floor)) continue;
        const double y = -std::log(values[i]);
        sx += times[i];
        sy += y;
        sxx += times[i] * times[i];
        sxy += times[i] * y;
        ++count;
    }
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double denom = count * sxx - sx * sx;
    return denom > 0.0 ? (count * sxy - sx * sy) / denom : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace lowdim
