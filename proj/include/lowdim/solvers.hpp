#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lowdim/assembly.hpp"
#include "lowdim/geometry.hpp"
#include "lowdim/linalg.hpp"
#include "lowdim/meshing.hpp"
#include "lowdim/sparse_matrix.hpp"

namespace lowdim {

/// Everything a solve needs about one structure at one mesh size.
struct Discretization {
    ValidatedStructure structure;
    KernelClasses classes;
    Mesh mesh;
    CoefficientMatrixB B;
    SparseMatrixSym mass;
    SparseMatrixSym stiffness;
    ClassProjector projector;

    int n_dofs() const { return mesh.n_dofs; }
    int class_count() const { return classes.count(); }
};

Discretization discretize(const ValidatedStructure& structure, double h,
                          const CoefficientMatrixB& B = CoefficientMatrixB::identity());

struct StationaryOptions {
    double tol = 1e-10;
    /// Random CG starting vector; zero when absent.
    std::optional<std::uint64_t> seed;
};

struct StationaryResult {
    DiscreteField u;
    SolveReport report;
};

/// Zero-class-mean solution of K u = b. Compatibility (zero class mean of f,
/// 1e-8 relative) is checked on the exact shapes; the remaining quadrature
/// mean of the discrete load is then removed before the deflated CG solve.
/// Throws IncompatibleData or NoConvergence.
StationaryResult solve_stationary(const Discretization& disc, const SourceFunction& f,
                                  const StationaryOptions& options = {});

/// One theta-step (M + theta dt K) u1 = (M - (1 - theta) dt K) u0 + dt (theta l1 + (1 - theta) l0).
/// After the CG solve each class mean is corrected exactly, so the class
/// balance chi^T M u1 = chi^T rhs holds to rounding.
class ThetaStepper {
public:
    ThetaStepper(const SparseMatrixSym& M, const SparseMatrixSym& K, double dt, double theta,
                 std::vector<int> dof_class, int class_count, double tol = 1e-10);

    /// CG starts from u0.
    DiscreteField step(const DiscreteField& u0, const DiscreteField& load0, const DiscreteField& load1) const;
    DiscreteField step(const DiscreteField& u0) const;

    double dt() const { return dt_; }
    double theta() const { return theta_; }
    int last_iterations() const { return last_iterations_; }

private:
    double dt_;
    double theta_;
    double tol_;
    SparseMatrixSym lhs_;
    SparseMatrixSym rhs_op_;
    std::vector<int> dof_class_;
    std::vector<double> class_mass_;  // chi_k^T M chi_k = chi_k^T lhs chi_k
    mutable int last_iterations_ = 0;
};

/// Single step for callers without class information: only the total mean is
/// corrected. Use ThetaStepper for per-class exactness.
DiscreteField step_theta(const SparseMatrixSym& M, const SparseMatrixSym& K, const DiscreteField& u_n,
                         const DiscreteField& load_n, const DiscreteField& load_np1, double dt, double theta);

struct ParabolicOptions {
    double dt = 0.01;
    double T = 1.0;
    double theta = 1.0;
    double tol = 1e-10;
    /// Source does not depend on t; the load is assembled once.
    bool time_independent_source = false;
    /// Stationary target u* for the distance diagnostics.
    std::optional<DiscreteField> target;
    /// Store a snapshot every k steps (0 disables); the final state is always kept.
    int snapshot_every = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> l2_norm;
    std::vector<double> energy;
    std::vector<double> dist_l2;  // NaN without a target
    std::vector<double> dist_h1;
    std::vector<double> dist_energy;  // E(u - u*); NaN without a target
    std::vector<std::vector<double>> class_means;  // per time, per class
    std::vector<double> snapshot_times;
    std::vector<DiscreteField> snapshots;
    DiscreteField final_state;
    std::vector<std::string> warnings;
};

/// Steps from u0 to T with llround(T / dt) steps of size dt (t_n = n dt).
/// Classes on which f has zero mean (checked on the exact shapes at t = 0 and
/// t = T) get the quadrature mean removed from every load, as in the
/// stationary solve. A source with a nonzero class mean is allowed; the drift
/// is reported in warnings.
Trajectory run_parabolic(const Discretization& disc, const SourceFunction& f, const DiscreteField& u0,
                         const ParabolicOptions& options);

struct PoincareEntry {
    int class_index = 0;
    double constant = 0.0;  // C_k = 1 / lambda_2
    double lambda2 = 0.0;
    double residual = 0.0;
    int dofs = 0;
};

/// Per class, C_k = 1 / lambda_2 of the (K, M) block on the class DOFs.
std::vector<PoincareEntry> poincare_constant(const SparseMatrixSym& K, const SparseMatrixSym& M,
                                             const std::vector<int>& dof_class, int class_count);

/// E(u) = u^T K u.
double energy(const SparseMatrixSym& K, const DiscreteField& u);

/// sqrt(v^T A v)
double weighted_norm(const SparseMatrixSym& A, const DiscreteField& v);

/// ||P^(a+b) u0 - P^a P^b u0||_M for the theta-step P. The two legs of the
/// composed path use independently built steppers, so any state carried
/// between steps would show up as a deviation.
double propagator_composition_check(const SparseMatrixSym& M, const SparseMatrixSym& K, double dt, double theta,
                                    int steps_a, int steps_b, const DiscreteField& u0, double tol = 1e-10);

/// Boundary-length-weighted mean of |(B grad u) . n| over the boundary of
/// each component: the a posteriori Neumann flux residual.
std::vector<double> boundary_flux_residual(const Discretization& disc, const DiscreteField& u);

/// ||u_h - g||_{L2_mu} with 4-point Gauss on line elements and a degree-4
/// rule on triangles, g evaluated exactly at the quadrature points.
double l2_error(const Mesh& mesh, const DiscreteField& u, const NodalFunction& g);

/// min over per-component constants c_i of ||u_h - (g + c_i)||_{L2_mu}.
double shifted_l2_distance(const Mesh& mesh, const DiscreteField& u, const NodalFunction& g);

/// Least-squares slope of -log(values) against times over entries whose
/// time is at least `from_time` and whose value exceeds `floor`.
double fitted_decay_rate(const std::vector<double>& times, const std::vector<double>& values, double from_time,
                         double floor);

}  // namespace lowdim
