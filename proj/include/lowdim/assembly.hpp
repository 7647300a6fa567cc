#pragma once

#include <functional>
#include <vector>

#include "lowdim/geometry.hpp"
#include "lowdim/meshing.hpp"
#include "lowdim/sparse_matrix.hpp"
#include "lowdim/vec3.hpp"

namespace lowdim {

/// Conductivity B(x): symmetric and uniformly elliptic in ambient R^3
/// coordinates, ellipticity_floor |xi|^2 <= xi^T B(x) xi.
struct CoefficientMatrixB {
    std::function<Mat3(const Vec3&)> evaluator;
    double ellipticity_floor = 1.0;

    static CoefficientMatrixB identity();
    static CoefficientMatrixB constant(const Mat3& b, double floor);
};

/// Smallest eigenvalue of a symmetric 3x3 matrix.
double min_eigenvalue_sym3(const Mat3& m);

/// Scalar data f(x, t) evaluated in component-local terms.
using SourceFunction = std::function<double(const PointContext&, double t)>;

/// Consistent mass matrix for (u, v) in L^2_mu; 1^T M 1 equals the discrete measure.
SparseMatrixSym assemble_mass(const Mesh& mesh);

/// Stiffness for the form (B grad_mu u, grad_mu v). B is compressed to each
/// component's tangent space (F^T B F for the frame F); midpoint rule on
/// segments, 3-point symmetric rule on triangles. Throws NonElliptic when a
/// sampled B is asymmetric or falls below its floor.
SparseMatrixSym assemble_stiffness(const Mesh& mesh, const CoefficientMatrixB& B);

/// Entries int f phi_j dmu with the mass quadrature (2-point Gauss / 3-point rule).
DiscreteField assemble_load(const Mesh& mesh, const SourceFunction& f, double time);

/// Integrals of f over each kernel class on the exact component shapes
/// (composite Gauss on segments, polar Gauss on discs). Returns
/// (integral, integral of |f|) per class.
std::vector<std::pair<double, double>> class_integrals(const std::vector<ComponentShape>& shapes,
                                                      const KernelClasses& classes, const SourceFunction& f,
                                                      double time);

/// Sum of the class projections P_k: per class, the mu-mean of u times the class indicator.
class ClassProjector {
public:
    ClassProjector() = default;
    ClassProjector(const SparseMatrixSym& mass, std::vector<int> dof_class, int class_count);

    int class_count() const { return static_cast<int>(measures_.size()); }
    /// mu-mean of u over class k.
    double mean(const DiscreteField& u, int k) const;
    std::vector<double> means(const DiscreteField& u) const;
    /// Discrete measure of class k (chi_k^T M chi_k).
    double measure(int k) const { return measures_[k]; }
    DiscreteField project(const DiscreteField& u) const;
    /// u - project(u)
    DiscreteField remove_means(const DiscreteField& u) const;
    DiscreteField indicator(int k) const;
    const std::vector<int>& dof_class() const { return dof_class_; }

private:
    std::vector<int> dof_class_;
    std::vector<std::vector<double>> weights_;  // M chi_k
    std::vector<double> measures_;
};

DiscreteField class_mean_project(const Mesh& mesh, const KernelClasses& classes, const DiscreteField& u);

}  // namespace lowdim
