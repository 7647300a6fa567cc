#pragma once

#include <array>
#include <functional>
#include <string>

#include "lowdim/geometry.hpp"

namespace lowdim {

/// J_n(x) for 0 <= n <= 20, 0 <= x <= 100. Ascending series (extended
/// precision) for x <= 12, normalized backward recurrence above.
double bessel_j(int n, double x);

/// J_n'(x) on the same domain.
double bessel_j_derivative(int n, double x);

/// k-th positive root of J_n' for 0 <= n <= 20, 1 <= k <= 20. For n = 0 these
/// are the positive roots of J_1. Values come from a table built once by
/// sign bracketing on a pi/8 grid, bisection and a Newton polish.
double bessel_jprime_root(int n, int k);

using LocalFunction = std::function<double(const std::array<double, 2>&)>;

struct EigenbasisEntry {
    enum class Kind { Disc, Interval };
    Kind kind = Kind::Disc;
    int n = 0;             // angular order (disc) or mode number (interval)
    int k = 0;             // radial index (disc)
    bool cosine = false;   // disc: cos(n phi) instead of sin(n phi)
    double eigenvalue = 0.0;
    double norm = 1.0;     // the L2 norm of the unnormalized mode
    LocalFunction evaluate;  // disc: frame (x, y); interval: (x, 0)
};

/// Neumann mode of the disc of radius R: sin(n phi) J_n(j'_{n,k} r / R) / c
/// (cosine variant on request; n = 0 is radial). L2-normalized on the disc by
/// composite Gauss quadrature in r.
EigenbasisEntry disc_neumann_mode(int n, int k, bool cosine = false, double radius = 1.0);

/// Neumann mode cos(m pi (x + L/2) / L) on [-L/2, L/2], L2-normalized.
EigenbasisEntry interval_neumann_mode(int m, double length = 2.0);

struct HFamilyEntry {
    enum class Branch { Odd, FourKMinus2, FourK };
    int index = 1;
    Branch branch = Branch::Odd;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

/// H_n on [-1, 1]: sin(pi n x / 2) for odd n, plus pi n x / 2 for n = 4k - 2,
/// minus pi n x / 2 for n = 4k. 1 <= n <= 100.
HFamilyEntry h_family(int index);

struct ExpansionSolution {
    LocalFunction evaluate;
    int modes = 0;
    /// ||f - sum (f, e) e||_{L2} / lambda_{N+1}: bounds the truncation error of u.
    double tail_bound = 0.0;
};

/// Truncated Neumann eigen-expansion of -Laplace u = f on one component:
/// u = sum over the N lowest modes with lambda > 0 of (f, e) / lambda e.
/// Disc modes are drawn from orders n <= 20 and radial indices k <= 20.
ExpansionSolution eigen_expansion_solve(const ComponentShape& component, const LocalFunction& f, int N);

/// CSV table n,k,root,eigenvalue for the unit disc, 0 <= n <= n_max, 1 <= k <= k_max.
std::string spectrum_csv(int n_max, int k_max);

}  // namespace lowdim
