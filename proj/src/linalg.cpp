#include "lowdim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "lowdim/error.hpp"

namespace lowdim {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& message) { throw Error(kind, "linalg", message); }

double weighted_dot(const SparseMatrixSym* W, std::span<const double> a, std::span<const double> b) {
    return W ? W->bilinear(a, b) : dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

// Modified Gram-Schmidt, applied twice, in the W inner product. Vectors that
// collapse below `drop` of their original norm are discarded.
std::vector<Vector> orthonormalize(std::vector<Vector> vs, const SparseMatrixSym* W, double drop = 1e-10) {
    std::vector<Vector> out;
    for (auto& v : vs) {
        const double n0 = std::sqrt(std::max(0.0, weighted_dot(W, v, v)));
        if (n0 == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : out) axpy(-weighted_dot(W, q, v), q, v);
        }
        const double n1 = std::sqrt(std::max(0.0, weighted_dot(W, v, v)));
        if (n1 <= drop * n0) continue;
        for (double& x : v) x /= n1;
        out.push_back(std::move(v));
    }
    return out;
}

void project_out(const std::vector<Vector>& basis, const SparseMatrixSym* W, std::span<double> v) {
    for (const auto& q : basis) axpy(-weighted_dot(W, q, v), q, v);
}

double inf_norm(const SparseMatrixSym& A) {
    Vector row(A.size(), 0.0);
    const auto rp = A.row_ptr();
    const auto cols = A.cols();
    const auto vals = A.values();
    for (int i = 0; i < A.size(); ++i) {
        for (int p = rp[i]; p < rp[i + 1]; ++p) {
            row[i] += std::abs(vals[p]);
            if (cols[p] != i) row[cols[p]] += std::abs(vals[p]);
        }
    }
    return row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
}

// Cyclic Jacobi for a small dense symmetric matrix. Returns eigenvalues and
// column eigenvectors (row-major V, V(:, k) pairs with values[k]).
void jacobi_eigen(std::vector<double> S, int p, Vector& values, std::vector<double>& V) {
    V.assign(static_cast<std::size_t>(p) * p, 0.0);
    for (int i = 0; i < p; ++i) V[i * p + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, total = 0.0;
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j < p; ++j) {
                total += S[i * p + j] * S[i * p + j];
                if (i != j) off += S[i * p + j] * S[i * p + j];
            }
        }
        if (off <= 1e-32 * total || off == 0.0) break;
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) {
                const double sij = S[i * p + j];
                if (sij == 0.0) continue;
                const double tau = (S[j * p + j] - S[i * p + i]) / (2.0 * sij);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < p; ++k) {
                    const double ski = S[k * p + i], skj = S[k * p + j];
                    S[k * p + i] = c * ski - s * skj;
                    S[k * p + j] = s * ski + c * skj;
                }
                for (int k = 0; k < p; ++k) {
                    const double sik = S[i * p + k], sjk = S[j * p + k];
                    S[i * p + k] = c * sik - s * sjk;
                    S[j * p + k] = s * sik + c * sjk;
                }
                for (int k = 0; k < p; ++k) {
                    const double vki = V[k * p + i], vkj = V[k * p + j];
                    V[k * p + i] = c * vki - s * vkj;
                    V[k * p + j] = s * vki + c * vkj;
                }
            }
        }
    }
    values.resize(p);
    for (int i = 0; i < p; ++i) values[i] = S[i * p + i];
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::pair<Vector, SolveReport> cg_solve(const SparseMatrixSym& A, std::span<const double> b,
                                        const CgOptions& options) {
    const int n = A.size();
    if (static_cast<int>(b.size()) != n) fail(ErrorKind::DomainError, "right-hand side has the wrong size");
    const int max_it = options.max_iterations.value_or(static_cast<int>(std::ceil(50.0 * std::sqrt(n))));

    const auto basis = orthonormalize(options.kernel, options.kernel_weight);
    Vector rhs(b.begin(), b.end());
    const double b_norm = norm2(rhs);
    project_out(basis, options.kernel_weight, rhs);
    if (options.strict) {
        Vector removed(b.begin(), b.end());
        axpy(-1.0, rhs, removed);
        if (norm2(removed) > 1e-8 * b_norm) {
            fail(ErrorKind::IncompatibleRHS, "right-hand side has a component in the kernel");
        }
    }

    Vector x = options.initial_guess.value_or(Vector(n, 0.0));
    const double rhs_norm = norm2(rhs);
    SolveReport report;
    if (rhs_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        report.converged = true;
        return {x, report};
    }

    Vector inv_diag = A.diagonal();
    for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

    Vector r(n), z(n), p(n), q(n);
    auto true_residual = [&] {
        A.multiply(x, q);
        for (int i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
        return norm2(r) / rhs_norm;
    };

    const double a_norm = options.accept_rounding_floor ? inf_norm(A) : 0.0;
    auto target = [&] {
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * a_norm * norm2(x) / rhs_norm;
        return std::max(options.tol, floor);
    };

    double rel = true_residual();
    int it = 0;
    while (rel > target() && it < max_it) {
        // (Re)start from the current true residual.
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = dot(r, z);
        while (it < max_it) {
            A.multiply(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) break;
            const double alpha = rz / pq;
            axpy(alpha, p, x);
            axpy(-alpha, q, r);
            ++it;
            if (norm2(r) / rhs_norm <= target()) break;
            for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        rel = true_residual();
    }
    project_out(basis, options.kernel_weight, x);
    report.iterations = it;
    report.final_residual = true_residual();
    report.converged = report.final_residual <= target();
    if (!report.converged) {
        fail(ErrorKind::NoConvergence, "CG stopped after " + std::to_string(it) +
                                           " iterations at relative residual " +
                                           std::to_string(report.final_residual));
    }
    return {x, report};
}

std::vector<Eigenpair> smallest_eigenpairs(const SparseMatrixSym& K, const SparseMatrixSym& M, int count,
                                           const EigenOptions& options) {
    const int n = K.size();
    if (M.size() != n || count < 1 || count > n) fail(ErrorKind::DomainError, "invalid eigenproblem request");
    const int p = std::min(n, count + std::max(0, options.guard_vectors));
    const double sigma = -1e-8 * K.trace() / n;
    const SparseMatrixSym shifted = SparseMatrixSym::combine(1.0, K, -sigma, M);
    const double k_norm = inf_norm(K);
    const double inner_tol = std::max(1e-14, options.tol * 1e-4);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Vector> X(p, Vector(n));
    if (p == n) {
        for (int i = 0; i < n; ++i) {
            std::fill(X[i].begin(), X[i].end(), 0.0);
            X[i][i] = 1.0;
        }
    } else {
        for (auto& v : X) {
            for (double& x : v) x = uni(rng);
        }
    }
    Vector theta(p, 0.0);
    bool have_ritz = false;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        std::vector<Vector> Y(p);
        if (p == n) {
            Y = X;
        } else {
            for (int i = 0; i < p; ++i) {
                CgOptions cg;
                cg.tol = inner_tol;
                cg.accept_rounding_floor = true;
                cg.max_iterations = std::max(200, static_cast<int>(std::ceil(50.0 * std::sqrt(n))) * 4);
                if (have_ritz) {
                    Vector guess = X[i];
                    for (double& g : guess) g /= (theta[i] - sigma);
                    cg.initial_guess = std::move(guess);
                }
                Y[i] = cg_solve(shifted, M.multiply(X[i]), cg).first;
            }
        }
        const auto Q = orthonormalize(std::move(Y), &M, 1e-13);
        const int q = static_cast<int>(Q.size());
        if (q < count) fail(ErrorKind::NoConvergence, "eigen block collapsed");

        // Rayleigh-Ritz on span(Q); Q is M-orthonormal so the reduced M is ~I.
        std::vector<Vector> KQ(q);
        for (int i = 0; i < q; ++i) KQ[i] = K.multiply(Q[i]);
        std::vector<double> S(static_cast<std::size_t>(q) * q);
        for (int i = 0; i < q; ++i) {
            for (int j = i; j < q; ++j) S[i * q + j] = S[j * q + i] = dot(Q[i], KQ[j]);
        }
        Vector values;
        std::vector<double> V;
        jacobi_eigen(S, q, values, V);
        std::vector<int> order(q);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });

        std::vector<Vector> next(q, Vector(n, 0.0));
        Vector next_theta(q);
        for (int k = 0; k < q; ++k) {
            const int c = order[k];
            next_theta[k] = values[c];
            for (int i = 0; i < q; ++i) axpy(V[i * q + c], Q[i], next[k]);
            const double mn = std::sqrt(M.bilinear(next[k], next[k]));
            for (double& x : next[k]) x /= mn;
        }
        X = std::move(next);
        theta = std::move(next_theta);
        have_ritz = true;

        std::vector<Eigenpair> out;
        bool all = true;
        for (int k = 0; k < count; ++k) {
            const Vector kv = K.multiply(X[k]);
            const Vector mv = M.multiply(X[k]);
            Vector r = kv;
            axpy(-theta[k], mv, r);
            const double res = norm2(r);
            const double floor = 1e3 * std::numeric_limits<double>::epsilon() * k_norm * norm2(X[k]);
            if (!(res <= options.tol * norm2(kv) || res <= floor)) all = false;
            out.push_back({theta[k], X[k], res});
        }
        if (all) return out;
        if (p == n) return out;
        while (static_cast<int>(X.size()) < p) {
            Vector v(n);
            for (double& x : v) x = uni(rng);
            X.push_back(std::move(v));
            theta.push_back(theta.back());
        }
    }
    fail(ErrorKind::NoConvergence, "inverse iteration did not reach the eigen tolerance");
}

DenseMatrix DenseMatrix::from_sparse(const SparseMatrixSym& s) {
    DenseMatrix d(s.size());
    d.a = s.to_dense();
    return d;
}

Vector dense_ldlt_solve(const DenseMatrix& A, std::span<const double> b) {
    const int n = A.n;
    if (n > 500) fail(ErrorKind::DomainError, "dense path is limited to n <= 500");
    DenseMatrix L(n);
    Vector d(n);
    for (int j = 0; j < n; ++j) {
        double dj = A(j, j);
        for (int k = 0; k < j; ++k) dj -= L(j, k) * L(j, k) * d[k];
        if (!(dj > 0.0)) fail(ErrorKind::DomainError, "matrix is not positive definite");
        d[j] = dj;
        L(j, j) = 1.0;
        for (int i = j + 1; i < n; ++i) {
            double v = A(i, j);
            for (int k = 0; k < j; ++k) v -= L(i, k) * L(j, k) * d[k];
            L(i, j) = v / dj;
        }
    }
    Vector y(b.begin(), b.end());
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) y[i] -= L(i, k) * y[k];
    }
    for (int i = 0; i < n; ++i) y[i] /= d[i];
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) y[i] -= L(k, i) * y[k];
    }
    return y;
}

Vector dense_generalized_eigenvalues(const DenseMatrix& K, const DenseMatrix& M) {
    const int n = K.n;
    if (n > 500 || M.n != n) fail(ErrorKind::DomainError, "dense path is limited to n <= 500");
    // Cholesky M = L L^T.
    DenseMatrix L(n);
    for (int j = 0; j < n; ++j) {
        double s = M(j, j);
        for (int k = 0; k < j; ++k) s -= L(j, k) * L(j, k);
        if (!(s > 0.0)) fail(ErrorKind::DomainError, "mass matrix is not positive definite");
        L(j, j) = std::sqrt(s);
        for (int i = j + 1; i < n; ++i) {
            double v = M(i, j);
            for (int k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
            L(i, j) = v / L(j, j);
        }
    }
    // C = L^{-1} K L^{-T}: first W = L^{-1} K (column-wise forward substitution), then C = L^{-1} W^T.
    auto forward = [&](const DenseMatrix& B) {
        DenseMatrix X(n);
        for (int c = 0; c < n; ++c) {
            for (int i = 0; i < n; ++i) {
                double v = B(i, c);
                for (int k = 0; k < i; ++k) v -= L(i, k) * X(k, c);
                X(i, c) = v / L(i, i);
            }
        }
        return X;
    };
    DenseMatrix W = forward(K);
    DenseMatrix Wt(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) Wt(i, j) = W(j, i);
    }
    DenseMatrix C = forward(Wt);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) C(i, j) = C(j, i) = 0.5 * (C(i, j) + C(j, i));
    }

    // Householder reduction to tridiagonal form (diag a, off-diagonal e).
    Vector a(n), e(n, 0.0);
    for (int k = 0; k + 2 < n; ++k) {
        double alpha = 0.0;
        for (int i = k + 1; i < n; ++i) alpha += C(i, k) * C(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;
        if (C(k + 1, k) > 0.0) alpha = -alpha;
        Vector v(n, 0.0);
        v[k + 1] = C(k + 1, k) - alpha;
        for (int i = k + 2; i < n; ++i) v[i] = C(i, k);
        const double vv = dot(v, v);
        if (vv == 0.0) continue;
        // C <- H C H with H = I - 2 v v^T / (v^T v)
        Vector pvec(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += C(i, j) * v[j];
            pvec[i] = 2.0 * s / vv;
        }
        const double kcoef = dot(v, pvec) / vv;
        for (int i = 0; i < n; ++i) pvec[i] -= kcoef * v[i];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) C(i, j) -= v[i] * pvec[j] + pvec[i] * v[j];
        }
    }
    for (int i = 0; i < n; ++i) a[i] = C(i, i);
    for (int i = 0; i + 1 < n; ++i) e[i] = C(i + 1, i);

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < n; ++i) {
        const double rad = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, a[i] - rad);
        hi = std::max(hi, a[i] + rad);
    }
    const double span = std::max(hi - lo, 1e-300);
    auto count_below = [&](double x) {
        int c = 0;
        double q = a[0] - x;
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++c;
        for (int i = 1; i < n; ++i) {
            q = a[i] - x - e[i - 1] * e[i - 1] / q;
            if (q == 0.0) q = -1e-300;
            if (q < 0.0) ++c;
        }
        return c;
    };
    Vector out(n);
    for (int k = 0; k < n; ++k) {
        double l = lo - 1e-12 * span, h = hi + 1e-12 * span;
        for (int it = 0; it < 200 && h - l > 4.0 * std::numeric_limits<double>::epsilon() * span; ++it) {
            const double mid = 0.5 * (l + h);
            if (count_below(mid) > k) h = mid; else l = mid;
        }
        out[k] = 0.5 * (l + h);
    }
    return out;
}

}  // namespace lowdim
