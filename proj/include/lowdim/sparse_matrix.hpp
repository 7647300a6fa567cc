#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace lowdim {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Symmetric sparse matrix holding only the upper triangle (col >= row) in
/// compressed-row form. Products use the implied lower triangle.
class SparseMatrixSym {
public:
    SparseMatrixSym() = default;

    /// Triplets from either triangle are folded into the upper one. Duplicates are
    /// summed in input order after a stable sort, so results are bit-reproducible.
    static SparseMatrixSym from_triplets(int n, std::vector<Triplet> triplets);

    /// a*A + b*B over the union of both patterns.
    static SparseMatrixSym combine(double a, const SparseMatrixSym& A, double b, const SparseMatrixSym& B);

    int size() const { return n_; }
    std::size_t stored_entries() const { return values_.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;
    /// x^T A y
    double bilinear(std::span<const double> x, std::span<const double> y) const;

    double operator()(int i, int j) const;
    std::vector<double> diagonal() const;
    double trace() const;

    /// Principal submatrix on the given (sorted, distinct) indices.
    SparseMatrixSym submatrix(std::span<const int> indices) const;

    std::vector<double> to_dense() const;  // row-major n x n

    std::span<const int> row_ptr() const { return row_ptr_; }
    std::span<const int> cols() const { return cols_; }
    std::span<const double> values() const { return values_; }

private:
    int n_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

/// MatrixMarket "coordinate real symmetric" dump (lower triangle, 1-based).
void write_matrix_market(const SparseMatrixSym& A, const std::filesystem::path& path);

}  // namespace lowdim
