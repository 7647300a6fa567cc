#include "lowdim/sparse_matrix.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "lowdim/error.hpp"

namespace lowdim {

SparseMatrixSym SparseMatrixSym::from_triplets(int n, std::vector<Triplet> triplets) {
    for (auto& t : triplets) {
        if (t.row > t.col) std::swap(t.row, t.col);
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrixSym A;
    A.n_ = n;
    A.row_ptr_.assign(n + 1, 0);
    for (std::size_t k = 0; k < triplets.size();) {
        const int r = triplets[k].row;
        const int c = triplets[k].col;
        double v = 0.0;
        while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) v += triplets[k++].value;
        A.cols_.push_back(c);
        A.values_.push_back(v);
        ++A.row_ptr_[r + 1];
    }
    for (int i = 0; i < n; ++i) A.row_ptr_[i + 1] += A.row_ptr_[i];
    return A;
}

SparseMatrixSym SparseMatrixSym::combine(double a, const SparseMatrixSym& A, double b, const SparseMatrixSym& B) {
    if (A.n_ != B.n_) throw Error(ErrorKind::DomainError, "assembly", "matrix sizes differ");
    SparseMatrixSym C;
    C.n_ = A.n_;
    C.row_ptr_.assign(C.n_ + 1, 0);
    for (int i = 0; i < C.n_; ++i) {
        int p = A.row_ptr_[i], pe = A.row_ptr_[i + 1];
        int q = B.row_ptr_[i], qe = B.row_ptr_[i + 1];
        while (p < pe || q < qe) {
            const int ca = p < pe ? A.cols_[p] : C.n_;
            const int cb = q < qe ? B.cols_[q] : C.n_;
            if (ca == cb) {
                C.cols_.push_back(ca);
                C.values_.push_back(a * A.values_[p++] + b * B.values_[q++]);
            } else if (ca < cb) {
                C.cols_.push_back(ca);
                C.values_.push_back(a * A.values_[p++]);
            } else {
                C.cols_.push_back(cb);
                C.values_.push_back(b * B.values_[q++]);
            }
        }
        C.row_ptr_[i + 1] = static_cast<int>(C.cols_.size());
    }
    return C;
}

void SparseMatrixSym::multiply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        const double xi = x[i];
        for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            const int j = cols_[p];
            acc += values_[p] * x[j];
            if (j != i) y[j] += values_[p] * xi;
        }
        y[i] += acc;
    }
}

std::vector<double> SparseMatrixSym::multiply(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

double SparseMatrixSym::bilinear(std::span<const double> x, std::span<const double> y) const {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) {
        for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            const int j = cols_[p];
            acc += values_[p] * (j == i ? x[i] * y[i] : x[i] * y[j] + x[j] * y[i]);
        }
    }
    return acc;
}

double SparseMatrixSym::operator()(int i, int j) const {
    if (i > j) std::swap(i, j);
    const auto begin = cols_.begin() + row_ptr_[i];
    const auto end = cols_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    return (it != end && *it == j) ? values_[it - cols_.begin()] : 0.0;
}

std::vector<double> SparseMatrixSym::diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (int i = 0; i < n_; ++i) d[i] = (*this)(i, i);
    return d;
}

double SparseMatrixSym::trace() const {
    double t = 0.0;
    for (double d : diagonal()) t += d;
    return t;
}

SparseMatrixSym SparseMatrixSym::submatrix(std::span<const int> indices) const {
    std::vector<int> map(n_, -1);
    for (std::size_t k = 0; k < indices.size(); ++k) map[indices[k]] = static_cast<int>(k);
    std::vector<Triplet> t;
    for (int i : indices) {
        for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            if (map[cols_[p]] >= 0) t.push_back({map[i], map[cols_[p]], values_[p]});
        }
    }
    return from_triplets(static_cast<int>(indices.size()), std::move(t));
}

std::vector<double> SparseMatrixSym::to_dense() const {
    std::vector<double> d(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            d[static_cast<std::size_t>(i) * n_ + cols_[p]] = values_[p];
            d[static_cast<std::size_t>(cols_[p]) * n_ + i] = values_[p];
        }
    }
    return d;
}

void write_matrix_market(const SparseMatrixSym& A, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "assembly", "cannot open " + path.string());
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << A.size() << ' ' << A.size() << ' ' << A.stored_entries() << '\n';
    const auto rp = A.row_ptr();
    const auto cols = A.cols();
    const auto vals = A.values();
    char buf[64];
    for (int i = 0; i < A.size(); ++i) {
        for (int p = rp[i]; p < rp[i + 1]; ++p) {
            std::snprintf(buf, sizeof buf, "%.17g", vals[p]);
            out << cols[p] + 1 << ' ' << i + 1 << ' ' << buf << '\n';
        }
    }
    if (!out) throw Error(ErrorKind::IoError, "assembly", "failed writing " + path.string());
}

}  // namespace lowdim
