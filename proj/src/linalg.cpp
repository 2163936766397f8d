#include "covrank/linalg.hpp"

#include "covrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace covrank {

Grid::Grid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2)
        throw DataError("grid needs at least 2 nodes, got " + std::to_string(nodes_.size()));
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        double t = nodes_[j];
        if (!std::isfinite(t) || t < 0.0 || t > 1.0)
            throw DataError("grid node " + std::to_string(j) + " outside [0,1]");
        if (j > 0 && !(t > nodes_[j - 1]))
            throw DataError("grid nodes must be strictly increasing (node " + std::to_string(j) + ")");
    }
}

Grid Grid::regular(Index L) {
    std::vector<double> t(static_cast<std::size_t>(L));
    for (Index j = 0; j < L; ++j) t[static_cast<std::size_t>(j)] = double(j + 1) / double(L + 1);
    return Grid(std::move(t));
}

Vector Grid::as_vector() const {
    return Eigen::Map<const Vector>(nodes_.data(), size());
}

SampleMatrix::SampleMatrix(Matrix data, Grid grid) : data_(std::move(data)), grid_(std::move(grid)) {
    if (data_.rows() < 1) throw DataError("sample matrix has no rows");
    if (data_.cols() != grid_.size())
        throw DimensionError("sample matrix has " + std::to_string(data_.cols()) +
                             " columns but the grid has " + std::to_string(grid_.size()) + " nodes");
    if (!data_.allFinite()) throw DataError("sample matrix contains non-finite entries");
}

CovMatrix::CovMatrix(const Matrix& entries) {
    if (entries.rows() != entries.cols())
        throw DimensionError("covariance matrix must be square");
    m_ = 0.5 * (entries + entries.transpose());
}

Matrix MaskMatrix::apply(const Matrix& A) const {
    if (A.rows() != size_ || A.cols() != size_) throw DimensionError("mask size mismatch");
    Matrix out = A;
    out.diagonal().setZero();
    return out;
}

Matrix MaskMatrix::dense() const {
    Matrix P = Matrix::Ones(size_, size_);
    P.diagonal().setZero();
    return P;
}

MaskMatrix offdiag_mask(Index L) {
    if (L < 1) throw DataError("mask size must be positive");
    return MaskMatrix(L);
}

double masked_frobenius_sq(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
        throw DimensionError("masked_frobenius_sq: operands must be square and of equal size");
    double total = 0.0;
    for (Index j = 0; j < A.cols(); ++j)
        for (Index i = 0; i < A.rows(); ++i)
            if (i != j) {
                double d = A(i, j) - B(i, j);
                total += d * d;
            }
    return total;
}

Matrix commutation_matrix(Index L, Index q) {
    if (L < 1 || q < 1) throw DataError("commutation matrix orders must be positive");
    Matrix M = Matrix::Zero(L * q, L * q);
    // R(i, k) sits at i + k L in vec(R) and at k + i q in vec(R^T).
    for (Index k = 0; k < q; ++k)
        for (Index i = 0; i < L; ++i) M(k + i * q, i + k * L) = 1.0;
    return M;
}

Vector vec(const Matrix& A) {
    return Eigen::Map<const Vector>(A.data(), A.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
    if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

EigenDecomposition sym_eigendecomposition(const CovMatrix& K) {
    if (!K.all_finite()) throw DataError("eigendecomposition of a matrix with non-finite entries");
    const Index L = K.size();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(K.matrix());
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");

    std::vector<Index> order(static_cast<std::size_t>(L));
    std::iota(order.begin(), order.end(), Index{0});
    const Vector& ev = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ev(a) > ev(b); });

    EigenDecomposition out{Vector(L), Matrix(L, L)};
    for (Index c = 0; c < L; ++c) {
        Index src = order[static_cast<std::size_t>(c)];
        out.values(c) = ev(src);
        Vector v = solver.eigenvectors().col(src);
        Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        out.vectors.col(c) = v;
    }
    return out;
}

Matrix psd_sqrt(const CovMatrix& K) {
    auto eig = sym_eigendecomposition(K);
    Vector root = eig.values.cwiseMax(0.0).cwiseSqrt();
    return eig.vectors * root.asDiagonal() * eig.vectors.transpose();
}

CovMatrix psd_clip(const CovMatrix& K) {
    auto eig = sym_eigendecomposition(K);
    Vector lam = eig.values.cwiseMax(0.0);
    return CovMatrix(eig.vectors * lam.asDiagonal() * eig.vectors.transpose());
}

Matrix procrustes_align(const Matrix& C, const Matrix& C0) {
    if (C.rows() != C0.rows() || C.cols() != C0.cols())
        throw DimensionError("procrustes_align: factors must have the same shape");
    // max_O tr(O^T C^T C0): with C^T C0 = U S V^T the optimum is O = U V^T.
    Eigen::JacobiSVD<Matrix> svd(C.transpose() * C0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix O = svd.matrixU() * svd.matrixV().transpose();
    return C * O;
}

CovMatrix empirical_covariance(const Matrix& W, bool center) {
    const Index n = W.rows();
    if (center && n < 2) throw DataError("centered covariance needs at least 2 rows");
    if (n < 1) throw DataError("covariance needs at least 1 row");
    if (center) {
        Matrix Z = W.rowwise() - W.colwise().mean();
        return CovMatrix((Z.transpose() * Z) / double(n));
    }
    return CovMatrix((W.transpose() * W) / double(n));
}

CovMatrix empirical_covariance(const SampleMatrix& W, bool center) {
    return empirical_covariance(W.data(), center);
}

}  // namespace covrank
