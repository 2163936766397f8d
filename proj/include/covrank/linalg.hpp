#pragma once

// Dense symmetric linear algebra shared by the rest of the library: grids,
// sample panels, covariance matrices, the off-diagonal mask, commutation
// matrices, eigendecomposition and Procrustes alignment.

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace covrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Strictly increasing observation nodes inside [0, 1].
class Grid {
public:
    explicit Grid(std::vector<double> nodes);

    /// Equispaced interior grid t_j = j / (L + 1), j = 1..L.
    static Grid regular(Index L);

    Index size() const { return static_cast<Index>(nodes_.size()); }
    double operator[](Index j) const { return nodes_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& nodes() const { return nodes_; }
    Vector as_vector() const;

    bool operator==(const Grid&) const = default;

private:
    std::vector<double> nodes_;
};

/// n x L panel of discrete noisy observations; rows are subjects, columns
/// are grid nodes. Entries must be finite.
class SampleMatrix {
public:
    SampleMatrix(Matrix data, Grid grid);

    Index rows() const { return data_.rows(); }
    Index cols() const { return data_.cols(); }
    const Matrix& data() const { return data_; }
    const Grid& grid() const { return grid_; }

private:
    Matrix data_;
    Grid grid_;
};

/// Symmetric L x L matrix. Every constructor stores (K + K^T) / 2.
class CovMatrix {
public:
    CovMatrix() = default;
    explicit CovMatrix(const Matrix& entries);

    static CovMatrix zero(Index L) { return CovMatrix(Matrix::Zero(L, L)); }

    Index size() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    double operator()(Index i, Index j) const { return m_(i, j); }
    bool all_finite() const { return m_.allFinite(); }

private:
    Matrix m_;
};

/// The off-diagonal projector P_L (zeros on the diagonal, ones elsewhere),
/// stored implicitly by its size.
class MaskMatrix {
public:
    explicit MaskMatrix(Index size) : size_(size) {}

    Index size() const { return size_; }
    /// P_L o A: copy of A with its diagonal zeroed.
    Matrix apply(const Matrix& A) const;
    Matrix dense() const;

private:
    Index size_;
};

MaskMatrix offdiag_mask(Index L);

/// Sum over i != j of (A_ij - B_ij)^2.
double masked_frobenius_sq(const Matrix& A, const Matrix& B);

/// The (Lq) x (Lq) permutation M with M vec(R) = vec(R^T) for R of size L x q
/// (column-major vec).
Matrix commutation_matrix(Index L, Index q);

/// Column-major vectorization and its inverse.
Vector vec(const Matrix& A);
Matrix unvec(const Vector& v, Index rows, Index cols);

struct EigenDecomposition {
    Vector values;   // descending
    Matrix vectors;  // orthonormal columns, matching `values`
};

/// Eigenvalues sorted descending (ties keep the solver's ascending order);
/// each eigenvector is signed so its largest-magnitude entry is positive.
/// Throws DataError on non-finite input.
EigenDecomposition sym_eigendecomposition(const CovMatrix& K);

/// V max(Lambda, 0)^{1/2} V^T, the symmetric square root of the PSD part.
Matrix psd_sqrt(const CovMatrix& K);

/// V max(Lambda, 0) V^T.
CovMatrix psd_clip(const CovMatrix& K);

/// Returns C O where O minimizes ||C O - C0||_F over orthogonal q x q O.
Matrix procrustes_align(const Matrix& C, const Matrix& C0);

/// (1/n) sum_i W_i W_i^T, or around the column means when `center` is set.
CovMatrix empirical_covariance(const Matrix& W, bool center = true);
CovMatrix empirical_covariance(const SampleMatrix& W, bool center = true);

}  // namespace covrank
