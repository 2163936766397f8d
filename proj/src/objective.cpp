#include "covrank/objective.hpp"

#include "covrank/error.hpp"

#include <cmath>

namespace covrank {

namespace {

void check_shapes(const Matrix& C, const CovMatrix& K) {
    if (C.rows() != K.size())
        throw DimensionError("factor has " + std::to_string(C.rows()) + " rows but K is " +
                             std::to_string(K.size()) + " x " + std::to_string(K.size()));
}

Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

}  // namespace

LowRankFactor::LowRankFactor(Matrix entries) : c_(std::move(entries)) {
    if (c_.cols() < 1) throw DataError("factor needs at least one column");
    if (!c_.allFinite()) throw DataError("factor contains non-finite entries");
}

double psi(const LowRankFactor& C, const CovMatrix& K) {
    check_shapes(C.matrix(), K);
    return masked_frobenius_sq(K.matrix(), C.gram());
}

Matrix grad_psi(const LowRankFactor& C, const CovMatrix& K) {
    check_shapes(C.matrix(), K);
    Matrix R = K.matrix() - C.gram();
    R.diagonal().setZero();
    return -4.0 * R * C.matrix();
}

double psi_and_grad(const Matrix& C, const Matrix& K, Matrix& residual, Matrix& grad) {
    residual.noalias() = -C * C.transpose();
    residual += K;
    residual.diagonal().setZero();
    grad.noalias() = -4.0 * residual * C;
    return residual.squaredNorm();
}

Matrix hess_psi(const LowRankFactor& Cf, const CovMatrix& K) {
    check_shapes(Cf.matrix(), K);
    const Matrix& C = Cf.matrix();
    const Index L = C.rows(), q = C.cols();
    Matrix R = K.matrix() - C * C.transpose();
    R.diagonal().setZero();
    const Matrix G = C.transpose() * C;

    // Directional derivative of -4 (P o R) C along E:
    //   -4 (P o R) E + 4 (P o (E C^T)) C + 4 (P o (C E^T)) C.
    // Row (i,k) <-> output entry, column (j,l) <-> input entry E(j,l).
    Matrix H = Matrix::Zero(L * q, L * q);
    for (Index k = 0; k < q; ++k)
        for (Index l = 0; l < q; ++l) {
            auto block = H.block(k * L, l * L, L, L);
            if (k == l) block += -4.0 * R;
            // (P o (C E^T)) C: coefficient C(i,l) C(j,k) for i != j.
            block += 4.0 * C.col(l) * C.col(k).transpose();
            for (Index i = 0; i < L; ++i) block(i, i) -= 4.0 * C(i, l) * C(i, k);
            // (P o (E C^T)) C: diagonal coefficient (C^T C)(l,k) - C(i,l) C(i,k).
            for (Index i = 0; i < L; ++i) block(i, i) += 4.0 * (G(l, k) - C(i, l) * C(i, k));
        }
    return 0.5 * (H + H.transpose());
}

Matrix hess_psi_closed_form(const LowRankFactor& Cf, const CovMatrix& K) {
    check_shapes(Cf.matrix(), K);
    const Matrix& C = Cf.matrix();
    const Index L = C.rows(), q = C.cols();
    Matrix R = K.matrix() - C * C.transpose();
    R.diagonal().setZero();

    Matrix first = -4.0 * kron(Matrix::Identity(q, q), R);
    Matrix second = 4.0 * (kron(C.transpose(), C) * commutation_matrix(L, q));
    second.diagonal().setZero();
    Matrix G = C.transpose() * C;
    G.diagonal().setZero();
    Matrix third = 4.0 * kron(G, Matrix::Identity(L, L));
    return first + second + third;
}

EigenvectorCheck assumption_E_check(const CovMatrix& K, Index q, double tol) {
    if (q < 1 || q > K.size()) throw DataError("assumption_E_check: q must lie in [1, L]");
    auto eig = sym_eigendecomposition(K);
    EigenvectorCheck out;
    for (Index m = 0; m < q; ++m)
        for (Index i = 0; i < K.size(); ++i)
            if (!(std::abs(eig.vectors(i, m)) > tol)) out.offending.emplace_back(m, i);
    out.ok = out.offending.empty();
    return out;
}

HessianCheck hessian_nonsingularity_check(const LowRankFactor& Cf, const CovMatrix& K,
                                          double rel_tol) {
    const Matrix H = hess_psi(Cf, K);
    const Matrix& C = Cf.matrix();
    const Index L = C.rows(), q = C.cols(), N = L * q;

    // Tangent of the rotation orbit: vec(C A) for skew-symmetric A.
    Matrix tangent(N, q * (q - 1) / 2);
    Index col = 0;
    for (Index a = 0; a < q; ++a)
        for (Index b = a + 1; b < q; ++b) {
            Matrix CA = Matrix::Zero(L, q);
            CA.col(b) = C.col(a);
            CA.col(a) = -C.col(b);
            tangent.col(col++) = vec(CA);
        }

    Matrix complement = Matrix::Identity(N, N);
    Index removed = 0;
    if (tangent.cols() > 0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(tangent);
        qr.setThreshold(1e-10);
        removed = qr.rank();
        Matrix Q = qr.householderQ() * Matrix::Identity(N, N);
        complement = Q.rightCols(N - removed);
    }

    HessianCheck out;
    out.rotation_dimension = removed;
    Eigen::SelfAdjointEigenSolver<Matrix> full(H, Eigen::EigenvaluesOnly);
    out.largest_singular_value = full.eigenvalues().cwiseAbs().maxCoeff();
    Matrix reduced = complement.transpose() * H * complement;
    Eigen::SelfAdjointEigenSolver<Matrix> part(0.5 * (reduced + reduced.transpose()),
                                               Eigen::EigenvaluesOnly);
    out.smallest_singular_value = part.eigenvalues().cwiseAbs().minCoeff();
    out.ok = out.smallest_singular_value > rel_tol * out.largest_singular_value;
    return out;
}

}  // namespace covrank
