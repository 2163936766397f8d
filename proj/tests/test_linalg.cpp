#include "covrank/error.hpp"
#include "covrank/linalg.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace covrank;
using namespace covrank::testing;

TEST(Grid, RegularIsInterior) {
    const Grid g = Grid::regular(4);
    ASSERT_EQ(g.size(), 4);
    for (Index j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(g[j], double(j + 1) / 5.0);
}

TEST(Grid, RejectsBadNodes) {
    EXPECT_THROW(Grid({0.5}), DataError);
    EXPECT_THROW(Grid({0.2, 0.2, 0.3}), DataError);
    EXPECT_THROW(Grid({0.3, 0.2}), DataError);
    EXPECT_THROW(Grid({-0.1, 0.5}), DataError);
    EXPECT_THROW(Grid({0.5, 1.1}), DataError);
    EXPECT_NO_THROW(Grid({0.0, 1.0}));
}

TEST(SampleMatrix, ChecksShapeAndValues) {
    EXPECT_THROW(SampleMatrix(Matrix::Zero(3, 2), Grid::regular(3)), DimensionError);
    Matrix bad = Matrix::Zero(2, 3);
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(SampleMatrix(bad, Grid::regular(3)), DataError);
    EXPECT_THROW(SampleMatrix(Matrix::Zero(0, 3), Grid::regular(3)), DataError);
}

TEST(CovMatrix, SymmetrizesOnConstruction) {
    Matrix A(2, 2);
    A << 1, 2, 4, 3;
    const CovMatrix K(A);
    EXPECT_DOUBLE_EQ(K(0, 1), 3.0);
    EXPECT_DOUBLE_EQ(K(1, 0), 3.0);
    EXPECT_THROW(CovMatrix(Matrix::Zero(2, 3)), DimensionError);
}

TEST(Mask, SmallCases) {
    Matrix expected(2, 2);
    expected << 0, 1, 1, 0;
    EXPECT_EQ(offdiag_mask(2).dense(), expected);
    EXPECT_EQ(offdiag_mask(3).dense().sum(), 6.0);
    EXPECT_NEAR(offdiag_mask(5).dense().determinant(), 4.0, 1e-12);
}

TEST(Mask, ApplyZeroesExactlyTheDiagonal) {
    std::mt19937_64 rng(3);
    const Matrix A = random_matrix(6, 6, rng);
    const Matrix B = offdiag_mask(6).apply(A);
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j) EXPECT_EQ(B(i, j), i == j ? 0.0 : A(i, j));
}

TEST(Mask, DeterminantFormula) {
    for (Index m = 2; m <= 8; ++m) {
        const double expected = double(m - 1) * ((m - 1) % 2 == 0 ? 1.0 : -1.0);
        EXPECT_NEAR(mask_determinant(m), expected, 1e-9) << "m = " << m;
        EXPECT_NEAR(offdiag_mask(m).dense().determinant(), expected, 1e-9) << "m = " << m;
    }
}

TEST(MaskedFrobenius, Examples) {
    Matrix A(2, 2), B(2, 2);
    A << 1, 2, 3, 4;
    B << 9, 1, 5, 9;
    EXPECT_DOUBLE_EQ(masked_frobenius_sq(A, B), 5.0);
    EXPECT_DOUBLE_EQ(masked_frobenius_sq(A, A), 0.0);
    Matrix D = A;
    D.diagonal() << 100, -100;
    EXPECT_DOUBLE_EQ(masked_frobenius_sq(A, D), 0.0);
    EXPECT_THROW(masked_frobenius_sq(A, Matrix::Zero(3, 3)), DimensionError);
}

TEST(Commutation, SmallCases) {
    EXPECT_EQ(commutation_matrix(1, 1), Matrix::Ones(1, 1));
    // (2,2): vec order (1,3,2,4) in one-based indices.
    const Matrix M = commutation_matrix(2, 2);
    Vector v(4);
    v << 1, 2, 3, 4;
    Vector expected(4);
    expected << 1, 3, 2, 4;
    EXPECT_EQ(M * v, expected);
}

TEST(Commutation, MapsVecToVecOfTranspose) {
    std::mt19937_64 rng(11);
    for (auto [L, q] : {std::pair<Index, Index>{4, 2}, {5, 3}, {3, 1}}) {
        const Matrix R = random_matrix(L, q, rng);
        const Matrix M = commutation_matrix(L, q);
        const Matrix Rt = R.transpose();
        EXPECT_EQ(M * vec(R), Eigen::Map<const Vector>(Rt.data(), L * q));
        EXPECT_TRUE((M * M.transpose()).isIdentity());
    }
}

TEST(Vec, RoundTrip) {
    std::mt19937_64 rng(5);
    const Matrix A = random_matrix(3, 4, rng);
    EXPECT_EQ(unvec(vec(A), 3, 4), A);
    EXPECT_DOUBLE_EQ(vec(A)(1 + 2 * 3), A(1, 2));
}

TEST(Eigen, Examples) {
    auto e1 = sym_eigendecomposition(CovMatrix(Matrix::Identity(3, 3)));
    EXPECT_TRUE(e1.values.isApprox(Vector::Ones(3)));

    Matrix D = Matrix::Zero(2, 2);
    D.diagonal() << 1, 3;
    auto e2 = sym_eigendecomposition(CovMatrix(D));
    EXPECT_NEAR(e2.values(0), 3, 1e-14);
    EXPECT_NEAR(e2.values(1), 1, 1e-14);
    EXPECT_NEAR(std::abs(e2.vectors(1, 0)), 1, 1e-14);
    EXPECT_NEAR(e2.vectors(1, 0), 1, 1e-14);  // largest entry positive

    Vector c(2);
    c << 1, 2;
    auto e3 = sym_eigendecomposition(CovMatrix(c * c.transpose()));
    EXPECT_NEAR(e3.values(0), 5, 1e-12);
    EXPECT_NEAR(e3.values(1), 0, 1e-12);

    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = bad(1, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(sym_eigendecomposition(CovMatrix(bad)), DataError);
}

TEST(Eigen, ReconstructsAndOrders) {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix S = random_symmetric(7, rng);
        auto e = sym_eigendecomposition(CovMatrix(S));
        EXPECT_TRUE((e.vectors * e.values.asDiagonal() * e.vectors.transpose()).isApprox(S, 1e-12));
        EXPECT_TRUE((e.vectors.transpose() * e.vectors).isIdentity(1e-12));
        for (Index i = 1; i < 7; ++i) EXPECT_GE(e.values(i - 1), e.values(i));
    }
}

TEST(PsdOps, SqrtAndClip) {
    std::mt19937_64 rng(21);
    const Matrix A = random_matrix(5, 5, rng);
    const CovMatrix K(A * A.transpose());
    const Matrix R = psd_sqrt(K);
    EXPECT_TRUE((R * R).isApprox(K.matrix(), 1e-10));
    EXPECT_TRUE(R.isApprox(R.transpose()));

    const Matrix S = random_symmetric(6, rng);
    const CovMatrix P = psd_clip(CovMatrix(S));
    auto e = sym_eigendecomposition(P);
    EXPECT_GE(e.values.minCoeff(), -1e-10);
}

TEST(Procrustes, ExactCases) {
    std::mt19937_64 rng(4);
    const Matrix C0 = random_matrix(6, 3, rng);
    EXPECT_TRUE(procrustes_align(C0, C0).isApprox(C0, 1e-12));
    const Matrix O = random_orthogonal(3, rng);
    EXPECT_LE((procrustes_align(C0 * O, C0) - C0).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Procrustes, BeatsRandomSearch) {
    std::mt19937_64 rng(17);
    const Matrix C = random_matrix(5, 2, rng), C0 = random_matrix(5, 2, rng);
    const double achieved = (procrustes_align(C, C0) - C0).norm();
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) best = std::min(best, (C * random_orthogonal(2, rng) - C0).norm());
    EXPECT_LE(achieved, best + 1e-12);
    EXPECT_NEAR(achieved, best, 1e-2);
}

TEST(EmpiricalCovariance, Examples) {
    Matrix w(1, 3);
    w << 1, 2, 3;
    EXPECT_TRUE(empirical_covariance(w, false).matrix().isApprox(w.transpose() * w));

    Matrix same(3, 2);
    same << 1, 2, 1, 2, 1, 2;
    EXPECT_TRUE(empirical_covariance(same, true).matrix().isZero(1e-15));

    Matrix two(2, 2);
    two << 1, 0, 0, 1;
    Matrix expected(2, 2);
    expected << 0.25, -0.25, -0.25, 0.25;
    EXPECT_TRUE(empirical_covariance(two, true).matrix().isApprox(expected, 1e-15));

    EXPECT_THROW(empirical_covariance(w, true), DataError);
}
