#include "covrank/error.hpp"
#include "covrank/simmodels.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace covrank;
using namespace covrank::testing;

TEST(Basis, ConstantAndLinear) {
    const auto quad = Quadrature::trapezoid();
    auto b1 = orthonormalize_basis({[](double) { return 1.0; }}, quad);
    EXPECT_NEAR(b1.evaluate(Vector::LinSpaced(3, 0, 1))(1, 0), 1.0, 1e-12);

    auto b2 = orthonormalize_basis({[](double) { return 1.0; }, [](double t) { return t; }}, quad);
    const Vector pts = Vector::LinSpaced(5, 0, 1);
    const Matrix F = b2.evaluate(pts);
    for (Index i = 0; i < 5; ++i) EXPECT_NEAR(F(i, 1), std::sqrt(12.0) * (pts(i) - 0.5), 1e-6);
}

TEST(Basis, DependentFunctionsThrow) {
    EXPECT_THROW(orthonormalize_basis({[](double t) { return t; }, [](double t) { return 2 * t; }},
                                      Quadrature::trapezoid()),
                 NumericalError);
}

TEST(Basis, CubicSplinesAreOrthonormal) {
    const auto raw = bspline_basis(3, {0.3, 0.5, 0.7});
    EXPECT_EQ(raw.size(), 7u);
    // partition of unity
    for (double t : {0.0, 0.1, 0.42, 0.77, 1.0}) {
        double s = 0.0;
        for (const auto& f : raw) s += f(t);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    const auto quad = Quadrature::trapezoid();
    const auto basis = orthonormalize_basis(raw, quad);
    EXPECT_LE((basis.gram(quad) - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(basis.leading(3).size(), 3);
}

TEST(Models, A1CovarianceClosedForm) {
    const Grid g = Grid::regular(10);
    const Matrix K = population_covariance(named_model("A1"), g);
    const double tp = 2.0 * std::numbers::pi;
    for (Index i = 0; i < 10; ++i)
        for (Index j = 0; j < 10; ++j) {
            const double s = g[i], t = g[j];
            const double expected = 0.6 + 0.3 * 2 * std::sin(tp * s) * std::sin(tp * t) +
                                    0.1 * 2 * std::cos(tp * s) * std::cos(tp * t);
            EXPECT_NEAR(K(i, j), expected, 1e-12);
        }
}

TEST(Models, BrownianKernel) {
    const Grid g = Grid::regular(6);
    const Matrix K = population_covariance(named_model("I1"), g);
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j) EXPECT_DOUBLE_EQ(K(i, j), std::min(g[i], g[j]));
    EXPECT_FALSE(named_model("I1").true_rank().has_value());
}

TEST(Models, MeanFunction) {
    const auto spec = named_model("A1");
    EXPECT_NEAR(eval_mean(spec, 0.5), 1.8 - 3.0 + 1.25, 1e-15);
    EXPECT_EQ(eval_mean(named_model("A5"), 0.3), 0.0);
}

TEST(Models, AllNamedModelsGenerate) {
    for (const auto& name : named_model_names()) {
        const auto spec = named_model(name);
        const auto gen = generate_model(spec, 20, 25, 1);
        EXPECT_EQ(gen.data.rows(), 20) << name;
        EXPECT_EQ(gen.data.cols(), 25) << name;
        EXPECT_TRUE(gen.data.data().allFinite()) << name;
        if (spec.finite_rank()) {
            auto e = sym_eigendecomposition(CovMatrix(gen.truth.K_X));
            const int r = *spec.true_rank();
            EXPECT_GT(e.values(r - 1), 1e-6 * e.values(0)) << name;
            if (r < 25) EXPECT_LE(std::abs(e.values(r)), 1e-9 * e.values(0)) << name;
        }
    }
    EXPECT_THROW(named_model("Z9"), DataError);
}

TEST(Models, SpecValidation) {
    ModelSpec s = named_model("A1");
    s.eigenvalues.push_back(0.1);
    EXPECT_THROW(s.validate(), DataError);
    s = named_model("A1");
    s.eigenvalues[0] = -1;
    EXPECT_THROW(s.validate(), DataError);
    s = named_model("I1");
    s.eigenvalues = {1.0};
    s.eigenfunctions = {EigenFunction{}};
    EXPECT_THROW(s.validate(), DataError);
}

TEST(Scores, SkewedMixtureMoments) {
    ModelSpec s;
    s.eigenvalues = {2.0};
    s.eigenfunctions = {EigenFunction{}};
    s.scores = ScoreDistribution::SkewedMixture;
    s.noise.variance = 0.0;
    const Index n = 100000;
    const auto gen = generate_model(s, n, 3, 8);
    const Vector x = gen.truth.signal.col(0);
    const double mean = x.mean();
    const double var = (x.array() - mean).square().sum() / double(n - 1);
    EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(2.0 / double(n)));
    EXPECT_NEAR(var, 2.0, 0.05 * 2.0);
    const double skew = (x.array() - mean).cube().mean() / std::pow(var, 1.5);
    EXPECT_GT(skew, 0.1);
}

TEST(Generator, EmpiricalCovarianceMatchesTruth) {
    const auto spec = named_model("A1");
    const Index n = 10000;
    const auto gen = generate_model(spec, n, 10, 17);
    const Matrix Ks = empirical_covariance(gen.truth.signal).matrix();
    const double scale = gen.truth.K_X.cwiseAbs().maxCoeff();
    EXPECT_LE((Ks - gen.truth.K_X).cwiseAbs().maxCoeff(), 0.05 * scale);
    EXPECT_TRUE((gen.truth.signal + gen.truth.noise).isApprox(gen.data.data()));
}

TEST(Generator, NoiseIsIndependentOfSignal) {
    const Index n = 10000;
    const auto gen = generate_model(named_model("A1"), n, 10, 23);
    const Matrix S = gen.truth.signal.rowwise() - gen.truth.signal.colwise().mean();
    const Matrix E = gen.truth.noise;
    for (Index j = 0; j < 10; ++j) {
        const double c = S.col(j).dot(E.col(j)) / (S.col(j).norm() * E.col(j).norm());
        EXPECT_LE(std::abs(c), 4.0 / std::sqrt(double(n)));
        EXPECT_NEAR(E.col(j).squaredNorm() / double(n), 1.0, 0.06);
    }
}

TEST(Generator, Deterministic) {
    const auto a = generate_model(named_model("S2"), 30, 15, 5);
    const auto b = generate_model(named_model("S2"), 30, 15, 5);
    const auto c = generate_model(named_model("S2"), 30, 15, 6);
    EXPECT_EQ(a.data.data(), b.data.data());
    EXPECT_NE(a.data.data(), c.data.data());
}

TEST(Noise, HeteroskedasticProfile) {
    const Vector diag = Vector::LinSpaced(10, 1, 10);
    Vector expected(10);
    expected << 1.5, 1.5, 3.5, 3.5, 5.5, 5.5, 7.5, 7.5, 9.5, 9.5;
    EXPECT_TRUE(heteroskedastic_profile(diag).isApprox(expected / 1.5, 1e-14));
    EXPECT_THROW(heteroskedastic_profile(Vector::Ones(12)), DataError);

    ModelSpec s = named_model("A1");
    s.noise.kind = NoiseKind::Heteroskedastic;
    const Grid g = Grid::regular(25);
    const Vector v = noise_variances(s, g);
    const Vector d = population_covariance(s, g).diagonal();
    for (Index p = 0; p < 5; ++p) EXPECT_NEAR(v(5 * p), d.segment(5 * p, 5).mean() / 1.5, 1e-12);
}

TEST(Noise, GridLinear) {
    const Grid g = Grid::regular(4);
    EXPECT_TRUE(noise_variances(named_model("I3"), g).isApprox(g.as_vector()));
}

TEST(Enums, StringRoundTrip) {
    for (auto k : {FunctionKind::Constant, FunctionKind::Sine, FunctionKind::Cosine, FunctionKind::Spline})
        EXPECT_EQ(function_kind_from_string(to_string(k)), k);
    for (auto k : {NoiseKind::Homoskedastic, NoiseKind::Heteroskedastic, NoiseKind::GridLinear})
        EXPECT_EQ(noise_kind_from_string(to_string(k)), k);
    for (auto k : {ScoreDistribution::Gaussian, ScoreDistribution::SkewedMixture})
        EXPECT_EQ(score_distribution_from_string(to_string(k)), k);
    for (auto k : {KernelKind::Brownian, KernelKind::Rbf}) EXPECT_EQ(kernel_kind_from_string(to_string(k)), k);
    EXPECT_THROW(noise_kind_from_string("loud"), DataError);
}
