#include "covrank/simmodels.hpp"

#include "covrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace covrank {

Quadrature Quadrature::trapezoid(Index points) {
    if (points < 2) throw DataError("trapezoid rule needs at least 2 points");
    Quadrature q;
    q.nodes = Vector::LinSpaced(points, 0.0, 1.0);
    const double h = 1.0 / double(points - 1);
    q.weights = Vector::Constant(points, h);
    q.weights(0) = q.weights(points - 1) = h / 2;
    return q;
}

EigenBasis::EigenBasis(std::vector<ScalarFunction> raw, Matrix coeffs, double gram_tol)
    : raw_(std::move(raw)), coeffs_(std::move(coeffs)), gram_tol_(gram_tol) {
    if (coeffs_.rows() != static_cast<Index>(raw_.size()))
        throw DimensionError("eigen basis: coefficient rows must match the raw functions");
}

Matrix EigenBasis::evaluate(const Vector& points) const {
    Matrix F(points.size(), static_cast<Index>(raw_.size()));
    for (Index k = 0; k < F.cols(); ++k)
        for (Index i = 0; i < points.size(); ++i) F(i, k) = raw_[static_cast<std::size_t>(k)](points(i));
    return F * coeffs_;
}

Matrix EigenBasis::gram(const Quadrature& quad) const {
    const Matrix Phi = evaluate(quad.nodes);
    return Phi.transpose() * quad.weights.asDiagonal() * Phi;
}

EigenBasis EigenBasis::leading(Index r) const {
    if (r < 1 || r > size()) throw DataError("eigen basis: cannot keep " + std::to_string(r) + " functions");
    return EigenBasis(raw_, coeffs_.leftCols(r), gram_tol_);
}

EigenBasis orthonormalize_basis(std::vector<ScalarFunction> raw, const Quadrature& quad, double gram_tol) {
    if (raw.empty()) throw DataError("orthonormalize_basis: no functions supplied");
    const Index k = static_cast<Index>(raw.size());
    EigenBasis identity(raw, Matrix::Identity(k, k), gram_tol);
    const Matrix G = identity.gram(quad);

    // G = R^T R with R upper triangular; phi = f R^{-1} is Gram-Schmidt in index order.
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success)
        throw NumericalError("orthonormalize_basis: raw functions are linearly dependent");
    const Matrix R = llt.matrixU();
    const double scale = std::sqrt(G.diagonal().maxCoeff());
    if (R.diagonal().minCoeff() <= 1e-8 * scale)
        throw NumericalError("orthonormalize_basis: raw Gram matrix is numerically rank deficient");
    Matrix coeffs = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));

    EigenBasis out(std::move(raw), std::move(coeffs), gram_tol);
    const double err = (out.gram(quad) - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
    if (err > gram_tol) throw NumericalError("orthonormalize_basis: Gram error " + std::to_string(err));
    return out;
}

namespace {

// All clamped B-spline values at t (Cox-de Boor).
Vector bspline_values(int degree, const std::vector<double>& knots, double t) {
    const Index count = static_cast<Index>(knots.size()) - degree - 1;
    const Index spans = static_cast<Index>(knots.size()) - 1;
    Vector N = Vector::Zero(spans);
    if (t >= knots.back()) {
        N(count - 1) = 1.0;
        return N.head(count);
    }
    for (Index i = 0; i < spans; ++i)
        if (knots[i] <= t && t < knots[i + 1]) N(i) = 1.0;
    for (int p = 1; p <= degree; ++p) {
        for (Index i = 0; i + p < spans; ++i) {
            double v = 0.0;
            const double left = knots[i + p] - knots[i];
            const double right = knots[i + p + 1] - knots[i + 1];
            if (left > 0) v += (t - knots[i]) / left * N(i);
            if (right > 0) v += (knots[i + p + 1] - t) / right * N(i + 1);
            N(i) = v;
        }
    }
    return N.head(count);
}

}  // namespace

std::vector<ScalarFunction> bspline_basis(int degree, const std::vector<double>& interior_knots) {
    if (degree < 1) throw DataError("spline degree must be at least 1");
    std::vector<double> knots(static_cast<std::size_t>(degree + 1), 0.0);
    double prev = 0.0;
    for (double k : interior_knots) {
        if (!(k > prev && k < 1.0)) throw DataError("spline knots must be strictly increasing inside (0, 1)");
        knots.push_back(k);
        prev = k;
    }
    knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), 1.0);
    const int count = degree + 1 + static_cast<int>(interior_knots.size());
    std::vector<ScalarFunction> out;
    for (int i = 0; i < count; ++i)
        out.push_back([degree, knots, i](double t) { return bspline_values(degree, knots, t)(i); });
    return out;
}

std::optional<int> ModelSpec::true_rank() const {
    if (kernel) return std::nullopt;
    return static_cast<int>(eigenvalues.size());
}

void ModelSpec::validate() const {
    const bool has_eigen = !eigenvalues.empty() || !eigenfunctions.empty();
    if (has_eigen == kernel.has_value())
        throw DataError("model " + name + ": exactly one of eigen expansion and kernel must be given");
    for (double c : mean_coeffs)
        if (!std::isfinite(c)) throw DataError("model " + name + ": non-finite mean coefficient");
    if (!(noise.variance >= 0.0 && std::isfinite(noise.variance)))
        throw DataError("model " + name + ": noise variance must be finite and nonnegative");
    if (kernel) {
        if (scores != ScoreDistribution::Gaussian)
            throw DataError("model " + name + ": kernel models are Gaussian");
        if (kernel->kind == KernelKind::Rbf && !(kernel->lengthscale_sq > 0))
            throw DataError("model " + name + ": lengthscale must be positive");
        return;
    }
    if (eigenvalues.size() != eigenfunctions.size())
        throw DataError("model " + name + ": eigenvalue and eigenfunction counts differ");
    for (double l : eigenvalues)
        if (!(l > 0 && std::isfinite(l))) throw DataError("model " + name + ": eigenvalues must be positive");
    int spline_dim = 0;
    if (spline) {
        for (double k : spline->knots)
            if (!(k > 0 && k < 1)) throw DataError("model " + name + ": spline knots must lie in (0, 1)");
        if (!std::is_sorted(spline->knots.begin(), spline->knots.end()))
            throw DataError("model " + name + ": spline knots must be increasing");
        if (spline->degree < 1) throw DataError("model " + name + ": spline degree must be at least 1");
        spline_dim = spline->degree + 1 + static_cast<int>(spline->knots.size());
    }
    for (const auto& f : eigenfunctions) {
        if (f.kind == FunctionKind::Spline) {
            if (!spline) throw DataError("model " + name + ": spline eigenfunction without a spline basis");
            if (f.index < 0 || f.index >= spline_dim)
                throw DataError("model " + name + ": spline index out of range");
        } else if ((f.kind == FunctionKind::Sine || f.kind == FunctionKind::Cosine) && f.index < 1) {
            throw DataError("model " + name + ": trigonometric frequency must be at least 1");
        }
    }
}

namespace {

ModelSpec trig_model(std::string name, std::vector<double> mean, std::vector<double> lambda,
                     std::vector<EigenFunction> phi, double sigma2) {
    ModelSpec s;
    s.name = std::move(name);
    s.mean_coeffs = std::move(mean);
    s.eigenvalues = std::move(lambda);
    s.eigenfunctions = std::move(phi);
    s.noise = {NoiseKind::Homoskedastic, sigma2};
    return s;
}

ModelSpec spline_model(std::string name, int degree, std::vector<double> knots, std::vector<double> lambda,
                       double sigma2, ScoreDistribution scores) {
    ModelSpec s;
    s.name = std::move(name);
    s.mean_coeffs = {1.8, -6.0, 5.0};
    for (int m = 0; m < static_cast<int>(lambda.size()); ++m) s.eigenfunctions.push_back({FunctionKind::Spline, m});
    s.eigenvalues = std::move(lambda);
    s.spline = SplineSpec{degree, std::move(knots)};
    s.scores = scores;
    s.noise = {NoiseKind::Homoskedastic, sigma2};
    return s;
}

ModelSpec kernel_model(std::string name, KernelKind kind, NoiseSpec noise) {
    ModelSpec s;
    s.name = std::move(name);
    s.kernel = KernelSpec{kind, 10.0};
    s.noise = noise;
    return s;
}

constexpr EigenFunction kOne{FunctionKind::Constant, 0};
EigenFunction sine(int k) { return {FunctionKind::Sine, k}; }
EigenFunction cosine(int k) { return {FunctionKind::Cosine, k}; }

std::vector<EigenFunction> six_trig() { return {kOne, sine(1), cosine(1), sine(2), cosine(2), sine(3)}; }

}  // namespace

ModelSpec named_model(const std::string& name) {
    const std::vector<double> a1_mean{1.8, -6.0, 5.0};
    const std::vector<double> a3_mean{1.875, -12.5, 12.5};
    const auto mix = ScoreDistribution::SkewedMixture;
    const auto gauss = ScoreDistribution::Gaussian;

    if (name == "A1") return trig_model(name, a1_mean, {0.6, 0.3, 0.1}, {kOne, sine(1), cosine(1)}, 1.0);
    if (name == "A2") {
        auto s = trig_model(name, a1_mean, {0.6, 0.3, 0.1}, {kOne, sine(1), cosine(2)}, 1.0);
        s.scores = mix;
        return s;
    }
    if (name == "A3") return trig_model(name, a3_mean, {4, 2, 1}, {kOne, cosine(1), sine(2)}, 2.0);
    if (name == "A4") {
        auto s = trig_model(name, a3_mean, {4, 2, 1}, {kOne, cosine(1), sine(2)}, 2.0);
        s.scores = mix;
        return s;
    }
    if (name == "A5") return trig_model(name, {}, {4, 3.5, 3, 2.5, 2, 1.5}, six_trig(), 3.0);
    if (name == "S1") return spline_model(name, 3, {0.3, 0.5, 0.7}, {2, 1.7, 1.4, 1.1, 0.8, 0.5}, 3.0, gauss);
    if (name == "S2") return spline_model(name, 3, {0.3, 0.5, 0.7}, {2, 1.7, 1.4, 1.1, 0.8, 0.5}, 3.0, mix);
    if (name == "S3") return spline_model(name, 2, {0.2, 0.6}, {1.4, 1.1, 0.8, 0.5}, 2.0, gauss);
    if (name == "S4") return spline_model(name, 2, {0.2, 0.6}, {1.4, 1.1, 0.8, 0.5}, 2.0, mix);
    if (name == "S5") return spline_model(name, 1, {0.2, 0.6}, {1.1, 0.8, 0.5}, 1.0, mix);
    if (name == "SF1") return trig_model(name, a1_mean, {4, 0.2, 0.1}, {kOne, sine(1), cosine(1)}, 1.0);
    if (name == "SF2") return trig_model(name, {}, {5, 4, 0.2, 0.2, 0.1, 0.1}, six_trig(), 1.0);
    if (name == "SF3") return trig_model(name, {}, {4, 3.5, 3, 0.3, 0.2, 0.1}, six_trig(), 3.0);
    if (name == "I1") return kernel_model(name, KernelKind::Brownian, {NoiseKind::Homoskedastic, 1.0});
    if (name == "I2") return kernel_model(name, KernelKind::Rbf, {NoiseKind::Homoskedastic, 1.0});
    if (name == "I3") return kernel_model(name, KernelKind::Brownian, {NoiseKind::GridLinear, 1.0});
    if (name == "I4") return kernel_model(name, KernelKind::Rbf, {NoiseKind::GridLinear, 1.0});
    throw DataError("unknown model '" + name + "'");
}

std::vector<std::string> named_model_names() {
    return {"A1", "A2", "A3", "A4", "A5", "S1", "S2", "S3", "S4", "S5", "SF1", "SF2", "SF3", "I1", "I2", "I3", "I4"};
}

double eval_mean(const ModelSpec& spec, double t) {
    double v = 0.0;
    for (auto it = spec.mean_coeffs.rbegin(); it != spec.mean_coeffs.rend(); ++it) v = v * t + *it;
    return v;
}

Matrix eigenfunction_values(const ModelSpec& spec, const Grid& grid) {
    spec.validate();
    if (!spec.finite_rank()) throw DataError("model " + spec.name + " has no finite eigen expansion");
    const Vector t = grid.as_vector();
    const Index L = t.size(), r = static_cast<Index>(spec.eigenfunctions.size());
    Matrix spline_vals;
    if (spec.spline) {
        auto basis = orthonormalize_basis(bspline_basis(spec.spline->degree, spec.spline->knots),
                                          Quadrature::trapezoid());
        spline_vals = basis.evaluate(t);
    }
    const double root2 = std::numbers::sqrt2;
    const double two_pi = 2.0 * std::numbers::pi;
    Matrix Phi(L, r);
    for (Index m = 0; m < r; ++m) {
        const auto& f = spec.eigenfunctions[static_cast<std::size_t>(m)];
        for (Index j = 0; j < L; ++j) {
            switch (f.kind) {
                case FunctionKind::Constant: Phi(j, m) = 1.0; break;
                case FunctionKind::Sine: Phi(j, m) = root2 * std::sin(two_pi * f.index * t(j)); break;
                case FunctionKind::Cosine: Phi(j, m) = root2 * std::cos(two_pi * f.index * t(j)); break;
                case FunctionKind::Spline: Phi(j, m) = spline_vals(j, f.index); break;
            }
        }
    }
    return Phi;
}

Matrix population_covariance(const ModelSpec& spec, const Grid& grid) {
    spec.validate();
    const Vector t = grid.as_vector();
    const Index L = t.size();
    if (spec.finite_rank()) {
        const Matrix Phi = eigenfunction_values(spec, grid);
        const Vector lambda = Eigen::Map<const Vector>(spec.eigenvalues.data(), Phi.cols());
        return Phi * lambda.asDiagonal() * Phi.transpose();
    }
    Matrix K(L, L);
    for (Index i = 0; i < L; ++i)
        for (Index j = 0; j < L; ++j) {
            if (spec.kernel->kind == KernelKind::Brownian)
                K(i, j) = std::min(t(i), t(j));
            else
                K(i, j) = std::exp(-(t(i) - t(j)) * (t(i) - t(j)) / spec.kernel->lengthscale_sq);
        }
    return K;
}

Vector heteroskedastic_profile(const Vector& signal_diag) {
    const Index L = signal_diag.size();
    if (L < 5 || L % 5 != 0)
        throw DataError("heteroskedastic profile needs a grid size divisible by 5, got " + std::to_string(L));
    const Index U = L / 5;
    Vector out(L);
    for (Index p = 0; p < 5; ++p) out.segment(p * U, U).setConstant(signal_diag.segment(p * U, U).mean() / 1.5);
    return out;
}

Vector noise_variances(const ModelSpec& spec, const Grid& grid) {
    const Index L = grid.size();
    switch (spec.noise.kind) {
        case NoiseKind::Homoskedastic: return Vector::Constant(L, spec.noise.variance);
        case NoiseKind::GridLinear: return grid.as_vector();
        case NoiseKind::Heteroskedastic:
            return heteroskedastic_profile(population_covariance(spec, grid).diagonal());
    }
    return Vector::Zero(L);
}

GeneratedData generate_model(const ModelSpec& spec, Index n, Index L, std::uint64_t seed) {
    return generate_model(spec, n, Grid::regular(L), seed);
}

GeneratedData generate_model(const ModelSpec& spec, Index n, const Grid& grid, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw DataError("generate_model: n must be positive");
    const Index L = grid.size();
    const Vector t = grid.as_vector();

    GroundTruth truth;
    truth.K_X = population_covariance(spec, grid);
    truth.true_rank = spec.true_rank();
    truth.noise_var = noise_variances(spec, grid);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution upper(1.0 / 3.0);

    Vector mu(L);
    for (Index j = 0; j < L; ++j) mu(j) = eval_mean(spec, t(j));

    truth.signal.resize(n, L);
    if (spec.finite_rank()) {
        const Matrix Phi = eigenfunction_values(spec, grid);
        const Index r = Phi.cols();
        Vector scores(r);
        for (Index i = 0; i < n; ++i) {
            for (Index m = 0; m < r; ++m) {
                const double lambda = spec.eigenvalues[static_cast<std::size_t>(m)];
                if (spec.scores == ScoreDistribution::Gaussian) {
                    scores(m) = std::sqrt(lambda) * normal(rng);
                } else {
                    const double s = std::sqrt(lambda / 3.0);
                    const double centre = upper(rng) ? 2.0 * s : -s;
                    scores(m) = centre + s * normal(rng);
                }
            }
            truth.signal.row(i) = (mu + Phi * scores).transpose();
        }
    } else {
        const Matrix root = psd_sqrt(CovMatrix(truth.K_X));
        Vector z(L);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < L; ++j) z(j) = normal(rng);
            truth.signal.row(i) = (mu + root * z).transpose();
        }
    }

    const Vector sd = truth.noise_var.cwiseSqrt();
    truth.noise.resize(n, L);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < L; ++j) truth.noise(i, j) = sd(j) * normal(rng);

    Matrix W = truth.signal + truth.noise;
    return GeneratedData{SampleMatrix(std::move(W), grid), std::move(truth)};
}

std::string to_string(FunctionKind k) {
    switch (k) {
        case FunctionKind::Constant: return "constant";
        case FunctionKind::Sine: return "sine";
        case FunctionKind::Cosine: return "cosine";
        case FunctionKind::Spline: return "spline";
    }
    return "?";
}

std::string to_string(ScoreDistribution s) {
    return s == ScoreDistribution::Gaussian ? "gaussian" : "skewed-mixture";
}

std::string to_string(NoiseKind k) {
    switch (k) {
        case NoiseKind::Homoskedastic: return "homoskedastic";
        case NoiseKind::Heteroskedastic: return "heteroskedastic";
        case NoiseKind::GridLinear: return "grid-linear";
    }
    return "?";
}

std::string to_string(KernelKind k) { return k == KernelKind::Brownian ? "brownian" : "rbf"; }

FunctionKind function_kind_from_string(const std::string& s) {
    for (auto k : {FunctionKind::Constant, FunctionKind::Sine, FunctionKind::Cosine, FunctionKind::Spline})
        if (to_string(k) == s) return k;
    throw DataError("unknown eigenfunction kind '" + s + "'");
}

ScoreDistribution score_distribution_from_string(const std::string& s) {
    for (auto k : {ScoreDistribution::Gaussian, ScoreDistribution::SkewedMixture})
        if (to_string(k) == s) return k;
    throw DataError("unknown score distribution '" + s + "'");
}

NoiseKind noise_kind_from_string(const std::string& s) {
    for (auto k : {NoiseKind::Homoskedastic, NoiseKind::Heteroskedastic, NoiseKind::GridLinear})
        if (to_string(k) == s) return k;
    throw DataError("unknown noise kind '" + s + "'");
}

KernelKind kernel_kind_from_string(const std::string& s) {
    for (auto k : {KernelKind::Brownian, KernelKind::Rbf})
        if (to_string(k) == s) return k;
    throw DataError("unknown kernel '" + s + "'");
}

}  // namespace covrank
