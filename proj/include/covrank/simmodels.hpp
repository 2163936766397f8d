#pragma once

#include "covrank/linalg.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace covrank {

using ScalarFunction = std::function<double(double)>;

/// Node/weight rule on [0, 1].
struct Quadrature {
    Vector nodes;
    Vector weights;

    /// Composite trapezoid rule on `points` equispaced nodes.
    static Quadrature trapezoid(Index points = 2001);
};

/// Functions phi_m = sum_k coeffs(k, m) f_k over a list of raw functions f_k.
class EigenBasis {
public:
    EigenBasis(std::vector<ScalarFunction> raw, Matrix coeffs, double gram_tol = 1e-6);

    Index size() const { return coeffs_.cols(); }
    const Matrix& coefficients() const { return coeffs_; }
    double gram_tol() const { return gram_tol_; }

    /// Rows are points, columns are functions.
    Matrix evaluate(const Vector& points) const;
    Matrix evaluate(const Grid& grid) const { return evaluate(grid.as_vector()); }
    Matrix gram(const Quadrature& quad) const;
    /// The first r functions.
    EigenBasis leading(Index r) const;

private:
    std::vector<ScalarFunction> raw_;
    Matrix coeffs_;
    double gram_tol_;
};

/// Gram-Schmidt in index order under the quadrature inner product. Throws
/// NumericalError if the raw functions are numerically dependent or the
/// result misses orthonormality by more than gram_tol.
EigenBasis orthonormalize_basis(std::vector<ScalarFunction> raw, const Quadrature& quad,
                                double gram_tol = 1e-6);

/// Clamped B-spline basis of the given degree on [0, 1]; it has
/// degree + 1 + interior_knots.size() functions.
std::vector<ScalarFunction> bspline_basis(int degree, const std::vector<double>& interior_knots);

enum class FunctionKind { Constant, Sine, Cosine, Spline };

/// Constant: 1. Sine/Cosine: sqrt(2) sin(2 pi k t) / sqrt(2) cos(2 pi k t)
/// with k = index. Spline: column `index` (0-based) of the orthonormalized
/// spline basis.
struct EigenFunction {
    FunctionKind kind = FunctionKind::Constant;
    int index = 0;

    bool operator==(const EigenFunction&) const = default;
};

struct SplineSpec {
    int degree = 3;
    std::vector<double> knots;

    bool operator==(const SplineSpec&) const = default;
};

enum class ScoreDistribution { Gaussian, SkewedMixture };
enum class NoiseKind { Homoskedastic, Heteroskedastic, GridLinear };
enum class KernelKind { Brownian, Rbf };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Homoskedastic;
    double variance = 1.0;  // used by Homoskedastic only

    bool operator==(const NoiseSpec&) const = default;
};

struct KernelSpec {
    KernelKind kind = KernelKind::Brownian;
    double lengthscale_sq = 10.0;  // Rbf: exp(-(s-t)^2 / lengthscale_sq)

    bool operator==(const KernelSpec&) const = default;
};

struct ModelSpec {
    std::string name = "custom";
    std::vector<double> mean_coeffs;  // ascending powers of t
    std::vector<double> eigenvalues;
    std::vector<EigenFunction> eigenfunctions;
    std::optional<SplineSpec> spline;
    ScoreDistribution scores = ScoreDistribution::Gaussian;
    NoiseSpec noise{};
    std::optional<KernelSpec> kernel;

    void validate() const;
    bool finite_rank() const { return !kernel.has_value(); }
    std::optional<int> true_rank() const;

    bool operator==(const ModelSpec&) const = default;
};

/// A1..A5, S1..S5, SF1..SF3, I1..I4. Throws DataError for unknown names.
ModelSpec named_model(const std::string& name);
std::vector<std::string> named_model_names();

double eval_mean(const ModelSpec& spec, double t);
/// L x r matrix of eigenfunction values (finite-rank specs).
Matrix eigenfunction_values(const ModelSpec& spec, const Grid& grid);
/// Population covariance of the signal at the grid nodes.
Matrix population_covariance(const ModelSpec& spec, const Grid& grid);
/// Measurement-error variances at the grid nodes.
Vector noise_variances(const ModelSpec& spec, const Grid& grid);

/// Five equal blocks; each value is the block mean of `signal_diag` / 1.5.
/// Throws DataError unless the length is a positive multiple of 5.
Vector heteroskedastic_profile(const Vector& signal_diag);

struct GroundTruth {
    Matrix K_X;
    std::optional<int> true_rank;  // empty for infinite rank
    Vector noise_var;
    Matrix signal;  // X part, n x L
    Matrix noise;   // measurement-error part, n x L
};

struct GeneratedData {
    SampleMatrix data;
    GroundTruth truth;
};

/// Draws n curves observed at t_j = j / (L + 1) with measurement error.
GeneratedData generate_model(const ModelSpec& spec, Index n, Index L, std::uint64_t seed);
GeneratedData generate_model(const ModelSpec& spec, Index n, const Grid& grid, std::uint64_t seed);

std::string to_string(FunctionKind k);
std::string to_string(ScoreDistribution s);
std::string to_string(NoiseKind k);
std::string to_string(KernelKind k);
FunctionKind function_kind_from_string(const std::string& s);
ScoreDistribution score_distribution_from_string(const std::string& s);
NoiseKind noise_kind_from_string(const std::string& s);
KernelKind kernel_kind_from_string(const std::string& s);

}  // namespace covrank
