#pragma once

// Re-ranked bootstrap for H_{0,q}: rank(K_X) = q against rank(K_X) > q.
//
//   1. Theta_q minimizes the masked misfit over rank <= q (PSD by factoring).
//   2. Proxies  m(W_i) = Wbar + Theta_q (K + ridge I)^{-1} (W_i - Wbar).
//   3. Noise    D_jj = max(K_jj - Theta_M(j,j), 0), M from the threshold rule,
//               optionally averaged over j (homoskedastic errors).
//   4. Replicate rows: a proxy drawn with replacement plus a centered Gaussian
//      with covariance D + Theta_q - Theta_q (K + ridge I)^{-1} Theta_q.
//   5. T*_q is the rank-q statistic of the replicate covariance; the p-value
//      is (1 + #{T* >= T_q}) / (B + 1).

#include "covrank/linalg.hpp"
#include "covrank/lowrank_fit.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace covrank {

/// Statistics at or below this multiple of ||P o K_hat||_F^2 are treated as 0
/// when computing p-values.
inline constexpr double kStatisticFloor = 1e-16;

struct BootstrapConfig {
    int B = 500;
    double epsilon = 1.0;
    int d = 1;
    bool homoskedastic = false;
    double ridge = 1e-10;  // multiplied by trace(K) / L
    std::uint64_t seed = 0;
    FitOptions fit{};
    // Covariances (data and replicates) are taken around the sample mean.
    bool center = true;
    // Threshold of the M rule is epsilon (log n / n) ||P o K||_F^2; with this
    // off it is epsilon (log n / n).
    bool scaled_threshold = true;
    // Fixed M instead of the threshold rule (clamped to [q, d]).
    std::optional<int> fixed_M;
    unsigned threads = 1;

    void validate() const;
    /// Warnings for settings that are legal but outside the recommended range.
    std::vector<std::string> warnings(Index L) const;
    bool operator==(const BootstrapConfig&) const = default;
};

struct NoiseEstimate {
    Vector diag;
    int M_used = 0;
    std::optional<double> homoskedastic_value;

    Matrix as_matrix() const { return diag.asDiagonal(); }
};

/// M = m_n if m_n < d else d, with m_n the smallest m in [q, d] such that
/// T_m <= epsilon (log n / n) scale. `statistics` holds T_q, ..., T_d.
int select_M(const std::vector<double>& statistics, int q, int d, double epsilon, Index n,
             double scale);

NoiseEstimate estimate_noise(const CovMatrix& K_hat, const CovMatrix& theta_M, bool homoskedastic);

/// Rows W_bar + Theta_q (K_hat + ridge I)^{-1} (W_i - W_bar). Throws
/// NumericalError when the regularized K_hat is singular.
Matrix blup_proxies(const Matrix& W, const CovMatrix& theta_q, const CovMatrix& K_hat, double ridge);

/// D + Theta_q - Theta_q (K_hat + ridge I)^{-1} Theta_q, clipped to PSD.
CovMatrix residual_cov(const CovMatrix& theta_q, const CovMatrix& K_hat, const NoiseEstimate& noise,
                       double ridge);

/// Draws replicates zeta_j = U*_j + V*_j: U* resampled from proxy rows, V*
/// Gaussian with a fixed covariance (held through its symmetric root).
class ReplicateSampler {
public:
    ReplicateSampler(Matrix proxies, const CovMatrix& residual);

    Matrix draw(std::mt19937_64& rng) const;
    Index rows() const { return proxies_.rows(); }

private:
    Matrix proxies_;
    Matrix root_;
    bool zero_residual_;
};

SampleMatrix bootstrap_replicate(const Matrix& proxies, const CovMatrix& residual, std::mt19937_64& rng,
                                 const Grid& grid);

/// Everything the per-q bootstrap reuses: the covariance estimate and the
/// scree fits for q = 1..d.
struct BootstrapContext {
    Matrix W;
    Grid grid = Grid::regular(2);
    CovMatrix K_hat;
    std::vector<RankFit> fits;  // fits[q-1] is the rank-q fit
    double offdiag_energy = 0.0;  // ||P o K_hat||_F^2
    double ridge = 0.0;           // absolute ridge added before inversion
};

BootstrapContext prepare_bootstrap(const SampleMatrix& W, const BootstrapConfig& cfg);

struct BootstrapResult {
    double p_value = 1.0;
    double statistic = 0.0;
    std::vector<double> replicate_statistics;
    NoiseEstimate noise;
};

BootstrapResult bootstrap_pvalue(const BootstrapContext& ctx, int q, const BootstrapConfig& cfg);
BootstrapResult bootstrap_pvalue(const SampleMatrix& W, int q, const BootstrapConfig& cfg);

/// (1 + #{T* >= T}) / (B + 1).
double right_tail_pvalue(double statistic, const std::vector<double>& replicates);

}  // namespace covrank
