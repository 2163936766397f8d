#include "covrank/bootstrap.hpp"

#include "covrank/error.hpp"
#include "covrank/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace covrank {

void BootstrapConfig::validate() const {
    if (B < 1) throw DataError("B must be positive");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DataError("epsilon must lie in (0, 1]");
    if (d < 1) throw DataError("d must be at least 1");
    if (!(ridge >= 0.0)) throw DataError("ridge must be nonnegative");
    if (fixed_M && *fixed_M < 1) throw DataError("fixed M must be at least 1");
    fit.validate();
}

std::vector<std::string> BootstrapConfig::warnings(Index L) const {
    std::vector<std::string> out;
    const Index limit = (L - 1) / 2;
    if (d > limit)
        out.push_back("d = " + std::to_string(d) + " exceeds floor((L-1)/2) = " + std::to_string(limit) +
                      "; identifiability of the higher-rank hypotheses is not guaranteed");
    return out;
}

int select_M(const std::vector<double>& statistics, int q, int d, double epsilon, Index n, double scale) {
    if (statistics.empty()) throw DataError("select_M: no statistics supplied");
    if (n < 2) throw DataError("select_M: n must be at least 2");
    if (!(scale > 0)) throw DataError("select_M: scale must be positive");
    const double threshold = epsilon * (std::log(double(n)) / double(n)) * scale;
    int m_n = d + 1;
    for (int m = q; m <= d; ++m) {
        const std::size_t idx = static_cast<std::size_t>(m - q);
        if (idx >= statistics.size()) break;
        if (statistics[idx] <= threshold) {
            m_n = m;
            break;
        }
    }
    return m_n < d ? m_n : d;
}

NoiseEstimate estimate_noise(const CovMatrix& K_hat, const CovMatrix& theta_M, bool homoskedastic) {
    if (K_hat.size() != theta_M.size()) throw DimensionError("estimate_noise: size mismatch");
    NoiseEstimate out;
    out.diag = (K_hat.matrix().diagonal() - theta_M.matrix().diagonal()).cwiseMax(0.0);
    if (homoskedastic) {
        const double mean = out.diag.mean();
        out.diag.setConstant(mean);
        out.homoskedastic_value = mean;
    }
    return out;
}

namespace {

Eigen::LLT<Matrix> regularized_factor(const CovMatrix& K_hat, double ridge) {
    Matrix A = K_hat.matrix();
    A.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success || !(llt.rcond() > std::numeric_limits<double>::epsilon()))
        throw NumericalError("regularized covariance estimate is singular; the data are degenerate");
    return llt;
}

}  // namespace

Matrix blup_proxies(const Matrix& W, const CovMatrix& theta_q, const CovMatrix& K_hat, double ridge) {
    if (W.cols() != K_hat.size() || theta_q.size() != K_hat.size())
        throw DimensionError("blup_proxies: dimension mismatch");
    auto llt = regularized_factor(K_hat, ridge);
    const Eigen::RowVectorXd mean = W.colwise().mean();
    Matrix centered = W.rowwise() - mean;
    Matrix solved = llt.solve(centered.transpose());  // L x n
    Matrix out = (theta_q.matrix() * solved).transpose();
    out.rowwise() += mean;
    return out;
}

CovMatrix residual_cov(const CovMatrix& theta_q, const CovMatrix& K_hat, const NoiseEstimate& noise,
                       double ridge) {
    if (theta_q.size() != K_hat.size() || noise.diag.size() != K_hat.size())
        throw DimensionError("residual_cov: dimension mismatch");
    auto llt = regularized_factor(K_hat, ridge);
    const Matrix& T = theta_q.matrix();
    Matrix A = T - T * llt.solve(T);
    A.diagonal() += noise.diag;
    return psd_clip(CovMatrix(A));
}

ReplicateSampler::ReplicateSampler(Matrix proxies, const CovMatrix& residual)
    : proxies_(std::move(proxies)) {
    if (residual.size() != proxies_.cols()) throw DimensionError("replicate sampler: dimension mismatch");
    zero_residual_ = residual.matrix().isZero(0.0);
    root_ = zero_residual_ ? Matrix::Zero(residual.size(), residual.size()) : psd_sqrt(residual);
}

Matrix ReplicateSampler::draw(std::mt19937_64& rng) const {
    const Index n = proxies_.rows(), L = proxies_.cols();
    std::uniform_int_distribution<Index> pick(0, n - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(n, L);
    Vector z(L);
    for (Index j = 0; j < n; ++j) {
        out.row(j) = proxies_.row(pick(rng));
        if (!zero_residual_) {
            for (Index l = 0; l < L; ++l) z(l) = normal(rng);
            out.row(j) += (root_ * z).transpose();
        }
    }
    return out;
}

SampleMatrix bootstrap_replicate(const Matrix& proxies, const CovMatrix& residual, std::mt19937_64& rng,
                                 const Grid& grid) {
    ReplicateSampler sampler(proxies, residual);
    return SampleMatrix(sampler.draw(rng), grid);
}

BootstrapContext prepare_bootstrap(const SampleMatrix& W, const BootstrapConfig& cfg) {
    cfg.validate();
    const Index L = W.cols();
    if (L < 3) throw DataError("rank testing needs at least 3 grid nodes");
    if (W.rows() < 2) throw DataError("rank testing needs at least 2 observations");
    if (cfg.d > L) throw DataError("d exceeds the grid size");

    BootstrapContext ctx;
    ctx.W = W.data();
    ctx.grid = W.grid();
    ctx.K_hat = empirical_covariance(W, cfg.center);
    ctx.offdiag_energy = masked_frobenius_sq(ctx.K_hat.matrix(), Matrix::Zero(L, L));
    ctx.ridge = cfg.ridge * ctx.K_hat.matrix().trace() / double(L);
    ctx.fits = scree_fits(ctx.K_hat, cfg.d, cfg.fit);
    return ctx;
}

double right_tail_pvalue(double statistic, const std::vector<double>& replicates) {
    std::size_t exceed = 0;
    for (double t : replicates)
        if (t >= statistic) ++exceed;
    return double(1 + exceed) / double(replicates.size() + 1);
}

BootstrapResult bootstrap_pvalue(const BootstrapContext& ctx, int q, const BootstrapConfig& cfg) {
    cfg.validate();
    if (q < 1 || q > static_cast<int>(ctx.fits.size()))
        throw DataError("bootstrap_pvalue: q = " + std::to_string(q) + " outside [1, d]");
    const int d = static_cast<int>(ctx.fits.size());
    const Index n = ctx.W.rows();
    const RankFit& fit_q = ctx.fits[static_cast<std::size_t>(q - 1)];

    int M = 0;
    if (cfg.fixed_M) {
        M = std::clamp(*cfg.fixed_M, q, d);
    } else {
        std::vector<double> tail;
        for (int m = q; m <= d; ++m) tail.push_back(ctx.fits[static_cast<std::size_t>(m - 1)].statistic);
        const double scale = cfg.scaled_threshold ? ctx.offdiag_energy : 1.0;
        M = select_M(tail, q, d, cfg.epsilon, n, scale > 0 ? scale : 1.0);
    }

    BootstrapResult out;
    out.statistic = fit_q.statistic;
    out.noise = estimate_noise(ctx.K_hat, ctx.fits[static_cast<std::size_t>(M - 1)].theta, cfg.homoskedastic);
    out.noise.M_used = M;

    const Matrix proxies = blup_proxies(ctx.W, fit_q.theta, ctx.K_hat, ctx.ridge);
    const CovMatrix residual = residual_cov(fit_q.theta, ctx.K_hat, out.noise, ctx.ridge);
    const ReplicateSampler sampler(proxies, residual);

    out.replicate_statistics.assign(static_cast<std::size_t>(cfg.B), 0.0);
    parallel_for(static_cast<std::size_t>(cfg.B), cfg.threads, [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 1000u + static_cast<unsigned>(q), b));
        Matrix zeta = sampler.draw(rng);
        FitOptions opts = cfg.fit;
        opts.seed = derive_seed(cfg.seed, 2000u + static_cast<unsigned>(q), b);
        CovMatrix K_star = empirical_covariance(zeta, cfg.center);
        out.replicate_statistics[b] = fit_rank(K_star, q, opts).statistic;
    });
    // Statistics at the rounding floor are exact zeros; comparing their noise
    // would make the p-value of an exactly attained null arbitrary.
    const double floor = kStatisticFloor * ctx.offdiag_energy;
    auto snap = [floor](double t) { return t <= floor ? 0.0 : t; };
    std::vector<double> snapped(out.replicate_statistics.size());
    std::transform(out.replicate_statistics.begin(), out.replicate_statistics.end(), snapped.begin(), snap);
    out.p_value = right_tail_pvalue(snap(out.statistic), snapped);
    return out;
}

BootstrapResult bootstrap_pvalue(const SampleMatrix& W, int q, const BootstrapConfig& cfg) {
    return bootstrap_pvalue(prepare_bootstrap(W, cfg), q, cfg);
}

}  // namespace covrank
