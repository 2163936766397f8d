#include "covrank/lowrank_fit.hpp"

#include "covrank/error.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace covrank {

void FitOptions::validate() const {
    if (max_iters < 1) throw DataError("max_iters must be positive");
    if (!(grad_tol > 0)) throw DataError("grad_tol must be positive");
    if (!(step_rule.initial_step > 0)) throw DataError("initial step must be positive");
    if (!(step_rule.shrink > 0 && step_rule.shrink < 1)) throw DataError("shrink must lie in (0,1)");
    if (!(step_rule.sufficient_decrease > 0 && step_rule.sufficient_decrease < 1))
        throw DataError("sufficient-decrease constant must lie in (0,1)");
    if (restarts < 0) throw DataError("restarts must be nonnegative");
}

LowRankFactor spectral_init(const CovMatrix& K, Index q) {
    if (q < 1 || q > K.size()) throw DataError("spectral_init: q must lie in [1, L]");
    auto eig = sym_eigendecomposition(K);
    Vector root = eig.values.head(q).cwiseMax(0.0).cwiseSqrt();
    return LowRankFactor(eig.vectors.leftCols(q) * root.asDiagonal());
}

namespace {

// Two-loop recursion: approximate inverse-Hessian times g from stored pairs.
Matrix lbfgs_direction(const Matrix& g, const std::deque<Matrix>& S, const std::deque<Matrix>& Y,
                       const std::deque<double>& rho) {
    Matrix d = g;
    const std::size_t m = S.size();
    std::vector<double> a(m);
    for (std::size_t k = m; k-- > 0;) {
        a[k] = rho[k] * (S[k].array() * d.array()).sum();
        d -= a[k] * Y[k];
    }
    if (m > 0) d *= (S.back().array() * Y.back().array()).sum() / Y.back().squaredNorm();
    for (std::size_t k = 0; k < m; ++k) {
        const double b = rho[k] * (Y[k].array() * d.array()).sum();
        d += (a[k] - b) * S[k];
    }
    return -d;
}

}  // namespace

DescentResult descend(const CovMatrix& K, const Matrix& start, const FitOptions& opts) {
    const Matrix& Kmat = K.matrix();
    const Index L = start.rows(), q = start.cols();
    Matrix C = start, trial(L, q), residual(L, L), trial_residual(L, L), grad(L, q), trial_grad(L, q),
           dir(L, q), cross(L, L), quad(L, L), delta(L, L);

    DescentResult out;
    double f = psi_and_grad(C, Kmat, residual, grad);
    out.trace.push_back(f);

    const double c1 = opts.step_rule.sufficient_decrease;
    const double shrink = opts.step_rule.shrink;
    constexpr int kMaxBacktracks = 80;
    constexpr std::size_t kMemory = 8;
    std::deque<Matrix> S, Y;
    std::deque<double> rho;

    int it = 0;
    for (; it < opts.max_iters; ++it) {
        if (grad.norm() <= opts.grad_tol) {
            out.converged = true;
            break;
        }
        dir = lbfgs_direction(grad, S, Y, rho);
        double slope = (dir.array() * grad.array()).sum();
        if (!(slope < 0)) {  // lost descent: fall back to the gradient
            S.clear(), Y.clear(), rho.clear();
            dir = -grad;
            slope = -grad.squaredNorm();
        }

        // The change in Psi along C + t D is evaluated from
        //   Delta = t (D C^T + C D^T) + t^2 D D^T,
        //   Psi(C + t D) - Psi(C) = -2 <P o R, Delta> + ||P o Delta||^2,
        // which stays accurate when the change is far below the rounding
        // level of Psi itself.
        cross.noalias() = dir * C.transpose();
        cross += cross.transpose().eval();
        quad.noalias() = dir * dir.transpose();
        double t = S.empty() ? opts.step_rule.initial_step : 1.0;
        double change = 0.0;
        bool accepted = false;
        for (int k = 0; k < kMaxBacktracks; ++k) {
            delta = t * cross + (t * t) * quad;
            delta.diagonal().setZero();
            change = -2.0 * (residual.array() * delta.array()).sum() + delta.squaredNorm();
            if (change <= c1 * t * slope) {
                accepted = true;
                break;
            }
            t *= shrink;
        }
        if (!accepted) break;  // no representable decrease left

        trial = C + t * dir;
        psi_and_grad(trial, Kmat, trial_residual, trial_grad);
        Matrix s = trial - C, y = trial_grad - grad;
        const double sy = (s.array() * y.array()).sum();
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (S.size() == kMemory) S.pop_front(), Y.pop_front(), rho.pop_front();
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            rho.push_back(1.0 / sy);
        }

        C.swap(trial);
        grad.swap(trial_grad);
        residual.swap(trial_residual);
        f = std::max(0.0, f + change);
        out.trace.push_back(f);
    }
    out.factor = std::move(C);
    out.objective = residual.squaredNorm();
    out.iterations = it;
    return out;
}

RankFit fit_rank(const CovMatrix& K, Index q, const FitOptions& opts) {
    opts.validate();
    const Index L = K.size();
    if (q < 1) throw DataError("fit_rank: q must be at least 1");
    if (q > L) throw DataError("fit_rank: q = " + std::to_string(q) + " exceeds L = " + std::to_string(L));
    if (!K.all_finite()) throw DataError("fit_rank: K has non-finite entries");

    const Matrix start = spectral_init(K, q).matrix();
    const double scale = 0.1 * start.norm() / std::sqrt(double(L * q));

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    RankFit best;
    DescentResult best_run;
    bool have_best = false;
    for (int r = 0; r <= opts.restarts; ++r) {
        Matrix init = start;
        if (r > 0)
            for (Index j = 0; j < q; ++j)
                for (Index i = 0; i < L; ++i) init(i, j) += scale * normal(rng);
        DescentResult run = descend(K, init, opts);
        best.run_objectives.push_back(run.objective);
        if (!have_best || run.objective < best_run.objective) {
            best_run = std::move(run);
            have_best = true;
        }
    }

    best.factor = LowRankFactor(best_run.factor);
    best.theta = CovMatrix(best.factor.gram());
    best.statistic = masked_frobenius_sq(K.matrix(), best.theta.matrix());
    best.iterations = best_run.iterations;
    best.converged = best_run.converged;
    best.objective_trace = std::move(best_run.trace);
    return best;
}

namespace {

// Warm start for rank q+1: previous factor plus a column along the leading
// eigenvector of the masked residual (a zero column is a stationary point).
RankFit refit_from_lower(const CovMatrix& K, const RankFit& lower, const FitOptions& opts) {
    const Matrix& Cq = lower.factor.matrix();
    const Index L = Cq.rows(), q = Cq.cols();
    Matrix padded = Matrix::Zero(L, q + 1);
    padded.leftCols(q) = Cq;

    RankFit kept;
    kept.factor = LowRankFactor(padded);
    kept.theta = CovMatrix(kept.factor.gram());
    kept.statistic = masked_frobenius_sq(K.matrix(), kept.theta.matrix());
    kept.converged = lower.converged;
    kept.objective_trace = {kept.statistic};
    kept.run_objectives = {kept.statistic};

    Matrix R = K.matrix() - lower.theta.matrix();
    R.diagonal().setZero();
    auto eig = sym_eigendecomposition(CovMatrix(R));
    if (eig.values(0) > 0) {
        Matrix start = padded;
        start.col(q) = std::sqrt(eig.values(0)) * eig.vectors.col(0);
        DescentResult run = descend(K, start, opts);
        double stat = masked_frobenius_sq(K.matrix(), run.factor * run.factor.transpose());
        kept.run_objectives.push_back(stat);
        if (stat < kept.statistic) {
            kept.factor = LowRankFactor(run.factor);
            kept.theta = CovMatrix(kept.factor.gram());
            kept.statistic = stat;
            kept.iterations = run.iterations;
            kept.converged = run.converged;
            kept.objective_trace = std::move(run.trace);
        }
    }
    // The padded factor reproduces T_q up to rounding in C C^T; pin it.
    if (kept.statistic > lower.statistic) kept.statistic = lower.statistic;
    return kept;
}

}  // namespace

std::vector<RankFit> scree_fits(const CovMatrix& K, Index q_max, const FitOptions& opts) {
    if (q_max < 1 || q_max > K.size()) throw DataError("scree: q_max must lie in [1, L]");
    std::vector<RankFit> fits;
    fits.reserve(static_cast<std::size_t>(q_max));
    for (Index q = 1; q <= q_max; ++q) {
        RankFit fit = fit_rank(K, q, opts);
        if (!fits.empty() && fit.statistic > fits.back().statistic) {
            RankFit repaired = refit_from_lower(K, fits.back(), opts);
            repaired.run_objectives.insert(repaired.run_objectives.begin(), fit.run_objectives.begin(),
                                           fit.run_objectives.end());
            fit = std::move(repaired);
        }
        fits.push_back(std::move(fit));
    }
    return fits;
}

std::vector<ScreeEntry> scree_from_fits(const CovMatrix& K, const std::vector<RankFit>& fits) {
    std::vector<ScreeEntry> out;
    double prev = masked_frobenius_sq(K.matrix(), Matrix::Zero(K.size(), K.size()));
    Index q = 1;
    for (const auto& fit : fits) {
        out.push_back({q++, fit.statistic, fit.statistic - prev});
        prev = fit.statistic;
    }
    return out;
}

std::vector<ScreeEntry> scree_sequence(const CovMatrix& K, Index q_max, const FitOptions& opts) {
    return scree_from_fits(K, scree_fits(K, q_max, opts));
}

}  // namespace covrank
