#pragma once

// Rank-constrained off-diagonal least squares:
//   T_q = min_{rank(Theta) <= q} ||P_L o (K - Theta)||_F^2,
// solved over factors Theta = C C^T by limited-memory quasi-Newton descent
// with a backtracking line search, started from the truncated spectral factor
// and from a few perturbations of it.

#include "covrank/linalg.hpp"
#include "covrank/objective.hpp"

#include <cstdint>
#include <vector>

namespace covrank {

struct StepRule {
    double initial_step = 1.0;
    double shrink = 0.5;
    double sufficient_decrease = 1e-4;

    bool operator==(const StepRule&) const = default;
};

struct FitOptions {
    int max_iters = 2000;
    double grad_tol = 1e-9;
    StepRule step_rule{};
    int restarts = 4;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const FitOptions&) const = default;
};

struct RankFit {
    CovMatrix theta;
    LowRankFactor factor;
    double statistic = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
    // Final objective of every run: spectral start first, then each restart.
    std::vector<double> run_objectives;
};

/// V_q max(Lambda_q, 0)^{1/2} from the eigendecomposition of K.
LowRankFactor spectral_init(const CovMatrix& K, Index q);

struct DescentResult {
    Matrix factor;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

/// One monotone descent run from `start`.
DescentResult descend(const CovMatrix& K, const Matrix& start, const FitOptions& opts);

RankFit fit_rank(const CovMatrix& K, Index q, const FitOptions& opts = {});

struct ScreeEntry {
    Index q = 0;
    double statistic = 0.0;   // T_q
    double difference = 0.0;  // T_q - T_{q-1}

    bool operator==(const ScreeEntry&) const = default;
};

/// Fits for q = 1..q_max with the monotone repair applied: whenever
/// T_{q+1} > T_q the rank-(q+1) problem is re-solved from the rank-q factor
/// padded with one column, and the better of that and the padded factor
/// itself is kept, so T_1 >= T_2 >= ... holds exactly.
std::vector<RankFit> scree_fits(const CovMatrix& K, Index q_max, const FitOptions& opts = {});

/// (q, T_q, T_q - T_{q-1}) for q = 1..q_max with T_0 = ||P_L o K||_F^2.
std::vector<ScreeEntry> scree_sequence(const CovMatrix& K, Index q_max, const FitOptions& opts = {});
std::vector<ScreeEntry> scree_from_fits(const CovMatrix& K, const std::vector<RankFit>& fits);

}  // namespace covrank
