#pragma once

#include "covrank/bootstrap.hpp"
#include "covrank/lowrank_fit.hpp"

#include <optional>
#include <string>
#include <vector>

namespace covrank {

struct RankTestRecord {
    int q = 0;
    double statistic = 0.0;
    double p_value = 1.0;
    bool tested = false;
    int M_used = 0;

    bool operator==(const RankTestRecord&) const = default;
};

struct RankReport {
    std::vector<RankTestRecord> per_q;  // q = 1..d
    std::optional<int> r_hat;
    bool global_null_rejected = false;
    double alpha = 0.05;
    int d = 0;
    std::vector<ScreeEntry> scree;
    BootstrapConfig config;
    std::vector<std::string> warnings;

    bool operator==(const RankReport&) const = default;
};

/// Stepwise test of H_{0,q} for q = 1, 2, ..., stopping at the first
/// p_q > alpha (r_hat = q). If every q <= d is rejected, r_hat is empty and
/// the global null rank <= d is rejected. The scree fits are computed once
/// and shared by all M selections.
RankReport sequential_rank_test(const SampleMatrix& W, double alpha, const BootstrapConfig& cfg);

struct DChoice {
    int d = 0;
    std::optional<std::string> warning;
};

/// floor((L-1)/2) unless an override no larger than that is given; larger
/// overrides are clamped with a warning.
DChoice choose_d(Index L, std::optional<int> override_d = std::nullopt);

}  // namespace covrank
