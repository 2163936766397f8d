#pragma once

#include "covrank/bootstrap.hpp"
#include "covrank/simmodels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace covrank {

struct ScenarioConfig {
    std::string model = "A1";
    // Used instead of the named model when present.
    std::optional<ModelSpec> custom_model;
    Index n = 150;
    Index L = 25;
    int reps = 50;
    double alpha = 0.05;
    // bootstrap.d is ignored; the tested range comes from `d` (default
    // floor((L-1)/2)). bootstrap.seed is replaced per replication.
    BootstrapConfig bootstrap = default_bench_bootstrap();
    std::optional<int> d;
    std::uint64_t master_seed = 1;
    // Replace the model's noise by the block-averaged heteroskedastic profile.
    bool heteroskedastic_noise = false;
    // Workers over replications.
    unsigned threads = 1;

    static BootstrapConfig default_bench_bootstrap() {
        BootstrapConfig b;
        b.B = 200;
        return b;
    }
    ModelSpec resolve_model() const;
    void validate() const;

    bool operator==(const ScenarioConfig&) const = default;
};

struct RepRecord {
    int rep = 0;
    std::uint64_t data_seed = 0;
    std::uint64_t bootstrap_seed = 0;
    std::optional<int> r_hat;
    bool global_null_rejected = false;
    bool failed = false;
    std::string error;
    std::vector<double> p_values;  // tested q = 1, 2, ...

    bool operator==(const RepRecord&) const = default;
};

struct ScenarioResult {
    ScenarioConfig config;
    int d = 0;
    std::vector<int> counts;  // counts[k-1]: replications with r_hat = k, k = 1..d
    int beyond = 0;           // every q <= d rejected (r_hat >= d + 1)
    int failures = 0;
    std::vector<RepRecord> records;
    double wall_clock_seconds = 0.0;

    int count_at(int k) const;
    /// Replications with r_hat >= k, the ">= d + 1" bucket included.
    int count_at_least(int k) const;
    /// Labels "1".."d", ">=d+1", "failed" with their counts.
    std::vector<std::pair<std::string, int>> table() const;
    bool same_table(const ScenarioResult& other) const;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// CSV with columns (rank, count) plus a JSON sidecar at `path + ".meta.json"`.
void write_scenario_table(const ScenarioResult& result, const std::string& path);

}  // namespace covrank
