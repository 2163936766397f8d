#include "covrank/bench.hpp"

#include "covrank/error.hpp"
#include "covrank/io.hpp"
#include "covrank/parallel.hpp"
#include "covrank/rank_procedure.hpp"

#include <chrono>
#include <fstream>

namespace covrank {

ModelSpec ScenarioConfig::resolve_model() const {
    ModelSpec spec = custom_model ? *custom_model : named_model(model);
    if (heteroskedastic_noise) spec.noise = NoiseSpec{NoiseKind::Heteroskedastic, 0.0};
    spec.validate();
    return spec;
}

void ScenarioConfig::validate() const {
    if (reps < 1) throw DataError("reps must be at least 1");
    if (n < 2) throw DataError("n must be at least 2");
    if (L < 3) throw DataError("L must be at least 3");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0, 1)");
    if (heteroskedastic_noise && L % 5 != 0)
        throw DataError("heteroskedastic noise needs L divisible by 5");
    resolve_model();
    BootstrapConfig b = bootstrap;
    b.d = choose_d(L, d).d;
    b.validate();
}

int ScenarioResult::count_at(int k) const {
    if (k >= 1 && k <= static_cast<int>(counts.size())) return counts[static_cast<std::size_t>(k - 1)];
    return 0;
}

int ScenarioResult::count_at_least(int k) const {
    int total = beyond;
    for (int r = std::max(k, 1); r <= static_cast<int>(counts.size()); ++r) total += count_at(r);
    return total;
}

std::vector<std::pair<std::string, int>> ScenarioResult::table() const {
    std::vector<std::pair<std::string, int>> out;
    for (int k = 1; k <= static_cast<int>(counts.size()); ++k) out.emplace_back(std::to_string(k), count_at(k));
    out.emplace_back(">=" + std::to_string(d + 1), beyond);
    out.emplace_back("failed", failures);
    return out;
}

bool ScenarioResult::same_table(const ScenarioResult& other) const {
    return d == other.d && counts == other.counts && beyond == other.beyond && failures == other.failures &&
           records == other.records;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    const ModelSpec spec = cfg.resolve_model();
    const DChoice dc = choose_d(cfg.L, cfg.d);

    ScenarioResult result;
    result.config = cfg;
    result.d = dc.d;
    result.records.resize(static_cast<std::size_t>(cfg.reps));

    parallel_for(result.records.size(), cfg.threads, [&](std::size_t r) {
        RepRecord& rec = result.records[r];
        rec.rep = static_cast<int>(r);
        rec.data_seed = derive_seed(cfg.master_seed, 1, r);
        rec.bootstrap_seed = derive_seed(cfg.master_seed, 2, r);
        try {
            const GeneratedData gen = generate_model(spec, cfg.n, cfg.L, rec.data_seed);
            BootstrapConfig b = cfg.bootstrap;
            b.d = dc.d;
            b.seed = rec.bootstrap_seed;
            b.fit.seed = derive_seed(rec.bootstrap_seed, 3);
            const RankReport report = sequential_rank_test(gen.data, cfg.alpha, b);
            rec.r_hat = report.r_hat;
            rec.global_null_rejected = report.global_null_rejected;
            for (const auto& t : report.per_q)
                if (t.tested) rec.p_values.push_back(t.p_value);
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
    });

    result.counts.assign(static_cast<std::size_t>(dc.d), 0);
    for (const auto& rec : result.records) {
        if (rec.failed)
            ++result.failures;
        else if (rec.r_hat)
            ++result.counts[static_cast<std::size_t>(*rec.r_hat - 1)];
        else
            ++result.beyond;
    }
    result.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

void write_scenario_table(const ScenarioResult& result, const std::string& path) {
    {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write '" + path + "'");
        out << "rank,count\n";
        for (const auto& [label, count] : result.table()) out << label << ',' << count << '\n';
    }
    json meta{{"tool_version", kToolVersion},
              {"config", result.config},
              {"d", result.d},
              {"failures", result.failures},
              {"wall_clock_seconds", result.wall_clock_seconds},
              {"records", result.records}};
    save_json(path + ".meta.json", meta);
}

}  // namespace covrank
