#include "covrank/cli.hpp"

#include "covrank/bench.hpp"
#include "covrank/error.hpp"
#include "covrank/io.hpp"
#include "covrank/parallel.hpp"
#include "covrank/rank_procedure.hpp"
#include "covrank/simmodels.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace covrank {

namespace {

struct RankTestArgs {
    std::string data;
    double alpha = 0.05;
    std::optional<int> d;
    int B = 500;
    double epsilon = 1.0;
    bool homoskedastic = false;
    bool no_center = false;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();
    std::optional<int> fixed_M;
    std::string out;
};

struct ScreeArgs {
    std::string data;
    std::optional<int> qmax;
    bool no_center = false;
    std::string out;
};

struct SimulateArgs {
    std::string model = "A1";
    std::string model_spec;
    Index n = 150;
    Index L = 25;
    std::uint64_t seed = 0;
    bool heteroskedastic = false;
    bool no_header = false;
    std::string out;
};

struct BenchArgs {
    std::string scenario;
    std::optional<int> reps;
    std::optional<int> B;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
};

void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw DataError("cannot write '" + path + "'");
    f << text;
}

int run_rank_test(const RankTestArgs& a, std::ostream& out, std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();
    const SampleMatrix W = load_dataset(a.data);
    const DChoice dc = choose_d(W.cols(), a.d);
    if (dc.warning) err << "warning: " << *dc.warning << '\n';

    BootstrapConfig cfg;
    cfg.B = a.B;
    cfg.epsilon = a.epsilon;
    cfg.d = dc.d;
    cfg.homoskedastic = a.homoskedastic;
    cfg.center = !a.no_center;
    cfg.seed = a.seed;
    cfg.fit.seed = derive_seed(a.seed, 3);
    cfg.fixed_M = a.fixed_M;
    cfg.threads = std::max(1u, a.threads);

    ReportFile file;
    file.input = a.data;
    file.report = sequential_rank_test(W, a.alpha, cfg);
    if (dc.warning) file.report.warnings.insert(file.report.warnings.begin(), *dc.warning);
    file.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    for (const auto& w : file.report.warnings)
        if (!dc.warning || w != *dc.warning) err << "warning: " << w << '\n';

    const std::string text = json(file).dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        emit(a.out, out, text);
        const auto& r = file.report;
        out << "r_hat = " << (r.r_hat ? std::to_string(*r.r_hat) : ">= " + std::to_string(r.d + 1)) << '\n';
    }
    return kExitOk;
}

int run_scree(const ScreeArgs& a, std::ostream& out, std::ostream& err) {
    const SampleMatrix W = load_dataset(a.data);
    const DChoice dc = choose_d(W.cols(), a.qmax);
    if (dc.warning) err << "warning: qmax: " << *dc.warning << '\n';
    const CovMatrix K = empirical_covariance(W, !a.no_center);
    std::ostringstream csv;
    write_scree_csv(csv, scree_sequence(K, dc.d));
    emit(a.out, out, csv.str());
    return kExitOk;
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    ScenarioConfig sc;
    sc.model = a.model;
    if (!a.model_spec.empty()) sc.custom_model = load_json(a.model_spec).get<ModelSpec>();
    sc.heteroskedastic_noise = a.heteroskedastic;
    const GeneratedData gen = generate_model(sc.resolve_model(), a.n, a.L, a.seed);
    std::ostringstream csv;
    write_dataset(csv, gen.data, !a.no_header);
    emit(a.out, out, csv.str());
    return kExitOk;
}

int run_bench(const BenchArgs& a, std::ostream& out) {
    ScenarioConfig sc;
    if (std::filesystem::exists(a.scenario))
        sc = load_json(a.scenario).get<ScenarioConfig>();
    else
        sc.model = a.scenario;  // a bare model name with default settings
    if (a.reps) sc.reps = *a.reps;
    if (a.B) sc.bootstrap.B = *a.B;
    if (a.seed) sc.master_seed = *a.seed;
    if (a.threads) sc.threads = std::max(1u, *a.threads);
    const ScenarioResult res = run_scenario(sc);
    if (!a.out.empty()) write_scenario_table(res, a.out);
    out << "rank,count\n";
    for (const auto& [label, count] : res.table()) out << label << ',' << count << '\n';
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bootstrap rank test for covariance operators of noisy functional data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    RankTestArgs rt;
    auto* rank = app.add_subcommand("rank-test", "Estimate the rank by sequential bootstrap tests");
    rank->add_option("data", rt.data, "CSV file (optional header row of grid nodes)")->required();
    rank->add_option("--alpha", rt.alpha, "Level of each test")->capture_default_str();
    rank->add_option("--d", rt.d, "Largest rank tested (default floor((L-1)/2))");
    rank->add_option("--B", rt.B, "Bootstrap replicates")->capture_default_str()->check(CLI::PositiveNumber);
    rank->add_option("--epsilon", rt.epsilon, "Threshold constant of the noise-rank rule")->capture_default_str();
    rank->add_flag("--homoskedastic", rt.homoskedastic, "Average the noise estimate over the grid");
    rank->add_flag("--no-center", rt.no_center, "Use uncentered second moments");
    rank->add_option("--seed", rt.seed, "Random seed")->capture_default_str();
    rank->add_option("--threads", rt.threads, "Bootstrap workers")->capture_default_str();
    rank->add_option("--fixed-M", rt.fixed_M, "Fixed rank for the noise estimate instead of the threshold rule");
    rank->add_option("--out", rt.out, "Write the JSON report here instead of standard output");

    ScreeArgs sa;
    auto* scree = app.add_subcommand("scree", "Off-diagonal scree sequence (q, T_q, delta T_q) as CSV");
    scree->add_option("data", sa.data, "CSV file")->required();
    scree->add_option("--qmax", sa.qmax, "Largest q (clamped to floor((L-1)/2))");
    scree->add_flag("--no-center", sa.no_center, "Use uncentered second moments");
    scree->add_option("--out", sa.out, "Output CSV (default standard output)");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a dataset from a simulation model");
    simulate->add_option("--model", sim.model, "Named model (A1-A5, S1-S5, SF1-SF3, I1-I4)")->capture_default_str();
    simulate->add_option("--model-spec", sim.model_spec, "JSON model specification (overrides --model)");
    simulate->add_option("--n", sim.n, "Number of curves")->capture_default_str();
    simulate->add_option("--L", sim.L, "Grid size")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate->add_flag("--heteroskedastic", sim.heteroskedastic, "Block-averaged heteroskedastic noise");
    simulate->add_flag("--no-header", sim.no_header, "Omit the grid header row");
    simulate->add_option("--out", sim.out, "Output CSV (default standard output)");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Distribution of the estimated rank over simulated datasets");
    bench->add_option("--scenario", ba.scenario, "Scenario JSON file or a model name")->required();
    bench->add_option("--reps", ba.reps, "Replications (overrides the scenario)");
    bench->add_option("--B", ba.B, "Bootstrap replicates (overrides the scenario)");
    bench->add_option("--seed", ba.seed, "Master seed (overrides the scenario)");
    bench->add_option("--threads", ba.threads, "Workers over replications");
    bench->add_option("--out", ba.out, "Output CSV (rank, count); metadata goes to <out>.meta.json");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*rank) return run_rank_test(rt, out, err);
        if (*scree) return run_scree(sa, out, err);
        if (*simulate) return run_simulate(sim, out);
        if (*bench) return run_bench(ba, out);
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace covrank
