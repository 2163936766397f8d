#include "covrank/io.hpp"

#include "covrank/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace covrank {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t row, std::size_t col) {
    const auto where = [&] {
        return source + ": row " + std::to_string(row) + ", column " + std::to_string(col);
    };
    if (cell.empty()) throw DataError(where() + ": empty cell");
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw DataError(where() + ": cannot parse '" + cell + "' as a number");
    if (!std::isfinite(v)) throw DataError(where() + ": non-finite value '" + cell + "'");
    return v;
}

bool looks_like_grid(const std::vector<double>& row) {
    if (row.size() < 2) return false;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] < 0.0 || row[j] > 1.0) return false;
        if (j > 0 && !(row[j] > row[j - 1])) return false;
    }
    return true;
}

}  // namespace

SampleMatrix parse_dataset(std::istream& in, const std::string& source) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (rows.empty()) width = cells.size();
        if (cells.size() != width)
            throw DataError(source + ": row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                            " columns, expected " + std::to_string(width));
        std::vector<double> values;
        values.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) values.push_back(parse_cell(cells[c], source, lineno, c + 1));
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw DataError(source + ": no data rows");

    std::optional<Grid> grid;
    std::size_t start = 0;
    if (rows.size() > 1 && looks_like_grid(rows.front())) {
        grid = Grid(rows.front());
        start = 1;
    }
    const Index n = static_cast<Index>(rows.size() - start);
    const Index L = static_cast<Index>(width);
    Matrix W(n, L);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < L; ++j) W(i, j) = rows[start + static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return SampleMatrix(std::move(W), grid ? *grid : Grid::regular(L));
}

SampleMatrix load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return parse_dataset(in, path);
}

std::string format_real(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw NumericalError("cannot format number");
    return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const SampleMatrix& W, bool header) {
    const Matrix& M = W.data();
    if (header) {
        const auto& nodes = W.grid().nodes();
        for (std::size_t j = 0; j < nodes.size(); ++j) out << (j ? "," : "") << format_real(nodes[j]);
        out << '\n';
    }
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << format_real(M(i, j));
        out << '\n';
    }
}

void save_dataset(const std::string& path, const SampleMatrix& W, bool header) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_dataset(out, W, header);
}

void write_scree_csv(std::ostream& out, const std::vector<ScreeEntry>& scree) {
    out << "q,T_q,delta_T_q\n";
    for (const auto& e : scree)
        out << e.q << ',' << format_real(e.statistic) << ',' << format_real(e.difference) << '\n';
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

// Fit and bootstrap settings: every field optional on input.

void to_json(json& j, const StepRule& v) {
    j = json{{"initial_step", v.initial_step}, {"shrink", v.shrink}, {"sufficient_decrease", v.sufficient_decrease}};
}

void from_json(const json& j, StepRule& v) {
    StepRule d;
    v.initial_step = j.value("initial_step", d.initial_step);
    v.shrink = j.value("shrink", d.shrink);
    v.sufficient_decrease = j.value("sufficient_decrease", d.sufficient_decrease);
}

void to_json(json& j, const FitOptions& v) {
    j = json{{"max_iters", v.max_iters}, {"grad_tol", v.grad_tol}, {"step_rule", v.step_rule},
             {"restarts", v.restarts},   {"seed", v.seed}};
}

void from_json(const json& j, FitOptions& v) {
    FitOptions d;
    v.max_iters = j.value("max_iters", d.max_iters);
    v.grad_tol = j.value("grad_tol", d.grad_tol);
    v.step_rule = j.value("step_rule", d.step_rule);
    v.restarts = j.value("restarts", d.restarts);
    v.seed = j.value("seed", d.seed);
}

void to_json(json& j, const BootstrapConfig& v) {
    j = json{{"B", v.B},
             {"epsilon", v.epsilon},
             {"d", v.d},
             {"homoskedastic", v.homoskedastic},
             {"ridge", v.ridge},
             {"seed", v.seed},
             {"fit", v.fit},
             {"center", v.center},
             {"scaled_threshold", v.scaled_threshold},
             {"fixed_M", v.fixed_M ? json(*v.fixed_M) : json(nullptr)},
             {"threads", v.threads}};
}

void from_json(const json& j, BootstrapConfig& v) {
    BootstrapConfig d;
    v.B = j.value("B", d.B);
    v.epsilon = j.value("epsilon", d.epsilon);
    v.d = j.value("d", d.d);
    v.homoskedastic = j.value("homoskedastic", d.homoskedastic);
    v.ridge = j.value("ridge", d.ridge);
    v.seed = j.value("seed", d.seed);
    v.fit = j.value("fit", d.fit);
    v.center = j.value("center", d.center);
    v.scaled_threshold = j.value("scaled_threshold", d.scaled_threshold);
    if (j.contains("fixed_M") && !j.at("fixed_M").is_null())
        v.fixed_M = j.at("fixed_M").get<int>();
    else
        v.fixed_M.reset();
    v.threads = j.value("threads", d.threads);
}

// Report pieces: all fields required.

void to_json(json& j, const ScreeEntry& v) {
    j = json{{"q", v.q}, {"T_q", v.statistic}, {"delta_T_q", v.difference}};
}

void from_json(const json& j, ScreeEntry& v) {
    v.q = j.at("q").get<Index>();
    v.statistic = j.at("T_q").get<double>();
    v.difference = j.at("delta_T_q").get<double>();
}

void to_json(json& j, const RankTestRecord& v) {
    j = json{{"q", v.q}, {"T_q", v.statistic}, {"p_value", v.p_value}, {"tested", v.tested}, {"M", v.M_used}};
}

void from_json(const json& j, RankTestRecord& v) {
    v.q = j.at("q").get<int>();
    v.statistic = j.at("T_q").get<double>();
    v.p_value = j.at("p_value").get<double>();
    v.tested = j.at("tested").get<bool>();
    v.M_used = j.at("M").get<int>();
}

void to_json(json& j, const RankReport& v) {
    j = json{{"alpha", v.alpha},
             {"d", v.d},
             {"r_hat", v.r_hat ? json(*v.r_hat) : json(nullptr)},
             {"global_null_rejected", v.global_null_rejected},
             {"tests", v.per_q},
             {"scree", v.scree},
             {"config", v.config},
             {"warnings", v.warnings}};
}

void from_json(const json& j, RankReport& v) {
    v.alpha = j.at("alpha").get<double>();
    v.d = j.at("d").get<int>();
    if (j.at("r_hat").is_null())
        v.r_hat.reset();
    else
        v.r_hat = j.at("r_hat").get<int>();
    v.global_null_rejected = j.at("global_null_rejected").get<bool>();
    v.per_q = j.at("tests").get<std::vector<RankTestRecord>>();
    v.scree = j.at("scree").get<std::vector<ScreeEntry>>();
    v.config = j.at("config").get<BootstrapConfig>();
    v.warnings = j.at("warnings").get<std::vector<std::string>>();
}

void to_json(json& j, const ReportFile& v) {
    j = json{{"schema_version", v.schema_version},
             {"tool_version", v.tool_version},
             {"input", v.input},
             {"seed", v.report.config.seed},
             {"wall_clock_seconds", v.wall_clock_seconds},
             {"report", v.report}};
}

void from_json(const json& j, ReportFile& v) {
    v.schema_version = j.at("schema_version").get<int>();
    if (v.schema_version != kReportSchemaVersion)
        throw DataError("unsupported report schema version " + std::to_string(v.schema_version));
    v.tool_version = j.at("tool_version").get<std::string>();
    v.input = j.at("input").get<std::string>();
    v.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    v.report = j.at("report").get<RankReport>();
}

// Model specs.

void to_json(json& j, const ModelSpec& v) {
    j = json{{"name", v.name},
             {"mean_coeffs", v.mean_coeffs},
             {"scores", to_string(v.scores)},
             {"noise", {{"kind", to_string(v.noise.kind)}, {"variance", v.noise.variance}}}};
    if (v.kernel) {
        j["kernel"] = {{"kind", to_string(v.kernel->kind)}, {"lengthscale_sq", v.kernel->lengthscale_sq}};
    } else {
        json eig = json::array();
        for (std::size_t m = 0; m < v.eigenvalues.size(); ++m)
            eig.push_back({{"lambda", v.eigenvalues[m]},
                           {"function", to_string(v.eigenfunctions[m].kind)},
                           {"index", v.eigenfunctions[m].index}});
        j["eigen"] = eig;
    }
    if (v.spline) j["spline"] = {{"degree", v.spline->degree}, {"knots", v.spline->knots}};
}

void from_json(const json& j, ModelSpec& v) {
    v = ModelSpec{};
    v.name = j.value("name", std::string("custom"));
    v.mean_coeffs = j.value("mean_coeffs", std::vector<double>{});
    v.scores = score_distribution_from_string(j.value("scores", std::string("gaussian")));
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        v.noise.kind = noise_kind_from_string(n.value("kind", std::string("homoskedastic")));
        v.noise.variance = n.value("variance", 1.0);
    }
    if (j.contains("kernel")) {
        const auto& k = j.at("kernel");
        v.kernel = KernelSpec{kernel_kind_from_string(k.at("kind").get<std::string>()),
                              k.value("lengthscale_sq", 10.0)};
    }
    if (j.contains("eigen")) {
        for (const auto& e : j.at("eigen")) {
            v.eigenvalues.push_back(e.at("lambda").get<double>());
            v.eigenfunctions.push_back({function_kind_from_string(e.at("function").get<std::string>()),
                                        e.value("index", 0)});
        }
    }
    if (j.contains("spline"))
        v.spline = SplineSpec{j.at("spline").at("degree").get<int>(),
                              j.at("spline").at("knots").get<std::vector<double>>()};
    v.validate();
}

// Scenario configs: every field optional on input.

void to_json(json& j, const ScenarioConfig& v) {
    j = json{{"model", v.model},
             {"n", v.n},
             {"L", v.L},
             {"reps", v.reps},
             {"alpha", v.alpha},
             {"d", v.d ? json(*v.d) : json(nullptr)},
             {"master_seed", v.master_seed},
             {"heteroskedastic_noise", v.heteroskedastic_noise},
             {"threads", v.threads},
             {"bootstrap", v.bootstrap}};
    if (v.custom_model) j["model_spec"] = *v.custom_model;
}

void from_json(const json& j, ScenarioConfig& v) {
    ScenarioConfig d;
    v.model = j.value("model", d.model);
    v.n = j.value("n", d.n);
    v.L = j.value("L", d.L);
    v.reps = j.value("reps", d.reps);
    v.alpha = j.value("alpha", d.alpha);
    if (j.contains("d") && !j.at("d").is_null())
        v.d = j.at("d").get<int>();
    else
        v.d.reset();
    v.master_seed = j.value("master_seed", d.master_seed);
    v.heteroskedastic_noise = j.value("heteroskedastic_noise", d.heteroskedastic_noise);
    v.threads = j.value("threads", d.threads);
    v.bootstrap = j.contains("bootstrap") ? j.at("bootstrap").get<BootstrapConfig>() : d.bootstrap;
    if (j.contains("model_spec"))
        v.custom_model = j.at("model_spec").get<ModelSpec>();
    else
        v.custom_model.reset();
}

void to_json(json& j, const RepRecord& v) {
    j = json{{"rep", v.rep},
             {"data_seed", v.data_seed},
             {"bootstrap_seed", v.bootstrap_seed},
             {"r_hat", v.r_hat ? json(*v.r_hat) : json(nullptr)},
             {"global_null_rejected", v.global_null_rejected},
             {"failed", v.failed},
             {"error", v.error},
             {"p_values", v.p_values}};
}

void from_json(const json& j, RepRecord& v) {
    v.rep = j.at("rep").get<int>();
    v.data_seed = j.at("data_seed").get<std::uint64_t>();
    v.bootstrap_seed = j.at("bootstrap_seed").get<std::uint64_t>();
    if (j.at("r_hat").is_null())
        v.r_hat.reset();
    else
        v.r_hat = j.at("r_hat").get<int>();
    v.global_null_rejected = j.at("global_null_rejected").get<bool>();
    v.failed = j.at("failed").get<bool>();
    v.error = j.at("error").get<std::string>();
    v.p_values = j.at("p_values").get<std::vector<double>>();
}

}  // namespace covrank
