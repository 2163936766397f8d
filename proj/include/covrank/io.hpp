#pragma once

#include "covrank/bench.hpp"
#include "covrank/rank_procedure.hpp"
#include "covrank/simmodels.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace covrank {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

using json = nlohmann::json;

/// Comma-separated numeric rows. The first row is read as grid nodes iff it
/// is strictly increasing inside [0, 1]; otherwise the grid is j / (L + 1).
SampleMatrix parse_dataset(std::istream& in, const std::string& source = "<input>");
SampleMatrix load_dataset(const std::string& path);

void write_dataset(std::ostream& out, const SampleMatrix& W, bool header = true);
void save_dataset(const std::string& path, const SampleMatrix& W, bool header = true);

/// Shortest decimal form that reads back to the same double.
std::string format_real(double x);

void write_scree_csv(std::ostream& out, const std::vector<ScreeEntry>& scree);

struct ReportFile {
    int schema_version = kReportSchemaVersion;
    std::string tool_version = kToolVersion;
    std::string input;
    double wall_clock_seconds = 0.0;
    RankReport report;

    bool operator==(const ReportFile&) const = default;
};

void to_json(json& j, const StepRule& v);
void from_json(const json& j, StepRule& v);
void to_json(json& j, const FitOptions& v);
void from_json(const json& j, FitOptions& v);
void to_json(json& j, const BootstrapConfig& v);
void from_json(const json& j, BootstrapConfig& v);
void to_json(json& j, const ScreeEntry& v);
void from_json(const json& j, ScreeEntry& v);
void to_json(json& j, const RankTestRecord& v);
void from_json(const json& j, RankTestRecord& v);
void to_json(json& j, const RankReport& v);
void from_json(const json& j, RankReport& v);
void to_json(json& j, const ReportFile& v);
void from_json(const json& j, ReportFile& v);
void to_json(json& j, const ModelSpec& v);
void from_json(const json& j, ModelSpec& v);
void to_json(json& j, const ScenarioConfig& v);
void from_json(const json& j, ScenarioConfig& v);
void to_json(json& j, const RepRecord& v);
void from_json(const json& j, RepRecord& v);

/// Reads a JSON document; throws DataError with the path on failure.
json load_json(const std::string& path);
void save_json(const std::string& path, const json& j);

}  // namespace covrank
