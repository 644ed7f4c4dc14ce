#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace skewdiff {

inline constexpr int kReportSchemaVersion = 1;

struct Metric {
    std::string name;
    double value = 0.0;
    std::optional<double> std_error;
};

/// One pass/fail decision; `tolerance` states the rule that was applied.
struct Criterion {
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double target = 0.0;
    std::string tolerance;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    std::string experiment;
    /// canonical JSON echo of the config
    std::string config_json;
    std::vector<Metric> metrics;
    std::vector<Criterion> criteria;
    /// plot data keyed by kind (stationary-hist, localtime, pde-mc, pde-solution, ...)
    std::map<std::string, Table> tables;
    std::vector<std::string> notes;
    double runtime_s = 0.0;

    bool pass() const;
    void add_metric(std::string name, double value, std::optional<double> se = std::nullopt);
    void add_criterion(std::string name, bool pass, double observed, double target, std::string tolerance);
    const Metric* metric(const std::string& name) const;
};

/// Full report as JSON (includes runtime and versions).
std::string report_to_json(const ExperimentReport& report);

/// Only the numeric content (metrics and criteria), serialized with
/// round-trip precision; identical across re-runs with the same seed.
std::string metrics_to_json(const ExperimentReport& report);

void write_report(const ExperimentReport& report, const std::filesystem::path& file);

/// Plot-data kinds understood by emit_plot_data.
const std::vector<std::string>& plot_kinds();

/// Writes <dir>/<kind>.csv. Throws Errc::unknown_kind for kinds outside
/// plot_kinds() and Errc::precondition when the report has no such data.
std::filesystem::path emit_plot_data(const ExperimentReport& report, const std::string& kind,
                                     const std::filesystem::path& dir);

/// Writes every table the report carries; returns the files written.
std::vector<std::filesystem::path> emit_all_plot_data(const ExperimentReport& report,
                                                      const std::filesystem::path& dir);

}  // namespace skewdiff
