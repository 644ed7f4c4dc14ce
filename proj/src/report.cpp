#include "skewdiff/report.hpp"

#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "skewdiff/error.hpp"

#ifndef SKEWDIFF_VERSION
#define SKEWDIFF_VERSION "dev"
#endif

namespace skewdiff {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const ExperimentReport& r) {
    json metrics = json::object();
    for (const auto& m : r.metrics) {
        json entry = {{"value", number_or_null(m.value)}};
        if (m.std_error) entry["std_error"] = number_or_null(*m.std_error);
        metrics[m.name] = entry;
    }
    return metrics;
}

json criteria_json(const ExperimentReport& r) {
    json out = json::array();
    for (const auto& c : r.criteria) {
        out.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"observed", number_or_null(c.observed)},
                       {"target", number_or_null(c.target)},
                       {"tolerance", c.tolerance}});
    }
    return out;
}

}  // namespace

bool ExperimentReport::pass() const {
    for (const auto& c : criteria)
        if (!c.pass) return false;
    return true;
}

void ExperimentReport::add_metric(std::string name, double value, std::optional<double> se) {
    metrics.push_back({std::move(name), value, se});
}

void ExperimentReport::add_criterion(std::string name, bool ok, double observed, double target,
                                     std::string tolerance) {
    criteria.push_back({std::move(name), ok, observed, target, std::move(tolerance)});
}

const Metric* ExperimentReport::metric(const std::string& name) const {
    for (const auto& m : metrics)
        if (m.name == name) return &m;
    return nullptr;
}

std::string report_to_json(const ExperimentReport& r) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["experiment"] = r.experiment;
    j["config"] = r.config_json.empty() ? json(nullptr) : json::parse(r.config_json);
    j["metrics"] = metrics_json(r);
    j["criteria"] = criteria_json(r);
    j["pass"] = r.pass();
    j["notes"] = r.notes;
    j["tables"] = json::array();
    for (const auto& [kind, table] : r.tables) j["tables"].push_back({{"kind", kind}, {"rows", table.rows.size()}});
    j["runtime_seconds"] = r.runtime_s;
    j["versions"] = {{"skewdiff", SKEWDIFF_VERSION},
                     {"boost", BOOST_LIB_VERSION},
                     {"compiler", __VERSION__},
                     {"report_schema", kReportSchemaVersion}};
    return j.dump(2);
}

std::string metrics_to_json(const ExperimentReport& r) {
    json j;
    j["metrics"] = metrics_json(r);
    j["criteria"] = criteria_json(r);
    return j.dump();
}

void write_report(const ExperimentReport& report, const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    require(static_cast<bool>(out), Errc::io, "cannot write " + file.string());
    out << report_to_json(report) << '\n';
}

const std::vector<std::string>& plot_kinds() {
    static const std::vector<std::string> kinds{"stationary-hist", "localtime",     "pde-mc",     "pde-solution",
                                                "ratios",          "relloc",        "terminal-cdf", "monotonicity"};
    return kinds;
}

std::filesystem::path emit_plot_data(const ExperimentReport& report, const std::string& kind,
                                     const std::filesystem::path& dir) {
    const auto& kinds = plot_kinds();
    require(std::find(kinds.begin(), kinds.end(), kind) != kinds.end(), Errc::unknown_kind,
            "unknown plot kind '" + kind + "'");
    const auto it = report.tables.find(kind);
    require(it != report.tables.end(), Errc::precondition,
            "experiment " + report.experiment + " produced no '" + kind + "' data");
    std::filesystem::create_directories(dir);
    const auto file = dir / (kind + ".csv");
    std::ofstream out(file);
    require(static_cast<bool>(out), Errc::io, "cannot write " + file.string());
    out.precision(17);
    const Table& t = it->second;
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << '\n';
    }
    return file;
}

std::vector<std::filesystem::path> emit_all_plot_data(const ExperimentReport& report,
                                                      const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& [kind, table] : report.tables) files.push_back(emit_plot_data(report, kind, dir));
    return files;
}

}  // namespace skewdiff
