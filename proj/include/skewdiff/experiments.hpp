#pragma once

#include <filesystem>
#include <optional>

#include "skewdiff/config.hpp"
#include "skewdiff/report.hpp"

namespace skewdiff {

struct RunOptions {
    /// 0: config value, then SKEWDIFF_THREADS, then hardware concurrency
    unsigned threads = 0;
    /// overrides config.output_dir
    std::optional<std::filesystem::path> out_dir;
    /// write report.json, CSVs and path dumps
    bool write_files = true;
};

/// Validates the config (Errc::config_invalid), runs the named experiment
/// and, if requested, writes its artifacts. Criteria failures are recorded
/// in the report, not thrown.
ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace skewdiff
