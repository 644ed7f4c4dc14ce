#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skewdiff/curve.hpp"
#include "skewdiff/model.hpp"
#include "skewdiff/path.hpp"
#include "skewdiff/pde.hpp"

namespace skewdiff {

inline constexpr int kConfigSchemaVersion = 1;

/// Knobs that only some experiments read. Defaults are the acceptance
/// settings of each experiment (see default_config).
struct ExperimentOptions {
    /// coarse and fine n_steps for refinement studies
    std::vector<std::size_t> step_levels;
    double burn_in_fraction = 0.1;
    std::size_t thin = 100;
    std::size_t bins = 40;
    double level = 0.01;
    /// relative tolerance (ratios, residuals, jump ratio)
    double rel_tol = 0.10;
    /// absolute tolerance (KS distance, occupation fraction, PDE gap)
    double abs_tol = 0.0;
    std::vector<double> x0_list;
    PdeGrid pde;
    double refinement_factor_max = 0.35;
    std::size_t random_curves = 50;
    /// paths whose local-time trajectories are exported
    std::size_t export_paths = 1;
    double runtime_limit_s = 120.0;
};

struct ExperimentConfig {
    std::string experiment;
    std::optional<std::uint64_t> seed;
    RawParams params;
    CurveSpec curve;
    GridSpec grid;
    std::size_t n_paths = 1000;
    SchemeConfig scheme;
    /// starting value in the squared frame (R_0 or Z_0)
    double start = 1.0;
    std::optional<unsigned> threads;
    std::filesystem::path output_dir = "out";
    /// number of paths written as binary dumps
    std::size_t dump_paths = 0;
    ExperimentOptions options;
};

const std::vector<std::string>& experiment_names();

/// One-line description per experiment, for list-experiments.
std::string experiment_summary(const std::string& name);

/// Acceptance settings of an experiment. Throws Errc::config_invalid for
/// unknown names.
ExperimentConfig default_config(const std::string& name);

/// Parses a JSON document, starting from the defaults of its "experiment".
/// Errors carry the JSON path, e.g. "$.params.p: expected a number".
/// A missing seed is accepted only when `seed_override` is given.
ExperimentConfig parse_config(const std::string& json_text,
                              std::optional<std::uint64_t> seed_override = std::nullopt,
                              const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& file,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

/// Checks everything that can be checked without simulating: parameters,
/// curve construction, grid, scheme. Throws Errc::config_invalid with the
/// underlying reason.
void validate_config(const ExperimentConfig& config);

/// Canonical JSON echo of a config.
std::string config_to_json(const ExperimentConfig& config);

}  // namespace skewdiff
