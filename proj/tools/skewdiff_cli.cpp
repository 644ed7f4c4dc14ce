#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "skewdiff/config.hpp"
#include "skewdiff/error.hpp"
#include "skewdiff/experiments.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfigInvalid = 2;
constexpr int kExitRuntime = 3;

int report_error(const skewdiff::Error& e) {
    const bool config = e.code() == skewdiff::Errc::config_invalid || e.code() == skewdiff::Errc::io;
    std::cerr << (config ? "ConfigInvalid" : "RuntimeError") << " [" << skewdiff::errc_name(e.code())
              << "]: " << e.what() << '\n';
    return config ? kExitConfigInvalid : kExitRuntime;
}

skewdiff::ExperimentConfig load(const std::string& file, std::optional<std::uint64_t> seed) {
    try {
        return skewdiff::load_config(file, seed);
    } catch (const skewdiff::Error& e) {
        if (e.code() == skewdiff::Errc::config_invalid) throw;
        throw skewdiff::Error(skewdiff::Errc::config_invalid, std::string(skewdiff::errc_name(e.code())) + ": " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Skew-reflected CIR / squared Bessel experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(SKEWDIFF_VERSION));

    std::string config_file;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("--config", config_file, "JSON config")->required();
    run->add_option("--seed", seed, "Root seed (overrides the config)");
    run->add_option("--threads", threads, "Worker threads (fallback: SKEWDIFF_THREADS)")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory (overrides the config)");

    auto* list = app.add_subcommand("list-experiments", "List the available experiments");

    std::string validate_file;
    auto* validate = app.add_subcommand("validate", "Validate a config file without running it");
    validate->add_option("--config", validate_file, "JSON config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfigInvalid;
    }

    try {
        if (*list) {
            for (const auto& name : skewdiff::experiment_names())
                std::cout << name << "  " << skewdiff::experiment_summary(name) << '\n';
            return kExitPass;
        }
        if (*validate) {
            auto config = load(validate_file, std::nullopt);
            skewdiff::validate_config(config);
            std::cout << "valid: " << config.experiment << '\n';
            return kExitPass;
        }
        auto config = load(config_file, seed);
        skewdiff::RunOptions options;
        options.threads = threads;
        if (!out_dir.empty()) options.out_dir = out_dir;
        const auto report = skewdiff::run_experiment(config, options);
        const auto dir = options.out_dir.value_or(config.output_dir);
        for (const auto& c : report.criteria)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": observed " << c.observed << ", target "
                      << c.target << " (" << c.tolerance << ")\n";
        for (const auto& n : report.notes) std::cout << "note: " << n << '\n';
        std::cout << report.experiment << ": " << (report.pass() ? "PASS" : "FAIL") << " (report "
                  << (dir / "report.json").string() << ", " << report.runtime_s << " s)\n";
        return report.pass() ? kExitPass : kExitFailed;
    } catch (const skewdiff::Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "RuntimeError: " << e.what() << '\n';
        return kExitRuntime;
    }
}
