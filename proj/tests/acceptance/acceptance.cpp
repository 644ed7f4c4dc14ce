// Runs every acceptance experiment at its default settings and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any line fails.
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "skewdiff/config.hpp"
#include "skewdiff/experiments.hpp"

namespace {

constexpr std::uint64_t kSeed = 20240601;

skewdiff::ExperimentReport run(skewdiff::ExperimentConfig config, unsigned threads = 0) {
    config.seed = kSeed;
    skewdiff::RunOptions options;
    options.threads = threads;
    options.write_files = false;
    return skewdiff::run_experiment(config, options);
}

std::string failed_criteria(const skewdiff::ExperimentReport& report) {
    std::string out;
    for (const auto& c : report.criteria) {
        if (c.pass) continue;
        char buf[160];
        std::snprintf(buf, sizeof buf, " %s(observed %.6g, target %.6g)", c.name.c_str(), c.observed, c.target);
        out += buf;
    }
    return out;
}

struct Outcome {
    bool pass;
    std::string detail;
};

Outcome experiment(const std::string& name, double runtime_limit = 0.0) {
    const auto report = run(skewdiff::default_config(name));
    std::string detail = name;
    char buf[64];
    std::snprintf(buf, sizeof buf, ", %.1f s", report.runtime_s);
    detail += buf;
    bool pass = report.pass();
    if (runtime_limit > 0.0 && report.runtime_s > runtime_limit) {
        pass = false;
        detail += " exceeds the runtime limit";
    }
    return {pass, detail + failed_criteria(report)};
}

Outcome determinism() {
    // reduced versions of two path-parallel experiments, compared at 1 and 3 threads
    std::vector<skewdiff::ExperimentConfig> configs;
    auto cir = skewdiff::default_config("cir-baseline");
    cir.n_paths = 5000;
    configs.push_back(cir);
    auto lt = skewdiff::default_config("localtime-ratios");
    lt.n_paths = 24;
    lt.options.step_levels = {1024, 2048};
    configs.push_back(lt);
    auto girs = skewdiff::default_config("girsanov-consistency");
    girs.n_paths = 4000;
    configs.push_back(girs);

    std::string detail;
    bool pass = true;
    for (const auto& c : configs) {
        const bool same = metrics_to_json(run(c, 1)) == metrics_to_json(run(c, 3));
        pass = pass && same;
        detail += c.experiment + (same ? " identical; " : " DIFFERS; ");
    }
    return {pass, detail};
}

}  // namespace

int main() {
    struct Case {
        const char* label;
        std::function<Outcome()> check;
    };
    const std::vector<Case> cases = {
        {"1 cir-baseline mean", [] { return experiment("cir-baseline", 120.0); }},
        {"2 besq-law KS", [] { return experiment("besq-law"); }},
        {"3 stationary-skew density", [] { return experiment("stationary-skew"); }},
        {"4 local-time ratios", [] { return experiment("localtime-ratios"); }},
        {"5 relloc product identity", [] { return experiment("relloc-identity"); }},
        {"6 girsanov consistency", [] { return experiment("girsanov-consistency"); }},
        {"7 pde cross-check", [] { return experiment("pde-cross-check"); }},
        {"8 skew occupation", [] { return experiment("skew-occupation"); }},
        {"9 regime gates", [] { return experiment("regime-check"); }},
        {"10 determinism across threads", determinism},
    };

    int failures = 0;
    for (const auto& c : cases) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s [%s] %s\n", o.pass ? "PASS" : "FAIL", c.label, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(cases.size()) - failures, cases.size());
    return failures == 0 ? 0 : 1;
}
