// xros command-line front end. Talks to the simulator exclusively through the
// shared-library C API.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xros/xros.h"

namespace {

int cmd_run(const std::string& file, const std::string& out_dir,
            const std::vector<std::string>& overrides, long long seed, bool has_seed,
            bool render_log) {
    xros_scenario* scenario = nullptr;
    if (xros_scenario_load(file.c_str(), &scenario) != XROS_OK) {
        std::fprintf(stderr, "error: %s\n", xros_last_error());
        return 1;
    }
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --override expects key=value, got '%s'\n", ov.c_str());
            xros_scenario_free(scenario);
            return 1;
        }
        if (xros_scenario_override(scenario, ov.substr(0, eq).c_str(), ov.substr(eq + 1).c_str()) !=
            XROS_OK) {
            std::fprintf(stderr, "error: %s\n", xros_last_error());
            xros_scenario_free(scenario);
            return 1;
        }
    }
    if (has_seed) xros_scenario_set_seed(scenario, static_cast<unsigned long long>(seed));

    xros_result* result = nullptr;
    xros_status status = xros_run(scenario, out_dir.empty() ? nullptr : out_dir.c_str(),
                                  render_log ? 1 : 0, &result);
    xros_scenario_free(scenario);
    if (!result) {
        std::fprintf(stderr, "error: %s\n", xros_last_error());
        return 1;
    }

    unsigned long long frames = 0, misses = 0, recoveries = 0, tasks = 0, drops = 0;
    long long recovery_total = 0;
    double total_mj = 0.0, comm_mj = 0.0;
    xros_result_counter(result, "frames_rendered", &frames);
    xros_result_counter(result, "deadline_misses", &misses);
    xros_result_counter(result, "tracking_recovery_events", &recoveries);
    xros_result_counter(result, "tasks_completed", &tasks);
    xros_result_counter(result, "privacy_drops", &drops);
    xros_result_timer_us(result, "tracking_recovery_total", &recovery_total);
    xros_result_total_energy_mj(result, &total_mj);
    xros_result_comm_energy_mj(result, &comm_mj);

    std::printf("frames_rendered          %llu\n", frames);
    std::printf("deadline_misses          %llu\n", misses);
    std::printf("tracking_recovery_events %llu\n", recoveries);
    std::printf("tracking_recovery_us     %lld\n", recovery_total);
    std::printf("tasks_completed          %llu\n", tasks);
    std::printf("privacy_drops            %llu\n", drops);
    std::printf("energy_total_mj          %.6f\n", total_mj);
    std::printf("energy_comm_mj           %.6f\n", comm_mj);

    int exit_code = xros_result_exit_code(result);
    if (status != XROS_OK) {
        char violation[512];
        xros_result_violation(result, violation, sizeof(violation));
        std::fprintf(stderr, "run aborted: %s\n", violation[0] ? violation : xros_last_error());
    }
    xros_result_free(result);
    return exit_code;
}

int cmd_validate(const std::string& file) {
    xros_scenario* scenario = nullptr;
    if (xros_scenario_load(file.c_str(), &scenario) != XROS_OK) {
        std::fprintf(stderr, "%s\n", xros_last_error());
        return 1;
    }
    xros_scenario_free(scenario);
    std::printf("%s: ok\n", file.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"xros - deterministic XR operating-system simulator"};
    app.require_subcommand(1);

    std::string file;
    std::string out_dir;
    std::vector<std::string> overrides;
    long long seed = 0;
    bool render_log = false;

    auto* run = app.add_subcommand("run", "run a scenario and write reports");
    run->add_option("file", file, "scenario file (xros-scenario v1)")->required();
    run->add_option("--out", out_dir, "output directory for ledger and CSV reports");
    auto* seed_opt = run->add_option("--seed", seed, "root seed override");
    run->add_option("--override", overrides, "scalar override key=value (repeatable)");
    run->add_flag("--render-log", render_log, "also write render_log.csv");

    auto* validate = app.add_subcommand("validate", "parse and validate a scenario");
    validate->add_option("file", file, "scenario file")->required();

    auto* version = app.add_subcommand("version", "print library version");

    CLI11_PARSE(app, argc, argv);

    if (version->parsed()) {
        std::printf("%s\n", xros_version());
        return 0;
    }
    if (validate->parsed()) return cmd_validate(file);
    return cmd_run(file, out_dir, overrides, seed, seed_opt->count() > 0, render_log);
}
