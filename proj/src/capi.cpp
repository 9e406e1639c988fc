#include "xros/xros.h"

#include <cstring>
#include <string>

#include "xros/scenario.hpp"
#include "xros/simulation.hpp"

namespace {

thread_local std::string g_last_error;

void clear_error() { g_last_error.clear(); }

xros_status fail(xros_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

}  // namespace

extern "C" {

struct xros_scenario {
    xros::Scenario scenario;
};

struct xros_result {
    xros::RunReport report;
};

const char* xros_version(void) { return "xros 1.0.0 (scenario format v1)"; }

const char* xros_last_error(void) { return g_last_error.c_str(); }

xros_status xros_scenario_load(const char* path, xros_scenario** out) {
    if (!path || !out) return fail(XROS_ERR_INVALID_ARG, "null argument");
    clear_error();
    try {
        auto* handle = new xros_scenario{xros::load_scenario_file(path)};
        *out = handle;
        return XROS_OK;
    } catch (const xros::ScenarioError& e) {
        return fail(XROS_ERR_PARSE, e.what());
    } catch (const std::exception& e) {
        return fail(XROS_ERR_IO, e.what());
    }
}

xros_status xros_scenario_load_string(const char* text, xros_scenario** out) {
    if (!text || !out) return fail(XROS_ERR_INVALID_ARG, "null argument");
    clear_error();
    try {
        auto* handle = new xros_scenario{xros::load_scenario_string(text)};
        *out = handle;
        return XROS_OK;
    } catch (const xros::ScenarioError& e) {
        return fail(XROS_ERR_PARSE, e.what());
    } catch (const std::exception& e) {
        return fail(XROS_ERR_IO, e.what());
    }
}

xros_status xros_scenario_override(xros_scenario* s, const char* key, const char* value) {
    if (!s || !key || !value) return fail(XROS_ERR_INVALID_ARG, "null argument");
    clear_error();
    try {
        xros::apply_override(s->scenario, key, value);
        return XROS_OK;
    } catch (const xros::ScenarioError& e) {
        return fail(XROS_ERR_PARSE, e.what());
    }
}

xros_status xros_scenario_set_seed(xros_scenario* s, unsigned long long seed) {
    if (!s) return fail(XROS_ERR_INVALID_ARG, "null scenario");
    clear_error();
    s->scenario.seed = seed;
    return XROS_OK;
}

void xros_scenario_free(xros_scenario* s) { delete s; }

xros_status xros_run(const xros_scenario* s, const char* out_dir, int write_render_log,
                     xros_result** out) {
    if (!s || !out) return fail(XROS_ERR_INVALID_ARG, "null argument");
    clear_error();
    try {
        auto issues = xros::validate_scenario(s->scenario);
        if (!issues.empty()) throw xros::ScenarioError(std::move(issues));
        xros::Simulation sim(s->scenario);
        auto* result = new xros_result{sim.run()};
        if (out_dir && *out_dir) {
            try {
                xros::write_outputs(result->report, out_dir, write_render_log != 0);
            } catch (const std::exception& e) {
                result->report.exit_code = 4;
                result->report.violation = e.what();
                *out = result;
                return fail(XROS_ERR_IO, e.what());
            }
        }
        *out = result;
        if (result->report.taint_violation)
            return fail(XROS_ERR_TAINT, result->report.violation);
        if (result->report.exit_code != 0)
            return fail(XROS_ERR_RUNTIME, result->report.violation);
        return XROS_OK;
    } catch (const xros::ScenarioError& e) {
        return fail(XROS_ERR_PARSE, e.what());
    } catch (const std::exception& e) {
        return fail(XROS_ERR_RUNTIME, e.what());
    }
}

xros_status xros_result_counter(const xros_result* r, const char* name, unsigned long long* out) {
    if (!r || !name || !out) return fail(XROS_ERR_INVALID_ARG, "null argument");
    *out = r->report.ledger.counter(name);
    return XROS_OK;
}

xros_status xros_result_timer_us(const xros_result* r, const char* name, long long* out) {
    if (!r || !name || !out) return fail(XROS_ERR_INVALID_ARG, "null argument");
    *out = r->report.ledger.timer(name);
    return XROS_OK;
}

xros_status xros_result_energy_mj(const xros_result* r, const char* module, double* out) {
    if (!r || !module || !out) return fail(XROS_ERR_INVALID_ARG, "null argument");
    *out = r->report.ledger.energy(module);
    return XROS_OK;
}

xros_status xros_result_total_energy_mj(const xros_result* r, double* out) {
    if (!r || !out) return fail(XROS_ERR_INVALID_ARG, "null argument");
    *out = r->report.ledger.total_energy();
    return XROS_OK;
}

xros_status xros_result_comm_energy_mj(const xros_result* r, double* out) {
    if (!r || !out) return fail(XROS_ERR_INVALID_ARG, "null argument");
    *out = r->report.ledger.comm_energy();
    return XROS_OK;
}

int xros_result_exit_code(const xros_result* r) { return r ? r->report.exit_code : 5; }

size_t xros_result_violation(const xros_result* r, char* buf, size_t bufsz) {
    static const std::string kEmpty;
    const std::string& v = r ? r->report.violation : kEmpty;
    if (buf && bufsz > 0) {
        size_t n = v.size() < bufsz - 1 ? v.size() : bufsz - 1;
        std::memcpy(buf, v.data(), n);
        buf[n] = '\0';
    }
    return v.size();
}

void xros_result_free(xros_result* r) { delete r; }

}  // extern "C"
