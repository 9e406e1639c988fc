/*
 * xros: deterministic XR operating-system simulator.
 *
 * C API over the simulator core. All objects are opaque handles owned by the
 * library; every call returns a status code and the last failure detail is
 * available via xros_last_error() (thread-local).
 */
#ifndef XROS_H
#define XROS_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum xros_status {
    XROS_OK = 0,
    XROS_ERR_IO = 1,
    XROS_ERR_PARSE = 2,      /* scenario failed to parse or validate */
    XROS_ERR_TAINT = 3,      /* run aborted: privacy barrier bypassed */
    XROS_ERR_RUNTIME = 4,    /* run aborted: internal invariant violation */
    XROS_ERR_INVALID_ARG = 5
} xros_status;

typedef struct xros_scenario xros_scenario;
typedef struct xros_result xros_result;

const char* xros_version(void);

/* Message for the most recent failing call on this thread; empty string when
 * the last call succeeded. The pointer stays valid until the next call. */
const char* xros_last_error(void);

/* Scenario loading: `xros-scenario v1` documents. On validation failure the
 * error text lists every offending field path. */
xros_status xros_scenario_load(const char* path, xros_scenario** out);
xros_status xros_scenario_load_string(const char* text, xros_scenario** out);

/* Post-load tweaks: scalar override ("section.key", e.g. "sim.seed") and a
 * seed shortcut. Overrides are re-validated at run time. */
xros_status xros_scenario_override(xros_scenario* s, const char* key, const char* value);
xros_status xros_scenario_set_seed(xros_scenario* s, unsigned long long seed);

void xros_scenario_free(xros_scenario* s);

/* Runs the scenario. out_dir may be NULL to skip writing output files
 * (ledger.txt, series_*.csv, decisions.csv, blocks.csv, privacy_audit.csv and
 * optionally render_log.csv). A taint violation yields XROS_ERR_TAINT and
 * still produces a result describing the aborted run. */
xros_status xros_run(const xros_scenario* s, const char* out_dir, int write_render_log,
                     xros_result** out);

/* Run introspection. Getters return XROS_OK and write *out on success;
 * missing names yield 0 rather than an error. */
xros_status xros_result_counter(const xros_result* r, const char* name, unsigned long long* out);
xros_status xros_result_timer_us(const xros_result* r, const char* name, long long* out);
xros_status xros_result_energy_mj(const xros_result* r, const char* module, double* out);
xros_status xros_result_total_energy_mj(const xros_result* r, double* out);
xros_status xros_result_comm_energy_mj(const xros_result* r, double* out);

/* Process exit code the run maps to: 0 clean, 2 taint violation, 3 internal
 * invariant violation, 4 output I/O failure. */
int xros_result_exit_code(const xros_result* r);

/* Copies the named violation ("" when clean) into buf, always
 * NUL-terminated. Returns the untruncated length. */
size_t xros_result_violation(const xros_result* r, char* buf, size_t bufsz);

void xros_result_free(xros_result* r);

#ifdef __cplusplus
}
#endif

#endif /* XROS_H */
