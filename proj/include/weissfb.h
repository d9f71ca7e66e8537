/* C interface to the weissfb solver/diagnostics library.
 *
 * All entry points return a wfb_status; anything other than WFB_OK leaves a
 * human-readable message retrievable via wfb_last_error() (thread-local).
 * Configuration objects are opaque and must be released with wfb_config_free.
 */
#ifndef WEISSFB_H
#define WEISSFB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wfb_status {
  WFB_OK = 0,
  WFB_ERR_CONFIG = 2,  /* invalid config: message carries a JSON pointer */
  WFB_ERR_SOLVER = 3,  /* solver failed to converge */
  WFB_FINDING = 4,     /* diagnostic check failed; artifacts were written */
  WFB_ERR_INTERNAL = 5 /* unexpected failure (I/O, allocation, ...) */
} wfb_status;

typedef struct wfb_config wfb_config;

/* Parse a run configuration from a JSON file / JSON text. On success *out
 * owns a new handle. */
wfb_status wfb_config_load(const char* path, wfb_config** out);
wfb_status wfb_config_parse(const char* json_text, wfb_config** out);
void wfb_config_free(wfb_config* cfg);

/* Command-line overrides. */
wfb_status wfb_config_set_seed(wfb_config* cfg, uint64_t seed);
wfb_status wfb_config_set_grid_n(wfb_config* cfg, int grid_n);

/* Execute one subcommand (solve, weiss, blowup, flatness, boundary, verify,
 * oracle, calibrate), writing artifacts into out_dir. The return value is the
 * process exit status contract: 0 ok, 2 config error, 3 non-convergence,
 * 4 diagnostic finding. */
wfb_status wfb_run(const char* subcommand, const wfb_config* cfg,
                   const char* out_dir);

/* Message for the most recent failure on this thread; empty string if none. */
const char* wfb_last_error(void);

const char* wfb_version(void);

#ifdef __cplusplus
}
#endif

#endif
