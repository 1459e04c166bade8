#ifndef TERRASIM_H
#define TERRASIM_H

/* Generated by cbindgen from the terrasim-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a terrasim call. Mirrors the CLI exit codes for the shared
 * cases (0 ok, 2 invalid, 3 I/O).
 */
typedef enum TerrasimStatus {
  /**
   * The call succeeded.
   */
  TERRASIM_STATUS_OK = 0,
  /**
   * The scenario failed validation or the stability gate.
   */
  TERRASIM_STATUS_INVALID = 2,
  /**
   * Reading input or writing output failed.
   */
  TERRASIM_STATUS_IO = 3,
  /**
   * A required pointer argument was null.
   */
  TERRASIM_STATUS_NULL_ARG = 4,
  /**
   * An internal panic was caught at the boundary.
   */
  TERRASIM_STATUS_PANIC = 5,
} TerrasimStatus;

/**
 * Opaque scenario handle. Create with [`terrasim_scenario_default`] or
 * [`terrasim_scenario_from_json`]; destroy with [`terrasim_scenario_free`].
 */
typedef struct TerrasimScenario TerrasimScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static, nul-terminated string. Never null;
 * do not free.
 */
const char *terrasim_version(void);

/**
 * The last error message recorded on this thread, or null if the most
 * recent call succeeded. The pointer stays valid until the next terrasim
 * call on the same thread; do not free it.
 */
const char *terrasim_last_error(void);

/**
 * Free a string returned by this library (e.g. from
 * [`terrasim_scenario_to_json`]). Null is ignored.
 *
 * # Safety
 * `s` must be null or a pointer previously returned by a terrasim function
 * that documents this as its release path, and must not be used afterward.
 */
void terrasim_string_free(char *s);

/**
 * Create a scenario handle holding the built-in defaults. Never fails.
 */
struct TerrasimScenario *terrasim_scenario_default(void);

/**
 * Parse and validate a scenario from a JSON document (`"{}"` gives the
 * defaults). Returns null on failure with the reason in
 * [`terrasim_last_error`].
 *
 * # Safety
 * `json` must be null or a nul-terminated string.
 */
struct TerrasimScenario *terrasim_scenario_from_json(const char *json);

/**
 * Serialize a scenario back to pretty-printed JSON with every key present.
 * Returns a caller-owned string (release with [`terrasim_string_free`]),
 * or null if `scenario` is null.
 *
 * # Safety
 * `scenario` must be null or a live handle from this library.
 */
char *terrasim_scenario_to_json(const struct TerrasimScenario *scenario);

/**
 * Destroy a scenario handle. Null is ignored.
 *
 * # Safety
 * `scenario` must be null or a live handle from this library, and must not
 * be used afterward.
 */
void terrasim_scenario_free(struct TerrasimScenario *scenario);

/**
 * Validate a scenario and its stability gate without running it.
 *
 * # Safety
 * `scenario` must be null or a live handle from this library.
 */
enum TerrasimStatus terrasim_check(const struct TerrasimScenario *scenario);

/**
 * Run a scenario to completion, writing `series.csv`, field snapshots, and
 * (if the scenario enables them) heatmap frames under `out_dir`.
 *
 * # Safety
 * `scenario` must be null or a live handle from this library; `out_dir`
 * must be null or a nul-terminated path string.
 */
enum TerrasimStatus terrasim_run(const struct TerrasimScenario *scenario, const char *out_dir);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TERRASIM_H */
