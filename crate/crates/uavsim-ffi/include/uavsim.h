/* C interface for the uavsim multi-UAV mmWave network simulator. */

#ifndef UAVSIM_H
#define UAVSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by fallible calls.
typedef enum UavsimStatus {
  UAVSIM_STATUS_OK = 0,
  UAVSIM_STATUS_NULL_ARGUMENT = 1,
  UAVSIM_STATUS_INVALID_ARGUMENT = 2,
  UAVSIM_STATUS_PARSE_ERROR = 3,
  UAVSIM_STATUS_INFEASIBLE = 4,
  UAVSIM_STATUS_IO_ERROR = 5,
  UAVSIM_STATUS_OUT_OF_RANGE = 6,
  UAVSIM_STATUS_INTERNAL_ERROR = 7,
} UavsimStatus;

// Opaque handle to a finished run.
typedef struct UavsimRun UavsimRun;

// Opaque scenario handle.
typedef struct UavsimScenario UavsimScenario;

// One metrics row of a finished run.
typedef struct UavsimMetricsRecord {
  uint64_t slot;
  double unserved_pct;
  double delay_sd_s;
  double total_bits;
  double energy_j;
  // Meaningful only when `ee_defined` is true (no movement energy spent
  // yet otherwise).
  double ee_bits_per_j;
  bool ee_defined;
} UavsimMetricsRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Latest error message for this thread, or null if none was recorded.
// The pointer stays valid until the next failing call on the same thread.
const char *uavsim_last_error_message(void);

// New scenario with the library defaults.
struct UavsimScenario *uavsim_scenario_default(void);

// Parse a scenario from TOML text. Returns null on error.
//
// # Safety
// `text` must be a valid NUL-terminated UTF-8 string.
struct UavsimScenario *uavsim_scenario_from_toml(const char *text);

// Load a scenario from a TOML file. Returns null on error.
//
// # Safety
// `path` must be a valid NUL-terminated string.
struct UavsimScenario *uavsim_scenario_from_file(const char *path);

// Override the scenario seed.
//
// # Safety
// `scenario` must be a live handle from a `uavsim_scenario_*` constructor.
enum UavsimStatus uavsim_scenario_set_seed(struct UavsimScenario *scenario, uint64_t seed);

// Select the assignment scheme: "proposed", "bt", "bpl" or "balanced".
//
// # Safety
// `scenario` must be a live handle; `name` a valid NUL-terminated string.
enum UavsimStatus uavsim_scenario_set_algorithm(struct UavsimScenario *scenario, const char *name);

// Serialize the scenario back to TOML. Free with `uavsim_string_free`.
//
// # Safety
// `scenario` must be a live handle.
char *uavsim_scenario_to_toml(const struct UavsimScenario *scenario);

// # Safety
// `scenario` must come from a `uavsim_scenario_*` constructor and not have
// been freed already. Null is a no-op.
void uavsim_scenario_free(struct UavsimScenario *scenario);

// Run the scenario with its configured algorithm. Returns null on error.
//
// # Safety
// `scenario` must be a live handle.
struct UavsimRun *uavsim_run(const struct UavsimScenario *scenario);

// Number of metric records (slots) in a finished run.
//
// # Safety
// `run` must be a live handle.
size_t uavsim_run_len(const struct UavsimRun *run);

// Copy one metrics record into `out`.
//
// # Safety
// `run` must be a live handle and `out` a valid destination.
enum UavsimStatus uavsim_run_record(const struct UavsimRun *run,
                                    size_t index,
                                    struct UavsimMetricsRecord *out);

// Total fleet movement energy of the run, joules.
//
// # Safety
// `run` must be a live handle.
double uavsim_run_total_energy_j(const struct UavsimRun *run);

// Write the metrics CSV for this run.
//
// # Safety
// `run` must be a live handle; `path` a valid NUL-terminated string.
enum UavsimStatus uavsim_run_write_metrics_csv(const struct UavsimRun *run, const char *path);

// # Safety
// `run` must come from `uavsim_run` and not have been freed already.
// Null is a no-op.
void uavsim_run_free(struct UavsimRun *run);

// Free a string returned by this library.
//
// # Safety
// `text` must come from a `uavsim_*` call that documents this free
// function. Null is a no-op.
void uavsim_string_free(char *text);

// Log-distance path loss `alpha + 10 * beta * log10(d)` in dB.
//
// # Safety
// `out` must be a valid destination.
enum UavsimStatus uavsim_path_loss_db(double distance_m, double alpha_db, double beta, double *out);

// Rotary-wing propulsion power in watts at forward speed `v`, using the
// library's default airframe parameters.
//
// # Safety
// `out` must be a valid destination.
enum UavsimStatus uavsim_propulsion_power_w(double speed_mps, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVSIM_H */
