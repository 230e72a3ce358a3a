#ifndef RETROFIT_LCC_H
#define RETROFIT_LCC_H

/* Generated by cbindgen from the retrofit-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  /**
   * A required pointer was null, a string was not UTF-8, or an index was out of range.
   */
  RL_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The configuration, building or a measure failed validation or could not be parsed.
   */
  RL_STATUS_VALIDATION = 2,
  /**
   * A file could not be read or written.
   */
  RL_STATUS_IO = 3,
  /**
   * A measure could not be applied to the building.
   */
  RL_STATUS_CONFLICT = 4,
  /**
   * An internal error; the handle involved should be discarded.
   */
  RL_STATUS_INTERNAL = 5,
} RlStatus;

/**
 * Per-measure results of one evaluation run.
 */
typedef struct RlEvaluation RlEvaluation;

/**
 * Pareto front of one enumeration run.
 */
typedef struct RlPareto RlPareto;

/**
 * A loaded, validated scenario.
 */
typedef struct RlScenario RlScenario;

/**
 * Annual aggregates of one building state.
 */
typedef struct RlMetrics {
  /**
   * GJ/yr, net of PV.
   */
  double energy_gj;
  double electricity_gj;
  double natural_gas_gj;
  /**
   * CAD/yr at the anchor year.
   */
  double cost_cad;
  /**
   * tCO2e/yr
   */
  double ghg_t;
} RlMetrics;

/**
 * Savings of one measure applied alone; positive values are reductions.
 */
typedef struct RlMeasureRow {
  double delta_energy_gj;
  double delta_electricity_gj;
  double delta_gas_gj;
  double delta_cost_cad;
  double delta_ghg_t;
  double upfront_cad;
  double lifetime_savings_cad;
  double lcc_cad;
} RlMeasureRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rl_version(void);

/**
 * Copy of the last error message on this thread, or null when the last call succeeded.
 * Free the result with [`rl_string_free`].
 */
char *rl_last_error_message(void);

/**
 * Free a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void rl_string_free(char *s);

/**
 * Load a scenario configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RlStatus rl_scenario_load(const char *path, struct RlScenario **out);

/**
 * Parse a scenario from TOML text. Relative paths in it resolve against `base_dir`, which may
 * be null for the current directory.
 *
 * # Safety
 * `toml` and a non-null `base_dir` must be NUL-terminated strings; `out` must be writable.
 */
enum RlStatus rl_scenario_from_toml(const char *toml,
                                    const char *base_dir,
                                    struct RlScenario **out);

/**
 * Release a scenario. Null is ignored.
 *
 * # Safety
 * `s` must come from a scenario constructor and must not be used afterwards.
 */
void rl_scenario_free(struct RlScenario *s);

/**
 * Number of measures in the scenario's catalog; 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live scenario handle.
 */
size_t rl_scenario_measure_count(const struct RlScenario *s);

/**
 * Annual aggregates of the base building.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum RlStatus rl_scenario_base_metrics(const struct RlScenario *s, struct RlMetrics *out);

/**
 * Aggregates after the full package in the configured waterfall order.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum RlStatus rl_scenario_package_metrics(const struct RlScenario *s, struct RlMetrics *out);

/**
 * Evaluate every catalog measure on its own against the base building.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum RlStatus rl_evaluate(const struct RlScenario *s, struct RlEvaluation **out);

/**
 * Release an evaluation. Null is ignored.
 *
 * # Safety
 * `e` must come from [`rl_evaluate`] and must not be used afterwards.
 */
void rl_evaluation_free(struct RlEvaluation *e);

/**
 * # Safety
 * `e` must be null or a live evaluation handle.
 */
size_t rl_evaluation_row_count(const struct RlEvaluation *e);

/**
 * Numeric results of row `index` (catalog order).
 *
 * # Safety
 * `e` must be a live evaluation handle; `out` must be writable.
 */
enum RlStatus rl_evaluation_row(const struct RlEvaluation *e,
                                size_t index,
                                struct RlMeasureRow *out);

/**
 * Measure id of row `index`, borrowed from the handle (valid until it is freed); null when
 * out of range.
 *
 * # Safety
 * `e` must be null or a live evaluation handle.
 */
const char *rl_evaluation_row_id(const struct RlEvaluation *e, size_t index);

/**
 * Enumerate measure packages and keep the (LCC, GHG) Pareto front. `max_size` of 0 means no
 * bound on package size.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
enum RlStatus rl_pareto(const struct RlScenario *s, size_t max_size, struct RlPareto **out);

/**
 * Release a Pareto result. Null is ignored.
 *
 * # Safety
 * `p` must come from [`rl_pareto`] and must not be used afterwards.
 */
void rl_pareto_free(struct RlPareto *p);

/**
 * Number of points on the front.
 *
 * # Safety
 * `p` must be null or a live Pareto handle.
 */
size_t rl_pareto_len(const struct RlPareto *p);

/**
 * Number of packages evaluated while building the front.
 *
 * # Safety
 * `p` must be null or a live Pareto handle.
 */
size_t rl_pareto_evaluated(const struct RlPareto *p);

/**
 * LCC (CAD) and annual GHG (t) of front point `index`, ordered by ascending LCC.
 *
 * # Safety
 * `p` must be a live Pareto handle; `lcc` and `ghg` must be writable.
 */
enum RlStatus rl_pareto_point(const struct RlPareto *p, size_t index, double *lcc, double *ghg);

/**
 * Measure ids of front point `index` joined with `+` (empty for doing nothing), borrowed from
 * the handle; null when out of range.
 *
 * # Safety
 * `p` must be null or a live Pareto handle.
 */
const char *rl_pareto_point_measures(const struct RlPareto *p, size_t index);

/**
 * Run the full evaluation and write the report files into `dir`. The Pareto section is left
 * empty when the catalog is too large to enumerate exhaustively.
 *
 * # Safety
 * `s` must be a live scenario handle; `dir` must be a NUL-terminated string.
 */
enum RlStatus rl_write_reports(const struct RlScenario *s, const char *dir);

/**
 * Carbon price (CAD/tCO2e) in `year` under the default schedule.
 *
 * # Safety
 * `out` must be writable.
 */
enum RlStatus rl_carbon_tax_at(int32_t year, double *out);

/**
 * Net present value of `len` yearly flows (year 0 first) at rate `rate`.
 *
 * # Safety
 * `flows` must point to `len` readable doubles (or be null with `len` 0); `out` must be writable.
 */
enum RlStatus rl_npv(const double *flows, size_t len, double rate, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RETROFIT_LCC_H */
