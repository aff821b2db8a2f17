/* C ABI for the eogforge EOG front-end toolkit. */

#ifndef EOGFORGE_H
#define EOGFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum EogStatus {
  EOG_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  EOG_STATUS_NULL_ARGUMENT = 1,
  /**
   * Configuration or scenario rejected by validation.
   */
  EOG_STATUS_INVALID_CONFIG = 2,
  /**
   * Malformed input data (serial log, JSON).
   */
  EOG_STATUS_PARSE_ERROR = 3,
  /**
   * Internal invariant violation; report as a bug.
   */
  EOG_STATUS_INTERNAL_ERROR = 4,
} EogStatus;

/**
 * Chain configuration handle.
 */
typedef struct EogConfig EogConfig;

/**
 * Serial log handle.
 */
typedef struct EogLog EogLog;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *eog_version(void);

/**
 * Release a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void eog_string_free(char *s);

/**
 * Description of the most recent failure on this thread, or NULL.
 * The caller owns the returned string.
 */
char *eog_last_error_message(void);

/**
 * New configuration with stock defaults. Free with `eog_config_free`.
 */
struct EogConfig *eog_config_default(void);

/**
 * New configuration at the fig6 bench operating point.
 */
struct EogConfig *eog_config_fig6(void);

/**
 * Parse and validate a configuration from JSON. Missing fields take their
 * defaults; unknown fields are rejected.
 *
 * # Safety
 * `json` must be NULL or point to a NUL-terminated buffer;
 * `out` must be valid for writes.
 */
enum EogStatus eog_config_from_json(const char *json, struct EogConfig **out);

/**
 * Canonical JSON for a configuration. Caller frees the string.
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`.
 */
char *eog_config_to_json(const struct EogConfig *config);

/**
 * Stable content hash identifying a configuration. Caller frees the string.
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`.
 */
char *eog_config_hash(const struct EogConfig *config);

/**
 * Override the noise seed.
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`.
 */
enum EogStatus eog_config_set_seed(struct EogConfig *config,
                                   uint64_t seed);

/**
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`; the handle is invalid afterwards.
 */
void eog_config_free(struct EogConfig *config);

/**
 * Parse a serial CSV log from a NUL-terminated buffer.
 *
 * # Safety
 * `text` must be NULL or point to a NUL-terminated buffer;
 * `out` must be valid for writes.
 */
enum EogStatus eog_log_parse(const char *text, struct EogLog **out);

/**
 * Serialize a log in the canonical serial CSV format. Caller frees.
 *
 * # Safety
 * `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`.
 */
char *eog_log_write(const struct EogLog *log);

/**
 * Number of samples in a log; 0 for NULL.
 *
 * # Safety
 * `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`.
 */
size_t eog_log_sample_count(const struct EogLog *log);

/**
 * Fetch one sample. Output pointers may be NULL to skip a field.
 *
 * # Safety
 * `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`; output pointers must be NULL or valid for writes.
 */
enum EogStatus eog_log_sample(const struct EogLog *log,
                              size_t index,
                              double *out_timestamp_s,
                              uint16_t *out_code,
                              double *out_volts);

/**
 *
 * # Safety
 * `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`; the handle is invalid afterwards.
 */
void eog_log_free(struct EogLog *log);

/**
 * Simulate a scenario (JSON text) through the configured chain.
 * On success `*out_log` holds the serial log and, when `out_truth_json` is
 * non-NULL, `*out_truth_json` holds the ground-truth events as JSON.
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`;
 * `scenario_json` must be NULL or NUL-terminated; `out_log` must be valid for
 * writes and `out_truth_json` NULL or valid for writes.
 */
enum EogStatus eog_simulate(const struct EogConfig *config,
                            const char *scenario_json,
                            struct EogLog **out_log,
                            char **out_truth_json);

/**
 * Detect events in a log; `*out_json` receives a JSON array of
 * `{onset_s, polarity, peak_value_v, peak_time_s}` objects.
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`;
 * `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`; `out_json` must be valid for writes.
 */
enum EogStatus eog_detect_events_json(const struct EogConfig *config,
                                      const struct EogLog *log,
                                      char **out_json);

/**
 * Full metrics for a log, optionally against ground-truth JSON (pass NULL
 * to skip latency/accuracy). `*out_json` receives the metrics report.
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`;
 * `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`;
 * `truth_json` must be NULL or NUL-terminated; `out_json` must be valid for writes.
 */
enum EogStatus eog_metrics_json(const struct EogConfig *config,
                                const struct EogLog *log,
                                const char *truth_json,
                                char **out_json);

/**
 * Mean-square / variance SNR of a sample buffer. A constant input reports
 * +infinity in `*out_snr_db`.
 *
 * # Safety
 * `samples` must be NULL or valid for reads of `len` doubles; output pointers
 * must be NULL or valid for writes.
 */
enum EogStatus eog_snr(const double *samples,
                       size_t len,
                       double *out_snr_db,
                       double *out_signal_power,
                       double *out_noise_power);

/**
 * Converter step size `v_ref / 2^bits`; NaN for invalid arguments.
 */
double eog_lsb(double v_ref, uint8_t bits);

/**
 * First-stage instrumentation-amplifier gain of a configuration.
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`; `out_gain` must be valid for writes.
 */
enum EogStatus eog_ina_gain(const struct EogConfig *config,
                            double *out_gain);

/**
 * Total (both stages) gain of a configuration.
 *
 * # Safety
 * `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`; `out_gain` must be valid for writes.
 */
enum EogStatus eog_total_gain(const struct EogConfig *config,
                              double *out_gain);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EOGFORGE_H */
