#ifndef ENDOS_H
#define ENDOS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EndosStatus {
  ENDOS_STATUS_OK = 0,
  ENDOS_STATUS_NULL_POINTER = 1,
  ENDOS_STATUS_INVALID_UTF8 = 2,
  ENDOS_STATUS_PARSE = 3,
  ENDOS_STATUS_INVALID_INPUT = 4,
  ENDOS_STATUS_UNCLASSIFIABLE = 5,
  ENDOS_STATUS_PANIC = 6,
} EndosStatus;

/**
 * Opaque machine configuration.
 */
typedef struct EndosConfig EndosConfig;

/**
 * Closed-form resonance frequencies, Hz.
 */
typedef struct EndosClosedForms {
  double single_qubit;
  double single_qubit_bare;
  double control_electron;
  double tip_nucleus;
  double target_electron_one;
  double target_electron_zero;
  double target_nucleus;
} EndosClosedForms;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next failing call on the same thread.
 */
const char *endos_last_error_message(void);

const char *endos_version(void);

struct EndosConfig *endos_config_default(void);

/**
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EndosStatus endos_config_parse(const char *text, struct EndosConfig **out);

/**
 * # Safety
 * `config` must be NULL or a handle not yet freed.
 */
void endos_config_free(struct EndosConfig *config);

/**
 * Compiles and simulates a circuit, returning the JSON run report.
 * `tips` of 0 skips scheduling. `exit_code` receives the code the CLI
 * would exit with.
 *
 * # Safety
 * Pointers must be valid; `circuit` NUL-terminated.
 */
enum EndosStatus endos_run_circuit(const struct EndosConfig *config,
                                   const char *circuit,
                                   uint64_t seed,
                                   size_t tips,
                                   bool verify_frequencies,
                                   char **report_json,
                                   int32_t *exit_code);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void endos_string_free(char *s);

/**
 * # Safety
 * Pointers must be valid.
 */
enum EndosStatus endos_closed_form_frequencies(const struct EndosConfig *config,
                                               struct EndosClosedForms *out);

/**
 * Readout line for donor bit `p_bit` and tip bit `a_bit`, Hz.
 *
 * # Safety
 * Pointers must be valid.
 */
enum EndosStatus endos_modulation_frequency(const struct EndosConfig *config,
                                            uint8_t p_bit,
                                            uint8_t a_bit,
                                            double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum EndosStatus endos_classify_frequency(const struct EndosConfig *config,
                                          double frequency,
                                          double tolerance,
                                          uint8_t *p_bit,
                                          uint8_t *a_bit);

/**
 * Wall time of one CNOT between neighbouring donors, seconds.
 *
 * # Safety
 * Pointers must be valid.
 */
enum EndosStatus endos_reference_cnot_time(const struct EndosConfig *config, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum EndosStatus endos_decoherence_budget(const struct EndosConfig *config,
                                          double mean_gate_time,
                                          uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENDOS_H */
