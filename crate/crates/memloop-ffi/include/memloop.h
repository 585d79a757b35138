/* memloop C API: active-memristor simulation and I-V analysis. */

#ifndef MEMLOOP_H
#define MEMLOOP_H

/* Generated by cbindgen from memloop-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum MlStatus {
  ML_STATUS_OK = 0,
  ML_STATUS_NULL_ARGUMENT = 1,
  ML_STATUS_UTF8_ERROR = 2,
  ML_STATUS_INVALID_SPEC = 3,
  ML_STATUS_PARSE_ERROR = 4,
  ML_STATUS_ANALYSIS_ERROR = 5,
  ML_STATUS_IO_ERROR = 6,
  // The requested optional quantity is absent from the report.
  ML_STATUS_ABSENT = 7,
  ML_STATUS_OUT_OF_RANGE = 8,
  ML_STATUS_INTERNAL_ERROR = 9,
} MlStatus;

typedef enum MlSourceModel {
  ML_SOURCE_MODEL_OFF = 0,
  ML_SOURCE_MODEL_CONSTANT = 1,
  ML_SOURCE_MODEL_SINE = 2,
  ML_SOURCE_MODEL_BIPOLAR_PIECEWISE_LINEAR = 3,
} MlSourceModel;

typedef enum MlPolarity {
  ML_POLARITY_ADDITIVE = 0,
  ML_POLARITY_SUBTRACTIVE = 1,
} MlPolarity;

typedef enum MlShape {
  ML_SHAPE_TRIANGULAR = 0,
  ML_SHAPE_SINE = 1,
  ML_SHAPE_BIPOLAR_PIECEWISE_LINEAR = 2,
  ML_SHAPE_CONSTANT = 3,
} MlShape;

typedef enum MlClassification {
  ML_CLASSIFICATION_PINCHED = 0,
  ML_CLASSIFICATION_OPEN = 1,
  ML_CLASSIFICATION_LINEAR = 2,
  ML_CLASSIFICATION_UNCONNECTED = 3,
} MlClassification;

// Scalar quantities retrievable from a report.
typedef enum MlReportField {
  ML_REPORT_FIELD_R0_OHMS = 0,
  ML_REPORT_FIELD_HYSTERESIS_H = 1,
  ML_REPORT_FIELD_HYSTERESIS_HBAR = 2,
  ML_REPORT_FIELD_G = 3,
  ML_REPORT_FIELD_INTERNAL_RATE_OHMS_PER_S = 4,
  ML_REPORT_FIELD_INTERNAL_INTERCEPT_OHMS = 5,
  ML_REPORT_FIELD_ENERGY_J = 6,
  ML_REPORT_FIELD_AVG_POWER_W = 7,
  ML_REPORT_FIELD_MASKED_FRACTION = 8,
} MlReportField;

// Opaque fit result.
typedef struct MlFit MlFit;

// Opaque analysis report.
typedef struct MlReport MlReport;

// Opaque recorded trace.
typedef struct MlTrace MlTrace;

// Internal current source description.
typedef struct MlSourceSpec {
  enum MlSourceModel model;
  double amplitude_a;
  double half_period_s;
  enum MlPolarity polarity;
} MlSourceSpec;

// Active memristor device parameters (signed drift rates, rising
// resistance convention).
typedef struct MlDeviceParams {
  double m0_ohms;
  double rate_pos_ohms_per_s;
  double rate_neg_ohms_per_s;
  double m_min_ohms;
  double m_max_ohms;
  struct MlSourceSpec source;
  double vq_volts;
  double inter_sweep_drift_ohms;
} MlDeviceParams;

// Driving waveform description.
typedef struct MlWaveformSpec {
  enum MlShape shape;
  double amplitude_v;
  double timestep_s;
  uint64_t samples;
  double offset_v;
  double phase_fraction;
} MlWaveformSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. The pointer
// stays valid until the next failing call on the same thread.
const char *ml_last_error_message(void);

// Free a string returned by this library. Null is a no-op.
void ml_string_free(char *s);

// Simulate one sweep of `params` driven by `spec`.
enum MlStatus ml_simulate_sweep(const struct MlDeviceParams *params,
                                const struct MlWaveformSpec *spec,
                                struct MlTrace **out_trace);

// Parse a trace CSV file. Read warnings are dropped; use the CLI or the
// Rust API to inspect them.
enum MlStatus ml_trace_read_file(const char *path, struct MlTrace **out_trace);

// Write a trace to a CSV file.
enum MlStatus ml_trace_write_file(const struct MlTrace *trace, const char *path);

// Number of samples in a trace; 0 for a null handle.
uint64_t ml_trace_len(const struct MlTrace *trace);

// Fetch one sample by index.
enum MlStatus ml_trace_sample(const struct MlTrace *trace,
                              uint64_t index,
                              double *out_t_s,
                              double *out_v_volts,
                              double *out_i_amps);

void ml_trace_free(struct MlTrace *trace);

// Run the analysis pipeline with default thresholds.
enum MlStatus ml_analyze(const struct MlTrace *trace, struct MlReport **out_report);

enum MlStatus ml_report_classification(const struct MlReport *report, enum MlClassification *out);

// Fetch one scalar from the report; `Absent` for optional quantities the
// trace did not yield.
enum MlStatus ml_report_scalar(const struct MlReport *report,
                               enum MlReportField field,
                               double *out);

// Serialize the report as a flat JSON document; free with
// [`ml_string_free`].
enum MlStatus ml_report_to_json(const struct MlReport *report, char **out_json);

void ml_report_free(struct MlReport *report);

// Fit device parameters to a trace (analysis-seeded derivative-free
// least squares).
enum MlStatus ml_fit(const struct MlTrace *trace,
                     enum MlSourceModel source_model,
                     struct MlFit **out_fit);

// Fitted device parameters.
enum MlStatus ml_fit_device_params(const struct MlFit *fit, struct MlDeviceParams *out_params);

// Fit diagnostics: residual, iteration count, convergence, and whether
// the fitted source is indistinguishable from a passive device.
enum MlStatus ml_fit_stats(const struct MlFit *fit,
                           double *out_residual_rms_a,
                           uint64_t *out_iterations,
                           bool *out_converged,
                           bool *out_source_indistinguishable);

void ml_fit_free(struct MlFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEMLOOP_H */
