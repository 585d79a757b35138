/* Minimal C consumer: simulate an active memristor sweep, analyze it,
 * and print the headline metrics.
 *
 * Build (from the repo root):
 *   cargo build -p memloop-ffi --release
 *   cc crates/memloop-ffi/examples/demo.c \
 *      -Icrates/memloop-ffi/include \
 *      target/release/libmemloop_ffi.a -lpthread -ldl -lm -o demo
 */
#include <stdio.h>

#include "memloop.h"

int main(void) {
    MlDeviceParams params = {
        .m0_ohms = 1e6,
        .rate_pos_ohms_per_s = 1e2,
        .rate_neg_ohms_per_s = 2.88e2,
        .m_min_ohms = 1e5,
        .m_max_ohms = 1e7,
        .source = {
            .model = ML_SOURCE_MODEL_CONSTANT,
            .amplitude_a = 2e-9,
            .half_period_s = 700.0,
            .polarity = ML_POLARITY_ADDITIVE,
        },
        .vq_volts = 0.0,
        .inter_sweep_drift_ohms = 0.0,
    };
    MlWaveformSpec spec = {
        .shape = ML_SHAPE_TRIANGULAR,
        .amplitude_v = 0.1,
        .timestep_s = 2.0,
        .samples = 160,
        .offset_v = 0.0,
        .phase_fraction = 0.0,
    };

    MlTrace *trace = NULL;
    if (ml_simulate_sweep(&params, &spec, &trace) != ML_STATUS_OK) {
        fprintf(stderr, "simulate failed: %s\n", ml_last_error_message());
        return 1;
    }

    MlReport *report = NULL;
    if (ml_analyze(trace, &report) != ML_STATUS_OK) {
        fprintf(stderr, "analyze failed: %s\n", ml_last_error_message());
        ml_trace_free(trace);
        return 1;
    }

    double g = 0.0, r0 = 0.0, h = 0.0;
    MlClassification class;
    ml_report_scalar(report, ML_REPORT_FIELD_G, &g);
    ml_report_scalar(report, ML_REPORT_FIELD_R0_OHMS, &r0);
    ml_report_scalar(report, ML_REPORT_FIELD_HYSTERESIS_H, &h);
    ml_report_classification(report, &class);

    printf("samples: %llu\n", (unsigned long long)ml_trace_len(trace));
    printf("r0 = %.4e ohm, H = %.4e VA, g = %.4f, classification = %d\n",
           r0, h, g, (int)class);

    ml_report_free(report);
    ml_trace_free(trace);
    return 0;
}
