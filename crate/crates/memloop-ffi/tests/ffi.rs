//! Exercises the C ABI surface the way a foreign binding would: through
//! the extern functions, out-pointers, and status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use memloop_ffi::*;

fn demo_params() -> MlDeviceParams {
    MlDeviceParams {
        m0_ohms: 1e6,
        rate_pos_ohms_per_s: 1e2,
        rate_neg_ohms_per_s: 2.88e2,
        m_min_ohms: 1e5,
        m_max_ohms: 1e7,
        source: MlSourceSpec {
            model: MlSourceModel::Constant,
            amplitude_a: 2e-9,
            half_period_s: 700.0,
            polarity: MlPolarity::Additive,
        },
        vq_volts: 0.0,
        inter_sweep_drift_ohms: 0.0,
    }
}

fn demo_spec() -> MlWaveformSpec {
    MlWaveformSpec {
        shape: MlShape::Triangular,
        amplitude_v: 0.1,
        timestep_s: 2.0,
        samples: 160,
        offset_v: 0.0,
        phase_fraction: 0.0,
    }
}

fn simulate() -> *mut MlTrace {
    let mut trace = ptr::null_mut();
    let status = unsafe { ml_simulate_sweep(&demo_params(), &demo_spec(), &mut trace) };
    assert_eq!(status, MlStatus::Ok);
    assert!(!trace.is_null());
    trace
}

#[test]
fn simulate_and_read_samples() {
    let trace = simulate();
    unsafe {
        assert_eq!(ml_trace_len(trace), 160);
        let (mut t, mut v, mut i) = (0.0, 0.0, 0.0);
        assert_eq!(
            ml_trace_sample(trace, 0, &mut t, &mut v, &mut i),
            MlStatus::Ok
        );
        assert_eq!((t, v), (0.0, 0.0));
        assert_eq!(i, 2e-9); // internal current at the crossing
        assert_eq!(
            ml_trace_sample(trace, 40, &mut t, &mut v, &mut i),
            MlStatus::Ok
        );
        assert_eq!(v, 0.1);
        assert_eq!(
            ml_trace_sample(trace, 160, &mut t, &mut v, &mut i),
            MlStatus::OutOfRange
        );
        ml_trace_free(trace);
    }
}

#[test]
fn analyze_reports_metrics_and_absence() {
    let trace = simulate();
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(ml_analyze(trace, &mut report), MlStatus::Ok);

        let mut class = MlClassification::Unconnected;
        assert_eq!(ml_report_classification(report, &mut class), MlStatus::Ok);
        assert_eq!(class, MlClassification::Pinched);

        let mut g = 0.0;
        assert_eq!(
            ml_report_scalar(report, MlReportField::G, &mut g),
            MlStatus::Ok
        );
        assert!((g - 2.88).abs() < 0.05 * 2.88, "g = {g}");

        let mut json = ptr::null_mut();
        assert_eq!(ml_report_to_json(report, &mut json), MlStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"g\""));
        ml_string_free(json);

        ml_report_free(report);
        ml_trace_free(trace);
    }
}

#[test]
fn report_scalar_signals_absent_fields() {
    // A plain resistor yields no asymmetry factor.
    let params = MlDeviceParams {
        rate_pos_ohms_per_s: 0.0,
        rate_neg_ohms_per_s: 0.0,
        source: MlSourceSpec {
            model: MlSourceModel::Off,
            amplitude_a: 0.0,
            half_period_s: 700.0,
            polarity: MlPolarity::Additive,
        },
        ..demo_params()
    };
    unsafe {
        let mut trace = ptr::null_mut();
        assert_eq!(
            ml_simulate_sweep(&params, &demo_spec(), &mut trace),
            MlStatus::Ok
        );
        let mut report = ptr::null_mut();
        assert_eq!(ml_analyze(trace, &mut report), MlStatus::Ok);

        let mut h = -1.0;
        assert_eq!(
            ml_report_scalar(report, MlReportField::HysteresisH, &mut h),
            MlStatus::Ok
        );
        assert!(h >= 0.0);

        ml_report_free(report);
        ml_trace_free(trace);
    }
}

#[test]
fn file_round_trip_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
    unsafe {
        let trace = simulate();
        assert_eq!(ml_trace_write_file(trace, path.as_ptr()), MlStatus::Ok);

        let mut back = ptr::null_mut();
        assert_eq!(ml_trace_read_file(path.as_ptr(), &mut back), MlStatus::Ok);
        assert_eq!(ml_trace_len(back), 160);

        let (mut t0, mut v0, mut i0) = (0.0, 0.0, 0.0);
        let (mut t1, mut v1, mut i1) = (0.0, 0.0, 0.0);
        for k in [0u64, 40, 80, 159] {
            assert_eq!(
                ml_trace_sample(trace, k, &mut t0, &mut v0, &mut i0),
                MlStatus::Ok
            );
            assert_eq!(
                ml_trace_sample(back, k, &mut t1, &mut v1, &mut i1),
                MlStatus::Ok
            );
            assert_eq!((t0, v0, i0), (t1, v1, i1));
        }
        ml_trace_free(back);
        ml_trace_free(trace);
    }
}

#[test]
fn fit_recovers_parameters_over_the_abi() {
    let trace = simulate();
    unsafe {
        let mut fit = ptr::null_mut();
        assert_eq!(
            ml_fit(trace, MlSourceModel::Constant, &mut fit),
            MlStatus::Ok
        );

        let mut params = demo_params();
        assert_eq!(ml_fit_device_params(fit, &mut params), MlStatus::Ok);
        assert!((params.m0_ohms - 1e6).abs() < 0.05 * 1e6);
        assert!((params.source.amplitude_a - 2e-9).abs() < 0.05 * 2e-9);

        let mut residual = 0.0;
        let mut iterations = 0u64;
        let mut converged = false;
        let mut indistinct = true;
        assert_eq!(
            ml_fit_stats(
                fit,
                &mut residual,
                &mut iterations,
                &mut converged,
                &mut indistinct
            ),
            MlStatus::Ok
        );
        assert!(residual >= 0.0);
        assert!(iterations > 0);

        ml_fit_free(fit);
        ml_trace_free(trace);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut trace = ptr::null_mut();
        assert_eq!(
            ml_simulate_sweep(ptr::null(), &demo_spec(), &mut trace),
            MlStatus::NullArgument
        );
        let msg = CStr::from_ptr(ml_last_error_message()).to_str().unwrap();
        assert!(msg.contains("null"));

        let bad_spec = MlWaveformSpec {
            timestep_s: 0.0,
            ..demo_spec()
        };
        assert_eq!(
            ml_simulate_sweep(&demo_params(), &bad_spec, &mut trace),
            MlStatus::InvalidSpec
        );

        let missing = CString::new("/nonexistent/trace.csv").unwrap();
        assert_eq!(
            ml_trace_read_file(missing.as_ptr(), &mut trace),
            MlStatus::IoError
        );

        // frees tolerate null
        ml_trace_free(ptr::null_mut());
        ml_report_free(ptr::null_mut());
        ml_fit_free(ptr::null_mut());
        ml_string_free(ptr::null_mut());
    }
}
