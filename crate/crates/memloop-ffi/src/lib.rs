//! C ABI for the memloop toolkit.
//!
//! Conventions:
//! - Every fallible function returns [`MlStatus`]; results come back
//!   through out-pointers.
//! - `MlTrace`, `MlReport`, and `MlFit` are opaque heap handles with
//!   matching `ml_*_free` functions.
//! - On any non-Ok status, [`ml_last_error_message`] returns a
//!   thread-local description of the failure.
//! - Strings produced by this library are freed with [`ml_string_free`].
//!
//! # Safety
//!
//! All `unsafe extern "C"` functions share one contract: pointer
//! arguments must be valid for the call, out-pointers must be writable,
//! and handles must originate from this library and not be used after
//! being freed.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use memloop::analysis::{analyze, AnalysisConfig, AnalysisReport, Classification};
use memloop::devices::{ActiveMemristorParams, InternalSourceSpec, Polarity, SourceModel};
use memloop::error::Error;
use memloop::estimation::{estimate_params, FitResult};
use memloop::simulator::run_sweep;
use memloop::simulator::IVTrace;
use memloop::waveforms::{WaveformShape, WaveformSpec};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlStatus {
    Ok = 0,
    NullArgument = 1,
    Utf8Error = 2,
    InvalidSpec = 3,
    ParseError = 4,
    AnalysisError = 5,
    IoError = 6,
    /// The requested optional quantity is absent from the report.
    Absent = 7,
    OutOfRange = 8,
    InternalError = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlShape {
    Triangular = 0,
    Sine = 1,
    BipolarPiecewiseLinear = 2,
    Constant = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlSourceModel {
    Off = 0,
    Constant = 1,
    Sine = 2,
    BipolarPiecewiseLinear = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlPolarity {
    Additive = 0,
    Subtractive = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlClassification {
    Pinched = 0,
    Open = 1,
    Linear = 2,
    Unconnected = 3,
}

/// Scalar quantities retrievable from a report.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlReportField {
    R0Ohms = 0,
    HysteresisH = 1,
    HysteresisHbar = 2,
    G = 3,
    InternalRateOhmsPerS = 4,
    InternalInterceptOhms = 5,
    EnergyJ = 6,
    AvgPowerW = 7,
    MaskedFraction = 8,
}

/// Driving waveform description.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MlWaveformSpec {
    pub shape: MlShape,
    pub amplitude_v: f64,
    pub timestep_s: f64,
    pub samples: u64,
    pub offset_v: f64,
    pub phase_fraction: f64,
}

/// Internal current source description.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MlSourceSpec {
    pub model: MlSourceModel,
    pub amplitude_a: f64,
    pub half_period_s: f64,
    pub polarity: MlPolarity,
}

/// Active memristor device parameters (signed drift rates, rising
/// resistance convention).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MlDeviceParams {
    pub m0_ohms: f64,
    pub rate_pos_ohms_per_s: f64,
    pub rate_neg_ohms_per_s: f64,
    pub m_min_ohms: f64,
    pub m_max_ohms: f64,
    pub source: MlSourceSpec,
    pub vq_volts: f64,
    pub inter_sweep_drift_ohms: f64,
}

/// Opaque recorded trace.
pub struct MlTrace(IVTrace);
/// Opaque analysis report.
pub struct MlReport(AnalysisReport);
/// Opaque fit result.
pub struct MlFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> MlStatus {
    match err {
        Error::InvalidSpec(_) | Error::CorruptState(_) | Error::Config(_) => MlStatus::InvalidSpec,
        Error::Parse { .. } => MlStatus::ParseError,
        Error::InsufficientData(_)
        | Error::NotSegmentable(_)
        | Error::DegenerateFit(_)
        | Error::UndefinedCorrelation(_) => MlStatus::AnalysisError,
        Error::Io(_) => MlStatus::IoError,
    }
}

fn fail(err: Error) -> MlStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Run a closure, converting panics into `InternalError`.
fn guarded(body: impl FnOnce() -> MlStatus) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MlStatus::InternalError
        }
    }
}

unsafe fn path_from(ptr: *const c_char) -> Result<PathBuf, MlStatus> {
    if ptr.is_null() {
        set_error("null path");
        return Err(MlStatus::NullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s).to_path_buf()),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(MlStatus::Utf8Error)
        }
    }
}

fn waveform_from(c: &MlWaveformSpec) -> WaveformSpec {
    WaveformSpec {
        shape: match c.shape {
            MlShape::Triangular => WaveformShape::Triangular,
            MlShape::Sine => WaveformShape::Sine,
            MlShape::BipolarPiecewiseLinear => WaveformShape::BipolarPiecewiseLinear,
            MlShape::Constant => WaveformShape::Constant,
        },
        amplitude_v: c.amplitude_v,
        timestep_s: c.timestep_s,
        samples: c.samples as usize,
        offset_v: c.offset_v,
        phase_fraction: c.phase_fraction,
    }
}

fn source_model_from(m: MlSourceModel) -> SourceModel {
    match m {
        MlSourceModel::Off => SourceModel::Off,
        MlSourceModel::Constant => SourceModel::Constant,
        MlSourceModel::Sine => SourceModel::Sine,
        MlSourceModel::BipolarPiecewiseLinear => SourceModel::BipolarPiecewiseLinear,
    }
}

fn params_from(c: &MlDeviceParams) -> ActiveMemristorParams {
    ActiveMemristorParams {
        m0_ohms: c.m0_ohms,
        rate_pos_ohms_per_s: c.rate_pos_ohms_per_s,
        rate_neg_ohms_per_s: c.rate_neg_ohms_per_s,
        m_min_ohms: c.m_min_ohms,
        m_max_ohms: c.m_max_ohms,
        source: InternalSourceSpec {
            model: source_model_from(c.source.model),
            amplitude_a: c.source.amplitude_a,
            half_period_s: c.source.half_period_s,
            polarity: match c.source.polarity {
                MlPolarity::Additive => Polarity::Additive,
                MlPolarity::Subtractive => Polarity::Subtractive,
            },
        },
        vq_volts: c.vq_volts,
        inter_sweep_drift_ohms: c.inter_sweep_drift_ohms,
        drift_polarity: Default::default(),
    }
}

fn params_to(p: &ActiveMemristorParams) -> MlDeviceParams {
    MlDeviceParams {
        m0_ohms: p.m0_ohms,
        rate_pos_ohms_per_s: p.rate_pos_ohms_per_s,
        rate_neg_ohms_per_s: p.rate_neg_ohms_per_s,
        m_min_ohms: p.m_min_ohms,
        m_max_ohms: p.m_max_ohms,
        source: MlSourceSpec {
            model: match p.source.model {
                SourceModel::Off => MlSourceModel::Off,
                SourceModel::Constant => MlSourceModel::Constant,
                SourceModel::Sine => MlSourceModel::Sine,
                SourceModel::BipolarPiecewiseLinear => MlSourceModel::BipolarPiecewiseLinear,
            },
            amplitude_a: p.source.amplitude_a,
            half_period_s: p.source.half_period_s,
            polarity: match p.source.polarity {
                Polarity::Additive => MlPolarity::Additive,
                Polarity::Subtractive => MlPolarity::Subtractive,
            },
        },
        vq_volts: p.vq_volts,
        inter_sweep_drift_ohms: p.inter_sweep_drift_ohms,
    }
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ml_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Free a string returned by this library. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ml_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Simulate one sweep of `params` driven by `spec`.
#[no_mangle]
pub unsafe extern "C" fn ml_simulate_sweep(
    params: *const MlDeviceParams,
    spec: *const MlWaveformSpec,
    out_trace: *mut *mut MlTrace,
) -> MlStatus {
    guarded(|| {
        if params.is_null() || spec.is_null() || out_trace.is_null() {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        let params = params_from(&*params);
        let spec = waveform_from(&*spec);
        match run_sweep(&params, &spec, None) {
            Ok((trace, _)) => {
                *out_trace = Box::into_raw(Box::new(MlTrace(trace)));
                MlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parse a trace CSV file. Read warnings are dropped; use the CLI or the
/// Rust API to inspect them.
#[no_mangle]
pub unsafe extern "C" fn ml_trace_read_file(
    path: *const c_char,
    out_trace: *mut *mut MlTrace,
) -> MlStatus {
    guarded(|| {
        if out_trace.is_null() {
            set_error("null out_trace");
            return MlStatus::NullArgument;
        }
        let path = match path_from(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match memloop::dataio::read_trace_file(&path) {
            Ok(read) => {
                *out_trace = Box::into_raw(Box::new(MlTrace(read.trace)));
                MlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Write a trace to a CSV file.
#[no_mangle]
pub unsafe extern "C" fn ml_trace_write_file(
    trace: *const MlTrace,
    path: *const c_char,
) -> MlStatus {
    guarded(|| {
        if trace.is_null() {
            set_error("null trace");
            return MlStatus::NullArgument;
        }
        let path = match path_from(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match memloop::dataio::write_trace_file(&(*trace).0, &path) {
            Ok(()) => MlStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Number of samples in a trace; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ml_trace_len(trace: *const MlTrace) -> u64 {
    if trace.is_null() {
        return 0;
    }
    (*trace).0.len() as u64
}

/// Fetch one sample by index.
#[no_mangle]
pub unsafe extern "C" fn ml_trace_sample(
    trace: *const MlTrace,
    index: u64,
    out_t_s: *mut f64,
    out_v_volts: *mut f64,
    out_i_amps: *mut f64,
) -> MlStatus {
    guarded(|| {
        if trace.is_null() || out_t_s.is_null() || out_v_volts.is_null() || out_i_amps.is_null() {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        let trace = &(*trace).0;
        match trace.samples.get(index as usize) {
            Some(s) => {
                *out_t_s = s.t_s;
                *out_v_volts = s.v_volts;
                *out_i_amps = s.i_amps;
                MlStatus::Ok
            }
            None => {
                set_error("sample index out of range");
                MlStatus::OutOfRange
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ml_trace_free(trace: *mut MlTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Run the analysis pipeline with default thresholds.
#[no_mangle]
pub unsafe extern "C" fn ml_analyze(
    trace: *const MlTrace,
    out_report: *mut *mut MlReport,
) -> MlStatus {
    guarded(|| {
        if trace.is_null() || out_report.is_null() {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        match analyze(&(*trace).0, &AnalysisConfig::default()) {
            Ok(report) => {
                *out_report = Box::into_raw(Box::new(MlReport(report)));
                MlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ml_report_classification(
    report: *const MlReport,
    out: *mut MlClassification,
) -> MlStatus {
    guarded(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        *out = match (*report).0.classification {
            Classification::Pinched => MlClassification::Pinched,
            Classification::Open => MlClassification::Open,
            Classification::Linear => MlClassification::Linear,
            Classification::Unconnected => MlClassification::Unconnected,
        };
        MlStatus::Ok
    })
}

/// Fetch one scalar from the report; `Absent` for optional quantities the
/// trace did not yield.
#[no_mangle]
pub unsafe extern "C" fn ml_report_scalar(
    report: *const MlReport,
    field: MlReportField,
    out: *mut f64,
) -> MlStatus {
    guarded(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        let r = &(*report).0;
        let value = match field {
            MlReportField::R0Ohms => r.r0_ohms,
            MlReportField::HysteresisH => Some(r.hysteresis_h),
            MlReportField::HysteresisHbar => r.hysteresis_hbar,
            MlReportField::G => r.g,
            MlReportField::InternalRateOhmsPerS => r.internal_rate_ohms_per_s,
            MlReportField::InternalInterceptOhms => r.internal_intercept_ohms,
            MlReportField::EnergyJ => Some(r.energy_j),
            MlReportField::AvgPowerW => Some(r.avg_power_w),
            MlReportField::MaskedFraction => Some(r.masked_fraction),
        };
        match value {
            Some(v) => {
                *out = v;
                MlStatus::Ok
            }
            None => {
                set_error("field absent from this report");
                MlStatus::Absent
            }
        }
    })
}

/// Serialize the report as a flat JSON document; free with
/// [`ml_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ml_report_to_json(
    report: *const MlReport,
    out_json: *mut *mut c_char,
) -> MlStatus {
    guarded(|| {
        if report.is_null() || out_json.is_null() {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        let text = memloop::dataio::write_report(&(*report).0, None);
        match CString::new(text) {
            Ok(s) => {
                *out_json = s.into_raw();
                MlStatus::Ok
            }
            Err(_) => {
                set_error("report contained an interior NUL");
                MlStatus::InternalError
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ml_report_free(report: *mut MlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Fit device parameters to a trace (analysis-seeded derivative-free
/// least squares).
#[no_mangle]
pub unsafe extern "C" fn ml_fit(
    trace: *const MlTrace,
    source_model: MlSourceModel,
    out_fit: *mut *mut MlFit,
) -> MlStatus {
    guarded(|| {
        if trace.is_null() || out_fit.is_null() {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        match estimate_params(&(*trace).0, source_model_from(source_model), None) {
            Ok(fit) => {
                *out_fit = Box::into_raw(Box::new(MlFit(fit)));
                MlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Fitted device parameters.
#[no_mangle]
pub unsafe extern "C" fn ml_fit_device_params(
    fit: *const MlFit,
    out_params: *mut MlDeviceParams,
) -> MlStatus {
    guarded(|| {
        if fit.is_null() || out_params.is_null() {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        *out_params = params_to(&(*fit).0.params);
        MlStatus::Ok
    })
}

/// Fit diagnostics: residual, iteration count, convergence, and whether
/// the fitted source is indistinguishable from a passive device.
#[no_mangle]
pub unsafe extern "C" fn ml_fit_stats(
    fit: *const MlFit,
    out_residual_rms_a: *mut f64,
    out_iterations: *mut u64,
    out_converged: *mut bool,
    out_source_indistinguishable: *mut bool,
) -> MlStatus {
    guarded(|| {
        if fit.is_null()
            || out_residual_rms_a.is_null()
            || out_iterations.is_null()
            || out_converged.is_null()
            || out_source_indistinguishable.is_null()
        {
            set_error("null argument");
            return MlStatus::NullArgument;
        }
        let f = &(*fit).0;
        *out_residual_rms_a = f.residual_rms_a;
        *out_iterations = f.iterations as u64;
        *out_converged = f.converged;
        *out_source_indistinguishable = f.source_indistinguishable;
        MlStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn ml_fit_free(fit: *mut MlFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}
