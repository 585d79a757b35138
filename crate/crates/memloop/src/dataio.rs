//! Stable text formats: the trace CSV (with `#` metadata comments), the
//! flat report document (JSON and one-row CSV), and the TOML run config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{AnalysisConfig, AnalysisReport};
use crate::devices::{
    ActiveMemristorParams, DriftPolarity, InternalSourceSpec, CURRENT_CEILING_A, CURRENT_FLOOR_A,
};
use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::simulator::{IVTrace, Sample, TraceMeta, TraceSource};
use crate::waveforms::{WaveformShape, WaveformSpec};

pub const TRACE_HEADER: &str = "t_s,v_volts,i_amps";

/// A parsed trace plus non-fatal issues found while reading it.
#[derive(Debug, Clone)]
pub struct ReadTrace {
    pub trace: IVTrace,
    pub warnings: Vec<TraceWarning>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceWarning {
    /// 1-based line number in the input.
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for TraceWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse a trace file. Out-of-range currents on measured traces become
/// warnings, not errors.
pub fn read_trace(text: &str) -> Result<ReadTrace> {
    let mut meta = TraceMeta::default();
    let mut waveform: BTreeMap<String, String> = BTreeMap::new();
    let mut samples = Vec::new();
    let mut sample_lines = Vec::new();
    let mut saw_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let Some((key, value)) = comment.split_once('=') else {
                continue; // plain comment
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "source" => {
                    meta.source = match value {
                        "simulated" => TraceSource::Simulated,
                        "measured" => TraceSource::Measured,
                        other => {
                            return Err(parse_err(line_no, format!("unknown source '{other}'")))
                        }
                    }
                }
                "sample_label" => meta.sample_label = value.to_string(),
                "tube_length_mm" => {
                    meta.tube_length_mm = Some(parse_float(value, line_no, key)?);
                }
                "electrode_separation_mm" => {
                    meta.electrode_separation_mm = Some(parse_float(value, line_no, key)?);
                }
                "sweep_index" => {
                    meta.sweep_index = value
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad sweep_index '{value}'")))?;
                }
                k if k.starts_with("waveform_") => {
                    waveform.insert(k.trim_start_matches("waveform_").into(), value.into());
                }
                other => {
                    meta.extra.insert(other.to_string(), value.to_string());
                }
            }
            continue;
        }
        if !saw_header {
            if line.trim() == TRACE_HEADER {
                saw_header = true;
                continue;
            }
            return Err(parse_err(
                line_no,
                format!("expected header '{TRACE_HEADER}', got '{line}'"),
            ));
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(parse_err(
                line_no,
                format!("expected 3 columns, got {}", cells.len()),
            ));
        }
        let t_s = parse_float(cells[0], line_no, "t_s")?;
        let v_volts = parse_float(cells[1], line_no, "v_volts")?;
        let i_amps = parse_float(cells[2], line_no, "i_amps")?;
        if let Some(prev) = samples.last() {
            let prev: &Sample = prev;
            if t_s <= prev.t_s {
                return Err(parse_err(
                    line_no,
                    format!(
                        "time must be strictly increasing ({t_s} after {})",
                        prev.t_s
                    ),
                ));
            }
        }
        samples.push(Sample {
            t_s,
            v_volts,
            i_amps,
        });
        sample_lines.push(line_no);
    }

    if !saw_header {
        return Err(parse_err(
            text.lines().count().max(1),
            format!("missing header '{TRACE_HEADER}'"),
        ));
    }
    meta.waveform = waveform_from_kv(&waveform)?;

    let mut warnings = Vec::new();
    if meta.source == TraceSource::Measured {
        for (s, &line) in samples.iter().zip(&sample_lines) {
            let a = s.i_amps.abs();
            if a > CURRENT_CEILING_A {
                warnings.push(TraceWarning {
                    line,
                    message: format!("current {} A exceeds the 3.5 mA range", s.i_amps),
                });
            } else if a != 0.0 && a < CURRENT_FLOOR_A {
                warnings.push(TraceWarning {
                    line,
                    message: format!("current {} A sits below the pA floor", s.i_amps),
                });
            }
        }
    }

    let trace = IVTrace::new(samples, meta)?;
    Ok(ReadTrace { trace, warnings })
}

fn parse_float(cell: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: '{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what}: '{cell}' is not finite")));
    }
    Ok(v)
}

fn waveform_from_kv(kv: &BTreeMap<String, String>) -> Result<Option<WaveformSpec>> {
    if kv.is_empty() {
        return Ok(None);
    }
    let get = |k: &str| {
        kv.get(k).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("waveform metadata is missing waveform_{k}"),
        })
    };
    let shape = match get("shape")?.as_str() {
        "triangular" => WaveformShape::Triangular,
        "sine" => WaveformShape::Sine,
        "bipolar_piecewise_linear" | "bpwl" => WaveformShape::BipolarPiecewiseLinear,
        "constant" => WaveformShape::Constant,
        other => {
            return Err(Error::Parse {
                line: 0,
                message: format!("unknown waveform shape '{other}'"),
            })
        }
    };
    let num = |k: &str| -> Result<f64> { parse_float(get(k)?, 0, k) };
    Ok(Some(WaveformSpec {
        shape,
        amplitude_v: num("amplitude_v")?,
        timestep_s: num("timestep_s")?,
        samples: num("samples")? as usize,
        offset_v: kv
            .get("offset_v")
            .map_or(Ok(0.0), |v| parse_float(v, 0, "offset_v"))?,
        phase_fraction: kv
            .get("phase_fraction")
            .map_or(Ok(0.0), |v| parse_float(v, 0, "phase_fraction"))?,
    }))
}

fn shape_name(shape: WaveformShape) -> &'static str {
    match shape {
        WaveformShape::Triangular => "triangular",
        WaveformShape::Sine => "sine",
        WaveformShape::BipolarPiecewiseLinear => "bipolar_piecewise_linear",
        WaveformShape::Constant => "constant",
    }
}

/// Serialize a trace; `read_trace` on the output reproduces the samples
/// bit-exactly and the metadata field-for-field.
pub fn write_trace(trace: &IVTrace) -> String {
    let mut out = String::new();
    let meta = &trace.meta;
    let source = match meta.source {
        TraceSource::Simulated => "simulated",
        TraceSource::Measured => "measured",
    };
    let _ = writeln!(out, "# source={source}");
    if !meta.sample_label.is_empty() {
        let _ = writeln!(out, "# sample_label={}", meta.sample_label);
    }
    if let Some(l) = meta.tube_length_mm {
        let _ = writeln!(out, "# tube_length_mm={l}");
    }
    if let Some(d) = meta.electrode_separation_mm {
        let _ = writeln!(out, "# electrode_separation_mm={d}");
    }
    let _ = writeln!(out, "# sweep_index={}", meta.sweep_index);
    if let Some(w) = &meta.waveform {
        let _ = writeln!(out, "# waveform_shape={}", shape_name(w.shape));
        let _ = writeln!(out, "# waveform_amplitude_v={:e}", w.amplitude_v);
        let _ = writeln!(out, "# waveform_timestep_s={}", w.timestep_s);
        let _ = writeln!(out, "# waveform_samples={}", w.samples);
        let _ = writeln!(out, "# waveform_offset_v={:e}", w.offset_v);
        let _ = writeln!(out, "# waveform_phase_fraction={}", w.phase_fraction);
    }
    for (k, v) in &meta.extra {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{TRACE_HEADER}");
    for s in &trace.samples {
        let _ = writeln!(out, "{},{:e},{:e}", s.t_s, s.v_volts, s.i_amps);
    }
    out
}

pub fn read_trace_file(path: &Path) -> Result<ReadTrace> {
    read_trace(&std::fs::read_to_string(path)?)
}

pub fn write_trace_file(trace: &IVTrace, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, write_trace(trace))?)
}

// ---------- report documents ----------

fn push_num(fields: &mut Vec<(String, Value)>, key: &str, v: f64) {
    fields.push((key.to_string(), json!(v)));
}

fn push_opt(fields: &mut Vec<(String, Value)>, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        push_num(fields, key, v);
    }
}

/// Flatten a report (and optional fit) into ordered key-value pairs.
/// Absent quantities are omitted, not null-stuffed.
pub fn report_fields(report: &AnalysisReport, fit: Option<&FitResult>) -> Vec<(String, Value)> {
    let mut f = Vec::new();
    f.push((
        "classification".into(),
        json!(report.classification.as_str()),
    ));
    push_opt(&mut f, "r0_ohms", report.r0_ohms);
    push_num(&mut f, "hysteresis_h_va", report.hysteresis_h);
    push_opt(&mut f, "hysteresis_hbar", report.hysteresis_hbar);
    push_opt(&mut f, "g", report.g);
    push_opt(
        &mut f,
        "internal_rate_ohms_per_s",
        report.internal_rate_ohms_per_s,
    );
    push_opt(
        &mut f,
        "internal_intercept_ohms",
        report.internal_intercept_ohms,
    );
    push_num(&mut f, "energy_j", report.energy_j);
    push_num(&mut f, "avg_power_w", report.avg_power_w);
    push_num(&mut f, "masked_fraction", report.masked_fraction);
    for id in 1..=4u8 {
        if let Some(fit) = report.segment_fit(id) {
            push_num(
                &mut f,
                &format!("seg{id}_gradient_ohms_per_s"),
                fit.gradient_ohms_per_s,
            );
            push_num(
                &mut f,
                &format!("seg{id}_intercept_ohms"),
                fit.intercept_ohms,
            );
            push_num(
                &mut f,
                &format!("seg{id}_residual_norm_ohms"),
                fit.residual_norm_ohms,
            );
            f.push((format!("seg{id}_n_points"), json!(fit.n_points)));
        }
    }
    if let Some(fit) = fit {
        let p = &fit.params;
        push_num(&mut f, "fit_m0_ohms", p.m0_ohms);
        push_num(&mut f, "fit_rate_pos_ohms_per_s", p.rate_pos_ohms_per_s);
        push_num(&mut f, "fit_rate_neg_ohms_per_s", p.rate_neg_ohms_per_s);
        f.push((
            "fit_source_model".into(),
            json!(source_model_name(&p.source)),
        ));
        push_num(&mut f, "fit_iq_amplitude_a", p.source.amplitude_a);
        f.push((
            "fit_iq_polarity".into(),
            json!(match p.source.polarity {
                crate::devices::Polarity::Additive => "additive",
                crate::devices::Polarity::Subtractive => "subtractive",
            }),
        ));
        if matches!(
            p.source.model,
            crate::devices::SourceModel::Sine | crate::devices::SourceModel::BipolarPiecewiseLinear
        ) {
            push_num(&mut f, "fit_half_period_s", p.source.half_period_s);
        }
        push_num(&mut f, "fit_residual_rms_a", fit.residual_rms_a);
        f.push(("fit_iterations".into(), json!(fit.iterations)));
        f.push(("fit_converged".into(), json!(fit.converged)));
        f.push((
            "fit_source_indistinguishable".into(),
            json!(fit.source_indistinguishable),
        ));
    }
    f
}

fn source_model_name(s: &InternalSourceSpec) -> &'static str {
    match s.model {
        crate::devices::SourceModel::Off => "off",
        crate::devices::SourceModel::Constant => "constant",
        crate::devices::SourceModel::Sine => "sine",
        crate::devices::SourceModel::BipolarPiecewiseLinear => "bpwl",
    }
}

/// Flat JSON document for one report.
pub fn write_report(report: &AnalysisReport, fit: Option<&FitResult>) -> String {
    let map: serde_json::Map<String, Value> = report_fields(report, fit).into_iter().collect();
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("finite fields");
    text.push('\n');
    text
}

/// Header + one data row, with the same keys as the JSON document.
pub fn report_csv(report: &AnalysisReport, fit: Option<&FitResult>) -> String {
    let fields = report_fields(report, fit);
    let header: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
    let row: Vec<String> = fields.iter().map(|(_, v)| csv_value(v)).collect();
    format!("{}\n{}\n", header.join(","), row.join(","))
}

fn csv_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    format!("{f:e}")
                } else {
                    format!("{}", n)
                }
            } else {
                n.to_string()
            }
        }
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

/// Batch table: one row per analyzed trace, fixed columns so the table
/// loads straight into the correlation study.
pub fn write_report_table(rows: &[(String, TraceMeta, AnalysisReport)]) -> String {
    let metric_cols = [
        "classification",
        "r0_ohms",
        "hysteresis_h_va",
        "hysteresis_hbar",
        "g",
        "internal_rate_ohms_per_s",
        "internal_intercept_ohms",
        "energy_j",
        "avg_power_w",
        "masked_fraction",
    ];
    let mut out = String::from("trace,sweep_index,tube_length_mm,electrode_separation_mm");
    for c in metric_cols {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (label, meta, report) in rows {
        let fields: BTreeMap<String, Value> = report_fields(report, None).into_iter().collect();
        let _ = write!(out, "{label},{}", meta.sweep_index);
        let _ = write!(
            out,
            ",{}",
            meta.tube_length_mm
                .map(|v| v.to_string())
                .unwrap_or_default()
        );
        let _ = write!(
            out,
            ",{}",
            meta.electrode_separation_mm
                .map(|v| v.to_string())
                .unwrap_or_default()
        );
        for c in metric_cols {
            out.push(',');
            if let Some(v) = fields.get(c) {
                out.push_str(&csv_value(v));
            }
        }
        out.push('\n');
    }
    out
}

// ---------- run configuration ----------

/// `[device]` section of a run config; saturation bounds default to a
/// decade either side of m0 and the source defaults to off.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct DeviceConfig {
    pub m0_ohms: f64,
    #[serde(default)]
    pub rate_pos_ohms_per_s: f64,
    #[serde(default)]
    pub rate_neg_ohms_per_s: f64,
    pub m_min_ohms: Option<f64>,
    pub m_max_ohms: Option<f64>,
    pub source: Option<InternalSourceSpec>,
    #[serde(default)]
    pub vq_volts: f64,
    #[serde(default)]
    pub inter_sweep_drift_ohms: f64,
    #[serde(default)]
    pub drift_polarity: DriftPolarity,
}

impl DeviceConfig {
    pub fn params(&self) -> Result<ActiveMemristorParams> {
        let params = ActiveMemristorParams {
            m0_ohms: self.m0_ohms,
            rate_pos_ohms_per_s: self.rate_pos_ohms_per_s,
            rate_neg_ohms_per_s: self.rate_neg_ohms_per_s,
            m_min_ohms: self.m_min_ohms.unwrap_or(self.m0_ohms / 10.0),
            m_max_ohms: self.m_max_ohms.unwrap_or(self.m0_ohms * 10.0),
            source: self.source.unwrap_or_else(InternalSourceSpec::off),
            vq_volts: self.vq_volts,
            inter_sweep_drift_ohms: self.inter_sweep_drift_ohms,
            drift_polarity: self.drift_polarity,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Optional overrides for the analysis thresholds.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
pub struct AnalysisOverrides {
    pub delta_i_a: Option<f64>,
    pub delta_v_frac: Option<f64>,
    pub eps_i: Option<f64>,
    pub eps_a: Option<f64>,
    pub current_floor_a: Option<f64>,
    pub r0_head_frac: Option<f64>,
    pub correlation_threshold: Option<f64>,
}

impl AnalysisOverrides {
    pub fn apply(&self, base: AnalysisConfig) -> AnalysisConfig {
        AnalysisConfig {
            delta_i_a: self.delta_i_a.unwrap_or(base.delta_i_a),
            delta_v_frac: self.delta_v_frac.unwrap_or(base.delta_v_frac),
            eps_i: self.eps_i.unwrap_or(base.eps_i),
            eps_a: self.eps_a.unwrap_or(base.eps_a),
            current_floor_a: self.current_floor_a.unwrap_or(base.current_floor_a),
            r0_head_frac: self.r0_head_frac.unwrap_or(base.r0_head_frac),
            correlation_threshold: self
                .correlation_threshold
                .unwrap_or(base.correlation_threshold),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
pub struct OutputPaths {
    pub trace: Option<String>,
    pub report: Option<String>,
}

/// A run configuration: device + waveform + optional outputs and
/// threshold overrides.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RunConfig {
    pub device: DeviceConfig,
    pub waveform: WaveformSpec,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub analysis: AnalysisOverrides,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn analysis_config(&self) -> AnalysisConfig {
        self.analysis.apply(AnalysisConfig::default())
    }
}
