//! Sweep orchestration: drive a device model with a waveform and record
//! I-V traces, carry state across repeated sweeps, and run frequency
//! studies.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, AnalysisConfig, AnalysisReport};
use crate::devices::{step_device, ActiveMemristorParams, DeviceState};
use crate::error::{Error, Result};
use crate::waveforms::{generate_waveform, WaveformSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Simulated,
    #[default]
    Measured,
}

/// Provenance metadata carried alongside the samples.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMeta {
    pub source: TraceSource,
    pub waveform: Option<WaveformSpec>,
    pub sample_label: String,
    pub tube_length_mm: Option<f64>,
    pub electrode_separation_mm: Option<f64>,
    pub sweep_index: usize,
    /// Unknown metadata keys from a trace file, preserved on round trip.
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub extra: std::collections::BTreeMap<String, String>,
}

/// One recorded point: time, driving voltage, measured current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t_s: f64,
    pub v_volts: f64,
    pub i_amps: f64,
}

/// Ordered time series of (t, V, I) samples — the universal exchange object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IVTrace {
    pub samples: Vec<Sample>,
    pub meta: TraceMeta,
}

impl IVTrace {
    pub fn new(samples: Vec<Sample>, meta: TraceMeta) -> Result<Self> {
        let trace = Self { samples, meta };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, s) in self.samples.iter().enumerate() {
            if !s.t_s.is_finite() || !s.v_volts.is_finite() || !s.i_amps.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "non-finite sample at index {k}"
                )));
            }
            if k > 0 && s.t_s <= self.samples[k - 1].t_s {
                return Err(Error::InvalidSpec(format!(
                    "time must be strictly increasing (sample {k}: {} after {})",
                    s.t_s,
                    self.samples[k - 1].t_s
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn voltages(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.v_volts)
    }

    pub fn currents(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.i_amps)
    }

    pub fn max_abs_voltage(&self) -> f64 {
        self.voltages().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_current(&self) -> f64 {
        self.currents().fold(0.0, |m, i| m.max(i.abs()))
    }
}

/// Run one sweep: `spec.samples` points, each recording the waveform
/// voltage at `t_k` and the current returned by the device step.
///
/// The returned state has end-of-sweep bookkeeping applied (inter-sweep
/// drift, sweep counter) so it can be chained into the next sweep.
pub fn run_sweep(
    params: &ActiveMemristorParams,
    spec: &WaveformSpec,
    initial: Option<DeviceState>,
) -> Result<(IVTrace, DeviceState)> {
    params.validate()?;
    let waveform = generate_waveform(spec)?;
    let mut state = initial.unwrap_or_else(|| DeviceState::new(params));
    let start_sweep = state.sweep_index;

    let mut samples = Vec::with_capacity(waveform.len());
    for &(t, v) in &waveform {
        let (next, i) = step_device(&state, params, v, spec.timestep_s)?;
        samples.push(Sample {
            t_s: t,
            v_volts: v,
            i_amps: i,
        });
        state = next;
    }

    state.m_ohms =
        (state.m_ohms + params.inter_sweep_drift_ohms).clamp(params.m_min_ohms, params.m_max_ohms);
    state.sweep_index += 1;

    let trace = IVTrace {
        samples,
        meta: TraceMeta {
            source: TraceSource::Simulated,
            waveform: Some(*spec),
            sweep_index: start_sweep,
            ..TraceMeta::default()
        },
    };
    Ok((trace, state))
}

/// Run `n_sweeps` consecutive sweeps, carrying device state (memristance,
/// i_q phase, inter-sweep drift) across them. Trace timestamps restart at
/// zero each sweep; the device-internal clock does not.
pub fn run_repeated(
    params: &ActiveMemristorParams,
    spec: &WaveformSpec,
    n_sweeps: usize,
) -> Result<Vec<IVTrace>> {
    if n_sweeps == 0 {
        return Err(Error::InvalidSpec("n_sweeps must be >= 1".into()));
    }
    let mut traces = Vec::with_capacity(n_sweeps);
    let mut state = DeviceState::new(params);
    for _ in 0..n_sweeps {
        let (trace, next) = run_sweep(params, spec, Some(state))?;
        traces.push(trace);
        state = next;
    }
    Ok(traces)
}

/// One fresh-device sweep per timestep multiplier, each analyzed with the
/// given configuration. Returns `(period, report)` pairs in input order.
pub fn frequency_sweep(
    params: &ActiveMemristorParams,
    base_spec: &WaveformSpec,
    timestep_multipliers: &[f64],
    cfg: &AnalysisConfig,
) -> Result<Vec<(f64, AnalysisReport)>> {
    let mut out = Vec::with_capacity(timestep_multipliers.len());
    for &mult in timestep_multipliers {
        if !mult.is_finite() || mult <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "timestep multiplier must be positive, got {mult}"
            )));
        }
        let spec = WaveformSpec {
            timestep_s: base_spec.timestep_s * mult,
            ..*base_spec
        };
        let (trace, _) = run_sweep(params, &spec, None)?;
        let report = analyze(&trace, cfg)?;
        out.push((spec.period_s(), report));
    }
    Ok(out)
}

/// Add zero-mean Gaussian noise to the currents; sigma is `relative_sigma`
/// times the RMS current. Deterministic for a fixed seed.
pub fn add_current_noise(trace: &IVTrace, relative_sigma: f64, seed: u64) -> IVTrace {
    if relative_sigma <= 0.0 || trace.is_empty() {
        return trace.clone();
    }
    let rms = (trace.currents().map(|i| i * i).sum::<f64>() / trace.len() as f64).sqrt();
    let normal = Normal::new(0.0, relative_sigma * rms).expect("sigma is finite and positive");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = trace.clone();
    for s in &mut noisy.samples {
        s.i_amps += normal.sample(&mut rng);
    }
    noisy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{InternalSourceSpec, Polarity};

    fn resistor_trace(r: f64) -> IVTrace {
        let params = ActiveMemristorParams::linear_resistor(r);
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        run_sweep(&params, &spec, None).unwrap().0
    }

    #[test]
    fn resistor_obeys_ohms_law_at_every_sample() {
        let trace = resistor_trace(1e6);
        assert_eq!(trace.len(), 160);
        for s in &trace.samples {
            assert_eq!(s.i_amps, s.v_volts / 1e6);
        }
    }

    #[test]
    fn active_device_crossing_current_is_internal_current() {
        let params = ActiveMemristorParams::passive(1e6, 1e3, 2e3, 1e5, 1e7)
            .with_source(InternalSourceSpec::constant(2e-9, Polarity::Additive));
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        let (trace, _) = run_sweep(&params, &spec, None).unwrap();
        // v = 0 exactly at samples 0 and 80
        assert_eq!(trace.samples[0].v_volts, 0.0);
        assert_eq!(trace.samples[0].i_amps, 2e-9);
        assert_eq!(trace.samples[80].v_volts, 0.0);
        assert_eq!(trace.samples[80].i_amps, 2e-9);
    }

    /// Oracle: re-integrate the recurrence at 10x finer timestep and check
    /// the zero-voltage crossing currents stay pinched.
    #[test]
    fn passive_memristor_loop_is_pinched() {
        let params = ActiveMemristorParams::passive(1e6, 2e3, 2e3, 1e5, 1e7);
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        let (trace, _) = run_sweep(&params, &spec, None).unwrap();
        let max_i = trace.max_abs_current();
        for k in [0, 80] {
            assert!(trace.samples[k].i_amps.abs() < 1e-3 * max_i);
        }

        let fine = WaveformSpec {
            timestep_s: spec.timestep_s / 10.0,
            samples: spec.samples * 10,
            ..spec
        };
        let (oracle, _) = run_sweep(&params, &fine, None).unwrap();
        let max_i = oracle.max_abs_current();
        for k in [0, 800] {
            assert_eq!(oracle.samples[k].v_volts, 0.0);
            assert!(oracle.samples[k].i_amps.abs() < 1e-3 * max_i);
        }
    }

    #[test]
    fn stateless_device_repeats_identically() {
        let params = ActiveMemristorParams::linear_resistor(1e6);
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        let traces = run_repeated(&params, &spec, 3).unwrap();
        assert_eq!(traces[0].samples, traces[1].samples);
        assert_eq!(traces[1].samples, traces[2].samples);
        assert_eq!(traces[2].meta.sweep_index, 2);
    }

    #[test]
    fn single_repeat_equals_run_sweep() {
        let params = ActiveMemristorParams::passive(1e6, 1e3, 3e3, 1e5, 1e7);
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        let traces = run_repeated(&params, &spec, 1).unwrap();
        let (single, _) = run_sweep(&params, &spec, None).unwrap();
        assert_eq!(traces[0], single);
    }

    #[test]
    fn chained_sweeps_match_one_run_over_concatenated_waveform() {
        let params = ActiveMemristorParams::passive(1e6, 1e3, 3e3, 1e5, 1e7)
            .with_source(InternalSourceSpec::constant(2e-9, Polarity::Additive));
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);

        let (first, state) = run_sweep(&params, &spec, None).unwrap();
        let (second, _) = run_sweep(&params, &spec, Some(state)).unwrap();

        let cycle = crate::waveforms::generate_waveform(&spec).unwrap();
        let mut state = DeviceState::new(&params);
        let mut currents = Vec::new();
        for _ in 0..2 {
            for &(_, v) in &cycle {
                let (next, i) = step_device(&state, &params, v, spec.timestep_s).unwrap();
                currents.push(i);
                state = next;
            }
        }
        for k in 0..160 {
            assert_eq!(first.samples[k].i_amps, currents[k]);
            assert_eq!(second.samples[k].i_amps, currents[160 + k]);
        }
    }

    #[test]
    fn resistor_energy_matches_closed_form() {
        let trace = resistor_trace(1e6);
        let energy: f64 = trace
            .samples
            .windows(2)
            .map(|w| {
                let p0 = w[0].v_volts * w[0].i_amps;
                let p1 = w[1].v_volts * w[1].i_amps;
                0.5 * (p0 + p1) * (w[1].t_s - w[0].t_s)
            })
            .sum();
        let expected = 0.1 * 0.1 * 320.0 / (3.0 * 1e6);
        assert!((energy - expected).abs() < 0.01 * expected);
    }

    #[test]
    fn frequency_sweep_of_a_resistor_has_no_hysteresis() {
        let params = ActiveMemristorParams::linear_resistor(1e6);
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        let cfg = crate::analysis::AnalysisConfig::default();
        let reports = frequency_sweep(&params, &spec, &[1.0, 2.0, 4.0], &cfg).unwrap();
        assert_eq!(reports.len(), 3);
        for (_, report) in &reports {
            let floor = 1e-12 * 0.1 * 1e-7;
            assert!(report.hysteresis_h <= floor, "h = {}", report.hysteresis_h);
        }
    }

    #[test]
    fn frequency_sweep_covers_the_protocol_periods() {
        // 500 s, 1000 s, 2000 s: the 2, 1, and 0.5 mHz equivalents
        let params = ActiveMemristorParams::passive(1e6, 1e2, 2e2, 1e5, 1e7);
        let spec = WaveformSpec::triangular(0.1, 3.125, 160);
        let cfg = crate::analysis::AnalysisConfig::default();
        let reports = frequency_sweep(&params, &spec, &[1.0, 2.0, 4.0], &cfg).unwrap();
        let periods: Vec<f64> = reports.iter().map(|(p, _)| *p).collect();
        assert_eq!(periods, vec![500.0, 1000.0, 2000.0]);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let trace = resistor_trace(1e6);
        let a = add_current_noise(&trace, 0.02, 7);
        let b = add_current_noise(&trace, 0.02, 7);
        let c = add_current_noise(&trace, 0.02, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.samples[0].v_volts, trace.samples[0].v_volts);
    }
}
