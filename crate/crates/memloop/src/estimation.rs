//! Parameter estimation: fit an active-memristor model to a measured or
//! synthetic trace. Initialization comes from the analysis pipeline
//! (R0 for the memristance, segment tangents for the drift rates, crossing
//! currents for the internal source); refinement is a derivative-free
//! least-squares search, since the saturation clamp makes the residual
//! only piecewise-smooth.

use crate::analysis::{
    analyze, instantaneous_resistance, zero_crossing_currents, AnalysisConfig, ResistancePoint,
};
use crate::devices::{
    internal_current, step_device, ActiveMemristorParams, DeviceState, InternalSourceSpec,
    Polarity, SourceModel,
};
use crate::error::{Error, Result};
use crate::simulator::IVTrace;

/// Outcome of a parameter fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ActiveMemristorParams,
    /// RMS current residual between the trace and the fitted model, amperes.
    pub residual_rms_a: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the fitted source amplitude sits below the noise floor, so
    /// the device cannot be told apart from a passive memristor.
    pub source_indistinguishable: bool,
}

/// RMS of (observed - simulated) current, driving the model with the
/// trace's own recorded voltage sequence and sample spacing.
pub fn residual_rms(trace: &IVTrace, params: &ActiveMemristorParams) -> Result<f64> {
    params.validate()?;
    let n = trace.len();
    if n == 0 {
        return Err(Error::InsufficientData("empty trace".into()));
    }
    let mut state = DeviceState {
        t_s: trace.samples[0].t_s,
        ..DeviceState::new(params)
    };
    let mut sum_sq = 0.0;
    for k in 0..n {
        let s = &trace.samples[k];
        let i_sim = s.v_volts / state.m_ohms + internal_current(&params.source, state.t_s)?;
        let r = s.i_amps - i_sim;
        sum_sq += r * r;
        if k + 1 < n {
            let dt = trace.samples[k + 1].t_s - s.t_s;
            let (next, _) = step_device(&state, params, s.v_volts, dt)?;
            state = next;
        }
    }
    Ok((sum_sq / n as f64).sqrt())
}

/// Estimate device parameters from a full-cycle trace.
///
/// `init` overrides the analysis-derived starting point. The fitted
/// parameters always use the resistance-rising drift convention with
/// signed rates; `vq` is not identifiable from a trace and stays 0.
pub fn estimate_params(
    trace: &IVTrace,
    source_model: SourceModel,
    init: Option<ActiveMemristorParams>,
) -> Result<FitResult> {
    let cfg = AnalysisConfig::default();
    let mut seed = match init {
        Some(p) => {
            p.validate()?;
            p
        }
        None => initial_guess(trace, source_model, &cfg)?,
    };

    // Saturation bounds join the search only when the resistance series
    // shows a clamp plateau; otherwise they stay fixed a decade either
    // side of the starting resistance.
    let r_points = instantaneous_resistance(trace, &cfg)?;
    let (plateau_low, plateau_high) = saturation_plateaus(&r_points);
    if init.is_none() {
        if let Some(level) = plateau_high {
            seed.m_max_ohms = level.max(seed.m0_ohms);
        }
        if let Some(level) = plateau_low {
            seed.m_min_ohms = level.min(seed.m0_ohms).max(f64::MIN_POSITIVE);
        }
    }

    let problem = Problem::new(
        source_model,
        &seed,
        plateau_low.is_some(),
        plateau_high.is_some(),
    );
    let objective = |x: &[f64]| {
        let params = problem.params_from(x);
        match params.validate() {
            Ok(()) => residual_rms(trace, &params).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };

    let x0 = problem.vector(&seed);
    let search = nelder_mead(&objective, &x0, 800, 1e-10, 1e-9);
    let params = problem.params_from(&search.x);
    let residual = search.f;

    let iq = params.source.amplitude_a;
    let indistinguishable = match source_model {
        SourceModel::Off => true,
        _ => iq < crate::devices::CURRENT_FLOOR_A || iq < residual,
    };

    Ok(FitResult {
        params,
        residual_rms_a: residual,
        iterations: search.iterations,
        converged: search.converged,
        source_indistinguishable: indistinguishable,
    })
}

/// Analysis-driven starting point for the search.
fn initial_guess(
    trace: &IVTrace,
    source_model: SourceModel,
    cfg: &AnalysisConfig,
) -> Result<ActiveMemristorParams> {
    let report = analyze(trace, cfg)?;
    let r0 = report.r0_ohms.filter(|r| *r > 0.0).ok_or_else(|| {
        Error::InsufficientData("no usable starting resistance for initialization".into())
    })?;

    // The tangent gradient of an ohmic drifting device reads the true
    // drift rate plus an equal chordal term; halve it for the seed.
    let rate = |id: u8| {
        report
            .segment_fit(id)
            .map(|f| f.gradient_ohms_per_s / 2.0)
            .unwrap_or(0.0)
    };

    let crossings = zero_crossing_currents(trace);
    let iq_signed = if crossings.is_empty() {
        0.0
    } else {
        crossings.iter().map(|i| i.abs()).sum::<f64>() / crossings.len() as f64
            * crossings.iter().sum::<f64>().signum()
    };

    let source = match source_model {
        SourceModel::Off => InternalSourceSpec::off(),
        model => InternalSourceSpec {
            model,
            amplitude_a: iq_signed.abs(),
            half_period_s: 700.0,
            polarity: if iq_signed >= 0.0 {
                Polarity::Additive
            } else {
                Polarity::Subtractive
            },
        },
    };

    Ok(ActiveMemristorParams {
        m0_ohms: r0,
        rate_pos_ohms_per_s: rate(1),
        rate_neg_ohms_per_s: rate(3),
        m_min_ohms: r0 / 10.0,
        m_max_ohms: r0 * 10.0,
        source,
        vq_volts: 0.0,
        inter_sweep_drift_ohms: 0.0,
        drift_polarity: Default::default(),
    })
}

/// Long flat runs at the extremes of the resistance series betray the
/// saturation clamp (the estimator reads the clamped level exactly,
/// since a clamped device does not drift). Returns (low, high) plateau
/// levels when present.
fn saturation_plateaus(points: &[ResistancePoint]) -> (Option<f64>, Option<f64>) {
    let vals: Vec<f64> = points
        .iter()
        .filter(|p| !p.masked)
        .map(|p| p.m_ohms)
        .collect();
    let n = vals.len();
    if n < 12 {
        return (None, None);
    }
    let mut sorted = vals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[n / 2];
    let range = sorted[n - 1] - sorted[0];
    if median.is_nan() || median <= 0.0 || range < 0.02 * median {
        return (None, None);
    }

    let min_run = (n / 10).max(6);
    let flat_tol = 0.004;
    let mut low: Option<f64> = None;
    let mut high: Option<f64> = None;
    let mut start = 0;
    for k in 1..=n {
        if k == n || (vals[k] - vals[start]).abs() > flat_tol * vals[start].abs() {
            if k - start >= min_run {
                let level = vals[start..k].iter().sum::<f64>() / (k - start) as f64;
                if level > median {
                    high = Some(high.map_or(level, |h| h.max(level)));
                } else {
                    low = Some(low.map_or(level, |l| l.min(level)));
                }
            }
            start = k;
        }
    }
    (low, high)
}

/// Maps between the search vector and device parameters, with per-axis
/// scales so the simplex works in O(1) coordinates. Saturation bounds
/// become search dimensions only when `fit_low` / `fit_high` are set.
struct Problem {
    source_model: SourceModel,
    scales: Vec<f64>,
    m_min: f64,
    m_max: f64,
    iq_idx: Option<usize>,
    half_period_idx: Option<usize>,
    m_min_idx: Option<usize>,
    m_max_idx: Option<usize>,
}

impl Problem {
    fn new(
        source_model: SourceModel,
        seed: &ActiveMemristorParams,
        fit_low: bool,
        fit_high: bool,
    ) -> Self {
        let r0 = seed.m0_ohms;
        let rate_scale = |r: f64| r.abs().max(r0 * 1e-5);
        let mut scales = vec![
            r0,
            rate_scale(seed.rate_pos_ohms_per_s),
            rate_scale(seed.rate_neg_ohms_per_s),
        ];
        let mut iq_idx = None;
        let mut half_period_idx = None;
        match source_model {
            SourceModel::Off => {}
            SourceModel::Constant => {
                iq_idx = Some(scales.len());
                scales.push(seed.source.amplitude_a.max(1e-12));
            }
            SourceModel::Sine | SourceModel::BipolarPiecewiseLinear => {
                iq_idx = Some(scales.len());
                scales.push(seed.source.amplitude_a.max(1e-12));
                half_period_idx = Some(scales.len());
                scales.push(seed.source.half_period_s.max(1.0));
            }
        }
        let m_min_idx = fit_low.then(|| {
            scales.push(seed.m_min_ohms.max(f64::MIN_POSITIVE));
            scales.len() - 1
        });
        let m_max_idx = fit_high.then(|| {
            scales.push(seed.m_max_ohms);
            scales.len() - 1
        });
        Self {
            source_model,
            scales,
            m_min: seed.m_min_ohms,
            m_max: seed.m_max_ohms,
            iq_idx,
            half_period_idx,
            m_min_idx,
            m_max_idx,
        }
    }

    fn vector(&self, p: &ActiveMemristorParams) -> Vec<f64> {
        let iq_signed = match p.source.polarity {
            Polarity::Additive => p.source.amplitude_a,
            Polarity::Subtractive => -p.source.amplitude_a,
        };
        let mut raw = vec![0.0; self.scales.len()];
        raw[0] = p.m0_ohms;
        raw[1] = p.rate_pos_ohms_per_s;
        raw[2] = p.rate_neg_ohms_per_s;
        if let Some(i) = self.iq_idx {
            raw[i] = iq_signed;
        }
        if let Some(i) = self.half_period_idx {
            raw[i] = p.source.half_period_s;
        }
        if let Some(i) = self.m_min_idx {
            raw[i] = p.m_min_ohms;
        }
        if let Some(i) = self.m_max_idx {
            raw[i] = p.m_max_ohms;
        }
        raw.iter().zip(&self.scales).map(|(v, s)| v / s).collect()
    }

    fn params_from(&self, x: &[f64]) -> ActiveMemristorParams {
        let raw: Vec<f64> = x.iter().zip(&self.scales).map(|(v, s)| v * s).collect();
        let iq_signed = self.iq_idx.map(|i| raw[i]).unwrap_or(0.0);
        let source = match self.source_model {
            SourceModel::Off => InternalSourceSpec::off(),
            model => InternalSourceSpec {
                model,
                amplitude_a: iq_signed.abs(),
                half_period_s: self.half_period_idx.map(|i| raw[i]).unwrap_or(700.0),
                polarity: if iq_signed >= 0.0 {
                    Polarity::Additive
                } else {
                    Polarity::Subtractive
                },
            },
        };
        ActiveMemristorParams {
            m0_ohms: raw[0],
            rate_pos_ohms_per_s: raw[1],
            rate_neg_ohms_per_s: raw[2],
            m_min_ohms: self.m_min_idx.map(|i| raw[i]).unwrap_or(self.m_min),
            m_max_ohms: self.m_max_idx.map(|i| raw[i]).unwrap_or(self.m_max),
            source,
            vq_volts: 0.0,
            inter_sweep_drift_ohms: 0.0,
            drift_polarity: Default::default(),
        }
    }
}

struct SearchResult {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    converged: bool,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). The seed vertex is part of the simplex, so the result is
/// never worse than the starting point.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    max_iters: usize,
    tol_f: f64,
    tol_x: f64,
) -> SearchResult {
    let dim = x0.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim + 1);
    simplex.push((f(x0), x0.to_vec()));
    for d in 0..dim {
        let mut v = x0.to_vec();
        v[d] += if v[d] == 0.0 {
            0.05
        } else {
            0.05 * v[d].abs().max(1.0)
        };
        simplex.push((f(&v), v));
    }

    let order = |s: &mut Vec<(f64, Vec<f64>)>| {
        s.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    };
    order(&mut simplex);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;

        let best = simplex[0].0;
        let worst = simplex[dim].0;
        let spread = worst - best;
        let extent = (0..dim)
            .map(|d| {
                simplex
                    .iter()
                    .map(|(_, v)| (v[d] - simplex[0].1[d]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= tol_f * best.abs().max(1e-300) + f64::MIN_POSITIVE || extent <= tol_x {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex[..dim].iter().map(|(_, v)| v[d]).sum::<f64>() / dim as f64)
            .collect();
        let worst_x = simplex[dim].1.clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst_x)
            .map(|(c, w)| c + (c - w))
            .collect();
        let f_r = f(&reflect);

        if f_r < simplex[0].0 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| c + 2.0 * (r - c))
                .collect();
            let f_e = f(&expand);
            simplex[dim] = if f_e < f_r {
                (f_e, expand)
            } else {
                (f_r, reflect)
            };
        } else if f_r < simplex[dim - 1].0 {
            simplex[dim] = (f_r, reflect);
        } else {
            let toward = if f_r < simplex[dim].0 {
                &reflect
            } else {
                &worst_x
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(toward)
                .map(|(c, t)| c + 0.5 * (t - c))
                .collect();
            let f_c = f(&contract);
            if f_c < simplex[dim].0.min(f_r) {
                simplex[dim] = (f_c, contract);
            } else {
                // shrink toward the best vertex
                let best_x = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = best_x
                        .iter()
                        .zip(&entry.1)
                        .map(|(b, x)| b + 0.5 * (x - b))
                        .collect();
                    *entry = (f(&v), v);
                }
            }
        }
        order(&mut simplex);
    }

    let (f_best, x_best) = simplex.swap_remove(0);
    SearchResult {
        x: x_best,
        f: f_best,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{add_current_noise, run_sweep};
    use crate::waveforms::WaveformSpec;

    fn spec() -> WaveformSpec {
        WaveformSpec::triangular(0.1, 2.0, 160)
    }

    fn round_trip_device() -> ActiveMemristorParams {
        ActiveMemristorParams::passive(1e6, 1.5e3, 3e3, 1e5, 1e7)
            .with_source(InternalSourceSpec::constant(5e-9, Polarity::Additive))
    }

    #[test]
    fn regenerating_params_give_zero_residual() {
        let params = round_trip_device();
        let (trace, _) = run_sweep(&params, &spec(), None).unwrap();
        assert_eq!(residual_rms(&trace, &params).unwrap(), 0.0);
    }

    #[test]
    fn ohmic_mismatch_matches_closed_form() {
        let params = ActiveMemristorParams::linear_resistor(1e6);
        let (trace, _) = run_sweep(&params, &spec(), None).unwrap();
        let doubled = ActiveMemristorParams::linear_resistor(2e6);
        let rms = residual_rms(&trace, &doubled).unwrap();
        // residual per sample is v/m0 - v/(2 m0) = v/(2 m0)
        let v_rms = (trace.voltages().map(|v| v * v).sum::<f64>() / 160.0).sqrt();
        let expected = v_rms / 2e6;
        assert!((rms - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn residual_is_nonnegative() {
        let params = round_trip_device();
        let (trace, _) = run_sweep(&params, &spec(), None).unwrap();
        let other = ActiveMemristorParams::linear_resistor(3e5);
        assert!(residual_rms(&trace, &other).unwrap() >= 0.0);
    }

    #[test]
    fn resistor_estimates_as_degenerate_device() {
        let params = ActiveMemristorParams::linear_resistor(1e6);
        let (trace, _) = run_sweep(&params, &spec(), None).unwrap();
        let fit = estimate_params(&trace, SourceModel::Constant, None).unwrap();
        assert!((fit.params.m0_ohms - 1e6).abs() < 0.01 * 1e6);
        assert!(fit.params.rate_pos_ohms_per_s.abs() < 1e2);
        assert!(fit.params.rate_neg_ohms_per_s.abs() < 1e2);
        assert!(fit.params.source.amplitude_a < 1e-11);
        assert!(fit.source_indistinguishable);
    }

    #[test]
    fn noise_free_round_trip_recovers_parameters() {
        let truth = round_trip_device();
        let (trace, _) = run_sweep(&truth, &spec(), None).unwrap();
        let fit = estimate_params(&trace, SourceModel::Constant, None).unwrap();
        let p = fit.params;
        assert!((p.m0_ohms - 1e6).abs() < 0.05 * 1e6);
        assert!((p.rate_pos_ohms_per_s - 1.5e3).abs() < 0.05 * 1.5e3);
        assert!((p.rate_neg_ohms_per_s - 3e3).abs() < 0.05 * 3e3);
        assert_eq!(p.source.polarity, Polarity::Additive);
        assert!((p.source.amplitude_a - 5e-9).abs() < 0.05 * 5e-9);
        assert!(!fit.source_indistinguishable);
    }

    #[test]
    fn noisy_round_trip_stays_within_fifteen_percent() {
        let truth = round_trip_device();
        let (clean, _) = run_sweep(&truth, &spec(), None).unwrap();
        let trace = add_current_noise(&clean, 0.02, 1234);
        let noise_rms = {
            let diffs: Vec<f64> = clean
                .samples
                .iter()
                .zip(&trace.samples)
                .map(|(a, b)| a.i_amps - b.i_amps)
                .collect();
            (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt()
        };

        let fit = estimate_params(&trace, SourceModel::Constant, None).unwrap();
        let p = fit.params;
        assert!((p.m0_ohms - 1e6).abs() < 0.15 * 1e6);
        assert!((p.rate_pos_ohms_per_s - 1.5e3).abs() < 0.15 * 1.5e3);
        assert!((p.rate_neg_ohms_per_s - 3e3).abs() < 0.15 * 3e3);
        assert!((p.source.amplitude_a - 5e-9).abs() < 0.15 * 5e-9);
        assert!(fit.residual_rms_a < 2.0 * noise_rms);
    }

    #[test]
    fn saturating_trace_recovers_the_clamp_level() {
        // m climbs from 1e6 and clamps at 1.45e6 partway through the
        // negative lobe, leaving a flat plateau in the resistance series.
        let truth = ActiveMemristorParams::passive(1e6, 2e3, 2e3, 1e5, 1.45e6);
        let (trace, _) = run_sweep(&truth, &spec(), None).unwrap();
        let fit = estimate_params(&trace, SourceModel::Off, None).unwrap();
        let p = fit.params;
        assert!((p.m0_ohms - 1e6).abs() < 0.05 * 1e6, "m0 = {}", p.m0_ohms);
        assert!(
            (p.rate_pos_ohms_per_s - 2e3).abs() < 0.05 * 2e3,
            "rate_pos = {}",
            p.rate_pos_ohms_per_s
        );
        assert!(
            (p.m_max_ohms - 1.45e6).abs() < 0.05 * 1.45e6,
            "m_max = {}",
            p.m_max_ohms
        );
    }

    #[test]
    fn refinement_is_idempotent() {
        let truth = round_trip_device();
        let (trace, _) = run_sweep(&truth, &spec(), None).unwrap();
        let first = estimate_params(&trace, SourceModel::Constant, None).unwrap();
        let second = estimate_params(&trace, SourceModel::Constant, Some(first.params)).unwrap();
        assert!(second.residual_rms_a <= first.residual_rms_a + 1e-30);
    }

    #[test]
    fn unsegmentable_trace_propagates() {
        let params = ActiveMemristorParams::linear_resistor(1e6);
        let constant = WaveformSpec::new(crate::waveforms::WaveformShape::Constant, 0.1, 1.0, 20);
        let (trace, _) = run_sweep(&params, &constant, None).unwrap();
        assert!(matches!(
            estimate_params(&trace, SourceModel::Constant, None),
            Err(Error::NotSegmentable(_))
        ));
    }
}
