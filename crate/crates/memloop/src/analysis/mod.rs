//! Trace analysis: instantaneous resistance, 4-segment decomposition,
//! tangent fits, lobe asymmetry, internal-battery rate, hysteresis
//! metrics, loop classification, energy, and correlations.

mod classify;
mod correlate;
mod energy;
mod fits;
mod hysteresis;
mod resistance;
mod segments;

pub use classify::{classify, Classification};
pub use correlate::correlate;
pub use energy::loop_energy;
pub use fits::{asymmetry_g, fit_tangent, internal_rate, SegmentFit};
pub use hysteresis::{hysteresis, zero_crossing_currents};
pub use resistance::{instantaneous_resistance, ResistancePoint};
pub use segments::{segment_trace, CycleSegments, SegmentSpan};

use serde::{Deserialize, Serialize};

use crate::devices::effective_resistance;
use crate::error::Result;
use crate::simulator::IVTrace;

/// Thresholds for masking, classification, and fallbacks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Mask resistance points with |delta i| below this, amperes.
    pub delta_i_a: f64,
    /// Mask resistance points with |v| below this fraction of the peak voltage.
    pub delta_v_frac: f64,
    /// Pinched/Open split: crossing currents below this fraction of max|i| pinch.
    pub eps_i: f64,
    /// Linear split: relative loop area below this is a straight line.
    pub eps_a: f64,
    /// Electrometer floor in amperes; traces entirely below it are unconnected.
    pub current_floor_a: f64,
    /// Fraction of leading samples used by the R0 fallback.
    pub r0_head_frac: f64,
    /// |r| below this counts as "no correlation" (with n >= 10).
    pub correlation_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            delta_i_a: 1e-11,
            delta_v_frac: 0.05,
            eps_i: 0.05,
            eps_a: 1e-3,
            current_floor_a: crate::devices::CURRENT_FLOOR_A,
            r0_head_frac: 0.05,
            correlation_threshold: 0.5,
        }
    }
}

/// Everything derived from one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    /// Starting resistance: segment-1 tangent intercept, with a mean-of-head
    /// fallback when the fit fails.
    pub r0_ohms: Option<f64>,
    /// Enclosed loop area in the (V, I) plane, volt-amperes.
    pub hysteresis_h: f64,
    /// H scaled by R0; absent when R0 is absent or non-positive.
    pub hysteresis_hbar: Option<f64>,
    /// Lobe asymmetry: segment-3 gradient over segment-1 gradient.
    pub g: Option<f64>,
    /// Internal-battery memristance rate derived from g and the segment-1 fit.
    pub internal_rate_ohms_per_s: Option<f64>,
    pub internal_intercept_ohms: Option<f64>,
    pub classification: Classification,
    pub energy_j: f64,
    pub avg_power_w: f64,
    pub segment_fits: Vec<SegmentFit>,
    /// Fraction of instantaneous-resistance points that were masked.
    pub masked_fraction: f64,
}

impl AnalysisReport {
    pub fn segment_fit(&self, id: u8) -> Option<&SegmentFit> {
        self.segment_fits.iter().find(|f| f.segment_id == id)
    }
}

/// Run the full analysis pipeline on one trace.
pub fn analyze(trace: &IVTrace, cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    trace.validate()?;
    let segments = segment_trace(trace)?;
    let r_points = instantaneous_resistance(trace, cfg)?;

    let mut segment_fits = Vec::new();
    for span in segments.spans() {
        // Resistance point j pairs samples (j, j+1); keep pairs fully
        // inside the segment.
        let lo = span.range.start;
        let hi = span.range.end.saturating_sub(1).min(r_points.len());
        if lo < hi {
            if let Ok(fit) = fit_tangent(&r_points[lo..hi], span.id) {
                segment_fits.push(fit);
            }
        }
    }

    let fit1 = segment_fits.iter().find(|f| f.segment_id == 1).copied();
    let fit3 = segment_fits.iter().find(|f| f.segment_id == 3).copied();

    let r0_ohms = fit1
        .map(|f| f.intercept_ohms)
        .or_else(|| fallback_r0(trace, cfg));

    let g = match (fit1, fit3) {
        (Some(p), Some(n)) => asymmetry_g(&p, &n).ok(),
        _ => None,
    };
    let (internal_rate_ohms_per_s, internal_intercept_ohms) = match (g, fit1) {
        (Some(g), Some(p)) => {
            let (rate, intercept) = internal_rate(g, &p);
            (Some(rate), Some(intercept))
        }
        _ => (None, None),
    };

    let (hysteresis_h, hysteresis_hbar) = hysteresis(trace, r0_ohms.unwrap_or(0.0));
    let classification = classify(trace, cfg)?;
    let (energy_j, avg_power_w) = loop_energy(trace)?;
    let masked = r_points.iter().filter(|p| p.masked).count();

    Ok(AnalysisReport {
        r0_ohms,
        hysteresis_h,
        hysteresis_hbar,
        g,
        internal_rate_ohms_per_s,
        internal_intercept_ohms,
        classification,
        energy_j,
        avg_power_w,
        segment_fits,
        masked_fraction: masked as f64 / r_points.len().max(1) as f64,
    })
}

/// Mean effective resistance over the leading samples; used when the
/// segment-1 tangent fit is unavailable.
fn fallback_r0(trace: &IVTrace, cfg: &AnalysisConfig) -> Option<f64> {
    let head = ((trace.len() as f64 * cfg.r0_head_frac).ceil() as usize).max(2);
    let rs: Vec<f64> = trace
        .samples
        .iter()
        .take(head)
        .filter_map(|s| effective_resistance(s.v_volts, s.i_amps, cfg.current_floor_a))
        .collect();
    if rs.is_empty() {
        None
    } else {
        Some(rs.iter().sum::<f64>() / rs.len() as f64)
    }
}
