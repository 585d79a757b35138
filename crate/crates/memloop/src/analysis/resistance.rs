//! Instantaneous resistance: consecutive-difference estimate
//! `m_k = (v_k - v_{k-1}) / (i_k - i_{k-1})`.

use crate::analysis::AnalysisConfig;
use crate::error::{Error, Result};
use crate::simulator::IVTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistancePoint {
    pub t_s: f64,
    pub m_ohms: f64,
    /// Set where the estimate is unusable (tiny current step or a sample
    /// pair too close to v = 0); masked points are kept, not dropped.
    pub masked: bool,
}

/// Compute the instantaneous-resistance series (one point per sample pair,
/// timestamped at the later sample).
pub fn instantaneous_resistance(
    trace: &IVTrace,
    cfg: &AnalysisConfig,
) -> Result<Vec<ResistancePoint>> {
    if trace.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "instantaneous resistance needs >= 2 samples, got {}",
            trace.len()
        )));
    }
    let delta_v = cfg.delta_v_frac * trace.max_abs_voltage();
    let out = trace
        .samples
        .windows(2)
        .map(|w| {
            let dv = w[1].v_volts - w[0].v_volts;
            let di = w[1].i_amps - w[0].i_amps;
            let m = dv / di;
            let near_zero_v = w[0].v_volts.abs().min(w[1].v_volts.abs()) < delta_v;
            ResistancePoint {
                t_s: w[1].t_s,
                m_ohms: m,
                masked: di.abs() < cfg.delta_i_a || near_zero_v || !m.is_finite(),
            }
        })
        .collect();
    Ok(out)
}
