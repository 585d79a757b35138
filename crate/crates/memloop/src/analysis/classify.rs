//! Loop classification: pinched memristor, open loop, straight line, or
//! no electrical connection at all.

use serde::{Deserialize, Serialize};

use crate::analysis::hysteresis::{hysteresis, zero_crossing_currents};
use crate::analysis::segments::segment_trace;
use crate::analysis::AnalysisConfig;
use crate::error::Result;
use crate::simulator::IVTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Hysteresis with both zero-voltage crossings at (near) zero current.
    Pinched,
    /// Hysteresis whose branches do not meet near the origin.
    Open,
    /// No appreciable loop area.
    Linear,
    /// All currents below the instrument floor.
    Unconnected,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Pinched => "pinched",
            Classification::Open => "open",
            Classification::Linear => "linear",
            Classification::Unconnected => "unconnected",
        }
    }
}

/// Classify one full-cycle trace.
pub fn classify(trace: &IVTrace, cfg: &AnalysisConfig) -> Result<Classification> {
    segment_trace(trace)?;

    let max_i = trace.max_abs_current();
    if max_i < cfg.current_floor_a {
        return Ok(Classification::Unconnected);
    }
    let (h, _) = hysteresis(trace, 0.0);
    if h < cfg.eps_a * trace.max_abs_voltage() * max_i {
        return Ok(Classification::Linear);
    }
    let crossings = zero_crossing_currents(trace);
    if !crossings.is_empty() && crossings.iter().all(|i| i.abs() < cfg.eps_i * max_i) {
        Ok(Classification::Pinched)
    } else {
        Ok(Classification::Open)
    }
}
