//! Discrete driving-voltage waveforms.
//!
//! The measurement protocol drives the device with a triangular voltage
//! sweep sampled at a fixed timestep (0.5, 1 or 2 s); one full cycle of
//! `samples` points spans `period = timestep * samples`. Frequency studies
//! scale the timestep at a fixed sample count, so halving the timestep
//! doubles the D.C.-equivalent frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformShape {
    /// 0 -> +amplitude -> 0 -> -amplitude -> 0 over one period.
    Triangular,
    Sine,
    /// Square-like alternation with a single-sample linear transition.
    #[serde(alias = "bpwl")]
    BipolarPiecewiseLinear,
    Constant,
}

/// Parametric description of a driving voltage waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub shape: WaveformShape,
    /// Peak voltage, >= 0.
    pub amplitude_v: f64,
    /// Sample spacing in seconds, > 0.
    pub timestep_s: f64,
    /// Number of samples in the sweep (one full cycle unless stated otherwise).
    pub samples: usize,
    /// DC offset added to every sample.
    #[serde(default)]
    pub offset_v: f64,
    /// Rotates the cycle start point; fraction of a period in [0, 1).
    #[serde(default)]
    pub phase_fraction: f64,
}

impl WaveformSpec {
    pub fn new(shape: WaveformShape, amplitude_v: f64, timestep_s: f64, samples: usize) -> Self {
        Self {
            shape,
            amplitude_v,
            timestep_s,
            samples,
            offset_v: 0.0,
            phase_fraction: 0.0,
        }
    }

    /// Triangular cycle matching the measurement protocol defaults.
    pub fn triangular(amplitude_v: f64, timestep_s: f64, samples: usize) -> Self {
        Self::new(WaveformShape::Triangular, amplitude_v, timestep_s, samples)
    }

    /// Duration of the full sweep in seconds.
    pub fn period_s(&self) -> f64 {
        self.timestep_s * self.samples as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !self.timestep_s.is_finite() || self.timestep_s <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "timestep must be positive and finite, got {}",
                self.timestep_s
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidSpec("samples must be >= 1".into()));
        }
        if !self.amplitude_v.is_finite() || self.amplitude_v < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "amplitude must be finite and non-negative, got {}",
                self.amplitude_v
            )));
        }
        if !self.offset_v.is_finite() {
            return Err(Error::InvalidSpec("offset must be finite".into()));
        }
        if !(0.0..1.0).contains(&self.phase_fraction) {
            return Err(Error::InvalidSpec(format!(
                "phase_fraction must lie in [0, 1), got {}",
                self.phase_fraction
            )));
        }
        Ok(())
    }

    /// Waveform value at sample index `k`, before the DC offset.
    fn shape_value(&self, k: usize) -> f64 {
        let a = self.amplitude_v;
        let n = self.samples as f64;
        let u = (k as f64 / n + self.phase_fraction).fract();
        match self.shape {
            WaveformShape::Constant => a,
            WaveformShape::Sine => a * (2.0 * std::f64::consts::PI * u).sin(),
            WaveformShape::Triangular => {
                if u < 0.25 {
                    4.0 * a * u
                } else if u < 0.75 {
                    4.0 * a * (0.5 - u)
                } else {
                    4.0 * a * (u - 1.0)
                }
            }
            WaveformShape::BipolarPiecewiseLinear => {
                // Position within the cycle measured in samples; the first
                // sample of each half-period is the linear transition
                // through zero.
                let p = (k as f64 + self.phase_fraction * n) % n;
                if p < 1.0 || (p >= n / 2.0 && p < n / 2.0 + 1.0) {
                    0.0
                } else if p < n / 2.0 {
                    a
                } else {
                    -a
                }
            }
        }
    }
}

/// Generate the sampled waveform: `samples` points with `t_k = k * timestep`.
///
/// Deterministic and pure; the same spec always yields identical output.
pub fn generate_waveform(spec: &WaveformSpec) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let out = (0..spec.samples)
        .map(|k| {
            let t = k as f64 * spec.timestep_s;
            (t, spec.offset_v + spec.shape_value(k))
        })
        .collect();
    Ok(out)
}
