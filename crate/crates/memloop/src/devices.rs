//! Device models: linear resistor, passive memristor with piecewise-linear
//! memristance drift, and the active memristor that superposes an internal
//! current source on the driven current.
//!
//! The simulated law is `i_tot = v / m + i_q(t)`: Ohmic conduction through
//! the instantaneous memristance plus the internal background current. The
//! internal source models the slow oscillation of the living protoplasm
//! (sine or bipolar piecewise-linear with a ~700 s half-period, or constant
//! over one sweep) and is what displaces the zero-voltage crossings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Electrometer floor: currents below this are unresolvable (pA limit).
pub const CURRENT_FLOOR_A: f64 = 1e-12;

/// Upper instrument range in amperes.
pub const CURRENT_CEILING_A: f64 = 3.5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceModel {
    Off,
    Constant,
    Sine,
    /// Alternating-sign constant current, switching every `half_period_s`.
    #[serde(alias = "bpwl")]
    BipolarPiecewiseLinear,
}

/// Whether the internal source reinforces or opposes the driven current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Additive,
    Subtractive,
}

/// Internal current source of the active memristor two-port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InternalSourceSpec {
    pub model: SourceModel,
    /// Peak current in amperes, >= 0.
    #[serde(default)]
    pub amplitude_a: f64,
    /// Half-period of the oscillation in seconds; must be > 0 for the
    /// periodic models.
    #[serde(default = "default_half_period")]
    pub half_period_s: f64,
    #[serde(default = "default_polarity")]
    pub polarity: Polarity,
}

fn default_half_period() -> f64 {
    700.0
}

fn default_polarity() -> Polarity {
    Polarity::Additive
}

impl InternalSourceSpec {
    pub fn off() -> Self {
        Self {
            model: SourceModel::Off,
            amplitude_a: 0.0,
            half_period_s: default_half_period(),
            polarity: Polarity::Additive,
        }
    }

    pub fn constant(amplitude_a: f64, polarity: Polarity) -> Self {
        Self {
            model: SourceModel::Constant,
            amplitude_a,
            half_period_s: default_half_period(),
            polarity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude_a.is_finite() || self.amplitude_a < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "source amplitude must be finite and non-negative, got {}",
                self.amplitude_a
            )));
        }
        match self.model {
            SourceModel::Sine | SourceModel::BipolarPiecewiseLinear => {
                if !self.half_period_s.is_finite() || self.half_period_s <= 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "half_period must be positive for periodic sources, got {}",
                        self.half_period_s
                    )));
                }
            }
            SourceModel::Off | SourceModel::Constant => {}
        }
        Ok(())
    }
}

/// Signed internal current at time `t`.
///
/// `Off` yields 0; `Constant` yields the amplitude; `Sine` completes one
/// period every two half-periods; `BipolarPiecewiseLinear` holds +amplitude
/// for the first half-period and -amplitude for the second. A subtractive
/// polarity negates the whole signal.
pub fn internal_current(source: &InternalSourceSpec, t: f64) -> Result<f64> {
    source.validate()?;
    let raw = match source.model {
        SourceModel::Off => 0.0,
        SourceModel::Constant => source.amplitude_a,
        SourceModel::Sine => {
            source.amplitude_a * (std::f64::consts::PI * t / source.half_period_s).sin()
        }
        SourceModel::BipolarPiecewiseLinear => {
            let cycle = t.rem_euclid(2.0 * source.half_period_s);
            if cycle < source.half_period_s {
                source.amplitude_a
            } else {
                -source.amplitude_a
            }
        }
    };
    Ok(match source.polarity {
        Polarity::Additive => raw,
        Polarity::Subtractive => -raw,
    })
}

/// Direction convention for the memristance drift rates.
///
/// `ResistanceRising` integrates `dm/dt = rate_pos` while v > 0 and
/// `dm/dt = rate_neg` while v < 0, so positive rates give the rising
/// resistance-time tangents seen on both half-cycles of the measured
/// sweeps. `ResistanceFalling` negates both rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DriftPolarity {
    #[default]
    ResistanceRising,
    ResistanceFalling,
}

/// Full description of an active memristor device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveMemristorParams {
    /// Initial memristance in ohms, > 0.
    pub m0_ohms: f64,
    /// Memristance drift rate while v > 0, ohms/second.
    pub rate_pos_ohms_per_s: f64,
    /// Memristance drift rate while v < 0, ohms/second.
    pub rate_neg_ohms_per_s: f64,
    /// Lower saturation bound, 0 < m_min <= m0.
    pub m_min_ohms: f64,
    /// Upper saturation bound, m0 <= m_max.
    pub m_max_ohms: f64,
    pub source: InternalSourceSpec,
    /// Voltage associated with the internal battery, >= 0. Enters only the
    /// reported `R = M +/- vq/i_q` diagnostic, never the simulated current.
    #[serde(default)]
    pub vq_volts: f64,
    /// Fixed ohmic increment applied after each completed sweep.
    #[serde(default)]
    pub inter_sweep_drift_ohms: f64,
    #[serde(default)]
    pub drift_polarity: DriftPolarity,
}

impl ActiveMemristorParams {
    /// Passive memristor: no internal source, no inter-sweep drift.
    pub fn passive(m0: f64, rate_pos: f64, rate_neg: f64, m_min: f64, m_max: f64) -> Self {
        Self {
            m0_ohms: m0,
            rate_pos_ohms_per_s: rate_pos,
            rate_neg_ohms_per_s: rate_neg,
            m_min_ohms: m_min,
            m_max_ohms: m_max,
            source: InternalSourceSpec::off(),
            vq_volts: 0.0,
            inter_sweep_drift_ohms: 0.0,
            drift_polarity: DriftPolarity::ResistanceRising,
        }
    }

    /// Plain linear resistor (the abandoned-tube control).
    pub fn linear_resistor(r: f64) -> Self {
        Self::passive(r, 0.0, 0.0, r / 10.0, r * 10.0)
    }

    pub fn with_source(mut self, source: InternalSourceSpec) -> Self {
        self.source = source;
        self
    }

    pub fn with_inter_sweep_drift(mut self, drift: f64) -> Self {
        self.inter_sweep_drift_ohms = drift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.m0_ohms.is_finite() || self.m0_ohms <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "m0 must be positive and finite, got {}",
                self.m0_ohms
            )));
        }
        if !self.m_min_ohms.is_finite()
            || !self.m_max_ohms.is_finite()
            || self.m_min_ohms <= 0.0
            || self.m_min_ohms > self.m0_ohms
            || self.m0_ohms > self.m_max_ohms
        {
            return Err(Error::InvalidSpec(format!(
                "need 0 < m_min <= m0 <= m_max, got {} <= {} <= {}",
                self.m_min_ohms, self.m0_ohms, self.m_max_ohms
            )));
        }
        for (name, v) in [
            ("rate_pos", self.rate_pos_ohms_per_s),
            ("rate_neg", self.rate_neg_ohms_per_s),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} must be finite")));
            }
        }
        if !self.vq_volts.is_finite() || self.vq_volts < 0.0 {
            return Err(Error::InvalidSpec("vq must be finite and >= 0".into()));
        }
        if !self.inter_sweep_drift_ohms.is_finite() || self.inter_sweep_drift_ohms < 0.0 {
            return Err(Error::InvalidSpec(
                "inter_sweep_drift must be finite and >= 0".into(),
            ));
        }
        self.source.validate()
    }

    /// Memristance drift rate (dm/dt) for the driving voltage `v`.
    pub fn drift_rate(&self, v: f64) -> f64 {
        let rate = if v > 0.0 {
            self.rate_pos_ohms_per_s
        } else if v < 0.0 {
            self.rate_neg_ohms_per_s
        } else {
            0.0
        };
        match self.drift_polarity {
            DriftPolarity::ResistanceRising => rate,
            DriftPolarity::ResistanceFalling => -rate,
        }
    }
}

/// Evolving state of one device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    /// Current memristance in ohms.
    pub m_ohms: f64,
    /// Device-internal clock driving the i_q phase, in seconds.
    pub t_s: f64,
    pub sweep_index: usize,
}

impl DeviceState {
    pub fn new(params: &ActiveMemristorParams) -> Self {
        Self {
            m_ohms: params.m0_ohms,
            t_s: 0.0,
            sweep_index: 0,
        }
    }
}

/// Advance the device by one timestep under drive voltage `v`.
///
/// The returned current is sampled before the state advances: the driven
/// current through the pre-step memristance plus the internal current at
/// the pre-step clock. Memristance then drifts by `drift_rate(v) * dt`,
/// hard-clamped to `[m_min, m_max]`.
pub fn step_device(
    state: &DeviceState,
    params: &ActiveMemristorParams,
    v: f64,
    dt: f64,
) -> Result<(DeviceState, f64)> {
    if !state.m_ohms.is_finite() || state.m_ohms <= 0.0 {
        return Err(Error::CorruptState(format!(
            "memristance must be positive and finite, got {}",
            state.m_ohms
        )));
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidSpec(format!("dt must be positive, got {dt}")));
    }
    let i_d = v / state.m_ohms;
    let i_q = internal_current(&params.source, state.t_s)?;
    let i_tot = i_d + i_q;
    let m_next =
        (state.m_ohms + params.drift_rate(v) * dt).clamp(params.m_min_ohms, params.m_max_ohms);
    Ok((
        DeviceState {
            m_ohms: m_next,
            t_s: state.t_s + dt,
            sweep_index: state.sweep_index,
        },
        i_tot,
    ))
}

/// Measured effective resistance `v / i`.
///
/// Returns `None` (a masked point) when |i| sits below the floor or the
/// voltage is exactly zero — at the active crossing the ratio is dominated
/// by the internal current and carries no resistance information.
pub fn effective_resistance(v: f64, i: f64, current_floor: f64) -> Option<f64> {
    if i.abs() < current_floor || v == 0.0 {
        None
    } else {
        Some(v / i)
    }
}
