//! Energy delivered over a loop and the average power.

use crate::error::{Error, Result};
use crate::simulator::IVTrace;

/// Trapezoidal integral of v*i over the trace and its time average.
pub fn loop_energy(trace: &IVTrace) -> Result<(f64, f64)> {
    if trace.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "loop energy needs >= 2 samples, got {}",
            trace.len()
        )));
    }
    let energy: f64 = trace
        .samples
        .windows(2)
        .map(|w| {
            let p0 = w[0].v_volts * w[0].i_amps;
            let p1 = w[1].v_volts * w[1].i_amps;
            0.5 * (p0 + p1) * (w[1].t_s - w[0].t_s)
        })
        .sum();
    let duration = trace.samples[trace.len() - 1].t_s - trace.samples[0].t_s;
    Ok((energy, energy / duration))
}
