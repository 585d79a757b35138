//! Hysteresis magnitude: enclosed area of the I-V loop, computed per lobe
//! so the two halves of a pinched figure-eight do not cancel.

use crate::simulator::IVTrace;

/// Split the closed (v, i) cycle at its zero-voltage crossings.
///
/// Returns each lobe as a closed polygon (vertex list; the closing edge is
/// implicit) plus the current at every crossing point. Crossings are the
/// samples with v exactly 0 and the interpolated points of edges whose
/// endpoints straddle v = 0; the wraparound edge is included.
fn lobe_polygons(trace: &IVTrace) -> (Vec<Vec<(f64, f64)>>, Vec<f64>) {
    let pts: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .map(|s| (s.v_volts, s.i_amps))
        .collect();
    let n = pts.len();
    if n < 3 {
        return (Vec::new(), Vec::new());
    }

    // Events along the cyclic path; `cut` marks zero-voltage points.
    struct Event {
        point: (f64, f64),
        cut: bool,
    }
    let mut events = Vec::with_capacity(n + 4);
    for k in 0..n {
        let (v0, i0) = pts[k];
        events.push(Event {
            point: pts[k],
            cut: v0 == 0.0,
        });
        let (v1, i1) = pts[(k + 1) % n];
        if v0 * v1 < 0.0 {
            let frac = v0 / (v0 - v1);
            events.push(Event {
                point: (0.0, i0 + frac * (i1 - i0)),
                cut: true,
            });
        }
    }

    let crossings: Vec<f64> = events.iter().filter(|e| e.cut).map(|e| e.point.1).collect();
    let Some(first_cut) = events.iter().position(|e| e.cut) else {
        // No crossing: the whole cycle is a single lobe.
        return (vec![pts], Vec::new());
    };

    events.rotate_left(first_cut);
    let mut polygons = Vec::new();
    let mut current = vec![events[0].point];
    for e in &events[1..] {
        current.push(e.point);
        if e.cut {
            polygons.push(std::mem::replace(&mut current, vec![e.point]));
        }
    }
    // Close the final lobe back onto the first cut point.
    current.push(events[0].point);
    if current.len() > 2 {
        polygons.push(current);
    }
    (polygons, crossings)
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 0..poly.len() {
        let (x0, y0) = poly[k];
        let (x1, y1) = poly[(k + 1) % poly.len()];
        sum += x0 * y1 - x1 * y0;
    }
    0.5 * sum.abs()
}

/// Hysteresis H (per-lobe absolute shoelace area, summed) and, when
/// `r0 > 0`, the scaled value H / R0.
pub fn hysteresis(trace: &IVTrace, r0: f64) -> (f64, Option<f64>) {
    let (polygons, _) = lobe_polygons(trace);
    let h: f64 = polygons.iter().map(|p| shoelace(p)).sum();
    let hbar = (r0 > 0.0).then(|| h / r0);
    (h, hbar)
}

/// Currents at every zero-voltage crossing of the cycle (exact zero-voltage
/// samples plus interpolated edge crossings).
pub fn zero_crossing_currents(trace: &IVTrace) -> Vec<f64> {
    lobe_polygons(trace).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{ActiveMemristorParams, InternalSourceSpec, Polarity};
    use crate::simulator::{run_sweep, IVTrace};
    use crate::waveforms::WaveformSpec;

    fn memristor_trace() -> IVTrace {
        let params = ActiveMemristorParams::passive(1e6, 2e3, 4e3, 1e5, 1e7);
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        run_sweep(&params, &spec, None).unwrap().0
    }

    #[test]
    fn resistor_loop_has_zero_area() {
        let params = ActiveMemristorParams::linear_resistor(1e6);
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        let (trace, _) = run_sweep(&params, &spec, None).unwrap();
        let (h, hbar) = hysteresis(&trace, 1e6);
        // zero up to rounding of the ramp samples
        let noise_floor = 1e-12 * trace.max_abs_voltage() * trace.max_abs_current();
        assert!(h <= noise_floor, "h = {h}");
        assert!(hbar.unwrap() <= noise_floor);
    }

    /// Oracle: independent per-lobe area via the trapezoid form of the
    /// loop integral of v di.
    #[test]
    fn area_matches_independent_loop_integral() {
        let trace = memristor_trace();
        let (h, _) = hysteresis(&trace, 1e6);

        let (polys, _) = lobe_polygons(&trace);
        let oracle: f64 = polys
            .iter()
            .map(|poly| {
                let mut area = 0.0;
                for k in 0..poly.len() {
                    let (v0, i0) = poly[k];
                    let (v1, i1) = poly[(k + 1) % poly.len()];
                    area += 0.5 * (v0 + v1) * (i1 - i0);
                }
                area.abs()
            })
            .sum();

        assert!(h > 0.0);
        assert!((h - oracle).abs() <= 1e-9 * oracle);
    }

    #[test]
    fn area_is_linear_in_current() {
        let trace = memristor_trace();
        let mut doubled = trace.clone();
        for s in &mut doubled.samples {
            s.i_amps *= 2.0;
        }
        let (h1, _) = hysteresis(&trace, 1e6);
        let (h2, _) = hysteresis(&doubled, 1e6);
        assert!((h2 / h1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hbar_absent_for_nonpositive_r0() {
        let trace = memristor_trace();
        assert_eq!(hysteresis(&trace, 0.0).1, None);
        assert_eq!(hysteresis(&trace, -5.0).1, None);
    }

    #[test]
    fn passive_crossings_carry_no_current() {
        let trace = memristor_trace();
        let crossings = zero_crossing_currents(&trace);
        assert_eq!(crossings.len(), 2);
        for i in crossings {
            assert_eq!(i, 0.0);
        }
    }

    #[test]
    fn active_crossings_carry_the_internal_current() {
        let params = ActiveMemristorParams::passive(1e6, 2e3, 4e3, 1e5, 1e7)
            .with_source(InternalSourceSpec::constant(2e-9, Polarity::Additive));
        let spec = WaveformSpec::triangular(0.1, 2.0, 160);
        let (trace, _) = run_sweep(&params, &spec, None).unwrap();
        let crossings = zero_crossing_currents(&trace);
        assert_eq!(crossings.len(), 2);
        for i in crossings {
            assert_eq!(i, 2e-9);
        }
    }
}
