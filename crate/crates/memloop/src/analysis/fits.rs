//! Straight-line tangents to instantaneous-resistance segments and the
//! quantities derived from them: the lobe-asymmetry factor g and the
//! internal-battery memristance rate.

use crate::analysis::ResistancePoint;
use crate::error::{Error, Result};

/// Ordinary least-squares tangent of one resistance segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentFit {
    pub segment_id: u8,
    pub gradient_ohms_per_s: f64,
    /// Intercept at t = 0 of the trace, ohms.
    pub intercept_ohms: f64,
    /// Euclidean norm of the fit residuals, ohms.
    pub residual_norm_ohms: f64,
    /// Unmasked points used.
    pub n_points: usize,
}

/// Fit `m = gradient * t + intercept` over the unmasked points of one
/// segment's resistance series.
pub fn fit_tangent(points: &[ResistancePoint], segment_id: u8) -> Result<SegmentFit> {
    let used: Vec<&ResistancePoint> = points.iter().filter(|p| !p.masked).collect();
    let n = used.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "tangent fit needs >= 2 unmasked points, segment {segment_id} has {n}"
        )));
    }
    let nf = n as f64;
    let t_mean = used.iter().map(|p| p.t_s).sum::<f64>() / nf;
    let m_mean = used.iter().map(|p| p.m_ohms).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in &used {
        let dt = p.t_s - t_mean;
        sxx += dt * dt;
        sxy += dt * (p.m_ohms - m_mean);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(format!(
            "segment {segment_id}: all points share one timestamp"
        )));
    }
    let gradient = sxy / sxx;
    let intercept = m_mean - gradient * t_mean;
    let ss_res: f64 = used
        .iter()
        .map(|p| {
            let r = p.m_ohms - (gradient * p.t_s + intercept);
            r * r
        })
        .sum();
    Ok(SegmentFit {
        segment_id,
        gradient_ohms_per_s: gradient,
        intercept_ohms: intercept,
        residual_norm_ohms: ss_res.sqrt(),
        n_points: n,
    })
}

/// Lobe-asymmetry factor: how much faster the resistance changes on the
/// negative lobe than on the positive one. 1 for an ideal memristor.
pub fn asymmetry_g(fit_pos: &SegmentFit, fit_neg: &SegmentFit) -> Result<f64> {
    if fit_pos.gradient_ohms_per_s == 0.0 {
        return Err(Error::DegenerateFit(
            "positive-lobe gradient is zero; asymmetry factor undefined".into(),
        ));
    }
    Ok(fit_neg.gradient_ohms_per_s / fit_pos.gradient_ohms_per_s)
}

/// Internal-battery memristance rate and intercept:
/// `(g - 1) * fit_pos / -2` applied to gradient and intercept.
pub fn internal_rate(g: f64, fit_pos: &SegmentFit) -> (f64, f64) {
    let scale = (g - 1.0) / -2.0;
    (
        scale * fit_pos.gradient_ohms_per_s,
        scale * fit_pos.intercept_ohms,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn series(points: &[(f64, f64)]) -> Vec<ResistancePoint> {
        points
            .iter()
            .map(|&(t_s, m_ohms)| ResistancePoint {
                t_s,
                m_ohms,
                masked: false,
            })
            .collect()
    }

    #[test]
    fn exact_line_is_interpolated() {
        let pts = series(&[(0.0, 5.0), (1.0, 7.0), (2.0, 9.0), (3.0, 11.0)]);
        let fit = fit_tangent(&pts, 1).unwrap();
        assert!((fit.gradient_ohms_per_s - 2.0).abs() < 1e-12);
        assert!((fit.intercept_ohms - 5.0).abs() < 1e-12);
        assert!(fit.residual_norm_ohms < 1e-9);
        assert_eq!(fit.n_points, 4);
    }

    #[test]
    fn masked_points_are_excluded() {
        let mut pts = series(&[(0.0, 5.0), (1.0, 7.0), (2.0, 9.0)]);
        pts.push(ResistancePoint {
            t_s: 3.0,
            m_ohms: 1e9,
            masked: true,
        });
        let fit = fit_tangent(&pts, 1).unwrap();
        assert!((fit.gradient_ohms_per_s - 2.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 3);
    }

    #[test]
    fn too_few_unmasked_points_is_an_error() {
        let mut pts = series(&[(0.0, 5.0), (1.0, 7.0)]);
        pts[1].masked = true;
        assert!(matches!(
            fit_tangent(&pts, 2),
            Err(Error::InsufficientData(_))
        ));
    }

    /// Oracle: closed-form OLS on the same noisy points, written out
    /// directly from the normal equations.
    #[test]
    fn noisy_line_matches_normal_equations() {
        let a = 3.1e5;
        let b = 4.9e5;
        let sigma = 2e4;
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let pts: Vec<(f64, f64)> = (0..60)
            .map(|k| {
                let t = k as f64 * 2.0;
                (t, a * t + b + normal.sample(&mut rng))
            })
            .collect();

        let fit = fit_tangent(&series(&pts), 1).unwrap();

        let n = pts.len() as f64;
        let st: f64 = pts.iter().map(|p| p.0).sum();
        let sm: f64 = pts.iter().map(|p| p.1).sum();
        let stt: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let stm: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let grad_oracle = (n * stm - st * sm) / (n * stt - st * st);
        let int_oracle = (sm - grad_oracle * st) / n;

        assert!((fit.gradient_ohms_per_s - grad_oracle).abs() < 1e-6 * grad_oracle.abs());
        assert!((fit.intercept_ohms - int_oracle).abs() < 1e-6 * int_oracle.abs());

        // and the recovered gradient sits within 3 standard errors of truth
        let t_mean = st / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - t_mean) * (p.0 - t_mean)).sum();
        let se = sigma / sxx.sqrt();
        assert!((fit.gradient_ohms_per_s - a).abs() < 3.0 * se);
    }

    #[test]
    fn asymmetry_factor_matches_reported_gradients() {
        let pos = SegmentFit {
            segment_id: 1,
            gradient_ohms_per_s: 3.1009e5,
            intercept_ohms: 4.9696e5,
            residual_norm_ohms: 5.7685e6,
            n_points: 40,
        };
        let neg = SegmentFit {
            segment_id: 3,
            gradient_ohms_per_s: 8.9348e5,
            intercept_ohms: -9.9034e7,
            residual_norm_ohms: 5.8028e6,
            n_points: 40,
        };
        let g = asymmetry_g(&pos, &neg).unwrap();
        assert!((g - 2.8814).abs() < 5e-5);
        assert!((g - 2.88).abs() < 0.01);
    }

    #[test]
    fn equal_gradients_give_unity() {
        let fit = SegmentFit {
            segment_id: 1,
            gradient_ohms_per_s: 5e5,
            intercept_ohms: 1e5,
            residual_norm_ohms: 0.0,
            n_points: 10,
        };
        assert_eq!(asymmetry_g(&fit, &fit).unwrap(), 1.0);
    }

    #[test]
    fn zero_positive_gradient_is_degenerate() {
        let pos = SegmentFit {
            segment_id: 1,
            gradient_ohms_per_s: 0.0,
            intercept_ohms: 1e5,
            residual_norm_ohms: 0.0,
            n_points: 10,
        };
        assert!(matches!(
            asymmetry_g(&pos, &pos),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn internal_rate_reproduces_reported_values() {
        let pos = SegmentFit {
            segment_id: 1,
            gradient_ohms_per_s: 3.1009e5,
            intercept_ohms: 4.9696e5,
            residual_norm_ohms: 0.0,
            n_points: 40,
        };
        let (rate, intercept) = internal_rate(2.8814, &pos);
        assert!((rate - (-2.91485e5)).abs() < 0.001 * 2.91485e5);
        assert!((intercept.abs() / pos.intercept_ohms - 0.94).abs() < 0.005 * 0.94);
    }

    #[test]
    fn passive_device_has_no_internal_term() {
        let pos = SegmentFit {
            segment_id: 1,
            gradient_ohms_per_s: 2e5,
            intercept_ohms: 1e6,
            residual_norm_ohms: 0.0,
            n_points: 40,
        };
        let (rate, intercept) = internal_rate(1.0, &pos);
        assert_eq!(rate, 0.0);
        assert_eq!(intercept, 0.0);
    }
}
