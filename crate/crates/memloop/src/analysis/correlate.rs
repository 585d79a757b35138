//! Pearson correlation for the per-sample metric comparisons (R0 vs tube
//! length, hysteresis vs starting resistance, and so on).

use crate::error::{Error, Result};

/// Pearson correlation coefficient and the sample count used.
pub fn correlate(xs: &[f64], ys: &[f64]) -> Result<(f64, usize)> {
    if xs.len() != ys.len() {
        return Err(Error::InsufficientData(format!(
            "correlate needs equal-length inputs, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "correlate needs n >= 3, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "zero variance in one of the inputs".into(),
        ));
    }
    Ok(((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0), n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn identical_series_correlate_perfectly() {
        let xs = [1.0, 2.0, 5.0, 7.0];
        let (r, n) = correlate(&xs, &xs).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert_eq!(n, 4);
    }

    #[test]
    fn negated_series_anticorrelate() {
        let xs = [1.0, 2.0, 5.0, 7.0];
        let ys: Vec<f64> = xs.iter().map(|x| -x).collect();
        let (r, _) = correlate(&xs, &ys).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    /// Oracle: the direct Pearson formula on a fixed fixture of
    /// independent draws.
    #[test]
    fn independent_draws_show_no_correlation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let xs: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let (r, n) = correlate(&xs, &ys).unwrap();
        assert_eq!(n, 20);
        assert!(r.abs() < 0.5, "|r| = {}", r.abs());

        let mx = xs.iter().sum::<f64>() / 20.0;
        let my = ys.iter().sum::<f64>() / 20.0;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let dx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let dy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
        let oracle = num / (dx.sqrt() * dy.sqrt());
        assert!((r - oracle).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_undefined() {
        let xs = [3.0, 3.0, 3.0, 3.0];
        let ys = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            correlate(&xs, &ys),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn short_inputs_are_rejected() {
        assert!(matches!(
            correlate(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::InsufficientData(_))
        ));
    }
}
