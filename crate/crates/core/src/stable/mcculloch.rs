//! McCulloch's quantile estimator.

use serde::{Deserialize, Serialize};

use super::tables;
use crate::error::{Error, Result};
use crate::scalar::{sorted, Real};
use crate::types::{FitResult, Method, Params, StableParams};

/// Empirical quantile by linear interpolation between order statistics placed
/// at plotting positions `s(i) = (2i - 1) / (2n)`. Probabilities outside
/// `[s(1), s(n)]` return the extreme order statistics.
pub fn sample_quantile<T: Real>(data: &[T], prob: T) -> T {
    sorted_quantile(&sorted(data), prob)
}

/// [`sample_quantile`] on data already sorted ascending.
pub fn sorted_quantile<T: Real>(sorted: &[T], prob: T) -> T {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty data");
    let h = T::from_usize_lossy(n) * prob + T::half();
    if !(h > T::one()) {
        return sorted[0];
    }
    if h >= T::from_usize_lossy(n) {
        return sorted[n - 1];
    }
    let lo = h.floor();
    let i = lo.to_usize().expect("index in range");
    let frac = h - lo;
    sorted[i - 1] + frac * (sorted[i] - sorted[i - 1])
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McCullochOptions {
    /// Divide the data by its interquartile range before fitting and map the
    /// scale and location back afterwards.
    pub iqr_scale: bool,
}

pub fn fit_mcculloch<T: Real>(data: &[T]) -> Result<FitResult<T>> {
    fit_mcculloch_with(data, &McCullochOptions::default())
}

pub fn fit_mcculloch_with<T: Real>(data: &[T], opts: &McCullochOptions) -> Result<FitResult<T>> {
    const MIN_N: usize = 20;
    if data.len() < MIN_N {
        return Err(Error::InsufficientData { needed: MIN_N, got: data.len() });
    }
    let mut xs = sorted(data);
    let mut factor = T::one();
    if opts.iqr_scale {
        let iqr = sorted_quantile(&xs, T::lit(0.75)) - sorted_quantile(&xs, T::lit(0.25));
        if !(iqr > T::zero()) {
            return Err(Error::Degenerate("degenerate scale: zero interquartile range".into()));
        }
        factor = iqr;
        xs.iter_mut().for_each(|x| *x /= iqr);
    }
    let q = |p: f64| sorted_quantile(&xs, T::lit(p)).as_f64();
    let (q05, q25, q50, q75, q95) = (q(0.05), q(0.25), q(0.5), q(0.75), q(0.95));
    let iqr = q75 - q25;
    if !(iqr > 0.0) || !(q95 > q05) {
        return Err(Error::Degenerate("degenerate scale: zero interquartile range".into()));
    }
    let nu_alpha = (q95 - q05) / iqr;
    let nu_beta = (q95 + q05 - 2.0 * q50) / (q95 - q05);

    let mut notes = Vec::new();
    let mut interior = true;
    let lo = tables::NU_ALPHA[0];
    let hi = tables::NU_ALPHA[tables::NU_ALPHA.len() - 1];
    if nu_alpha < lo || nu_alpha > hi {
        interior = false;
        notes.push(format!("nu_alpha {nu_alpha:.4} outside table range [{lo}, {hi}], clamped"));
    }
    let alpha = tables::psi1(nu_alpha.clamp(lo, hi), nu_beta);
    let mut beta = tables::psi2(nu_alpha.clamp(lo, hi), nu_beta);
    if beta.abs() > 1.0 {
        interior = false;
        notes.push(format!("beta {beta:.4} outside [-1, 1], clamped"));
        beta = beta.clamp(-1.0, 1.0);
    }
    if alpha >= 2.0 {
        // skewness is not identified in the Gaussian limit
        beta = 0.0;
        notes.push("alpha at Gaussian limit 2, beta set to 0".into());
    }
    if alpha < 0.6 {
        notes.push(format!("alpha {alpha:.4} below 0.6 where the tables are sparse"));
    }
    let gamma = iqr / tables::nu_c(alpha, beta);
    let delta = q50 + gamma * tables::nu_zeta(alpha, beta);

    let params = StableParams {
        alpha: T::lit(alpha),
        beta: T::lit(beta),
        gamma: T::lit(gamma) * factor,
        delta: T::lit(delta) * factor,
    };
    params.validate()?;
    let mut fit = FitResult::new(Method::McCulloch, Params::Stable(params), data.len());
    fit.converged = interior;
    if opts.iqr_scale {
        notes.push(format!("fitted on data scaled by IQR {factor}"));
    }
    fit.notes = notes;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable::stable_sample;

    #[test]
    fn plotting_positions() {
        let data = [5.0, 1.0, 4.0, 2.0, 3.0];
        for (i, p) in [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
            assert!((sample_quantile(&data, p) - (i + 1) as f64).abs() < 1e-12);
        }
        assert_eq!(sample_quantile(&data, 0.999), 5.0);
        assert_eq!(sample_quantile(&data, 0.01), 1.0);
    }

    #[test]
    fn two_point_median() {
        assert_eq!(sample_quantile(&[20.0, 10.0], 0.5), 15.0);
    }

    #[test]
    fn symmetric_data_gives_zero_beta() {
        let data: Vec<f64> = (-50..=50).map(|i| f64::from(i).powi(3)).collect();
        let fit = fit_mcculloch(&data).unwrap();
        assert!(fit.stable().unwrap().beta.abs() < 1e-12);
    }

    #[test]
    fn degenerate_scale() {
        let mut data = vec![1.0; 30];
        data[0] = 0.0;
        assert!(matches!(fit_mcculloch(&data), Err(Error::Degenerate(_))));
        assert!(matches!(fit_mcculloch(&[1.0; 5]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn gaussian_sample() {
        let p = StableParams::new(2.0, 0.0, 1.0, 0.0).unwrap();
        let x: Vec<f64> = stable_sample(&p, 1_000_000, 3);
        let fit = fit_mcculloch(&x).unwrap();
        let s = fit.stable().unwrap();
        assert!(s.alpha >= 1.95 && s.beta.abs() <= 0.1, "{s:?}");
    }

    #[test]
    fn iqr_scaling_matches_plain_fit() {
        let p = StableParams::new(1.6, 0.3, 3.0, 2.0).unwrap();
        let x: Vec<f64> = stable_sample(&p, 5000, 4);
        let a = *fit_mcculloch(&x).unwrap().stable().unwrap();
        let b = *fit_mcculloch_with(&x, &McCullochOptions { iqr_scale: true }).unwrap().stable().unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-9 && (a.gamma - b.gamma).abs() < 1e-9);
        assert!((a.delta - b.delta).abs() < 1e-9);
    }
}
