//! One-sample Kolmogorov-Smirnov statistics against a fitted distribution
//! function, percentile comparison tables and the sub-sample study.
//!
//! Parameters estimated from the same data make the asymptotic p-value
//! anti-conservative; it is a guide, not a calibrated test, for fitted models.

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::from_seed;
use crate::scalar::{sort_in_place, Real};
use crate::stable::sorted_quantile;
use crate::types::FitResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KsResult<T> {
    pub statistic: T,
    pub pvalue: T,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_pvalue(lambda: f64) -> f64 {
    const TERMS: usize = 100;
    const TOL: f64 = 1e-10;
    if !(lambda > 0.0) {
        return 1.0;
    }
    let p = if lambda < 1.0 {
        // theta-function form of the distribution function, fast for small λ
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=TERMS {
            let m = (2 * k - 1) as f64;
            let t = (-m * m * c).exp();
            s += t;
            if t < TOL * s.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        let mut s = 0.0;
        for k in 1..=TERMS {
            let kf = k as f64;
            let t = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { t } else { -t };
            if t < TOL {
                break;
            }
        }
        2.0 * s
    };
    p.clamp(0.0, 1.0)
}

/// KS statistic from distribution function values at the ascending sample.
fn ks_from_sorted_cdf<T: Real>(f: &[T]) -> Result<KsResult<T>> {
    let n = f.len();
    let nf = T::from_usize_lossy(n);
    let mut d = T::zero();
    for (i, &fi) in f.iter().enumerate() {
        if i > 0 && fi < f[i - 1] - T::lit(1e-12) {
            return Err(Error::InvalidInput(format!("distribution function decreases at order statistic {i}")));
        }
        let up = T::from_usize_lossy(i + 1) / nf - fi;
        let down = fi - T::from_usize_lossy(i) / nf;
        d = d.max(up.abs()).max(down.abs());
    }
    let d = d.min(T::one());
    let pvalue = T::lit(kolmogorov_pvalue(nf.sqrt().as_f64() * d.as_f64()));
    Ok(KsResult { statistic: d, pvalue })
}

/// `D = sup_i max(|i/n - F(x_(i))|, |(i-1)/n - F(x_(i))|)` and its asymptotic
/// p-value at `√n D`.
pub fn ks_statistic<T: Real, F: Fn(T) -> Result<T>>(data: &[T], cdf: F) -> Result<KsResult<T>> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut xs = data.to_vec();
    sort_in_place(&mut xs);
    let f = xs.iter().map(|&x| cdf(x)).collect::<Result<Vec<T>>>()?;
    ks_from_sorted_cdf(&f)
}

/// KS against a fit, stored into the fit's diagnostic fields.
pub fn attach_ks<T: Real>(fit: &mut FitResult<T>, data: &[T]) -> Result<()> {
    let params = fit.params;
    let ks = ks_statistic(data, |x| params.cdf(x))?;
    fit.ks_statistic = Some(ks.statistic);
    fit.ks_pvalue = Some(ks.pvalue);
    Ok(())
}

pub const DEFAULT_PROBES: [f64; 11] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PercentileRow<T> {
    pub probe: T,
    pub empirical_quantile: T,
    /// Fitted distribution function at the empirical quantile; equals `probe`
    /// for a perfect fit.
    pub theoretical: T,
}

pub fn percentile_comparison<T: Real, F: Fn(T) -> Result<T>>(
    data: &[T],
    cdf: F,
    probes: &[T],
) -> Result<Vec<PercentileRow<T>>> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut xs = data.to_vec();
    sort_in_place(&mut xs);
    probes
        .iter()
        .map(|&p| {
            let q = sorted_quantile(&xs, p);
            Ok(PercentileRow { probe: p, empirical_quantile: q, theoretical: cdf(q)? })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SubsampleStudy<T> {
    pub full: KsResult<T>,
    pub subsamples: Vec<KsResult<T>>,
}

impl<T: Real> SubsampleStudy<T> {
    pub fn pvalue_full(&self) -> T {
        self.full.pvalue
    }

    /// Mean p-value over subsamples, `None` without replicates.
    pub fn pvalue_sub_mean(&self) -> Option<T> {
        if self.subsamples.is_empty() {
            return None;
        }
        let s = self.subsamples.iter().fold(T::zero(), |a, r| a + r.pvalue);
        Some(s / T::from_usize_lossy(self.subsamples.len()))
    }

    /// Fraction of subsamples rejected at `level`.
    pub fn sub_rejection_rate(&self, level: T) -> Option<T> {
        if self.subsamples.is_empty() {
            return None;
        }
        let k = self.subsamples.iter().filter(|r| r.pvalue < level).count();
        Some(T::from_usize_lossy(k) / T::from_usize_lossy(self.subsamples.len()))
    }
}

/// KS on the full sample against uniform subsamples of size `subsample_n`
/// drawn without replacement, all tested against the same fitted law.
pub fn ks_subsample_study<T: Real>(
    data: &[T],
    fit: &FitResult<T>,
    subsample_n: usize,
    replicates: usize,
    seed: u64,
) -> Result<SubsampleStudy<T>> {
    let n = data.len();
    if subsample_n == 0 || subsample_n >= n {
        return Err(Error::InvalidParameter(format!("subsample size {subsample_n} must lie in [1, {n})")));
    }
    // the fitted distribution function is evaluated once per datum
    let mut pairs: Vec<(T, T)> = data
        .iter()
        .map(|&x| fit.params.cdf(x).map(|f| (x, f)))
        .collect::<Result<Vec<_>>>()?;
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let f_sorted: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let full = ks_from_sorted_cdf(&f_sorted)?;
    let mut rng = from_seed(seed);
    let mut subsamples = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let mut idx = sample_indices(&mut rng, n, subsample_n).into_vec();
        idx.sort_unstable();
        let f: Vec<T> = idx.iter().map(|&i| f_sorted[i]).collect();
        subsamples.push(ks_from_sorted_cdf(&f)?);
    }
    Ok(SubsampleStudy { full, subsamples })
}
