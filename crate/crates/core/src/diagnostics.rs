//! Descriptive statistics, hourly median heat maps, DFA Hurst exponent and the
//! exploratory tail curves (mean excess, Hill, exponential QQ).

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean, median_sorted, sorted, variance, Real};
use crate::types::{Side, VolumeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DescriptiveStats<T> {
    pub max: T,
    pub min: T,
    pub median: T,
    pub mean: T,
    /// Sample standard deviation, `n - 1` denominator.
    pub std: T,
    /// Pearson (non-excess) kurtosis; `None` for constant data.
    pub kurtosis: Option<T>,
    /// Standardized third moment; `None` for constant data.
    pub skew: Option<T>,
}

pub fn descriptive<T: Real>(data: &[T]) -> Result<DescriptiveStats<T>> {
    if data.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: data.len() });
    }
    let xs = sorted(data);
    let n = T::from_usize_lossy(xs.len());
    let m = mean(&xs);
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &x in &xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skew, kurtosis) = if m2 > T::zero() {
        (Some(m3 / m2.powf(T::lit(1.5))), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    Ok(DescriptiveStats {
        max: xs[xs.len() - 1],
        min: xs[0],
        median: median_sorted(&xs),
        mean: m,
        std: variance(&xs).sqrt(),
        kurtosis,
        skew,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    MeanExcess,
    Hill,
    QqExponential,
    DfaLogLog,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::MeanExcess => "mean_excess",
            CurveKind::Hill => "hill",
            CurveKind::QqExponential => "qq_exponential",
            CurveKind::DfaLogLog => "dfa_loglog",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CurvePoints<T> {
    pub kind: CurveKind,
    pub xs: Vec<T>,
    pub ys: Vec<T>,
    /// Pointwise lower/upper bands (Hill only).
    pub lo: Option<Vec<T>>,
    pub hi: Option<Vec<T>>,
    pub notes: Vec<String>,
}

impl<T: Real> CurvePoints<T> {
    fn new(kind: CurveKind, xs: Vec<T>, ys: Vec<T>) -> Self {
        Self { kind, xs, ys, lo: None, hi: None, notes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// Least-squares slope of `ys` on `xs`.
pub fn ls_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Empirical mean excess `e(u) = Σ(x - u)1{x > u} / Σ1{x > u}`. Without
/// explicit thresholds the grid is the distinct sample values below the three
/// largest order statistics. Thresholds at or above the maximum are dropped
/// with a note.
pub fn mean_excess_curve<T: Real>(data: &[T], thresholds: Option<&[T]>) -> Result<CurvePoints<T>> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let xs = sorted(data);
    let n = xs.len();
    let max = xs[n - 1];
    let mut us: Vec<T> = match thresholds {
        Some(t) => sorted(t),
        None => xs[..n.saturating_sub(3)].to_vec(),
    };
    us.dedup();
    let mut notes = Vec::new();
    let dropped = us.iter().filter(|&&u| !(u < max)).count();
    if dropped > 0 && thresholds.is_some() {
        notes.push(format!("{dropped} thresholds at or above the sample maximum dropped"));
    }
    us.retain(|&u| u < max);
    // suffix sums over the sorted sample
    let mut suffix = vec![T::zero(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + xs[i];
    }
    let ys = us
        .iter()
        .map(|&u| {
            let first = xs.partition_point(|&x| x <= u);
            let count = T::from_usize_lossy(n - first);
            suffix[first] / count - u
        })
        .collect();
    let mut curve = CurvePoints::new(CurveKind::MeanExcess, us, ys);
    curve.notes = notes;
    Ok(curve)
}

/// Hill statistic `H_k = (1/(k-1)) Σ_{i<k} ln x_(i) - ln x_(k)` on descending
/// order statistics for `k = 3..=k_max`, with bands `H_k(1 ± 1.96/√k)`.
pub fn hill_curve<T: Real>(data: &[T], k_max: usize) -> Result<CurvePoints<T>> {
    let n = data.len();
    if k_max < 3 || k_max > n {
        return Err(Error::InvalidParameter(format!("k_max {k_max} outside [3, {n}]")));
    }
    if let Some(v) = data.iter().find(|v| !(**v > T::zero())) {
        return Err(Error::InvalidInput(format!("Hill estimator needs positive data, found {v}")));
    }
    let mut desc = sorted(data);
    desc.reverse();
    let logs: Vec<T> = desc[..k_max].iter().map(|x| x.ln()).collect();
    let z = T::lit(1.96);
    let (mut xs, mut ys, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut prefix = logs[0];
    for k in 2..=k_max {
        // prefix holds Σ_{i<k} ln x_(i)
        if k >= 3 {
            let km1 = T::from_usize_lossy(k - 1);
            let h = prefix / km1 - logs[k - 1];
            let kf = T::from_usize_lossy(k);
            let w = z / kf.sqrt();
            xs.push(kf);
            ys.push(h);
            lo.push(h * (T::one() - w));
            hi.push(h * (T::one() + w));
        }
        prefix += logs[k - 1];
    }
    let mut curve = CurvePoints::new(CurveKind::Hill, xs, ys);
    curve.lo = Some(lo);
    curve.hi = Some(hi);
    Ok(curve)
}

/// Reciprocal of a Hill curve, the tail index scale `1/H_k`.
pub fn hill_tail_index<T: Real>(hill: &CurvePoints<T>) -> CurvePoints<T> {
    let ys = hill.ys.iter().map(|h| T::one() / *h).collect();
    CurvePoints::new(CurveKind::Hill, hill.xs.clone(), ys)
}

/// Sorted data against exponential quantiles `-ln(1 - (i - 1/2)/n)`.
pub fn qq_exponential<T: Real>(data: &[T]) -> CurvePoints<T> {
    let n = data.len();
    let nf = T::from_usize_lossy(n);
    let xs = (1..=n)
        .map(|i| -(-(T::from_usize_lossy(i) - T::half()) / nf).ln_1p())
        .collect();
    CurvePoints::new(CurveKind::QqExponential, xs, sorted(data))
}

/// Geometric window grid from 8 to `n/4` with ratio √2.
pub fn default_dfa_windows(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let max = n / 4;
    let mut w = 8.0f64;
    while w.round() as usize <= max {
        let r = w.round() as usize;
        if out.last() != Some(&r) {
            out.push(r);
        }
        w *= std::f64::consts::SQRT_2;
    }
    out
}

/// Detrended fluctuation analysis of order 1. Returns the Hurst exponent and
/// the `(ln w, ln F(w))` points it was fitted on.
pub fn hurst_dfa<T: Real>(series: &[T], windows: Option<&[usize]>) -> Result<(T, CurvePoints<T>)> {
    let n = series.len();
    let ws: Vec<usize> = match windows {
        Some(w) => w.to_vec(),
        None => default_dfa_windows(n),
    };
    if ws.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: ws.len() });
    }
    if let Some(&w) = ws.iter().find(|&&w| w < 3 || 4 * w > n) {
        return Err(Error::InvalidParameter(format!("window {w} needs 3 <= w <= n/4 with n = {n}")));
    }
    let m = mean(series);
    let mut profile = Vec::with_capacity(n);
    let mut acc = T::zero();
    for &x in series {
        acc += x - m;
        profile.push(acc);
    }
    let mut xs = Vec::with_capacity(ws.len());
    let mut ys = Vec::with_capacity(ws.len());
    for &w in &ws {
        let wf = T::from_usize_lossy(w);
        let tbar = (wf - T::one()) * T::half();
        let stt = (0..w).fold(T::zero(), |s, t| {
            let d = T::from_usize_lossy(t) - tbar;
            s + d * d
        });
        let segments = n / w;
        let mut rss = T::zero();
        for seg in profile.chunks_exact(w).take(segments) {
            let ybar = mean(seg);
            let mut sty = T::zero();
            let mut syy = T::zero();
            for (t, &y) in seg.iter().enumerate() {
                let dt = T::from_usize_lossy(t) - tbar;
                let dy = y - ybar;
                sty += dt * dy;
                syy += dy * dy;
            }
            rss += (syy - sty * sty / stt).max(T::zero());
        }
        let f = (rss / T::from_usize_lossy(segments * w)).sqrt();
        if !(f > T::zero()) {
            return Err(Error::Degenerate("degenerate series: zero fluctuation".into()));
        }
        xs.push(wf.ln());
        ys.push(f.ln());
    }
    let h = ls_slope(&xs, &ys);
    Ok((h, CurvePoints::new(CurveKind::DfaLogLog, xs, ys)))
}

/// Hour-of-day by trading-day matrix of medians for one asset, side and level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HeatMap<T> {
    pub asset: String,
    pub side: Side,
    pub level: u8,
    pub resolution_s: u32,
    /// Row labels, hour of day (grid time / 3600, floored).
    pub hours: Vec<u32>,
    pub days: Vec<NaiveDate>,
    /// `cells[h][d]`, `None` where the hour has no grid points that day.
    pub cells: Vec<Vec<Option<T>>>,
}

pub fn hourly_median_matrix<T: Real>(series: &[VolumeSeries<T>]) -> Result<HeatMap<T>> {
    let first = series.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let k0 = &first.key;
    for s in series {
        let k = &s.key;
        if k.resolution_s != k0.resolution_s {
            return Err(Error::InvalidInput(format!(
                "mixed resolutions {}s and {}s",
                k0.resolution_s, k.resolution_s
            )));
        }
        if k.asset != k0.asset || k.side != k0.side || k.level != k0.level {
            return Err(Error::InvalidInput(format!("series {k} does not match {k0}")));
        }
    }
    let mut days: Vec<NaiveDate> = series.iter().map(|s| s.key.trading_day).collect();
    days.sort();
    days.dedup();
    let hour_of = |t: i64| (t.div_euclid(3600)) as u32;
    let all_hours = series.iter().flat_map(|s| s.timestamps.iter().map(|&t| hour_of(t)));
    let (lo, hi) = all_hours.fold((u32::MAX, 0), |(a, b), h| (a.min(h), b.max(h)));
    let hours: Vec<u32> = if lo <= hi { (lo..=hi).collect() } else { Vec::new() };
    let mut buckets: Vec<Vec<Vec<T>>> = vec![vec![Vec::new(); days.len()]; hours.len()];
    for s in series {
        let d = days.binary_search(&s.key.trading_day).expect("day listed");
        for (&t, &v) in s.timestamps.iter().zip(&s.values) {
            buckets[(hour_of(t) - lo) as usize][d].push(v);
        }
    }
    let cells = buckets
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|b| if b.is_empty() { None } else { Some(median_sorted(&sorted(&b))) })
                .collect()
        })
        .collect();
    Ok(HeatMap {
        asset: k0.asset.clone(),
        side: k0.side,
        level: k0.level,
        resolution_s: k0.resolution_s,
        hours,
        days,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SeriesKey;

    #[test]
    fn descriptive_one_to_five() {
        let d = descriptive(&[1.0f64, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(d.mean, 3.0);
        assert_eq!(d.median, 3.0);
        assert!((d.std - 1.581_138_830_084_19).abs() < 1e-12);
        assert!(d.skew.unwrap().abs() < 1e-15);
        assert!((d.kurtosis.unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn descriptive_constant_and_symmetric() {
        let d = descriptive(&[2.0; 6]).unwrap();
        assert_eq!(d.std, 0.0);
        assert!(d.skew.is_none() && d.kurtosis.is_none());
        let s = descriptive(&[-1.0, -1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.skew, Some(0.0));
        assert!(descriptive(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn mean_excess_examples() {
        let c = mean_excess_curve(&[1.0f64, 2.0, 3.0, 4.0, 5.0], Some(&[2.5, 0.0, 7.0])).unwrap();
        assert_eq!(c.xs, vec![0.0, 2.5]);
        assert!((c.ys[1] - 1.5).abs() < 1e-15);
        assert!((c.ys[0] - 3.0).abs() < 1e-15);
        assert_eq!(c.notes.len(), 1);
    }

    #[test]
    fn mean_excess_default_grid() {
        let c = mean_excess_curve(&[5.0, 1.0, 2.0, 2.0, 3.0, 4.0, 6.0], None).unwrap();
        assert_eq!(c.xs, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn hill_hand_example() {
        let e = std::f64::consts::E;
        let c = hill_curve(&[1.0, e * e, e], 3).unwrap();
        assert_eq!(c.xs, vec![3.0]);
        assert!((c.ys[0] - 1.5).abs() < 1e-15);
        let w = 1.96 / 3f64.sqrt();
        assert!((c.lo.unwrap()[0] - 1.5 * (1.0 - w)).abs() < 1e-15);
    }

    #[test]
    fn hill_constant_and_invalid() {
        let c = hill_curve(&[4.0; 10], 10).unwrap();
        assert!(c.ys.iter().all(|&h| h == 0.0));
        assert!(hill_curve(&[1.0, 0.0, 2.0], 3).is_err());
        assert!(hill_curve(&[1.0, 2.0, 3.0], 4).is_err());
    }

    #[test]
    fn qq_examples() {
        let n = 50;
        let exp_q: Vec<f64> = (1..=n).map(|i| -(1.0 - (i as f64 - 0.5) / n as f64).ln()).collect();
        let c = qq_exponential(&exp_q);
        for (x, y) in c.xs.iter().zip(&c.ys) {
            assert!((x - y).abs() < 1e-12);
        }
        let one = qq_exponential(&[3.0]);
        assert!((one.xs[0] - 2f64.ln()).abs() < 1e-15 && one.ys[0] == 3.0);
    }

    #[test]
    fn dfa_windows_and_errors() {
        let w = default_dfa_windows(1000);
        assert_eq!(w.first(), Some(&8));
        assert!(*w.last().unwrap() <= 250);
        assert!(w.windows(2).all(|p| p[1] > p[0]));
        assert!(matches!(hurst_dfa(&[1.0; 400], None), Err(Error::Degenerate(_))));
        assert!(hurst_dfa(&[1.0, 2.0, 3.0], None).is_err());
    }

    #[test]
    fn heatmap_medians() {
        let day = NaiveDate::from_ymd_opt(2010, 3, 1).unwrap();
        let key = SeriesKey::new("X", day, Side::Ask, 1, 10).unwrap();
        let s = VolumeSeries { key: key.clone(), timestamps: vec![36_000, 36_010, 36_020, 43_200], values: vec![1.0, 3.0, 2.0, 5.0] };
        let h = hourly_median_matrix(std::slice::from_ref(&s)).unwrap();
        assert_eq!(h.hours, vec![10, 11, 12]);
        assert_eq!(h.cells[0][0], Some(2.0));
        assert_eq!(h.cells[1][0], None);
        assert_eq!(h.cells[2][0], Some(5.0));
        let mut other = s;
        other.key.resolution_s = 5;
        other.key.trading_day = day.succ_opt().unwrap();
        let orig = VolumeSeries { key, timestamps: vec![36_000], values: vec![1.0] };
        assert!(hourly_median_matrix(&[orig, other]).is_err());
    }
}
