//! Shared domain types: series keys, volume series, parameter vectors and fit
//! results.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Side of the book. Level indices `-5..=-1` map to `Bid`, `1..=5` to `Ask`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn code(self) -> char {
        match self {
            Side::Bid => 'B',
            Side::Ask => 'A',
        }
    }

    pub fn from_code(s: &str) -> Option<Side> {
        match s {
            "B" | "b" => Some(Side::Bid),
            "A" | "a" => Some(Side::Ask),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Bid => "bid",
            Side::Ask => "ask",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Identifies one sub-sampled series: asset, day, side, depth level and grid
/// resolution in seconds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeriesKey {
    pub asset: String,
    pub trading_day: NaiveDate,
    pub side: Side,
    pub level: u8,
    pub resolution_s: u32,
}

impl SeriesKey {
    pub fn new(
        asset: impl Into<String>,
        trading_day: NaiveDate,
        side: Side,
        level: u8,
        resolution_s: u32,
    ) -> Result<Self> {
        if !(1..=5).contains(&level) {
            return Err(Error::InvalidParameter(format!("level {level} outside [1,5]")));
        }
        if resolution_s == 0 {
            return Err(Error::InvalidParameter("resolution must be positive".into()));
        }
        Ok(Self { asset: asset.into(), trading_day, side, level, resolution_s })
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/L{}/{}s",
            self.asset, self.trading_day, self.side, self.level, self.resolution_s
        )
    }
}

/// Regularly sampled volumes. Timestamps are seconds since midnight,
/// exchange-local.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VolumeSeries<T> {
    pub key: SeriesKey,
    pub timestamps: Vec<i64>,
    pub values: Vec<T>,
}

impl<T: Real> VolumeSeries<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Lists every invariant violation of `series`; an empty list means it is
/// well formed.
pub fn validate_series<T: Real>(series: &VolumeSeries<T>) -> Vec<String> {
    let mut out = Vec::new();
    let key = &series.key;
    if !(1..=5).contains(&key.level) {
        out.push(format!("level ∈ [1,5] violated ({})", key.level));
    }
    if key.resolution_s == 0 {
        out.push("resolution_s > 0 violated".to_string());
    }
    if series.timestamps.len() != series.values.len() {
        out.push(format!(
            "len(timestamps) == len(values) violated ({} vs {})",
            series.timestamps.len(),
            series.values.len()
        ));
    }
    if let Some(i) = series.values.iter().position(|v| !(*v >= T::zero())) {
        out.push(format!("values ≥ 0 violated at {i}"));
    }
    if let Some(i) = (1..series.timestamps.len())
        .find(|&i| series.timestamps[i] <= series.timestamps[i - 1])
    {
        out.push(format!("timestamps strictly increasing violated at {i}"));
    }
    let step = i64::from(key.resolution_s);
    if let Some(i) = (1..series.timestamps.len())
        .find(|&i| series.timestamps[i] - series.timestamps[i - 1] != step)
    {
        out.push(format!("constant spacing violated at {i}"));
    }
    out
}

/// α-stable parameters in the S(0) parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StableParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Real> StableParams<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T) -> Result<Self> {
        let p = Self { alpha, beta, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha <= T::two()) {
            return Err(Error::InvalidParameter(format!("alpha {} outside (0,2]", self.alpha)));
        }
        if !(self.beta >= -T::one() && self.beta <= T::one()) {
            return Err(Error::InvalidParameter(format!("beta {} outside [-1,1]", self.beta)));
        }
        if !(self.gamma > T::zero()) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale {} must be positive, location {} finite",
                self.gamma, self.delta
            )));
        }
        Ok(())
    }
}

/// GEV location `mu`, scale `sigma`, extreme value index `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GevParams<T> {
    pub mu: T,
    pub sigma: T,
    pub gamma: T,
}

impl<T: Real> GevParams<T> {
    pub fn new(mu: T, sigma: T, gamma: T) -> Result<Self> {
        let p = Self { mu, sigma, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > T::zero()) || !self.mu.is_finite() || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "GEV requires sigma > 0 and finite mu, gamma (got {:?})",
                self
            )));
        }
        Ok(())
    }
}

/// GPD shape `gamma`, scale `sigma` and threshold `mu`. Positive `gamma` is the
/// heavy-tailed case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GpdParams<T> {
    pub gamma: T,
    pub sigma: T,
    pub mu: T,
}

impl<T: Real> GpdParams<T> {
    pub fn new(gamma: T, sigma: T, mu: T) -> Result<Self> {
        let p = Self { gamma, sigma, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > T::zero()) || !self.mu.is_finite() || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "GPD requires sigma > 0 and finite gamma, mu (got {:?})",
                self
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Stable,
    Gev,
    Gpd,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Stable => "stable",
            Family::Gev => "gev",
            Family::Gpd => "gpd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    McCulloch,
    Mle,
    MixedLMoments,
    /// Moment matching: ordinary moments for the GPD, L-moments for the GEV.
    Mom,
    Pickands,
    Epm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::McCulloch => "mcculloch",
            Method::Mle => "mle",
            Method::MixedLMoments => "mixed_lmoments",
            Method::Mom => "mom",
            Method::Pickands => "pickands",
            Method::Epm => "epm",
        }
    }
}

/// Whether `method` is an estimator this crate provides for `family`.
pub fn method_allowed(family: Family, method: Method) -> bool {
    matches!(
        (family, method),
        (Family::Stable, Method::McCulloch)
            | (Family::Gev, Method::Mle | Method::MixedLMoments | Method::Mom)
            | (Family::Gpd, Method::Mle | Method::Mom | Method::Pickands | Method::Epm)
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "family", rename_all = "snake_case")]
pub enum Params<T> {
    Stable(StableParams<T>),
    Gev(GevParams<T>),
    Gpd(GpdParams<T>),
}

impl<T: Real> Params<T> {
    pub fn family(&self) -> Family {
        match self {
            Params::Stable(_) => Family::Stable,
            Params::Gev(_) => Family::Gev,
            Params::Gpd(_) => Family::Gpd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Params::Stable(p) => p.validate(),
            Params::Gev(p) => p.validate(),
            Params::Gpd(p) => p.validate(),
        }
    }

    /// Named parameter values in a fixed order.
    pub fn named(&self) -> Vec<(&'static str, T)> {
        match *self {
            Params::Stable(p) => {
                vec![("alpha", p.alpha), ("beta", p.beta), ("gamma", p.gamma), ("delta", p.delta)]
            }
            Params::Gev(p) => vec![("mu", p.mu), ("sigma", p.sigma), ("gamma", p.gamma)],
            Params::Gpd(p) => vec![("gamma", p.gamma), ("sigma", p.sigma), ("mu", p.mu)],
        }
    }

    /// Fitted distribution function.
    pub fn cdf(&self, x: T) -> Result<T> {
        match self {
            Params::Stable(p) => crate::stable::stable_cdf(x, p),
            Params::Gev(p) => Ok(crate::gev::gev_cdf(x, p)),
            Params::Gpd(p) => Ok(crate::gpd::gpd_cdf(x, p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FitResult<T> {
    pub family: Family,
    pub method: Method,
    pub params: Params<T>,
    pub sample_size: usize,
    pub ks_statistic: Option<T>,
    pub ks_pvalue: Option<T>,
    pub converged: bool,
    /// Parameter covariance in the order of [`Params::named`], MLE only.
    pub covariance: Option<Vec<Vec<T>>>,
    pub notes: Vec<String>,
}

impl<T: Real> FitResult<T> {
    pub fn new(method: Method, params: Params<T>, sample_size: usize) -> Self {
        let family = params.family();
        debug_assert!(method_allowed(family, method));
        Self {
            family,
            method,
            params,
            sample_size,
            ks_statistic: None,
            ks_pvalue: None,
            converged: true,
            covariance: None,
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn stable(&self) -> Option<&StableParams<T>> {
        match &self.params {
            Params::Stable(p) => Some(p),
            _ => None,
        }
    }

    pub fn gev(&self) -> Option<&GevParams<T>> {
        match &self.params {
            Params::Gev(p) => Some(p),
            _ => None,
        }
    }

    pub fn gpd(&self) -> Option<&GpdParams<T>> {
        match &self.params {
            Params::Gpd(p) => Some(p),
            _ => None,
        }
    }

    /// Checks the family/method pairing and the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !method_allowed(self.family, self.method) || self.params.family() != self.family {
            return Err(Error::InvalidInput(format!(
                "method {:?} not defined for family {:?}",
                self.method, self.family
            )));
        }
        if let Some(d) = self.ks_statistic {
            if !(d >= T::zero() && d <= T::one()) {
                return Err(Error::InvalidInput(format!("KS statistic {d} outside [0,1]")));
            }
        }
        if let Some(p) = self.ks_pvalue {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::InvalidInput(format!("KS p-value {p} outside [0,1]")));
            }
        }
        self.params.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> SeriesKey {
        SeriesKey::new("TST", NaiveDate::from_ymd_opt(2010, 1, 4).unwrap(), Side::Bid, 1, 10)
            .unwrap()
    }

    #[test]
    fn well_formed_series_has_no_violations() {
        let s = VolumeSeries { key: key(), timestamps: vec![10, 20, 30], values: vec![1.0, 2.0, 3.0] };
        assert!(validate_series(&s).is_empty());
    }

    #[test]
    fn negative_value_reported_with_index() {
        let s = VolumeSeries { key: key(), timestamps: vec![10, 20, 30], values: vec![1.0, -2.0, 3.0] };
        assert_eq!(validate_series(&s), vec!["values ≥ 0 violated at 1".to_string()]);
    }

    #[test]
    fn uneven_spacing_reported_with_index() {
        let s = VolumeSeries { key: key(), timestamps: vec![10, 20, 40], values: vec![1.0, 2.0, 3.0] };
        assert_eq!(validate_series(&s), vec!["constant spacing violated at 2".to_string()]);
    }

    #[test]
    fn key_rejects_bad_level() {
        let d = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
        assert!(SeriesKey::new("X", d, Side::Ask, 6, 10).is_err());
        assert!(SeriesKey::new("X", d, Side::Ask, 0, 10).is_err());
        assert!(SeriesKey::new("X", d, Side::Ask, 3, 0).is_err());
    }

    #[test]
    fn method_grid() {
        assert!(method_allowed(Family::Stable, Method::McCulloch));
        assert!(!method_allowed(Family::Stable, Method::Mle));
        assert!(method_allowed(Family::Gev, Method::MixedLMoments));
        assert!(!method_allowed(Family::Gev, Method::Pickands));
        assert!(method_allowed(Family::Gpd, Method::Epm));
        assert!(!method_allowed(Family::Gpd, Method::McCulloch));
    }

    #[test]
    fn fit_result_round_trips_json() {
        let mut fit = FitResult::new(
            Method::Mle,
            Params::Gpd(GpdParams::new(0.3, 1.5, 2.0).unwrap()),
            100,
        );
        fit.covariance = Some(vec![vec![0.1, -0.02], vec![-0.02, 0.3]]);
        let s = serde_json::to_string(&fit).unwrap();
        let back: FitResult<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, fit);
    }
}
