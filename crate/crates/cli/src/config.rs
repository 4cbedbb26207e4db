//! JSON run configuration. Every field except `input_dir` and `output_dir`
//! has a default, so a minimal file names the two directories and the assets.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use lobtail_core::ingest::{MarketHours, TickSchema};
use lobtail_core::Side;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetConfig {
    pub name: String,
    pub market_hours: MarketHours,
    #[serde(default)]
    pub holidays: Vec<NaiveDate>,
}

/// Which estimators run. Stable fits use the full series, GEV fits the block
/// maxima and GPD fits the threshold excesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Estimators {
    pub stable_mcculloch: bool,
    pub gev_mle: bool,
    pub gev_mixed_lmoments: bool,
    pub gev_lmoments: bool,
    pub gpd_mle: bool,
    pub gpd_mom: bool,
    pub gpd_pickands: bool,
    pub gpd_epm: bool,
}

impl Default for Estimators {
    fn default() -> Self {
        Self {
            stable_mcculloch: true,
            gev_mle: true,
            gev_mixed_lmoments: true,
            gev_lmoments: false,
            gpd_mle: true,
            gpd_mom: true,
            gpd_pickands: true,
            gpd_epm: true,
        }
    }
}

impl Estimators {
    pub fn any(&self) -> bool {
        self.stable_mcculloch
            || self.gev_mle
            || self.gev_mixed_lmoments
            || self.gev_lmoments
            || self.gpd_mle
            || self.gpd_mom
            || self.gpd_pickands
            || self.gpd_epm
    }
}

fn default_resolutions() -> Vec<u32> {
    vec![10]
}
fn default_sides() -> Vec<Side> {
    vec![Side::Bid, Side::Ask]
}
fn default_levels() -> Vec<u8> {
    vec![1]
}
fn default_block_len() -> usize {
    30
}
fn default_pot() -> f64 {
    0.8
}
fn default_epm_start() -> f64 {
    0.5
}
fn default_subsample() -> usize {
    200
}
fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub assets: Vec<AssetConfig>,
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<u32>,
    #[serde(default = "default_sides")]
    pub sides: Vec<Side>,
    #[serde(default = "default_levels")]
    pub levels: Vec<u8>,
    /// Grid points per block for block maxima.
    #[serde(default = "default_block_len")]
    pub block_len: usize,
    #[serde(default = "default_pot")]
    pub pot_percentile: f64,
    #[serde(default)]
    pub estimators: Estimators,
    /// Standardize by the interquartile range before the McCulloch fit.
    #[serde(default)]
    pub stable_iqr_scaling: bool,
    #[serde(default = "default_epm_start")]
    pub epm_start_percentile: f64,
    /// Size of the KS subsample drawn per fit; 0 disables the subsample test.
    #[serde(default = "default_subsample")]
    pub ks_subsample: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub schema: TickSchema,
}

impl RunConfig {
    /// Reads a config file. Relative directories are resolved against the
    /// file's own directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if cfg.input_dir.is_relative() {
            cfg.input_dir = base.join(&cfg.input_dir);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !self.estimators.any() {
            return bad("at least one estimator must be enabled".into());
        }
        if self.assets.is_empty() {
            return bad("no assets configured".into());
        }
        let mut names = BTreeSet::new();
        for a in &self.assets {
            if a.name.is_empty() || a.name.contains(['/', '\\']) {
                return bad(format!("invalid asset name {:?}", a.name));
            }
            if !names.insert(&a.name) {
                return bad(format!("asset {} listed twice", a.name));
            }
            MarketHours::new(a.market_hours.open_s, a.market_hours.close_s)
                .map_err(|e| CliError::Config(format!("asset {}: {e}", a.name)))?;
        }
        if self.resolutions.is_empty() || self.resolutions.contains(&0) {
            return bad("resolutions must be a non-empty list of positive seconds".into());
        }
        if self.sides.is_empty() {
            return bad("no sides configured".into());
        }
        if self.levels.is_empty() || self.levels.iter().any(|l| !(1..=5).contains(l)) {
            return bad("levels must lie in 1..=5".into());
        }
        if self.block_len == 0 {
            return bad("block_len must be positive".into());
        }
        if !(0.0..1.0).contains(&self.pot_percentile) {
            return bad(format!("pot_percentile {} outside [0,1)", self.pot_percentile));
        }
        if !(0.0..1.0).contains(&self.epm_start_percentile) {
            return bad(format!("epm_start_percentile {} outside [0,1)", self.epm_start_percentile));
        }
        if self.jobs == 0 {
            return bad("jobs must be positive".into());
        }
        Ok(())
    }
}

/// Inclusive day range from `A..B`, `A..` or `..B`.
pub fn parse_day_range(s: &str) -> Result<(Option<NaiveDate>, Option<NaiveDate>), CliError> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| CliError::Config(format!("day range {s:?} is not of the form A..B")))?;
    let day = |t: &str| -> Result<Option<NaiveDate>, CliError> {
        if t.is_empty() {
            return Ok(None);
        }
        NaiveDate::parse_from_str(t, "%Y-%m-%d")
            .map(Some)
            .map_err(|e| CliError::Config(format!("bad date {t:?}: {e}")))
    };
    Ok((day(a)?, day(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> RunConfig {
        serde_json::from_str(
            r#"{"input_dir": "in", "output_dir": "out",
                "assets": [{"name": "X", "market_hours": {"open_s": 36000, "close_s": 37800}}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = minimal();
        assert_eq!(c.resolutions, vec![10]);
        assert_eq!(c.pot_percentile, 0.8);
        assert_eq!(c.epm_start_percentile, 0.5);
        assert_eq!(c.sides, vec![Side::Bid, Side::Ask]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn no_estimators_is_a_config_error() {
        let mut c = minimal();
        c.estimators = Estimators {
            stable_mcculloch: false,
            gev_mle: false,
            gev_mixed_lmoments: false,
            gev_lmoments: false,
            gpd_mle: false,
            gpd_mom: false,
            gpd_pickands: false,
            gpd_epm: false,
        };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn zero_resolution_rejected() {
        let mut c = minimal();
        c.resolutions = vec![10, 0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_field_rejected() {
        let r: Result<RunConfig, _> =
            serde_json::from_str(r#"{"input_dir": "a", "output_dir": "b", "assets": [], "bogus": 1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn day_ranges() {
        let d = |s| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        assert_eq!(parse_day_range("2010-01-04..2010-01-05").unwrap(), (Some(d("2010-01-04")), Some(d("2010-01-05"))));
        assert_eq!(parse_day_range("..2010-01-05").unwrap(), (None, Some(d("2010-01-05"))));
        assert!(parse_day_range("2010-01-04").is_err());
    }
}
