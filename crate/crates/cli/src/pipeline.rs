//! Batch pipeline: tick files to series, diagnostics, prepared samples, fits
//! and goodness-of-fit, written as a report tree under the output directory.
//!
//! Input layout is `<input_dir>/<asset>/<YYYY-MM-DD>.csv`. Days are processed
//! in parallel and each day writes only below `days/<asset>/<day>/`; the
//! cross-day files (fits, parameter time series, heat maps, summary) are
//! written once all days are done.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use lobtail_core::diagnostics::{
    descriptive, hill_curve, hourly_median_matrix, hurst_dfa, mean_excess_curve, qq_exponential, CurvePoints,
    DescriptiveStats,
};
use lobtail_core::gev::{fit_gev_lmom, fit_gev_mixed, fit_gev_mle, GevMleOptions};
use lobtail_core::gof::{attach_ks, ks_subsample_study, percentile_comparison, DEFAULT_PROBES};
use lobtail_core::gpd::{fit_gpd_epm, fit_gpd_mle, fit_gpd_mom, fit_gpd_pickands, EpmOptions};
use lobtail_core::ingest::{
    block_maxima, full_sample, parse_tick_reader, pot_exceedances, subsample_last, ParseReport, PreparedSample,
    SampleKind, TickRecord,
};
use lobtail_core::rng::derive_seed;
use lobtail_core::stable::{fit_mcculloch_with, McCullochOptions};
use lobtail_core::{validate_series, Family, FitResult64, Method, SeriesKey, VolumeSeries64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AssetConfig, RunConfig};
use crate::error::CliError;
use crate::output::{num, opt_num, write_json, Table, SCHEMA_VERSION};

/// Command line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub first_day: Option<NaiveDate>,
    pub last_day: Option<NaiveDate>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub key: SeriesKey,
    pub sample: SampleKind,
    pub family: Family,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult64>,
    /// Mean KS p-value of one random subsample against the same fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_subsample_pvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesOutcome {
    pub key: SeriesKey,
    pub points: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub series: Option<VolumeSeries64>,
    #[serde(skip)]
    pub fits: Vec<FitRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DayOutcome {
    pub asset: String,
    pub day: NaiveDate,
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ParseReport>,
    /// Fatal ingestion error for the whole day.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub series: Vec<SeriesOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub assets: Vec<String>,
    pub days_processed: usize,
    pub days_failed: usize,
    pub series_built: usize,
    pub series_failed: usize,
    pub fits_succeeded: usize,
    pub fits_failed: usize,
    pub fatal_errors: Vec<String>,
    pub days: Vec<DayOutcome>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if !self.fatal_errors.is_empty() || self.fits_succeeded == 0 {
            1
        } else {
            0
        }
    }
}

/// FNV-1a, used to give every series and method its own seed stream.
fn stable_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

fn series_label(key: &SeriesKey) -> String {
    format!("{}_{}_L{}_{}s", key.asset, key.side, key.level, key.resolution_s)
}

fn series_dir(out: &Path, key: &SeriesKey) -> PathBuf {
    out.join("days")
        .join(&key.asset)
        .join(key.trading_day.to_string())
        .join(format!("{}_L{}_{}s", key.side, key.level, key.resolution_s))
}

struct DayJob<'a> {
    asset: &'a AssetConfig,
    day: NaiveDate,
    path: PathBuf,
    rel: String,
}

fn discover<'a>(cfg: &'a RunConfig, opts: &RunOptions, fatal: &mut Vec<String>) -> Result<Vec<DayJob<'a>>, CliError> {
    if !cfg.input_dir.is_dir() {
        return Err(CliError::Fatal(format!("input directory {} not found", cfg.input_dir.display())));
    }
    let mut jobs = Vec::new();
    for asset in &cfg.assets {
        let dir = cfg.input_dir.join(&asset.name);
        let entries = match std::fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) => {
                fatal.push(format!("asset {}: cannot read {}: {e}", asset.name, asset.name));
                continue;
            }
        };
        let holidays: BTreeSet<NaiveDate> = asset.holidays.iter().copied().collect();
        let mut days = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| CliError::io(&dir, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(stem) = name.strip_suffix(".csv") else { continue };
            let Ok(day) = NaiveDate::parse_from_str(stem, "%Y-%m-%d") else { continue };
            if holidays.contains(&day)
                || opts.first_day.is_some_and(|d| day < d)
                || opts.last_day.is_some_and(|d| day > d)
            {
                continue;
            }
            days.push((day, entry.path(), format!("{}/{name}", asset.name)));
        }
        days.sort();
        jobs.extend(days.into_iter().map(|(day, path, rel)| DayJob { asset, day, path, rel }));
    }
    Ok(jobs)
}

fn write_curve(dir: &Path, c: &CurvePoints<f64>) -> Result<(), CliError> {
    let banded = c.lo.is_some() && c.hi.is_some();
    let mut t = if banded { Table::new(["x", "y", "lo", "hi"]) } else { Table::new(["x", "y"]) };
    for i in 0..c.len() {
        let mut row = vec![num(c.xs[i]), num(c.ys[i])];
        if let (Some(lo), Some(hi)) = (&c.lo, &c.hi) {
            row.push(num(lo[i]));
            row.push(num(hi[i]));
        }
        t.row(row);
    }
    t.write(&dir.join(format!("curve_{}.csv", c.kind.name())))
}

fn write_sample(dir: &Path, s: &PreparedSample<f64>) -> Result<(), CliError> {
    let mut t = Table::new(["index", "value"]);
    for (i, v) in s.data.iter().enumerate() {
        t.row([i.to_string(), num(*v)]);
    }
    t.write(&dir.join(format!("sample_{}.csv", s.kind.name())))?;
    #[derive(Serialize)]
    struct Sidecar<'a> {
        schema_version: u32,
        kind: SampleKind,
        len: usize,
        meta: &'a lobtail_core::ingest::SampleMeta<f64>,
        provenance: &'a SeriesKey,
    }
    write_json(
        &dir.join(format!("sample_{}.json", s.kind.name())),
        &Sidecar { schema_version: SCHEMA_VERSION, kind: s.kind, len: s.data.len(), meta: &s.meta, provenance: &s.provenance },
    )
}

#[derive(Serialize)]
struct Diagnostics {
    schema_version: u32,
    key: SeriesKey,
    #[serde(skip_serializing_if = "Option::is_none")]
    descriptive: Option<DescriptiveStats<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hurst: Option<f64>,
    notes: Vec<String>,
}

fn diagnostics(dir: &Path, series: &VolumeSeries64) -> Result<(), CliError> {
    let mut notes = Vec::new();
    let desc = descriptive(&series.values).map_err(|e| notes.push(format!("descriptive: {e}"))).ok();
    let hurst = match hurst_dfa(&series.values, None) {
        Ok((h, curve)) => {
            write_curve(dir, &curve)?;
            Some(h)
        }
        Err(e) => {
            notes.push(format!("dfa: {e}"));
            None
        }
    };
    match mean_excess_curve(&series.values, None) {
        Ok(c) => write_curve(dir, &c)?,
        Err(e) => notes.push(format!("mean excess: {e}")),
    }
    let positive: Vec<f64> = series.values.iter().copied().filter(|v| *v > 0.0).collect();
    if positive.len() < series.len() {
        notes.push(format!("hill: {} zero volumes excluded", series.len() - positive.len()));
    }
    match hill_curve(&positive, positive.len()) {
        Ok(c) => write_curve(dir, &c)?,
        Err(e) => notes.push(format!("hill: {e}")),
    }
    write_curve(dir, &qq_exponential(&series.values))?;
    write_json(
        &dir.join("diagnostics.json"),
        &Diagnostics { schema_version: SCHEMA_VERSION, key: series.key.clone(), descriptive: desc, hurst, notes },
    )
}

type Fitter<'a> = Box<dyn Fn(&[f64]) -> lobtail_core::Result<FitResult64> + 'a>;

fn fitters<'a>(cfg: &'a RunConfig, seed: u64) -> Vec<(SampleKind, Family, Method, Fitter<'a>)> {
    let e = cfg.estimators;
    let mut out: Vec<(SampleKind, Family, Method, Fitter<'a>)> = Vec::new();
    if e.stable_mcculloch {
        let opts = McCullochOptions { iqr_scale: cfg.stable_iqr_scaling };
        out.push((SampleKind::Full, Family::Stable, Method::McCulloch, Box::new(move |x| fit_mcculloch_with(x, &opts))));
    }
    if e.gev_mle {
        out.push((SampleKind::BlockMaxima, Family::Gev, Method::Mle, Box::new(|x| fit_gev_mle(x, &GevMleOptions::default()))));
    }
    if e.gev_mixed_lmoments {
        out.push((SampleKind::BlockMaxima, Family::Gev, Method::MixedLMoments, Box::new(fit_gev_mixed)));
    }
    if e.gev_lmoments {
        out.push((SampleKind::BlockMaxima, Family::Gev, Method::Mom, Box::new(fit_gev_lmom)));
    }
    if e.gpd_mle {
        out.push((SampleKind::PotExceedances, Family::Gpd, Method::Mle, Box::new(fit_gpd_mle)));
    }
    if e.gpd_mom {
        out.push((SampleKind::PotExceedances, Family::Gpd, Method::Mom, Box::new(fit_gpd_mom)));
    }
    if e.gpd_pickands {
        out.push((SampleKind::PotExceedances, Family::Gpd, Method::Pickands, Box::new(fit_gpd_pickands)));
    }
    if e.gpd_epm {
        let opts = EpmOptions { start_percentile: cfg.epm_start_percentile, seed, ..EpmOptions::default() };
        out.push((SampleKind::PotExceedances, Family::Gpd, Method::Epm, Box::new(move |x| fit_gpd_epm(x, &opts))));
    }
    out
}

fn process_series(cfg: &RunConfig, ticks: &[TickRecord], key: SeriesKey, asset: &AssetConfig) -> Result<SeriesOutcome, CliError> {
    let dir = series_dir(&cfg.output_dir, &key);
    let series: VolumeSeries64 = match subsample_last(ticks, &key, asset.market_hours) {
        Ok(s) => s,
        Err(e) => {
            return Ok(SeriesOutcome { key, points: 0, violations: vec![], error: Some(e.to_string()), series: None, fits: vec![] })
        }
    };
    let violations = validate_series(&series);
    let mut t = Table::new(["t", "value"]);
    for (ts, v) in series.timestamps.iter().zip(&series.values) {
        t.row([ts.to_string(), num(*v)]);
    }
    t.write(&dir.join("series.csv"))?;
    diagnostics(&dir, &series)?;

    let mut samples: BTreeMap<&'static str, Result<PreparedSample<f64>, String>> = BTreeMap::new();
    samples.insert(SampleKind::Full.name(), Ok(full_sample(&series)));
    samples.insert(SampleKind::BlockMaxima.name(), block_maxima(&series, cfg.block_len).map_err(|e| e.to_string()));
    samples.insert(
        SampleKind::PotExceedances.name(),
        pot_exceedances(&series, cfg.pot_percentile).map_err(|e| e.to_string()),
    );
    for s in samples.values().flatten() {
        write_sample(&dir, s)?;
    }

    let key_seed = derive_seed(cfg.seed, stable_hash(&key.to_string()));
    let mut fits = Vec::new();
    for (kind, family, method, fitter) in fitters(cfg, derive_seed(key_seed, 0)) {
        let mut rec = FitRecord { key: key.clone(), sample: kind, family, method, fit: None, ks_subsample_pvalue: None, error: None };
        let sample = match &samples[kind.name()] {
            Ok(s) => s,
            Err(e) => {
                rec.error = Some(format!("sample unavailable: {e}"));
                fits.push(rec);
                continue;
            }
        };
        match fitter(&sample.data) {
            Ok(mut fit) => {
                let gof = attach_ks(&mut fit, &sample.data).and_then(|_| {
                    let params = fit.params;
                    percentile_comparison(&sample.data, |x| params.cdf(x), &DEFAULT_PROBES)
                });
                match gof {
                    Ok(rows) => {
                        let mut t = Table::new(["probe", "empirical_quantile", "theoretical"]);
                        for r in rows {
                            t.row([num(r.probe), num(r.empirical_quantile), num(r.theoretical)]);
                        }
                        t.write(&dir.join(format!("percentiles_{}_{}.csv", family.name(), method.name())))?;
                    }
                    Err(e) => fit.note(format!("goodness of fit unavailable: {e}")),
                }
                if cfg.ks_subsample > 0 && sample.data.len() > cfg.ks_subsample {
                    let seed = derive_seed(key_seed, stable_hash(method.name()) ^ stable_hash(family.name()));
                    match ks_subsample_study(&sample.data, &fit, cfg.ks_subsample, 1, seed) {
                        Ok(s) => rec.ks_subsample_pvalue = s.pvalue_sub_mean(),
                        Err(e) => fit.note(format!("subsample KS unavailable: {e}")),
                    }
                }
                rec.fit = Some(fit);
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        fits.push(rec);
    }
    write_json(&dir.join("fits.json"), &fits)?;
    Ok(SeriesOutcome { key, points: series.len(), violations, error: None, series: Some(series), fits })
}

fn process_day(cfg: &RunConfig, job: &DayJob<'_>) -> Result<DayOutcome, CliError> {
    let mut out = DayOutcome { asset: job.asset.name.clone(), day: job.day, file: job.rel.clone(), report: None, error: None, series: vec![] };
    let bytes = match std::fs::read(&job.path) {
        Ok(b) => b,
        Err(e) => {
            out.error = Some(format!("{}: {e}", job.rel));
            return Ok(out);
        }
    };
    let file = match parse_tick_reader(bytes.as_slice(), &cfg.schema, &job.rel) {
        Ok(f) => f,
        Err(e) => {
            out.error = Some(e.to_string());
            return Ok(out);
        }
    };
    let day_dir = cfg.output_dir.join("days").join(&job.asset.name).join(job.day.to_string());
    write_json(&day_dir.join("parse_report.json"), &file.report)?;
    out.report = Some(file.report);
    for &res in &cfg.resolutions {
        for &side in &cfg.sides {
            for &level in &cfg.levels {
                let key = SeriesKey::new(job.asset.name.clone(), job.day, side, level, res)?;
                out.series.push(process_series(cfg, &file.records, key, job.asset)?);
            }
        }
    }
    Ok(out)
}

fn write_param_series(out: &Path, days: &[DayOutcome]) -> Result<(), CliError> {
    // (family, method, parameter) -> label -> day -> value
    type ByLabel = BTreeMap<String, BTreeMap<NaiveDate, f64>>;
    let mut grid: BTreeMap<(String, String, String), ByLabel> = BTreeMap::new();
    let mut all_days = BTreeSet::new();
    for d in days {
        all_days.insert(d.day);
        for s in &d.series {
            for rec in &s.fits {
                let Some(fit) = &rec.fit else { continue };
                for (name, v) in fit.params.named() {
                    grid.entry((rec.family.name().into(), rec.method.name().into(), name.into()))
                        .or_default()
                        .entry(series_label(&s.key))
                        .or_default()
                        .insert(d.day, v);
                }
            }
        }
    }
    for ((family, method, param), cols) in grid {
        let labels: Vec<&String> = cols.keys().collect();
        let mut t = Table::new(std::iter::once("day".to_string()).chain(labels.iter().map(|l| l.to_string())));
        for day in &all_days {
            let mut row = vec![day.to_string()];
            row.extend(labels.iter().map(|l| opt_num(cols[*l].get(day).copied())));
            t.row(row);
        }
        t.write(&out.join("params").join(format!("{family}_{method}_{param}.csv")))?;
    }
    Ok(())
}

fn write_heatmaps(out: &Path, days: &[DayOutcome]) -> Result<(), CliError> {
    let mut groups: BTreeMap<(String, u32, String, u8), Vec<VolumeSeries64>> = BTreeMap::new();
    for d in days {
        for s in &d.series {
            if let Some(series) = &s.series {
                let k = &s.key;
                groups.entry((k.asset.clone(), k.resolution_s, k.side.name().into(), k.level)).or_default().push(series.clone());
            }
        }
    }
    for ((asset, res, side, level), series) in groups {
        let hm = hourly_median_matrix(&series)?;
        let mut t = Table::new(std::iter::once("hour".to_string()).chain(hm.days.iter().map(|d| d.to_string())));
        for (h, row) in hm.hours.iter().zip(&hm.cells) {
            let mut r = vec![h.to_string()];
            r.extend(row.iter().map(|c| opt_num(*c)));
            t.row(r);
        }
        t.write(&out.join("heatmaps").join(format!("{res}s")).join(format!("heatmap_{asset}_{side}_{level}.csv")))?;
    }
    Ok(())
}

/// Runs the whole pipeline and writes the report tree. Returns the summary;
/// its [`RunSummary::exit_code`] is the process status.
pub fn run_pipeline(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let mut fatal = Vec::new();
    let jobs = discover(cfg, opts, &mut fatal)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(cfg.jobs).max(1))
        .build()
        .map_err(|e| CliError::Fatal(format!("thread pool: {e}")))?;
    let days: Vec<DayOutcome> = pool.install(|| jobs.par_iter().map(|j| process_day(cfg, j)).collect::<Result<_, _>>())?;

    let out = &cfg.output_dir;
    let all_fits: Vec<&FitRecord> = days.iter().flat_map(|d| d.series.iter().flat_map(|s| s.fits.iter())).collect();
    write_json(&out.join("fits.json"), &all_fits)?;
    write_param_series(out, &days)?;
    write_heatmaps(out, &days)?;

    for d in &days {
        if let Some(e) = &d.error {
            fatal.push(e.clone());
        }
    }
    let series_built = days.iter().flat_map(|d| &d.series).filter(|s| s.error.is_none()).count();
    let series_failed = days.iter().flat_map(|d| &d.series).filter(|s| s.error.is_some()).count();
    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        assets: cfg.assets.iter().map(|a| a.name.clone()).collect(),
        days_processed: days.iter().filter(|d| d.error.is_none()).count(),
        days_failed: days.iter().filter(|d| d.error.is_some()).count(),
        series_built,
        series_failed,
        fits_succeeded: all_fits.iter().filter(|f| f.fit.is_some()).count(),
        fits_failed: all_fits.iter().filter(|f| f.fit.is_none()).count(),
        fatal_errors: fatal,
        days,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
