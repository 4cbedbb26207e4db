//! Tick file parsing, last-volume sub-sampling and estimator-ready samples.
//!
//! Tick files are CSV with header `timestamp_ns,side,level,price,volume`,
//! one file per asset and trading day. Timestamps are nanoseconds since
//! midnight in exchange-local time and `side` is `B` or `A`.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stable::sample_quantile;
use crate::types::{SeriesKey, Side, VolumeSeries};

const NS_PER_S: i64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub timestamp_ns: i64,
    pub side: Side,
    pub level: u8,
    pub price: f64,
    pub volume: u64,
}

/// Column names looked up in the header row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickSchema {
    pub timestamp_ns: String,
    pub side: String,
    pub level: String,
    pub price: String,
    pub volume: String,
}

impl Default for TickSchema {
    fn default() -> Self {
        Self {
            timestamp_ns: "timestamp_ns".into(),
            side: "side".into(),
            level: "level".into(),
            price: "price".into(),
            volume: "volume".into(),
        }
    }
}

/// A row that parsed but broke a record invariant and was skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRow {
    /// 1-based line number in the file, header is line 1.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub rows: usize,
    /// Rows that could not be parsed at all (wrong field count, bad number).
    pub malformed: usize,
    /// Parsed rows rejected by an invariant (negative volume, level out of
    /// range, timestamp going backwards).
    pub skipped: Vec<SkippedRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickFile {
    pub records: Vec<TickRecord>,
    pub report: ParseReport,
}

/// Parses a tick file from disk.
pub fn parse_tick_file(path: &Path, schema: &TickSchema) -> Result<TickFile> {
    let io_err = |e: std::io::Error| Error::Io { path: path.display().to_string(), message: e.to_string() };
    let mut buf = Vec::new();
    File::open(path).map_err(io_err)?.read_to_end(&mut buf).map_err(io_err)?;
    parse_tick_reader(buf.as_slice(), schema, &path.display().to_string())
}

/// Parses tick CSV from any reader. `name` labels errors.
pub fn parse_tick_reader<R: Read>(reader: R, schema: &TickSchema, name: &str) -> Result<TickFile> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Io { path: name.to_string(), message: e.to_string() })?
        .clone();
    let col = |want: &str| -> Result<usize> {
        headers.iter().position(|h| h.trim() == want).ok_or_else(|| Error::Io {
            path: name.to_string(),
            message: format!("header lacks column `{want}`"),
        })
    };
    let idx = [
        col(&schema.timestamp_ns)?,
        col(&schema.side)?,
        col(&schema.level)?,
        col(&schema.price)?,
        col(&schema.volume)?,
    ];
    let width = headers.len();

    let mut report = ParseReport::default();
    let mut records = Vec::new();
    let mut last_ts = i64::MIN;
    let mut row = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(_) => {
                report.rows += 1;
                report.malformed += 1;
                continue;
            }
        }
        report.rows += 1;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != width {
            report.malformed += 1;
            continue;
        }
        let field = |k: usize| row.get(idx[k]).unwrap_or("").trim();
        let parsed = (|| {
            let ts: i64 = field(0).parse().ok()?;
            let side = Side::from_code(field(1))?;
            let level: i64 = field(2).parse().ok()?;
            let price: f64 = field(3).parse().ok()?;
            let volume: i64 = field(4).parse().ok()?;
            Some((ts, side, level, price, volume))
        })();
        let Some((ts, side, level, price, volume)) = parsed else {
            report.malformed += 1;
            continue;
        };
        let reason = if volume < 0 {
            Some(format!("negative volume {volume}"))
        } else if !(1..=5).contains(&level) {
            Some(format!("level {level} outside [1,5]"))
        } else if !price.is_finite() {
            Some("non-finite price".to_string())
        } else if ts < last_ts {
            Some(format!("timestamp {ts} precedes {last_ts}"))
        } else {
            None
        };
        if let Some(reason) = reason {
            report.skipped.push(SkippedRow { line, reason });
            continue;
        }
        last_ts = ts;
        records.push(TickRecord { timestamp_ns: ts, side, level: level as u8, price, volume: volume as u64 });
    }
    if report.malformed * 100 > report.rows {
        return Err(Error::Schema { path: name.to_string(), rows: report.rows, malformed: report.malformed });
    }
    Ok(TickFile { records, report })
}

/// Liquid trading window in seconds since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketHours {
    pub open_s: u32,
    pub close_s: u32,
}

impl MarketHours {
    pub fn new(open_s: u32, close_s: u32) -> Result<Self> {
        if open_s >= close_s || close_s > 86_400 {
            return Err(Error::InvalidParameter(format!(
                "market hours need 0 <= open < close <= 86400, got [{open_s}, {close_s}]"
            )));
        }
        Ok(Self { open_s, close_s })
    }
}

/// Records the last known volume at `key.side`/`key.level` at every grid
/// instant `open + k * resolution` up to and including `close`. Book state
/// carries forward between ticks; grid points before the first tick are
/// dropped.
pub fn subsample_last<T: Real>(
    ticks: &[TickRecord],
    key: &SeriesKey,
    hours: MarketHours,
) -> Result<VolumeSeries<T>> {
    let open_ns = i64::from(hours.open_s) * NS_PER_S;
    let close_ns = i64::from(hours.close_s) * NS_PER_S;
    let relevant: Vec<&TickRecord> =
        ticks.iter().filter(|t| t.side == key.side && t.level == key.level).collect();
    if !relevant.iter().any(|t| t.timestamp_ns >= open_ns && t.timestamp_ns <= close_ns) {
        return Err(Error::EmptySeries(key.to_string()));
    }
    let step = i64::from(key.resolution_s);
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut cursor = 0usize;
    let mut current: Option<u64> = None;
    let mut t = i64::from(hours.open_s) + step;
    while t <= i64::from(hours.close_s) {
        let grid_ns = t * NS_PER_S;
        while cursor < relevant.len() && relevant[cursor].timestamp_ns <= grid_ns {
            current = Some(relevant[cursor].volume);
            cursor += 1;
        }
        if let Some(v) = current {
            timestamps.push(t);
            values.push(T::from_u64(v).expect("volume representable"));
        }
        t += step;
    }
    if values.is_empty() {
        return Err(Error::EmptySeries(key.to_string()));
    }
    Ok(VolumeSeries { key: key.clone(), timestamps, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Full,
    BlockMaxima,
    PotExceedances,
}

impl SampleKind {
    pub fn name(self) -> &'static str {
        match self {
            SampleKind::Full => "full",
            SampleKind::BlockMaxima => "block_maxima",
            SampleKind::PotExceedances => "pot",
        }
    }
}

/// Preparation metadata. Only the fields relevant to the sample kind are set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SampleMeta<T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_percentile: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exceedances: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PreparedSample<T> {
    pub kind: SampleKind,
    pub data: Vec<T>,
    pub meta: SampleMeta<T>,
    pub provenance: SeriesKey,
}

pub fn full_sample<T: Real>(series: &VolumeSeries<T>) -> PreparedSample<T> {
    PreparedSample {
        kind: SampleKind::Full,
        data: series.values.clone(),
        meta: SampleMeta { block_len: None, threshold: None, threshold_percentile: None, exceedances: None },
        provenance: series.key.clone(),
    }
}

/// Maximum of each consecutive block of `block_len` grid points; a trailing
/// partial block is discarded.
pub fn block_maxima<T: Real>(series: &VolumeSeries<T>, block_len: usize) -> Result<PreparedSample<T>> {
    if block_len == 0 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    if series.len() < block_len {
        return Err(Error::InsufficientData { needed: block_len, got: series.len() });
    }
    let data = series
        .values
        .chunks_exact(block_len)
        .map(|b| b.iter().fold(T::neg_infinity(), |m, &v| m.max(v)))
        .collect();
    Ok(PreparedSample {
        kind: SampleKind::BlockMaxima,
        data,
        meta: SampleMeta { block_len: Some(block_len), ..SampleMeta::empty() },
        provenance: series.key.clone(),
    })
}

impl<T> SampleMeta<T> {
    fn empty() -> Self {
        Self { block_len: None, threshold: None, threshold_percentile: None, exceedances: None }
    }
}

/// Excesses `x - u` over the empirical `threshold_percentile` quantile `u`, in
/// time order.
pub fn pot_exceedances<T: Real>(
    series: &VolumeSeries<T>,
    threshold_percentile: T,
) -> Result<PreparedSample<T>> {
    if series.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if !(threshold_percentile >= T::zero() && threshold_percentile < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "threshold percentile {threshold_percentile} outside [0,1)"
        )));
    }
    let u = sample_quantile(&series.values, threshold_percentile);
    let data: Vec<T> = series.values.iter().filter(|&&x| x > u).map(|&x| x - u).collect();
    if data.is_empty() {
        return Err(Error::NoExceedances { threshold: u.as_f64() });
    }
    Ok(PreparedSample {
        kind: SampleKind::PotExceedances,
        meta: SampleMeta {
            threshold: Some(u),
            threshold_percentile: Some(threshold_percentile),
            exceedances: Some(data.len()),
            ..SampleMeta::empty()
        },
        data,
        provenance: series.key.clone(),
    })
}
