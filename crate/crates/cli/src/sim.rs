//! `lobtail simstudy`: runs one of the seeded estimator studies and writes its
//! tables plus a JSON summary of the qualitative checks.

use std::path::Path;

use lobtail_core::simstudy::{
    gev_anchors, gev_study, gpd_anchors, gpd_study, ks_case_study, AnchorCheck, ComparisonTable, GevStudyConfig,
    GpdStudyConfig, KsCaseConfig, KsCaseTable,
};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{num, write_json, Table, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Study {
    GevCompare,
    GpdCompare,
    KsCase,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::GevCompare => "gev_compare",
            Study::GpdCompare => "gpd_compare",
            Study::KsCase => "ks_case",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
}

#[derive(Serialize)]
struct Summary<C: Serialize> {
    schema_version: u32,
    study: &'static str,
    config: C,
    rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejection_rate_full: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejection_rate_sub: Option<f64>,
    anchors: Vec<AnchorCheck>,
    all_anchors_passed: bool,
}

fn write_comparison(out: &Path, name: &str, table: &ComparisonTable) -> Result<(), CliError> {
    let mut t = Table::new([
        "true_gamma", "sample_size", "method", "parameter", "truth", "replicates", "failures", "mean", "median", "bias",
        "variance", "sd", "iqr",
    ]);
    let mut raw = Table::new(["true_gamma", "sample_size", "method", "parameter", "index", "estimate"]);
    for r in &table.rows {
        let s = &r.summary;
        t.row([
            num(r.true_gamma),
            r.sample_size.to_string(),
            r.method.clone(),
            r.parameter.clone(),
            num(r.truth),
            r.replicates.to_string(),
            r.failures.to_string(),
            num(s.mean),
            num(s.median),
            num(s.bias),
            num(s.variance),
            num(s.sd),
            num(s.iqr),
        ]);
        for (i, e) in r.estimates.iter().enumerate() {
            raw.row([num(r.true_gamma), r.sample_size.to_string(), r.method.clone(), r.parameter.clone(), i.to_string(), num(*e)]);
        }
    }
    t.write(&out.join(format!("{name}.csv")))?;
    raw.write(&out.join(format!("{name}_estimates.csv")))
}

fn write_ks(out: &Path, table: &KsCaseTable) -> Result<(), CliError> {
    let mut t = Table::new(["replicate", "pvalue_full", "pvalue_sub", "reject_full", "reject_sub"]);
    for r in &table.rows {
        t.row([r.replicate.to_string(), num(r.pvalue_full), num(r.pvalue_sub), r.reject_full.to_string(), r.reject_sub.to_string()]);
    }
    t.write(&out.join("ks_case.csv"))
}

fn summarize<C: Serialize>(study: Study, config: C, rows: usize, anchors: Vec<AnchorCheck>, rates: Option<(f64, f64)>) -> Summary<C> {
    Summary {
        schema_version: SCHEMA_VERSION,
        study: study.name(),
        config,
        rows,
        rejection_rate_full: rates.map(|r| r.0),
        rejection_rate_sub: rates.map(|r| r.1),
        all_anchors_passed: anchors.iter().all(|a| a.passed),
        anchors,
    }
}

/// Runs `study` and writes `<out>/<study>.csv` and `<out>/<study>_summary.json`.
/// Returns the qualitative checks.
pub fn run_simstudy(study: Study, opts: &SimOptions, out: &Path) -> Result<Vec<AnchorCheck>, CliError> {
    let summary_path = out.join(format!("{}_summary.json", study.name()));
    match study {
        Study::GevCompare => {
            let mut cfg = GevStudyConfig::default();
            cfg.seed = opts.seed.unwrap_or(cfg.seed);
            cfg.replicates = opts.replicates.unwrap_or(cfg.replicates);
            let table = gev_study(&cfg);
            write_comparison(out, study.name(), &table)?;
            let anchors = gev_anchors(&table, 50, 10_000, 0.0);
            write_json(&summary_path, &summarize(study, &cfg, table.rows.len(), anchors.clone(), None))?;
            Ok(anchors)
        }
        Study::GpdCompare => {
            let mut cfg = GpdStudyConfig::default();
            cfg.seed = opts.seed.unwrap_or(cfg.seed);
            cfg.replicates = opts.replicates.unwrap_or(cfg.replicates);
            let table = gpd_study(&cfg);
            write_comparison(out, study.name(), &table)?;
            let anchors = gpd_anchors(&table, &cfg.epm_start_percentiles);
            write_json(&summary_path, &summarize(study, &cfg, table.rows.len(), anchors.clone(), None))?;
            Ok(anchors)
        }
        Study::KsCase => {
            let mut cfg = KsCaseConfig::default();
            cfg.seed = opts.seed.unwrap_or(cfg.seed);
            cfg.replicates = opts.replicates.unwrap_or(cfg.replicates);
            let table = ks_case_study(&cfg);
            write_ks(out, &table)?;
            let rates = table.rejection_rates();
            let anchors = rates
                .map(|(full, sub)| {
                    vec![AnchorCheck {
                        name: "full-day rejection rate above subsample rate".into(),
                        passed: full > sub,
                        detail: format!("full {full:.3}, subsample {sub:.3}"),
                    }]
                })
                .unwrap_or_default();
            write_json(&summary_path, &summarize(study, &cfg, table.rows.len(), anchors.clone(), rates))?;
            Ok(anchors)
        }
    }
}
