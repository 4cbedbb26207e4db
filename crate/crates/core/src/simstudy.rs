//! Seeded estimator-comparison experiments on synthetic GEV, GPD and stable
//! samples. Replicate `r` of configuration `c` draws from the sub-stream
//! `derive_seed(derive_seed(seed, c), r)`, so results do not depend on thread
//! scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gev::{fit_gev_mixed, fit_gev_mle, gev_sample, GevMleOptions};
use crate::gof::ks_subsample_study;
use crate::gpd::{fit_gpd_epm, fit_gpd_mle, fit_gpd_pickands, gpd_sample, EpmOptions};
use crate::rng::derive_seed;
use crate::scalar::{mean, median_sorted, sorted, variance};
use crate::stable::{fit_mcculloch, sorted_quantile, stable_sample};
use crate::types::{FitResult, GevParams, GpdParams, StableParams};

/// Summary of replicate estimates of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub bias: f64,
    pub variance: f64,
    pub sd: f64,
    pub iqr: f64,
}

impl EstimateSummary {
    pub fn of(values: &[f64], truth: f64) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { count: 0, mean: f64::NAN, median: f64::NAN, bias: f64::NAN, variance: f64::NAN, sd: f64::NAN, iqr: f64::NAN };
        }
        let xs = sorted(values);
        let m = mean(&xs);
        let var = if n > 1 { variance(&xs) } else { 0.0 };
        Self {
            count: n,
            mean: m,
            median: median_sorted(&xs),
            bias: m - truth,
            variance: var,
            sd: var.sqrt(),
            iqr: sorted_quantile(&xs, 0.75) - sorted_quantile(&xs, 0.25),
        }
    }
}

/// One row per (configuration, method, parameter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub true_gamma: f64,
    pub sample_size: usize,
    pub method: String,
    pub parameter: String,
    pub truth: f64,
    pub replicates: usize,
    pub failures: usize,
    pub summary: EstimateSummary,
    /// Per-replicate estimates in replicate order (failed replicates omitted).
    pub estimates: Vec<f64>,
}

/// Outcome of a qualitative check against a published direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn rows_for(
    true_gamma: f64,
    n: usize,
    method: &str,
    replicates: usize,
    fits: &[Option<Vec<(&'static str, f64)>>],
    truths: &[(&'static str, f64)],
) -> Vec<ComparisonRow> {
    let failures = fits.iter().filter(|f| f.is_none()).count();
    truths
        .iter()
        .map(|&(name, truth)| {
            let estimates: Vec<f64> = fits
                .iter()
                .flatten()
                .map(|v| v.iter().find(|(k, _)| *k == name).map(|(_, x)| *x).expect("named parameter"))
                .collect();
            ComparisonRow {
                true_gamma,
                sample_size: n,
                method: method.to_string(),
                parameter: name.to_string(),
                truth,
                replicates,
                failures,
                summary: EstimateSummary::of(&estimates, truth),
                estimates,
            }
        })
        .collect()
}

/// Named parameter values of one fit, `None` when the fit failed.
type Named = Option<Vec<(&'static str, f64)>>;

fn named(fit: crate::error::Result<FitResult<f64>>) -> Named {
    fit.ok().map(|f| f.params.named())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevStudyConfig {
    pub gammas: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for GevStudyConfig {
    fn default() -> Self {
        Self { gammas: vec![-0.3, 0.0, 0.2, 0.5], mu: 0.0, sigma: 1.0, sample_sizes: vec![50, 10_000], replicates: 20, seed: 2010 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn find(&self, true_gamma: f64, n: usize, method: &str, parameter: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| {
            r.true_gamma == true_gamma && r.sample_size == n && r.method == method && r.parameter == parameter
        })
    }

    pub fn methods(&self) -> Vec<String> {
        let mut m: Vec<String> = Vec::new();
        for r in &self.rows {
            if !m.contains(&r.method) {
                m.push(r.method.clone());
            }
        }
        m
    }
}

/// MLE against the mixed L-moment estimator on GEV samples, for a single
/// true parameter vector.
pub fn gev_method_comparison(truth: GevParams<f64>, sample_sizes: &[usize], replicates: usize, seed: u64) -> ComparisonTable {
    let mut rows = Vec::new();
    for (c, &n) in sample_sizes.iter().enumerate() {
        let stream = derive_seed(seed, c as u64);
        let fits: Vec<(Option<_>, Option<_>)> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let x = gev_sample(&truth, n, derive_seed(stream, r as u64));
                (named(fit_gev_mle(&x, &GevMleOptions::default())), named(fit_gev_mixed(&x)))
            })
            .collect();
        let truths = [("mu", truth.mu), ("sigma", truth.sigma), ("gamma", truth.gamma)];
        let (mle, mixed): (Vec<_>, Vec<_>) = fits.into_iter().unzip();
        rows.extend(rows_for(truth.gamma, n, "mle", replicates, &mle, &truths));
        rows.extend(rows_for(truth.gamma, n, "mixed_lmoments", replicates, &mixed, &truths));
    }
    ComparisonTable { rows }
}

/// Runs [`gev_method_comparison`] for every configured shape.
pub fn gev_study(cfg: &GevStudyConfig) -> ComparisonTable {
    let mut rows = Vec::new();
    for (k, &g) in cfg.gammas.iter().enumerate() {
        let truth = GevParams { mu: cfg.mu, sigma: cfg.sigma, gamma: g };
        rows.extend(gev_method_comparison(truth, &cfg.sample_sizes, cfg.replicates, derive_seed(cfg.seed, k as u64)).rows);
    }
    ComparisonTable { rows }
}

/// Qualitative directions for the GEV study: variance reduction and extra
/// bias of the mixed method at small samples, and agreement at large ones.
pub fn gev_anchors(table: &ComparisonTable, small_n: usize, large_n: usize, near_zero: f64) -> Vec<AnchorCheck> {
    let mut out = Vec::new();
    let mut gammas: Vec<f64> = table.rows.iter().map(|r| r.true_gamma).collect();
    gammas.dedup();
    gammas.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    gammas.dedup();
    for &g in &gammas {
        if let (Some(mle), Some(mix)) = (table.find(g, small_n, "mle", "gamma"), table.find(g, small_n, "mixed_lmoments", "gamma")) {
            out.push(AnchorCheck {
                name: format!("gev n={small_n} gamma={g}: var(mle) > var(mixed)"),
                passed: mle.summary.variance > mix.summary.variance,
                detail: format!("var mle {:.5}, var mixed {:.5}", mle.summary.variance, mix.summary.variance),
            });
            if g.abs() <= near_zero {
                out.push(AnchorCheck {
                    name: format!("gev n={small_n} gamma={g}: |bias(mixed)| > |bias(mle)|"),
                    passed: mix.summary.bias.abs() > mle.summary.bias.abs(),
                    detail: format!("bias mle {:+.5}, bias mixed {:+.5}", mle.summary.bias, mix.summary.bias),
                });
            }
        }
        for m in ["mle", "mixed_lmoments"] {
            if let Some(r) = table.find(g, large_n, m, "gamma") {
                out.push(AnchorCheck {
                    name: format!("gev n={large_n} gamma={g}: mean {m} within 0.05"),
                    passed: (r.summary.mean - g).abs() <= 0.05,
                    detail: format!("mean {:.5}", r.summary.mean),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpdStudyConfig {
    pub gammas: Vec<f64>,
    pub sigma: f64,
    pub n: usize,
    pub replicates: usize,
    pub epm_start_percentiles: Vec<f64>,
    pub seed: u64,
}

impl Default for GpdStudyConfig {
    fn default() -> Self {
        Self { gammas: vec![0.5, -0.3], sigma: 1.0, n: 500, replicates: 20, epm_start_percentiles: vec![0.0, 0.5, 0.75], seed: 2010 }
    }
}

/// Label of the EPM variant with a given start percentile.
pub fn epm_label(start: f64) -> String {
    format!("epm_p{:02}", (start * 100.0).round() as u32)
}

/// MLE, Pickands and the percentile method at several start percentiles on
/// GPD samples.
pub fn gpd_method_comparison(truth: GpdParams<f64>, n: usize, replicates: usize, epm_starts: &[f64], seed: u64) -> ComparisonTable {
    let fits: Vec<Vec<Named>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let rs = derive_seed(seed, r as u64);
            let y = gpd_sample(&truth, n, rs);
            let mut v = vec![named(fit_gpd_mle(&y)), named(fit_gpd_pickands(&y))];
            for &s in epm_starts {
                let opts = EpmOptions { start_percentile: s, seed: rs, ..EpmOptions::default() };
                v.push(named(fit_gpd_epm(&y, &opts)));
            }
            v
        })
        .collect();
    let mut labels = vec!["mle".to_string(), "pickands".to_string()];
    labels.extend(epm_starts.iter().map(|&s| epm_label(s)));
    let truths = [("gamma", truth.gamma), ("sigma", truth.sigma)];
    let mut rows = Vec::new();
    for (m, label) in labels.iter().enumerate() {
        let col: Vec<_> = fits.iter().map(|f| f[m].clone()).collect();
        rows.extend(rows_for(truth.gamma, n, label, replicates, &col, &truths));
    }
    ComparisonTable { rows }
}

pub fn gpd_study(cfg: &GpdStudyConfig) -> ComparisonTable {
    let mut rows = Vec::new();
    for (k, &g) in cfg.gammas.iter().enumerate() {
        let truth = GpdParams { gamma: g, sigma: cfg.sigma, mu: 0.0 };
        let seed = derive_seed(cfg.seed, k as u64);
        rows.extend(gpd_method_comparison(truth, cfg.n, cfg.replicates, &cfg.epm_start_percentiles, seed).rows);
    }
    ComparisonTable { rows }
}

/// Qualitative directions for the GPD study: agreement of all methods for a
/// heavy tail, upward shift of the percentile method for a bounded tail, and
/// shrinking spread of the percentile method as its start percentile rises.
pub fn gpd_anchors(table: &ComparisonTable, epm_starts: &[f64]) -> Vec<AnchorCheck> {
    let mut out = Vec::new();
    let mut gammas: Vec<f64> = table.rows.iter().map(|r| r.true_gamma).collect();
    gammas.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    gammas.dedup();
    let epm: Vec<String> = epm_starts.iter().map(|&s| epm_label(s)).collect();
    for &g in &gammas {
        let n = table.rows.iter().find(|r| r.true_gamma == g).map(|r| r.sample_size).unwrap_or(0);
        let med = |m: &str| table.find(g, n, m, "gamma").map(|r| r.summary.median);
        if g > 0.0 {
            if let Some(base) = med("mle") {
                let others: Vec<(String, f64)> = std::iter::once("pickands".to_string())
                    .chain(epm.iter().cloned())
                    .filter_map(|m| med(&m).map(|v| (m, v)))
                    .collect();
                let worst = others.iter().map(|(_, v)| (v - base).abs()).fold(0.0, f64::max);
                out.push(AnchorCheck {
                    name: format!("gpd gamma={g}: median estimates agree within 0.15"),
                    passed: worst <= 0.15,
                    detail: format!(
                        "mle {base:.4}; {}",
                        others.iter().map(|(m, v)| format!("{m} {v:.4}")).collect::<Vec<_>>().join(", ")
                    ),
                });
            }
        }
        if g < 0.0 {
            for m in &epm {
                if let Some(v) = med(m) {
                    out.push(AnchorCheck {
                        name: format!("gpd gamma={g}: {m} median above truth"),
                        passed: v > g,
                        detail: format!("median {v:.4}"),
                    });
                }
            }
        }
        let sds: Vec<f64> = epm.iter().filter_map(|m| table.find(g, n, m, "gamma")).map(|r| r.summary.sd).collect();
        if sds.len() == epm.len() && sds.len() > 1 {
            out.push(AnchorCheck {
                name: format!("gpd gamma={g}: epm spread decreases with start percentile"),
                passed: sds.windows(2).all(|w| w[1] < w[0]),
                detail: format!("sd {}", sds.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>().join(" > ")),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsCaseConfig {
    pub params: StableParams<f64>,
    pub n_full: usize,
    pub n_sub: usize,
    /// Synthetic days.
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for KsCaseConfig {
    fn default() -> Self {
        Self {
            params: StableParams { alpha: 1.5, beta: 0.5, gamma: 1.0, delta: 0.0 },
            n_full: 3888,
            n_sub: 200,
            replicates: 20,
            level: 0.1,
            seed: 2010,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsCaseRow {
    pub replicate: usize,
    pub pvalue_full: f64,
    pub pvalue_sub: f64,
    pub reject_full: bool,
    pub reject_sub: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsCaseTable {
    pub rows: Vec<KsCaseRow>,
    pub failures: usize,
}

impl KsCaseTable {
    pub fn rejection_rates(&self) -> Option<(f64, f64)> {
        if self.rows.is_empty() {
            return None;
        }
        let n = self.rows.len() as f64;
        let full = self.rows.iter().filter(|r| r.reject_full).count() as f64 / n;
        let sub = self.rows.iter().filter(|r| r.reject_sub).count() as f64 / n;
        Some((full, sub))
    }
}

/// Per synthetic day: stable sample, McCulloch fit, KS on the full day and on
/// one subsample, both against the fitted law.
pub fn ks_case_study(cfg: &KsCaseConfig) -> KsCaseTable {
    let results: Vec<Option<KsCaseRow>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let rs = derive_seed(cfg.seed, r as u64);
            let x = stable_sample(&cfg.params, cfg.n_full, rs);
            let fit = fit_mcculloch(&x).ok()?;
            let study = ks_subsample_study(&x, &fit, cfg.n_sub, 1, derive_seed(rs, 1)).ok()?;
            let pf = study.pvalue_full();
            let ps = study.pvalue_sub_mean()?;
            Some(KsCaseRow { replicate: r, pvalue_full: pf, pvalue_sub: ps, reject_full: pf < cfg.level, reject_sub: ps < cfg.level })
        })
        .collect();
    let failures = results.iter().filter(|r| r.is_none()).count();
    KsCaseTable { rows: results.into_iter().flatten().collect(), failures }
}
