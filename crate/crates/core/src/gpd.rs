//! Generalized Pareto law `F(y) = 1 - (1 + γy/σ)^{-1/γ}` for excesses
//! `y = x - μ ≥ 0`, exponential at γ = 0. Positive γ is the heavy tail.
//!
//! Estimators: profile maximum likelihood in `τ = γ/σ`, moments, Pickands and
//! the empirical percentile method. Pickands and the percentile method are
//! written in the Hosking shape `k = -γ`, in which the distribution function
//! reads `1 - (1 - ky/σ)^{1/k}`; their shape is negated on output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{bisect, golden_max, hessian, invert};
use crate::rng::{from_seed, open_uniform};
use crate::scalar::{mean, median, sorted, variance, Real};
use crate::types::{FitResult, GpdParams, Method, Params};

pub fn gpd_cdf<T: Real>(x: T, p: &GpdParams<T>) -> T {
    let y = x - p.mu;
    if !(y > T::zero()) {
        return T::zero();
    }
    if p.gamma == T::zero() {
        return -(-y / p.sigma).exp_m1();
    }
    let t = p.gamma * y / p.sigma;
    if !(t > -T::one()) {
        return T::one();
    }
    -(-t.ln_1p() / p.gamma).exp_m1()
}

/// Log density, `-inf` outside the support.
pub fn gpd_logpdf<T: Real>(x: T, p: &GpdParams<T>) -> T {
    let y = x - p.mu;
    if y < T::zero() {
        return T::neg_infinity();
    }
    if p.gamma == T::zero() {
        return -p.sigma.ln() - y / p.sigma;
    }
    let t = p.gamma * y / p.sigma;
    if !(t > -T::one()) {
        return T::neg_infinity();
    }
    -p.sigma.ln() - (T::one() + T::one() / p.gamma) * t.ln_1p()
}

pub fn gpd_pdf<T: Real>(x: T, p: &GpdParams<T>) -> T {
    gpd_logpdf(x, p).exp()
}

pub fn gpd_quantile<T: Real>(q: T, p: &GpdParams<T>) -> Result<T> {
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::InvalidParameter(format!("probability {q} outside (0,1)")));
    }
    let l = (-q).ln_1p();
    if p.gamma == T::zero() {
        Ok(p.mu - p.sigma * l)
    } else {
        Ok(p.mu + p.sigma * (-p.gamma * l).exp_m1() / p.gamma)
    }
}

pub fn gpd_sample<T: Real>(p: &GpdParams<T>, n: usize, seed: u64) -> Vec<T> {
    let mut rng = from_seed(seed);
    (0..n)
        .map(|_| gpd_quantile(T::lit(open_uniform(&mut rng)), p).expect("open unit interval"))
        .collect()
}

fn check_excesses<T: Real>(y: &[T], needed: usize) -> Result<()> {
    if y.len() < needed {
        return Err(Error::InsufficientData { needed, got: y.len() });
    }
    if let Some(v) = y.iter().find(|v| !(**v > T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!("excesses must be positive and finite, found {v}")));
    }
    Ok(())
}

/// Asymptotic covariance of `(γ̂, σ̂)` for `J` excesses, valid for γ > -1/2.
pub fn gpd_asymptotic_cov(gamma: f64, sigma: f64, j: usize) -> [[f64; 2]; 2] {
    let a = 1.0 + gamma;
    let jf = j as f64;
    [[a * a / jf, -a * sigma / jf], [-a * sigma / jf, 2.0 * a * sigma * sigma / jf]]
}

/// Profile of the likelihood in `τ = γ/σ`: for fixed τ the shape maximizing
/// the likelihood is `γ(τ) = mean(ln(1 + τy))` and `σ = γ(τ)/τ`.
#[derive(Debug, Clone)]
pub struct TauProfile {
    y: Vec<f64>,
    ybar: f64,
}

impl TauProfile {
    pub fn new(y: &[f64]) -> Self {
        Self { y: y.to_vec(), ybar: mean(y) }
    }

    pub fn shape(&self, tau: f64) -> f64 {
        self.y.iter().map(|&v| (tau * v).ln_1p()).sum::<f64>() / self.y.len() as f64
    }

    /// Profile log-likelihood; continuous at τ = 0 where γ = 0 and σ = ȳ.
    pub fn loglik(&self, tau: f64) -> f64 {
        let j = self.y.len() as f64;
        if tau == 0.0 {
            return -j * self.ybar.ln() - j;
        }
        let g = self.shape(tau);
        let sigma = g / tau;
        if !(sigma > 0.0) || !g.is_finite() {
            return f64::NEG_INFINITY;
        }
        -j * sigma.ln() - j * (1.0 + g)
    }

    pub fn params(&self, tau: f64) -> (f64, f64) {
        if tau == 0.0 {
            (0.0, self.ybar)
        } else {
            let g = self.shape(tau);
            (g, g / tau)
        }
    }

    /// Smallest admissible τ, where γ(τ) = -1.
    pub fn tau_min(&self) -> f64 {
        let ymax = self.y.iter().fold(0.0f64, |m, &v| m.max(v));
        let edge = -1.0 / ymax;
        bisect(|t| self.shape(t) + 1.0, edge * (1.0 - 1e-15), 0.0, 200).unwrap_or(edge * (1.0 - 1e-9))
    }
}

/// Observed information covariance of `(γ̂, σ̂)`.
fn observed_cov(y: &[f64], gamma: f64, sigma: f64) -> Option<[[f64; 2]; 2]> {
    let (mut hgg, mut hgs, mut hss) = (0.0, 0.0, 0.0);
    if gamma.abs() < 1e-3 {
        let ll = |v: &[f64]| {
            let p = GpdParams { gamma: v[0], sigma: v[1], mu: 0.0 };
            y.iter().map(|&x| gpd_logpdf(x, &p)).sum::<f64>()
        };
        let h = hessian(&ll, &[gamma, sigma]);
        hgg = h[0][0];
        hgs = h[0][1];
        hss = h[1][1];
    } else {
        let g = gamma;
        for &v in y {
            let s = sigma + g * v;
            let lz = (g * v / sigma).ln_1p();
            hss += -1.0 / (g * sigma * sigma) + (1.0 / g + 1.0) / (s * s);
            hgg += -2.0 * lz / (g * g * g) + 2.0 * v / (g * g * s) + (1.0 + 1.0 / g) * v * v / (s * s);
            hgs += -1.0 / (g * g * sigma) + 1.0 / (g * g * s) + (1.0 / g + 1.0) * v / (s * s);
        }
    }
    let info = vec![vec![-hgg, -hgs], vec![-hgs, -hss]];
    let cov = invert(&info)?;
    (cov[0][0] > 0.0 && cov[1][1] > 0.0).then(|| [[cov[0][0], cov[0][1]], [cov[1][0], cov[1][1]]])
}

fn embed_cov<T: Real>(c: [[f64; 2]; 2]) -> Vec<Vec<T>> {
    // order (gamma, sigma, mu); the threshold is fixed by preparation
    let z = T::zero();
    vec![
        vec![T::lit(c[0][0]), T::lit(c[0][1]), z],
        vec![T::lit(c[1][0]), T::lit(c[1][1]), z],
        vec![z, z, z],
    ]
}

/// Profile maximum likelihood for excesses over a threshold at zero.
pub fn fit_gpd_mle<T: Real>(excesses: &[T]) -> Result<FitResult<T>> {
    check_excesses(excesses, 5)?;
    let y: Vec<f64> = excesses.iter().map(|v| v.as_f64()).collect();
    let prof = TauProfile::new(&y);
    let ybar = prof.ybar;
    let tau_min = prof.tau_min();
    // grid in u = τ ȳ: linear on the negative side, geometric on the positive
    let u_min = tau_min * ybar;
    let mut grid: Vec<f64> = (0..=40).map(|k| u_min * (1.0 - k as f64 / 40.0)).collect();
    grid.extend((0..=70).map(|k| 10f64.powf(-3.0 + 7.0 * k as f64 / 70.0)));
    let vals: Vec<f64> = grid.iter().map(|&u| prof.loglik(u / ybar)).collect();
    let best = (0..grid.len())
        .filter(|&i| vals[i].is_finite())
        .max_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite"))
        .ok_or_else(|| Error::Support("profile likelihood undefined on the whole τ range".into()))?;
    let a = if best == 0 { grid[0] } else { grid[best - 1] };
    let b = if best + 1 < grid.len() { grid[best + 1] } else { grid[best] };
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let (mut u, lu) = golden_max(|u| prof.loglik(u / ybar), lo, hi, 1e-13 * (1.0 + hi.abs()));
    if vals[best] > lu {
        u = grid[best];
    }
    let tau = u / ybar;
    let (g, sigma) = prof.params(tau);
    let params = GpdParams { gamma: T::lit(g), sigma: T::lit(sigma), mu: T::zero() };
    params.validate()?;
    let mut fit = FitResult::new(Method::Mle, Params::Gpd(params), excesses.len());
    if best == 0 || (u - u_min).abs() < 1e-9 * u_min.abs() {
        fit.converged = false;
        fit.note("shape at the γ = -1 boundary");
    }
    if best + 1 == grid.len() {
        fit.converged = false;
        fit.note("τ search reached the upper end of the grid");
    }
    match observed_cov(&y, g, sigma) {
        Some(c) => fit.covariance = Some(embed_cov(c)),
        None if g > -0.5 => {
            fit.covariance = Some(embed_cov(gpd_asymptotic_cov(g, sigma, y.len())));
            fit.note("observed information singular, asymptotic covariance reported");
        }
        None => fit.note("observed information singular, covariance omitted"),
    }
    Ok(fit)
}

/// Method of moments: `γ = (1 - m²/s²)/2`, `σ = m(1 + m²/s²)/2`.
pub fn fit_gpd_mom<T: Real>(excesses: &[T]) -> Result<FitResult<T>> {
    if excesses.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: excesses.len() });
    }
    let m = mean(excesses);
    let s2 = variance(excesses);
    if !(s2 > T::zero()) {
        return Err(Error::Degenerate("zero sample variance".into()));
    }
    let r = m * m / s2;
    let gamma = T::half() * (T::one() - r);
    let sigma = T::half() * m * (T::one() + r);
    let params = GpdParams { gamma, sigma, mu: T::zero() };
    params.validate()?;
    let mut fit = FitResult::new(Method::Mom, Params::Gpd(params), excesses.len());
    if gamma >= T::lit(0.25) {
        fit.note(format!("shape {gamma} ≥ 1/4: higher moments do not exist, estimate unreliable"));
    }
    Ok(fit)
}

/// Pickands estimator in the Hosking shape `k` from the ascending order
/// statistics at ranks `⌊J/2⌋` and `⌊3J/4⌋`. Returns `(k, σ)`.
pub fn pickands_hosking(xa: f64, xb: f64) -> Result<(f64, f64)> {
    if !(xa > 0.0) || !(xb > xa) {
        return Err(Error::Undefined(format!("need 0 < x_(J/2) < x_(3J/4), got {xa}, {xb}")));
    }
    let k = (xa / (xb - xa)).ln() / std::f64::consts::LN_2;
    let denom = 2.0 * xa - xb;
    let sigma = if denom == 0.0 || k.abs() < 1e-12 {
        xa / std::f64::consts::LN_2
    } else {
        k * xa * xa / denom
    };
    Ok((k, sigma))
}

pub fn fit_gpd_pickands<T: Real>(excesses: &[T]) -> Result<FitResult<T>> {
    check_excesses(excesses, 4)?;
    let xs: Vec<f64> = sorted(excesses).iter().map(|v| v.as_f64()).collect();
    let j = xs.len();
    let (xa, xb) = (xs[j / 2 - 1], xs[3 * j / 4 - 1]);
    let (k, sigma) = pickands_hosking(xa, xb)?;
    let params = GpdParams { gamma: T::lit(-k), sigma: T::lit(sigma), mu: T::zero() };
    params.validate().map_err(|e| Error::Undefined(e.to_string()))?;
    Ok(FitResult::new(Method::Pickands, Params::Gpd(params), excesses.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpmOptions {
    /// Pairs use only ranks whose plotting position exceeds this.
    pub start_percentile: f64,
    pub eta: f64,
    pub zeta: f64,
    /// Seed for pair thinning on large samples.
    pub seed: u64,
}

impl Default for EpmOptions {
    fn default() -> Self {
        Self { start_percentile: 0.5, eta: 0.0, zeta: 1.0, seed: 0 }
    }
}

/// Above this many excesses the pairs are subsampled.
pub const EPM_EXACT_LIMIT: usize = 2000;
pub const EPM_MAX_PAIRS: usize = 2_000_000;

/// `C_s = ln(1 - (s - η)/(J + ζ))` for 1-based rank `s`.
pub fn epm_c(s: usize, j: usize, eta: f64, zeta: f64) -> f64 {
    (-(s as f64 - eta) / (j as f64 + zeta)).ln_1p()
}

/// Solves one pair of percentile equations `ln(1 - x/δ) = k C` for
/// `x_i < x_j`, `C_j < C_i < 0`. Returns the Hosking shape and the scale.
pub fn epm_pair(xi: f64, xj: f64, ci: f64, cj: f64) -> Option<(f64, f64)> {
    let d = cj * xi - ci * xj;
    if d == 0.0 {
        return Some((0.0, -xi / ci));
    }
    let g = |delta: f64| ci * (-xj / delta).ln_1p() - cj * (-xi / delta).ln_1p();
    let mut d0 = xi * xj * (cj - ci) / d;
    let mut root = None;
    for _ in 0..60 {
        let bracket = if d0 > 0.0 {
            if d0 <= xj {
                None
            } else {
                Some((xj, d0))
            }
        } else {
            Some((d0, d0 * 1e-200))
        };
        if let Some((a, b)) = bracket {
            let (fa, fb) = (g(a), g(b));
            if fa.is_nan() || fb.is_nan() || (fa > 0.0) != (fb > 0.0) {
                root = bisect(g, a, b, 2000);
                break;
            }
        }
        d0 *= 2.0;
        if !d0.is_finite() {
            break;
        }
    }
    let delta = root?;
    let k = (-xi / delta).ln_1p() / ci;
    let sigma = k * delta;
    (k.is_finite() && sigma > 0.0).then_some((k, sigma))
}

/// Empirical percentile method: median over admissible pairs of per-pair
/// solutions.
pub fn fit_gpd_epm<T: Real>(excesses: &[T], opts: &EpmOptions) -> Result<FitResult<T>> {
    check_excesses(excesses, 4)?;
    let xs: Vec<f64> = sorted(excesses).iter().map(|v| v.as_f64()).collect();
    let j = xs.len();
    let c: Vec<f64> = (1..=j).map(|s| epm_c(s, j, opts.eta, opts.zeta)).collect();
    let ranks: Vec<usize> = (1..=j)
        .filter(|&s| (s as f64 - opts.eta) / (j as f64 + opts.zeta) > opts.start_percentile)
        .filter(|&s| c[s - 1].is_finite() && c[s - 1] < 0.0)
        .collect();
    let m = ranks.len();
    let pairs: Vec<(usize, usize)> = if j <= EPM_EXACT_LIMIT || m * m.saturating_sub(1) / 2 <= EPM_MAX_PAIRS {
        (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect()
    } else {
        let mut rng = from_seed(opts.seed);
        (0..EPM_MAX_PAIRS)
            .map(|_| loop {
                let a = (open_uniform(&mut rng) * m as f64) as usize;
                let b = (open_uniform(&mut rng) * m as f64) as usize;
                if a != b {
                    break (a.min(b), a.max(b));
                }
            })
            .collect()
    };
    let admissible: Vec<(usize, usize)> = pairs
        .into_iter()
        .map(|(a, b)| (ranks[a], ranks[b]))
        .filter(|&(i, k)| xs[i - 1] < xs[k - 1])
        .collect();
    if admissible.is_empty() {
        return Err(Error::Undefined("no admissible order-statistic pairs".into()));
    }
    let sols: Vec<Option<(f64, f64)>> = admissible
        .par_iter()
        .map(|&(i, k)| epm_pair(xs[i - 1], xs[k - 1], c[i - 1], c[k - 1]))
        .collect();
    let dropped = sols.iter().filter(|s| s.is_none()).count();
    let (ks, sigmas): (Vec<f64>, Vec<f64>) = sols.into_iter().flatten().unzip();
    if ks.is_empty() {
        return Err(Error::Undefined("no pair produced a solution".into()));
    }
    let params = GpdParams { gamma: T::lit(-median(&ks)), sigma: T::lit(median(&sigmas)), mu: T::zero() };
    params.validate()?;
    let mut fit = FitResult::new(Method::Epm, Params::Gpd(params), j);
    if dropped > 0 {
        fit.note(format!("{dropped} of {} pairs without a solution dropped", admissible.len()));
    }
    if j > EPM_EXACT_LIMIT && m * m.saturating_sub(1) / 2 > EPM_MAX_PAIRS {
        fit.note(format!("pairs subsampled to {EPM_MAX_PAIRS}"));
    }
    Ok(fit)
}
