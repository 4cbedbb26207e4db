//! Generalized extreme value law `F(x) = exp(-(1 + γ(x-μ)/σ)^{-1/γ})` with the
//! Gumbel limit at γ = 0, sample L-moments and three estimators: pure
//! L-moments, maximum likelihood, and the mixed L-moment / likelihood profile
//! over γ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{bfgs_minimize, bisect, golden_max, hessian, invert};
use crate::rng::{from_seed, open_uniform};
use crate::scalar::{mean, median, sorted, variance, Real};
use crate::special::{digamma, gamma as gamma_fn, EULER_GAMMA};
use crate::types::{FitResult, GevParams, Method, Params};

/// `1 + γ(x - μ)/σ`, the support argument.
fn support_arg<T: Real>(x: T, p: &GevParams<T>) -> T {
    T::one() + p.gamma * (x - p.mu) / p.sigma
}

/// `t^{-1/γ}` written through `ln1p` so it tends smoothly to `exp(-z)`.
fn tail_term<T: Real>(z: T, gamma: T) -> T {
    if gamma == T::zero() {
        (-z).exp()
    } else {
        (-(gamma * z).ln_1p() / gamma).exp()
    }
}

pub fn gev_cdf<T: Real>(x: T, p: &GevParams<T>) -> T {
    if p.gamma != T::zero() && !(support_arg(x, p) > T::zero()) {
        return if p.gamma > T::zero() { T::zero() } else { T::one() };
    }
    let z = (x - p.mu) / p.sigma;
    (-tail_term(z, p.gamma)).exp()
}

/// Log density, `-inf` outside the support.
pub fn gev_logpdf<T: Real>(x: T, p: &GevParams<T>) -> T {
    let z = (x - p.mu) / p.sigma;
    if p.gamma == T::zero() {
        return -p.sigma.ln() - z - (-z).exp();
    }
    let t = T::one() + p.gamma * z;
    if !(t > T::zero()) {
        return T::neg_infinity();
    }
    let lt = (p.gamma * z).ln_1p();
    -p.sigma.ln() - (T::one() + T::one() / p.gamma) * lt - (-lt / p.gamma).exp()
}

pub fn gev_pdf<T: Real>(x: T, p: &GevParams<T>) -> T {
    gev_logpdf(x, p).exp()
}

pub fn gev_quantile<T: Real>(q: T, p: &GevParams<T>) -> Result<T> {
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::InvalidParameter(format!("probability {q} outside (0,1)")));
    }
    let y = -(-q.ln()).ln();
    if p.gamma == T::zero() {
        Ok(p.mu + p.sigma * y)
    } else {
        Ok(p.mu + p.sigma * (p.gamma * y).exp_m1() / p.gamma)
    }
}

/// Inverse-transform sampler.
pub fn gev_sample<T: Real>(p: &GevParams<T>, n: usize, seed: u64) -> Vec<T> {
    let mut rng = from_seed(seed);
    (0..n)
        .map(|_| gev_quantile(T::lit(open_uniform(&mut rng)), p).expect("open unit interval"))
        .collect()
}

/// First three sample L-moments and the L-skewness `λ₃/λ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LMoments<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub lambda3: T,
    pub tau3: T,
}

fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Unbiased sample L-moment of order `r` from ascending data:
/// `λ_r = (1/r) C(n,r)^{-1} Σ_i Σ_k (-1)^k C(r-1,k) C(i-1,r-1-k) C(n-i,k) x_(i)`.
pub fn sample_lmoment_sorted<T: Real>(xs: &[T], r: usize) -> T {
    let n = xs.len();
    assert!(r >= 1 && n >= r, "need at least r observations");
    let mut acc = 0.0;
    for (idx, &x) in xs.iter().enumerate() {
        let i = idx + 1;
        let w: f64 = (0..r)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * choose(r - 1, k) * choose(i - 1, r - 1 - k) * choose(n - i, k)
            })
            .sum();
        acc += w * x.as_f64();
    }
    T::lit(acc / (r as f64 * choose(n, r)))
}

pub fn sample_lmoments<T: Real>(data: &[T]) -> Result<LMoments<T>> {
    if data.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: data.len() });
    }
    let xs = sorted(data);
    let lambda1 = mean(&xs);
    let lambda2 = sample_lmoment_sorted(&xs, 2);
    let lambda3 = sample_lmoment_sorted(&xs, 3);
    if !(lambda2 > T::zero()) {
        return Err(Error::Degenerate("second L-moment is zero".into()));
    }
    Ok(LMoments { lambda1, lambda2, lambda3, tau3: lambda3 / lambda2 })
}

/// `(1 - 3^γ)/(1 - 2^γ)`, continuous at 0 with value `ln 3 / ln 2`.
fn shape_ratio(g: f64) -> f64 {
    let (l2, l3) = (std::f64::consts::LN_2, 3f64.ln());
    if g.abs() < 1e-12 {
        l3 / l2
    } else {
        (g * l3).exp_m1() / (g * l2).exp_m1()
    }
}

/// `(1 - Γ(1-γ))/γ`, tending to `-γ_E`.
fn mu_factor(g: f64) -> f64 {
    if g.abs() < 1e-8 {
        -EULER_GAMMA
    } else {
        (1.0 - gamma_fn(1.0 - g)) / g
    }
}

/// Location and scale implied by the first two L-moments at shape `g`.
fn lmom_location_scale(g: f64, l1: f64, l2: f64) -> (f64, f64) {
    let sigma = if g.abs() < 1e-12 {
        l2 / std::f64::consts::LN_2
    } else {
        // -γ / (1 - 2^γ) = γ / expm1(γ ln 2)
        g * l2 / ((g * std::f64::consts::LN_2).exp_m1() * gamma_fn(1.0 - g))
    };
    (l1 + sigma * mu_factor(g), sigma)
}

/// Pure L-moment estimator. Reported as [`Method::Mom`].
pub fn fit_gev_lmom<T: Real>(data: &[T]) -> Result<FitResult<T>> {
    if data.len() < 10 {
        return Err(Error::InsufficientData { needed: 10, got: data.len() });
    }
    let lm = sample_lmoments(data)?;
    let tau3 = lm.tau3.as_f64();
    let target = (tau3 + 3.0) / 2.0;
    let (lo, hi) = (-1.0, 1.0 - 1e-6);
    let f = |g: f64| shape_ratio(g) - target;
    let g = bisect(f, lo, hi, 200)
        .ok_or_else(|| Error::Undefined(format!("L-skewness {tau3:.4} outside the solvable range")))?;
    let (mu, sigma) = lmom_location_scale(g, lm.lambda1.as_f64(), lm.lambda2.as_f64());
    let params = GevParams { mu: T::lit(mu), sigma: T::lit(sigma), gamma: T::lit(g) };
    params
        .validate()
        .map_err(|_| Error::Undefined(format!("L-moment scale not positive at shape {g}")))?;
    let mut fit = FitResult::new(Method::Mom, Params::Gev(params), data.len());
    if (g - lo).abs() < 1e-9 || (hi - g).abs() < 1e-9 {
        fit.converged = false;
        fit.note(format!("shape {g:.6} at the edge of the root bracket"));
    }
    Ok(fit)
}

/// Profile of the mixed estimator: location and scale tied to the sample
/// L-moments, likelihood as a function of γ alone.
#[derive(Debug, Clone)]
pub struct MixedProfile {
    data: Vec<f64>,
    l1: f64,
    l2: f64,
}

/// Below this |γ| the Gumbel form of the likelihood is used.
pub const GUMBEL_SWITCH: f64 = 1e-4;

impl MixedProfile {
    pub fn new<T: Real>(data: &[T]) -> Result<Self> {
        let lm = sample_lmoments(data)?;
        Ok(Self {
            data: data.iter().map(|x| x.as_f64()).collect(),
            l1: lm.lambda1.as_f64(),
            l2: lm.lambda2.as_f64(),
        })
    }

    pub fn params(&self, g: f64) -> GevParams<f64> {
        let g = if g.abs() < GUMBEL_SWITCH { 0.0 } else { g };
        let (mu, sigma) = lmom_location_scale(g, self.l1, self.l2);
        GevParams { mu, sigma, gamma: g }
    }

    pub fn loglik(&self, g: f64) -> f64 {
        let p = self.params(g);
        if !(p.sigma > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.data.iter().map(|&x| gev_logpdf(x, &p)).sum()
    }

    /// Analytic derivative of [`Self::loglik`] in γ (away from the Gumbel band).
    pub fn dloglik(&self, g: f64) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        let gam = gamma_fn(1.0 - g);
        let psi = digamma(1.0 - g);
        let a = -(g * ln2).exp_m1() * gam;
        let da = -gam * (ln2 * 2f64.powf(g) + (-(g * ln2).exp_m1()) * psi);
        let sigma = -g * self.l2 / a;
        let dsigma = -self.l2 * (a - g * da) / (a * a);
        let b = (1.0 - gam) / g;
        let db = (gam * psi * g - (1.0 - gam)) / (g * g);
        let mu = self.l1 + sigma * b;
        let dmu = dsigma * b + sigma * db;
        let (mut s_mu, mut s_sigma, mut s_gamma) = (0.0, 0.0, 0.0);
        for &x in &self.data {
            let z = (x - mu) / sigma;
            let t = 1.0 + g * z;
            if !(t > 0.0) {
                return f64::NAN;
            }
            let lt = t.ln();
            let w = (-lt / g).exp();
            let core = ((1.0 + g) - w) / (sigma * t);
            s_mu += core;
            s_sigma += -1.0 / sigma + z * core;
            s_gamma += (1.0 - w) * lt / (g * g) - (1.0 + 1.0 / g) * z / t + w * z / (g * t);
        }
        s_mu * dmu + s_sigma * dsigma + s_gamma
    }
}

/// Mixed L-moment / likelihood estimator over γ ∈ [-0.5, 0.5].
pub fn fit_gev_mixed<T: Real>(data: &[T]) -> Result<FitResult<T>> {
    if data.len() < 10 {
        return Err(Error::InsufficientData { needed: 10, got: data.len() });
    }
    let profile = MixedProfile::new(data)?;
    let (lo, hi) = (-0.5, 0.5);
    const GRID: usize = 100;
    let grid: Vec<(f64, f64)> = (0..=GRID)
        .map(|k| {
            let g = lo + (hi - lo) * k as f64 / GRID as f64;
            (g, profile.loglik(g))
        })
        .collect();
    let best = grid
        .iter()
        .enumerate()
        .filter(|(_, (_, l))| l.is_finite())
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).expect("finite"))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Support("profile likelihood undefined for every γ in [-0.5, 0.5]".into()))?;
    let a = grid[best.saturating_sub(1)].0;
    let b = grid[(best + 1).min(GRID)].0;
    let (mut g, mut ll) = golden_max(|g| profile.loglik(g), a, b, 1e-10);
    if grid[best].1 > ll {
        (g, ll) = grid[best];
    }
    // polish on the analytic derivative away from the Gumbel band
    let (l, r) = ((g - 1e-6).max(a), (g + 1e-6).min(b));
    if l * r > 0.0 && l.abs() > GUMBEL_SWITCH && r.abs() > GUMBEL_SWITCH {
        if let Some(root) = bisect(|x| profile.dloglik(x), l, r, 100) {
            if profile.loglik(root) >= ll {
                g = root;
            }
        }
    }
    let p = profile.params(g);
    let params = GevParams { mu: T::lit(p.mu), sigma: T::lit(p.sigma), gamma: T::lit(p.gamma) };
    params.validate()?;
    let mut fit = FitResult::new(Method::MixedLMoments, Params::Gev(params), data.len());
    if (g - lo).abs() < 1e-6 || (hi - g).abs() < 1e-6 {
        fit.converged = false;
        fit.note(format!("shape {g:.6} at the restriction boundary"));
    }
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevMleOptions {
    pub gamma_lower: f64,
    pub gamma_upper: f64,
}

impl Default for GevMleOptions {
    fn default() -> Self {
        Self { gamma_lower: -1.0, gamma_upper: 5.0 }
    }
}

/// Maximum likelihood over `(μ, σ, γ)` by BFGS on `(μ, ln σ, γ)` from several
/// starts, the L-moment fit among them.
pub fn fit_gev_mle<T: Real>(data: &[T], opts: &GevMleOptions) -> Result<FitResult<T>> {
    if data.len() < 20 {
        return Err(Error::InsufficientData { needed: 20, got: data.len() });
    }
    if !(opts.gamma_lower < opts.gamma_upper) {
        return Err(Error::InvalidParameter("empty shape bounds".into()));
    }
    let raw: Vec<f64> = data.iter().map(|x| x.as_f64()).collect();
    // work on standardized data for conditioning
    let centre = median(&raw);
    let scale = {
        let lm = sample_lmoments(&raw)?;
        lm.lambda2
    };
    let xs: Vec<f64> = raw.iter().map(|x| (x - centre) / scale).collect();
    let n = xs.len() as f64;
    let nll = |v: &[f64]| {
        let p = GevParams { mu: v[0], sigma: v[1].exp(), gamma: v[2] };
        let s: f64 = xs.iter().map(|&x| gev_logpdf(x, &p)).sum();
        if s.is_finite() {
            -s / n
        } else {
            f64::INFINITY
        }
    };
    let clamp_g = |g: f64| g.clamp(opts.gamma_lower, opts.gamma_upper);
    let mut starts: Vec<[f64; 3]> = Vec::new();
    if let Ok(f) = fit_gev_lmom(&xs) {
        let p = f.gev().expect("gev fit");
        starts.push([p.mu, p.sigma.ln(), clamp_g(p.gamma)]);
    }
    if let Ok(f) = fit_gev_mixed(&xs) {
        let p = f.gev().expect("gev fit");
        starts.push([p.mu, p.sigma.ln(), clamp_g(p.gamma)]);
    }
    let sd = variance(&xs).sqrt();
    let s0 = sd * 6f64.sqrt() / std::f64::consts::PI;
    let m0 = mean(&xs) - EULER_GAMMA * s0;
    starts.push([m0, s0.ln(), clamp_g(0.0)]);
    starts.push([m0, s0.ln(), clamp_g(0.1)]);

    let lower = [f64::NEG_INFINITY, f64::NEG_INFINITY, opts.gamma_lower];
    let upper = [f64::INFINITY, f64::INFINITY, opts.gamma_upper];
    let mut best: Option<(crate::optim::Minimum<f64>, f64)> = None;
    for s in &starts {
        let f0 = nll(s);
        if !f0.is_finite() {
            continue;
        }
        let m = bfgs_minimize(&nll, s, &lower, &upper, 500, 1e-9);
        let better = best.as_ref().is_none_or(|(b, _)| m.value < b.value);
        if better {
            best = Some((m, f0));
        }
    }
    let (m, _) = best.ok_or_else(|| Error::Support("no starting point inside the support".into()))?;
    let (mu_s, sigma_s, g) = (m.x[0], m.x[1].exp(), m.x[2]);
    let params = GevParams {
        mu: T::lit(centre + scale * mu_s),
        sigma: T::lit(scale * sigma_s),
        gamma: T::lit(g),
    };
    params.validate()?;
    let mut fit = FitResult::new(Method::Mle, Params::Gev(params), data.len());
    fit.converged = m.converged;
    if !m.converged {
        fit.note("optimizer stopped before meeting the gradient tolerance");
    }
    if (g - opts.gamma_lower).abs() < 1e-8 || (opts.gamma_upper - g).abs() < 1e-8 {
        fit.converged = false;
        fit.note(format!("shape {g:.6} on the bound"));
    }
    // covariance of (μ, σ, γ) from the observed information in standardized units
    let total_nll = |v: &[f64]| {
        let p = GevParams { mu: v[0], sigma: v[1], gamma: v[2] };
        -xs.iter().map(|&x| gev_logpdf(x, &p)).sum::<f64>()
    };
    let h = hessian(&total_nll, &[mu_s, sigma_s, g]);
    match invert(&h) {
        Some(cov) if (0..3).all(|i| cov[i][i] > 0.0) => {
            let j = [scale, scale, 1.0];
            fit.covariance = Some(
                (0..3).map(|r| (0..3).map(|c| T::lit(cov[r][c] * j[r] * j[c])).collect()).collect(),
            );
        }
        _ => fit.note("observed information not invertible, covariance omitted"),
    }
    Ok(fit)
}

/// Total log-likelihood of `data` under `p`.
pub fn gev_loglik<T: Real>(data: &[T], p: &GevParams<T>) -> T {
    data.iter().fold(T::zero(), |acc, &x| acc + gev_logpdf(x, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mu: f64, sigma: f64, gamma: f64) -> GevParams<f64> {
        GevParams::new(mu, sigma, gamma).unwrap()
    }

    #[test]
    fn gumbel_cdf_at_location() {
        assert!((gev_cdf(1.3, &p(1.3, 2.0, 0.0)) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn lower_endpoint_for_positive_shape() {
        assert_eq!(gev_cdf(-2.0, &p(0.0, 1.0, 0.5)), 0.0);
        assert_eq!(gev_pdf(-2.5, &p(0.0, 1.0, 0.5)), 0.0);
        assert_eq!(gev_cdf(5.0, &p(0.0, 1.0, -0.5)), 1.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for g in [-0.4, 0.0, 0.3] {
            let pr = p(0.5, 1.5, g);
            for q in [0.01, 0.3, 0.5, 0.9, 0.999] {
                let x = gev_quantile(q, &pr).unwrap();
                assert!((gev_cdf(x, &pr) - q).abs() < 1e-12, "g {g} q {q}");
            }
        }
        assert!(gev_quantile(1.0, &p(0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn pdf_integrates_to_one() {
        for g in [-0.4, 0.0, 0.4] {
            let pr = p(0.0, 1.0, g);
            let a = if g > 0.0 { -1.0 / g } else { -8.0 };
            let b = if g < 0.0 { -1.0 / g } else { 400.0 };
            let mass = crate::quad::integrate(|x| gev_pdf(x, &pr), a, b, 1e-11).unwrap();
            let tail = if g > 0.0 { 1.0 - gev_cdf(b, &pr) } else { 0.0 };
            assert!((mass + tail - 1.0).abs() < 1e-6, "g {g}: {mass}");
        }
    }

    #[test]
    fn lmoment_small_examples() {
        assert_eq!(sample_lmoment_sorted(&[0.0, 1.0], 2), 0.5);
        let lm = sample_lmoments(&[1.0f64, 2.0, 3.0]).unwrap();
        assert_eq!(lm.lambda1, 2.0);
        assert!(lm.tau3.abs() < 1e-15);
        assert!(sample_lmoments(&[2.0; 5]).is_err());
    }

    #[test]
    fn exponential_l_skewness() {
        let n = 10_000;
        let xs: Vec<f64> = (1..=n).map(|i| -(1.0 - (i as f64 - 0.5) / n as f64).ln()).collect();
        let lm = sample_lmoments(&xs).unwrap();
        assert!((lm.tau3 - 1.0 / 3.0).abs() < 0.01, "{}", lm.tau3);
    }

    #[test]
    fn zero_shape_from_gumbel_skewness() {
        let ratio = 3f64.ln() / 2f64.ln();
        let tau3 = 2.0 * ratio - 3.0;
        assert!((tau3 - 0.169_925).abs() < 1e-6);
        let g = bisect(|g| shape_ratio(g) - (tau3 + 3.0) / 2.0, -1.0, 1.0, 200).unwrap();
        assert!(g.abs() < 1e-9);
        let (_, sigma) = lmom_location_scale(0.0, 0.0, 1.0);
        assert!((sigma - 1.0 / 2f64.ln()).abs() < 1e-15);
        let (_, near) = lmom_location_scale(1e-9, 0.0, 1.0);
        assert!((near - sigma).abs() < 1e-7);
    }

    #[test]
    fn lmom_recovers_shape() {
        let truth = p(0.0, 1.0, 0.2);
        let mean_g: f64 = (0..20)
            .map(|r| fit_gev_lmom(&gev_sample(&truth, 10_000, 100 + r)).unwrap().gev().unwrap().gamma)
            .sum::<f64>()
            / 20.0;
        assert!((mean_g - 0.2).abs() < 0.03, "{mean_g}");
    }

    #[test]
    fn mixed_profile_derivative_matches_differences() {
        let x = gev_sample(&p(1.0, 2.0, 0.2), 300, 5);
        let prof = MixedProfile::new(&x).unwrap();
        for g in [-0.3, -0.1, 0.05, 0.2, 0.4] {
            let h = 1e-6;
            let fd = (prof.loglik(g + h) - prof.loglik(g - h)) / (2.0 * h);
            let an = prof.dloglik(g);
            if an.is_finite() && fd.is_finite() {
                assert!((an - fd).abs() <= 1e-5 * fd.abs().max(1.0), "g {g}: {an} vs {fd}");
            }
        }
    }

    #[test]
    fn mixed_recovers_shape_and_is_deterministic() {
        let x = gev_sample(&p(0.0, 1.0, 0.3), 10_000, 11);
        let a = fit_gev_mixed(&x).unwrap();
        let b = fit_gev_mixed(&x).unwrap();
        assert_eq!(a, b);
        assert!((a.gev().unwrap().gamma - 0.3).abs() < 0.05);
    }

    #[test]
    fn mle_improves_on_lmom_start() {
        let x = gev_sample(&p(2.0, 0.5, 0.1), 200, 8);
        let mle = fit_gev_mle(&x, &GevMleOptions::default()).unwrap();
        let lmom = fit_gev_lmom(&x).unwrap();
        assert!(gev_loglik(&x, mle.gev().unwrap()) >= gev_loglik(&x, lmom.gev().unwrap()) - 1e-9);
        let cov = mle.covariance.unwrap();
        assert!(cov[2][2] > 0.0 && cov[0][0] > 0.0);
    }

    #[test]
    fn mle_gumbel_shape() {
        let truth = p(0.0, 1.0, 0.0);
        let mean_g: f64 = (0..20)
            .map(|r| {
                fit_gev_mle(&gev_sample(&truth, 10_000, 500 + r), &GevMleOptions::default())
                    .unwrap()
                    .gev()
                    .unwrap()
                    .gamma
            })
            .sum::<f64>()
            / 20.0;
        assert!(mean_g.abs() < 0.02, "{mean_g}");
    }
}
