//! Chambers-Mallows-Stuck generator.

use crate::rng::{from_seed, open_uniform};
use crate::scalar::Real;
use crate::types::StableParams;

/// `n` i.i.d. draws from `S(α, β, γ, δ; 0)`.
pub fn stable_sample<T: Real>(p: &StableParams<T>, n: usize, seed: u64) -> Vec<T> {
    let mut rng = from_seed(seed);
    let alpha = p.alpha.as_f64();
    let beta = p.beta.as_f64();
    let gamma = p.gamma.as_f64();
    let delta = p.delta.as_f64();
    let half_pi = std::f64::consts::FRAC_PI_2;
    (0..n)
        .map(|_| {
            let v = std::f64::consts::PI * (open_uniform(&mut rng) - 0.5);
            let w = -open_uniform(&mut rng).ln();
            let x = if alpha == 1.0 {
                let a = half_pi + beta * v;
                let z1 = (a * v.tan() - beta * ((half_pi * w * v.cos()) / a).ln()) / half_pi;
                gamma * z1 + delta
            } else {
                let tan = (half_pi * alpha).tan();
                let b = (beta * tan).atan() / alpha;
                let s = (1.0 + beta * beta * tan * tan).powf(0.5 / alpha);
                let z1 = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
                    * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
                gamma * (z1 - beta * tan) + delta
            };
            T::lit(x)
        })
        .collect()
}
