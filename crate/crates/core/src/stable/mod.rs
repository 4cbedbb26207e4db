//! α-stable laws in the S(0) parameterization: characteristic function,
//! distribution function, Chambers-Mallows-Stuck sampling and McCulloch's
//! quantile estimator.
//!
//! In S(0) the family is a genuine location-scale family, `X = γ Z + δ` with
//! `Z ~ S(α, β, 1, 0; 0)`, and the parameters vary continuously through α = 1.

mod cdf;
mod mcculloch;
mod sample;
pub mod tables;

use num_complex::Complex;

use crate::scalar::Real;
use crate::types::StableParams;

pub use cdf::stable_cdf;
pub use mcculloch::{fit_mcculloch, fit_mcculloch_with, sample_quantile, sorted_quantile, McCullochOptions};
pub use sample::stable_sample;

/// Characteristic function `E[exp(iθX)]`.
pub fn stable_cf<T: Real>(theta: T, p: &StableParams<T>) -> Complex<T> {
    let StableParams { alpha, beta, gamma, delta } = *p;
    if theta == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let at = theta.abs();
    let sgn = theta.signum();
    let pi = T::PI();
    let (re, im) = if alpha == T::one() {
        let log_term = beta * (T::two() / pi) * sgn * (gamma * at).ln();
        let scale = gamma * at;
        (-scale, -scale * log_term + delta * theta)
    } else {
        let scale = (gamma * at).powf(alpha);
        let tan = (pi * alpha * T::half()).tan();
        let skew = beta * sgn * tan * ((gamma * at).powf(T::one() - alpha) - T::one());
        (-scale, -scale * skew + delta * theta)
    };
    Complex::new(re, T::zero()).exp() * Complex::new(T::zero(), im).exp()
}
