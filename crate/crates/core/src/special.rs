//! Special functions. Evaluated in `f64` through `statrs` and converted back.

use crate::scalar::Real;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn ln_gamma<T: Real>(x: T) -> T {
    T::lit(statrs::function::gamma::ln_gamma(x.as_f64()))
}

pub fn gamma<T: Real>(x: T) -> T {
    T::lit(statrs::function::gamma::gamma(x.as_f64()))
}

pub fn digamma<T: Real>(x: T) -> T {
    T::lit(statrs::function::gamma::digamma(x.as_f64()))
}

/// Standard normal distribution function.
pub fn norm_cdf<T: Real>(x: T) -> T {
    T::lit(0.5 * statrs::function::erf::erfc(-x.as_f64() / std::f64::consts::SQRT_2))
}
