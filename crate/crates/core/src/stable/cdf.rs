//! Distribution function from Zolotarev's integral representation, written for
//! the S(0) standardization following Nolan (1997).
//!
//! For α ≠ 1 and `z > ζ`, with `ζ = -β tan(πα/2)` and
//! `θ₀ = arctan(β tan(πα/2)) / α`,
//!
//! ```text
//! F(z) = c₁ + sgn(1-α)/π ∫_{-θ₀}^{π/2} exp(-(z-ζ)^{α/(α-1)} V(θ)) dθ
//! ```
//!
//! where `c₁ = (π/2 - θ₀)/π` for α < 1 and `1` for α > 1. Points below ζ use
//! the duality `F(z; α, β) = 1 - F(-z; α, -β)`.

use crate::error::Result;
use crate::quad::integrate;
use crate::scalar::Real;
use crate::types::StableParams;

/// Within this distance of 1 the α = 1 branch is used.
const ALPHA_ONE_BAND: f64 = 1e-6;

/// `P(X ≤ x)` for `X ~ S(α, β, γ, δ; 0)`.
pub fn stable_cdf<T: Real>(x: T, p: &StableParams<T>) -> Result<T> {
    p.validate()?;
    let z = (x - p.delta) / p.gamma;
    if z.is_nan() {
        return Ok(z);
    }
    if z.is_infinite() {
        return Ok(if z > T::zero() { T::one() } else { T::zero() });
    }
    let f = standard_cdf(z, p.alpha, p.beta)?;
    Ok(f.max(T::zero()).min(T::one()))
}

fn standard_cdf<T: Real>(z: T, alpha: T, beta: T) -> Result<T> {
    let pi = T::PI();
    if (alpha - T::one()).abs() < T::lit(ALPHA_ONE_BAND) {
        if beta == T::zero() {
            return Ok(T::half() + z.atan() / pi);
        }
        if beta < T::zero() {
            return Ok(T::one() - alpha_one_upper(-z, -beta)?);
        }
        return alpha_one_upper(z, beta);
    }
    let tan = (pi * alpha * T::half()).tan();
    let zeta = -beta * tan;
    if z > zeta {
        alpha_ne_one_upper(z, alpha, beta)
    } else if z == zeta {
        let theta0 = (beta * tan).atan() / alpha;
        Ok((pi * T::half() - theta0) / pi)
    } else {
        Ok(T::one() - alpha_ne_one_upper(-z, alpha, -beta)?)
    }
}

/// Integrates `exp(-exp(ln_g(θ)))` over `[lo, hi]`, splitting at the point
/// where the exponent crosses 1 so the quadrature sees the peak of the
/// integrand `g e^{-g}` region as an interval edge.
fn integrate_kernel<T: Real, G: Fn(T) -> T>(ln_g: G, lo: T, hi: T) -> Result<T> {
    if !(hi > lo) {
        return Ok(T::zero());
    }
    let integrand = |t: T| {
        let lg = ln_g(t);
        if lg.is_nan() {
            T::zero()
        } else {
            (-lg.exp()).exp()
        }
    };
    let tol = T::quad_tol();
    let width = hi - lo;
    let eps = T::lit(1e-9);
    let a = ln_g(lo + eps * width);
    let b = ln_g(hi - eps * width);
    let split = if a.is_finite() && b.is_finite() && (a > T::zero()) != (b > T::zero()) {
        crate::optim::bisect(&ln_g, lo + eps * width, hi - eps * width, 200)
    } else {
        None
    };
    match split {
        Some(s) => Ok(integrate(integrand, lo, s, tol)? + integrate(integrand, s, hi, tol)?),
        None => integrate(integrand, lo, hi, tol),
    }
}

/// Standard distribution function for α ≠ 1 at `z > ζ`.
fn alpha_ne_one_upper<T: Real>(z: T, alpha: T, beta: T) -> Result<T> {
    let pi = T::PI();
    let one = T::one();
    let tan = (pi * alpha * T::half()).tan();
    let zeta = -beta * tan;
    let theta0 = (beta * tan).atan() / alpha;
    let am1 = alpha - one;
    let expo = alpha / am1;
    let ln_xz = (z - zeta).ln();
    let ln_cos_a0 = (alpha * theta0).cos().ln();
    let ln_g = move |t: T| {
        // V(θ) with the two cos θ factors merged
        let ln_v = (ln_cos_a0 + t.cos().ln()) / am1 - expo * (alpha * (theta0 + t)).sin().ln()
            + (alpha * theta0 + am1 * t).cos().ln();
        expo * ln_xz + ln_v
    };
    let integral = integrate_kernel(ln_g, -theta0, pi * T::half())?;
    if alpha < one {
        Ok((pi * T::half() - theta0) / pi + integral / pi)
    } else {
        Ok(one - integral / pi)
    }
}

/// Standard distribution function for α = 1 and β > 0.
fn alpha_one_upper<T: Real>(z: T, beta: T) -> Result<T> {
    let pi = T::PI();
    let half_pi = pi * T::half();
    let shift = -pi * z / (T::two() * beta);
    let ln_two_over_pi = (T::two() / pi).ln();
    let ln_g = move |t: T| {
        let a = half_pi + beta * t;
        shift + ln_two_over_pi + a.ln() - t.cos().ln() + a * t.tan() / beta
    };
    Ok(integrate_kernel(ln_g, -half_pi, half_pi)? / pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::norm_cdf;

    fn cdf(x: f64, a: f64, b: f64, g: f64, d: f64) -> f64 {
        stable_cdf(x, &StableParams::new(a, b, g, d).unwrap()).unwrap()
    }

    #[test]
    fn symmetric_median_is_location() {
        for a in [0.5, 0.9, 1.0, 1.3, 2.0] {
            assert!((cdf(1.5, a, 0.0, 2.0, 1.5) - 0.5).abs() < 1e-10, "alpha {a}");
        }
    }

    #[test]
    fn gaussian_member() {
        assert!((cdf(2.0, 2.0, 0.0, 1.0, 0.0) - 0.921_350_396_474_857_3).abs() < 1e-9);
        for x in [-4.0, -1.0, 0.3, 2.5] {
            let exact = norm_cdf(x / 2f64.sqrt());
            assert!((cdf(x, 2.0, 0.0, 1.0, 0.0) - exact).abs() < 1e-9, "x {x}");
        }
    }

    #[test]
    fn cauchy_member() {
        assert!((cdf(1.0, 1.0, 0.0, 1.0, 0.0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn levy_member() {
        // S(1/2, 1, γ, δ; 0) is Lévy with location δ - γ, P(X ≤ x) = erfc(sqrt(γ / (2(x - δ + γ))))
        for x in [0.5f64, 1.0, 3.0, 20.0] {
            let exact = statrs::function::erf::erfc((1.0 / (2.0 * (x + 1.0))).sqrt());
            assert!((cdf(x, 0.5, 1.0, 1.0, 0.0) - exact).abs() < 1e-9, "x {x}");
        }
        assert_eq!(cdf(-1.5, 0.5, 1.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn duality() {
        for (a, b) in [(0.7, 0.4), (1.0, 0.6), (1.5, -0.3), (1.9, 0.9)] {
            for x in [-2.0, -0.3, 0.0, 0.8, 4.0] {
                let s = cdf(-x, a, b, 1.0, 0.0) + cdf(x, a, -b, 1.0, 0.0);
                assert!((s - 1.0).abs() < 1e-8, "a {a} b {b} x {x}: {s}");
            }
        }
    }

    #[test]
    fn continuous_through_alpha_one() {
        for x in [-1.0, 0.5, 2.0] {
            let lo = cdf(x, 1.0 - 2e-3, 0.5, 1.0, 0.0);
            let at = cdf(x, 1.0, 0.5, 1.0, 0.0);
            let hi = cdf(x, 1.0 + 2e-3, 0.5, 1.0, 0.0);
            assert!((lo - at).abs() < 5e-3 && (hi - at).abs() < 5e-3, "x {x}: {lo} {at} {hi}");
        }
    }
}
