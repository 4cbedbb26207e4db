//! Small deterministic optimizers: golden-section search, bisection, and a
//! box-constrained BFGS with finite-difference gradients.

use crate::scalar::Real;

/// Maximizes a unimodal `f` on `[a, b]`. Returns `(argmax, max)`.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if f1 < f2 || f1.is_nan() {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 || f2.is_nan() {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Root of `f` on `[a, b]` by bisection. `None` when the endpoints do not
/// bracket a sign change.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, max_iter: usize) -> Option<T> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if flo.is_nan() || fhi.is_nan() || (flo > T::zero()) == (fhi > T::zero()) {
        return None;
    }
    for _ in 0..max_iter {
        let mid = (lo + hi) * T::half();
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Some(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * T::half())
}

#[derive(Debug, Clone)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Central-difference gradient.
pub fn gradient<T: Real, F: Fn(&[T]) -> T>(f: &F, x: &[T]) -> Vec<T> {
    let mut g = vec![T::zero(); x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = T::epsilon().cbrt() * (T::one() + x[i].abs());
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (h + h);
    }
    g
}

/// Central-difference Hessian.
pub fn hessian<T: Real, F: Fn(&[T]) -> T>(f: &F, x: &[T]) -> Vec<Vec<T>> {
    let n = x.len();
    let mut h = vec![vec![T::zero(); n]; n];
    let step: Vec<T> =
        x.iter().map(|xi| T::epsilon().powf(T::lit(0.25)) * (T::one() + xi.abs())).collect();
    let mut xp = x.to_vec();
    let f0 = f(x);
    for i in 0..n {
        xp[i] = x[i] + step[i];
        let fp = f(&xp);
        xp[i] = x[i] - step[i];
        let fm = f(&xp);
        xp[i] = x[i];
        h[i][i] = (fp - f0 - f0 + fm) / (step[i] * step[i]);
        for j in 0..i {
            let mut eval = |si: T, sj: T| {
                xp[i] = x[i] + si * step[i];
                xp[j] = x[j] + sj * step[j];
                let v = f(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let one = T::one();
            let v = (eval(one, one) - eval(one, -one) - eval(-one, one) + eval(-one, -one))
                / (T::lit(4.0) * step[i] * step[j]);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}

/// Inverts a small symmetric matrix by Gauss-Jordan elimination with partial
/// pivoting. `None` when singular.
pub fn invert<T: Real>(m: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut inv: Vec<Vec<T>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&r1, &r2| {
            a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[piv][col].abs() > T::epsilon() * T::lit(1e-3)) {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                for j in 0..n {
                    let (ac, ic) = (a[col][j], inv[col][j]);
                    a[r][j] -= factor * ac;
                    inv[r][j] -= factor * ic;
                }
            }
        }
    }
    Some(inv)
}

/// Minimizes `f` from `x0` with BFGS. Coordinates are projected onto
/// `[lower[i], upper[i]]`; non-finite objective values count as infeasible and
/// shrink the step.
pub fn bfgs_minimize<T: Real, F: Fn(&[T]) -> T>(
    f: &F,
    x0: &[T],
    lower: &[T],
    upper: &[T],
    max_iter: usize,
    gtol: T,
) -> Minimum<T> {
    let n = x0.len();
    let project = |x: &mut Vec<T>| {
        for i in 0..n {
            x[i] = x[i].max(lower[i]).min(upper[i]);
        }
    };
    let mut x = x0.to_vec();
    project(&mut x);
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Minimum { x, value: fx, iterations: 0, converged: false };
    }
    let mut g = gradient(f, &x);
    let mut hinv: Vec<Vec<T>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let gnorm = g.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if gnorm <= gtol * (T::one() + fx.abs()) {
            converged = true;
            break;
        }
        let mut dir: Vec<T> = (0..n)
            .map(|i| -(0..n).fold(T::zero(), |acc, j| acc + hinv[i][j] * g[j]))
            .collect();
        let mut slope = (0..n).fold(T::zero(), |acc, i| acc + dir[i] * g[i]);
        if !(slope < T::zero()) {
            // lost descent: restart from steepest descent
            for (i, row) in hinv.iter_mut().enumerate() {
                for (j, h) in row.iter_mut().enumerate() {
                    *h = if i == j { T::one() } else { T::zero() };
                }
            }
            dir = g.iter().map(|v| -*v).collect();
            slope = -(0..n).fold(T::zero(), |acc, i| acc + g[i] * g[i]);
        }
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let mut xn: Vec<T> = (0..n).map(|i| x[i] + step * dir[i]).collect();
            project(&mut xn);
            let fnew = f(&xn);
            if fnew.is_finite() && fnew <= fx + T::lit(1e-4) * step * slope {
                accepted = Some((xn, fnew));
                break;
            }
            step *= T::half();
        }
        let Some((xn, fnew)) = accepted else {
            // no progress possible along any shrunken step
            converged = gnorm <= gtol.sqrt() * (T::one() + fx.abs());
            break;
        };
        let gn = gradient(f, &xn);
        let s: Vec<T> = (0..n).map(|i| xn[i] - x[i]).collect();
        let y: Vec<T> = (0..n).map(|i| gn[i] - g[i]).collect();
        let sy = (0..n).fold(T::zero(), |acc, i| acc + s[i] * y[i]);
        let improvement = fx - fnew;
        x = xn;
        g = gn;
        fx = fnew;
        if sy > T::epsilon() {
            let hy: Vec<T> =
                (0..n).map(|i| (0..n).fold(T::zero(), |acc, j| acc + hinv[i][j] * y[j])).collect();
            let yhy = (0..n).fold(T::zero(), |acc, i| acc + y[i] * hy[i]);
            let rho = T::one() / sy;
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] = hinv[i][j] - rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        if improvement.abs() <= T::epsilon() * T::lit(16.0) * (T::one() + fx.abs()) {
            converged = true;
            break;
        }
    }
    Minimum { x, value: fx, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x: f64| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        // a flat peak pins the argmax only to about sqrt(eps)
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 50).is_none());
    }

    #[test]
    fn bfgs_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = bfgs_minimize(&f, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], 500, 1e-9);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m);
    }

    #[test]
    fn bfgs_respects_bounds() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2);
        let m = bfgs_minimize(&f, &[0.0], &[-1.0], &[1.0], 100, 1e-10);
        assert!((m.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invert_2x2() {
        let inv = invert(&[vec![4.0f64, 1.0], vec![1.0, 3.0]]).unwrap();
        let det = 11.0;
        assert!((inv[0][0] - 3.0 / det).abs() < 1e-14);
        assert!((inv[0][1] + 1.0 / det).abs() < 1e-14);
        assert!(invert(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }
}
