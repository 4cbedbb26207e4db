use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar used throughout the estimators: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssignOps
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    /// Tolerance suited to the precision of the type (`1e-8` floor for `f64`).
    #[inline]
    fn quad_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sorts a copy of `data` ascending. NaNs sort last.
pub fn sorted<T: Real>(data: &[T]) -> Vec<T> {
    let mut v = data.to_vec();
    sort_in_place(&mut v);
    v
}

pub fn sort_in_place<T: Real>(v: &mut [T]) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or_else(|| a.is_nan().cmp(&b.is_nan())));
}

pub fn mean<T: Real>(data: &[T]) -> T {
    let n = T::from_usize_lossy(data.len());
    data.iter().fold(T::zero(), |acc, &x| acc + x) / n
}

/// Unbiased (n - 1) sample variance.
pub fn variance<T: Real>(data: &[T]) -> T {
    let m = mean(data);
    let ss = data.iter().fold(T::zero(), |acc, &x| acc + (x - m) * (x - m));
    ss / T::from_usize_lossy(data.len() - 1)
}

/// Median of an ascending slice.
pub fn median_sorted<T: Real>(v: &[T]) -> T {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) * T::half()
    }
}

pub fn median<T: Real>(data: &[T]) -> T {
    median_sorted(&sorted(data))
}
