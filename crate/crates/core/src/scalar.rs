//! Scalar abstraction shared by every floating-point routine in the crate.
//!
//! Exact work (ranks, null spaces, deficiency) never goes through [`Real`];
//! it uses arbitrary-precision rationals in [`crate::exact`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point: f32 or f64.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + std::fmt::LowerExp
    + FromStr
    + Default
    + serde::Serialize
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; used for literal constants.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Falling factorial `n (n-1) ... (n-s+1)`, zero when `s > n`.
pub fn falling<T: Real>(n: u64, s: u64) -> T {
    if s > n {
        return T::zero();
    }
    let mut acc = T::one();
    for j in 0..s {
        acc *= T::from_count(n - j);
    }
    acc
}

/// `x^e` with the convention `0^0 = 1`.
pub fn powi<T: Real>(x: T, e: u64) -> T {
    if e == 0 {
        return T::one();
    }
    let mut acc = T::one();
    let mut base = x;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// Table of `ln(n!)` for `n = 0..=max`.
pub fn ln_factorials<T: Real>(max: u64) -> Vec<T> {
    let mut out = Vec::with_capacity(max as usize + 1);
    let mut acc = T::zero();
    out.push(acc);
    for n in 1..=max {
        acc += T::from_count(n).ln();
        out.push(acc);
    }
    out
}
