//! Numeric abstraction for derived metrics.
//!
//! Confusion counts are always integers; everything derived from them
//! (precision, recall, F1, AUROC, quantiles, percentages) is computed in a
//! caller-chosen scalar. `f64` is the everyday choice, `f32` is supported for
//! compact reports, and [`Rational`] gives exact arithmetic for oracle checks.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

/// Exact rational scalar.
pub type Rational = Ratio<i128>;

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync {
    fn from_count(n: u64) -> Self;

    fn to_f64(&self) -> f64;

    fn ratio(num: u64, den: u64) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn half() -> Self {
        Self::one() / Self::from_count(2)
    }
}

impl Scalar for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Rational {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(i128::from(n))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn ratio(num: u64, den: u64) -> Self {
        Ratio::new(i128::from(num), i128::from(den))
    }
}
