//! Scalar abstraction for the algebraic layer.
//!
//! Determinants, Vandermonde products, polynomials and the smoothing
//! operators on polynomials only need field arithmetic, so they are written
//! once over [`Field`] and instantiated with `f32`, `f64`, `Complex64` or
//! exact rationals.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

pub trait Field: Clone + Debug + PartialEq + Num + Neg<Output = Self> {
    fn from_i64(v: i64) -> Self;

    /// Size used for pivot selection. Exact types only need it to be
    /// nonzero for nonzero values.
    fn magnitude(&self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_i64(v as i64)
    }
}

impl Field for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }
    fn magnitude(&self) -> f64 {
        self.abs() as f64
    }
}

impl Field for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Field for Complex<f64> {
    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Field for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
}

/// Generalised binomial coefficient `binom(a, j)` as a falling-factorial
/// product, exact whenever `a` is.
pub fn binomial<T: Field>(a: &T, j: usize) -> T {
    let mut acc = T::one();
    for i in 0..j {
        acc = acc * (a.clone() - T::from_usize(i)) / T::from_usize(i + 1);
    }
    acc
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `∏_{j=0}^{n-1} j!`
pub fn superfactorial(n: usize) -> f64 {
    (0..n).map(factorial).product()
}
