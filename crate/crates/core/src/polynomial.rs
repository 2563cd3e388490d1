//! Dense univariate polynomials over a [`Field`].

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Coefficients stored lowest degree first; trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Field> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![T::zero()] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![T::zero(); k + 1];
        c[k] = T::one();
        Polynomial { coeffs: c }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn leading(&self) -> &T {
        self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self, order: usize) -> Self {
        if order > self.degree() {
            return Self::zero();
        }
        let coeffs = (order..self.coeffs.len())
            .map(|k| {
                let mut c = self.coeffs[k].clone();
                for i in 0..order {
                    c = c * T::from_usize(k - i);
                }
                c
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, a: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * a.clone()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).cloned().unwrap_or_else(T::zero);
                let b = other.coeffs.get(k).cloned().unwrap_or_else(T::zero);
                a + b
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    /// `Σ_j c_j · p^{(j)}`, the action of a constant-coefficient
    /// differential operator. The sum is finite on polynomials.
    pub fn apply_derivative_series(&self, coeff: impl Fn(usize) -> T) -> Self {
        (0..=self.degree()).fold(Self::zero(), |acc, j| acc.add(&self.derivative(j).scale(&coeff(j))))
    }
}

impl Polynomial<f64> {
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// A polynomial whose leading coefficient is exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial<T>(Polynomial<T>);

impl<T: Field> MonicPolynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        Self::try_from(Polynomial::new(coeffs))
    }

    pub fn monomial(k: usize) -> Self {
        MonicPolynomial(Polynomial::monomial(k))
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }

    pub fn coeffs(&self) -> &[T] {
        self.0.coeffs()
    }

    pub fn as_poly(&self) -> &Polynomial<T> {
        &self.0
    }

    pub fn into_poly(self) -> Polynomial<T> {
        self.0
    }

    pub fn eval(&self, x: &T) -> T {
        self.0.eval(x)
    }
}

impl MonicPolynomial<f64> {
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0.eval_f64(x)
    }
}

impl<T: Field> TryFrom<Polynomial<T>> for MonicPolynomial<T> {
    type Error = Error;
    fn try_from(p: Polynomial<T>) -> Result<Self> {
        if p.leading().is_one() {
            Ok(MonicPolynomial(p))
        } else {
            Err(Error::InvalidInput(format!("polynomial of degree {} is not monic", p.degree())))
        }
    }
}

impl<T: Field + fmt::Display> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·x")?,
                _ => write!(f, "{c}·x^{k}")?,
            }
        }
        Ok(())
    }
}
