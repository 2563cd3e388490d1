//! Determinant kernels: Vandermonde products, LU determinants, confluent
//! det-over-Vandermonde ratios via Hermite divided differences, and the
//! Andreief reduction of an `n`-fold integral to a Gram determinant.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::quadrature::QuadratureRule;
use crate::scalar::{factorial, Field};

/// Default clustering tolerance (relative) for confluent evaluation.
pub const CLUSTER_TOL: f64 = 1e-8;

/// A real `n`-vector of eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector(Vec<f64>);

impl SpectralVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("spectral vector must have n >= 1".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("spectral vector entries must be finite".into()));
        }
        Ok(SpectralVector(entries))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for SpectralVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for SpectralVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SpectralVector::new(v)
    }
}

/// A scalar function of one real variable with access to its derivatives.
pub trait SmoothFn: Send + Sync {
    fn eval(&self, x: f64) -> Complex64;

    /// `order`-th derivative at `x`, or `None` when that order is not
    /// available.
    fn derivative(&self, x: f64, order: usize) -> Option<Complex64> {
        (order == 0).then(|| self.eval(x))
    }

    fn label(&self) -> String {
        "function".to_string()
    }
}

/// Ordered list of functions `g_1 .. g_n`.
pub type FunctionFamily = Vec<Arc<dyn SmoothFn>>;

/// A [`SmoothFn`] backed by a closure `(x, order) -> value`.
pub struct ClosureFn<F> {
    f: F,
    max_order: usize,
    label: String,
}

impl<F> ClosureFn<F>
where
    F: Fn(f64, usize) -> Complex64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, max_order: usize, f: F) -> Self {
        ClosureFn { f, max_order, label: label.into() }
    }

    pub fn shared(label: impl Into<String>, max_order: usize, f: F) -> Arc<dyn SmoothFn>
    where
        F: 'static,
    {
        Arc::new(Self::new(label, max_order, f))
    }
}

impl<F> SmoothFn for ClosureFn<F>
where
    F: Fn(f64, usize) -> Complex64 + Send + Sync,
{
    fn eval(&self, x: f64) -> Complex64 {
        (self.f)(x, 0)
    }
    fn derivative(&self, x: f64, order: usize) -> Option<Complex64> {
        (order <= self.max_order).then(|| (self.f)(x, order))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Wraps a plain evaluator and supplies derivatives by central finite
/// differences of fourth-order accuracy.
pub struct FiniteDifference<F> {
    f: F,
    scale: f64,
    max_order: usize,
}

impl<F: Fn(f64) -> Complex64 + Send + Sync> FiniteDifference<F> {
    pub fn new(f: F, scale: f64, max_order: usize) -> Self {
        FiniteDifference { f, scale, max_order }
    }
}

impl<F: Fn(f64) -> Complex64 + Send + Sync> SmoothFn for FiniteDifference<F> {
    fn eval(&self, x: f64) -> Complex64 {
        (self.f)(x)
    }
    fn derivative(&self, x: f64, order: usize) -> Option<Complex64> {
        if order == 0 {
            return Some((self.f)(x));
        }
        if order > self.max_order {
            return None;
        }
        Some(central_difference(&self.f, x, order, self.scale))
    }
    fn label(&self) -> String {
        "finite-difference".into()
    }
}

/// `order`-th derivative by a central stencil with fourth-order accuracy.
pub fn central_difference<F: Fn(f64) -> Complex64>(f: &F, x: f64, order: usize, scale: f64) -> Complex64 {
    let half = order.div_ceil(2) + 1;
    let h = f64::EPSILON.powf(1.0 / (order as f64 + 4.0)) * scale.max(f64::MIN_POSITIVE);
    let offsets: Vec<f64> = (-(half as i64)..=(half as i64)).map(|k| k as f64).collect();
    let weights = fornberg_weights(&offsets, order);
    let mut acc = Complex64::new(0.0, 0.0);
    for (o, w) in offsets.iter().zip(&weights) {
        if *w != 0.0 {
            acc += f(x + o * h) * *w;
        }
    }
    acc / h.powi(order as i32)
}

/// Finite-difference weights at 0 for the `m`-th derivative on the given
/// (unit-step) offsets.
pub fn fornberg_weights(offsets: &[f64], m: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// `∏_{j<k} (v_k - v_j)`.
pub fn vandermonde<T: Field>(v: &[T]) -> T {
    let mut acc = T::one();
    for k in 0..v.len() {
        for j in 0..k {
            acc = acc * (v[k].clone() - v[j].clone());
        }
    }
    acc
}

/// Determinant by LU factorisation with partial pivoting.
pub fn determinant<T: Field>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].magnitude().total_cmp(&a[j][col].magnitude()))
            .unwrap();
        if a[pivot][col].is_zero() {
            return T::zero();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / p.clone();
            for k in col..n {
                let sub = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - sub;
            }
        }
    }
    det
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T: Field>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].magnitude().total_cmp(&a[j][col].magnitude()))?;
        if a[pivot][col].is_zero() {
            return None;
        }
        a.swap(pivot, col);
        b.swap(pivot, col);
        for row in col + 1..n {
            let factor = a[row][col].clone() / a[col][col].clone();
            for k in col..n {
                let sub = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - sub;
            }
            let sub = factor * b[col].clone();
            b[row] = b[row].clone() - sub;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Some(x)
}

/// Sorted nodes with clusters (consecutive gaps within `tol` relative to the
/// spread of `v`) replaced by their mean.
pub fn cluster_nodes(v: &[f64], tol: f64) -> Vec<f64> {
    let mut z = v.to_vec();
    z.sort_by(f64::total_cmp);
    let scale = z.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mut out = Vec::with_capacity(z.len());
    let mut start = 0;
    for i in 1..=z.len() {
        if i == z.len() || z[i] - z[i - 1] > tol * scale {
            let mean = z[start..i].iter().sum::<f64>() / (i - start) as f64;
            out.extend(std::iter::repeat_n(mean, i - start));
            start = i;
        }
    }
    out
}

/// Leading divided differences `g[z_0], g[z_0, z_1], …, g[z_0, …, z_{m-1}]`
/// over sorted nodes. Repeated nodes take derivative values divided by
/// factorials (Hermite table).
pub fn newton_coefficients(g: &dyn SmoothFn, z: &[f64]) -> Result<Vec<Complex64>> {
    let m = z.len();
    let mut col: Vec<Complex64> = z.iter().map(|&x| g.eval(x)).collect();
    let mut out = Vec::with_capacity(m);
    out.push(col[0]);
    for k in 1..m {
        let mut next = Vec::with_capacity(m - k);
        for i in 0..m - k {
            let v = if z[i + k] == z[i] {
                let d = g.derivative(z[i], k).ok_or_else(|| Error::MissingDerivative { order: k, what: g.label() })?;
                d / factorial(k)
            } else {
                (col[i + 1] - col[i]) / (z[i + k] - z[i])
            };
            next.push(v);
        }
        out.push(next[0]);
        col = next;
    }
    Ok(out)
}

/// `det[g_j(v_k)] / Δ_n(v)`, continuous across coincident entries of `v`.
pub fn confluent_det_ratio(g: &[Arc<dyn SmoothFn>], v: &[f64], cluster_tol: f64) -> Result<Complex64> {
    check_dim(v.len(), g.len())?;
    let z = cluster_nodes(v, cluster_tol);
    let rows = g.iter().map(|gj| newton_coefficients(gj.as_ref(), &z)).collect::<Result<Vec<_>>>()?;
    Ok(determinant(rows))
}

/// `n! det[∫ f_j(x) g_k(x) dx]`, the right side of the Andreief identity.
pub fn andreief_det(f: &[Arc<dyn SmoothFn>], g: &[Arc<dyn SmoothFn>], quad: &QuadratureRule) -> Result<Complex64> {
    check_dim(f.len(), g.len())?;
    let n = f.len();
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (j, fj) in f.iter().enumerate() {
        for (k, gk) in g.iter().enumerate() {
            gram[j][k] = quad.integrate_complex(|x| fj.eval(x) * gk.eval(x))?;
        }
    }
    Ok(determinant(gram) * factorial(n))
}

impl fmt::Display for SpectralVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Domain;
    use num_rational::BigRational;

    fn monomials(n: usize) -> FunctionFamily {
        (0..n)
            .map(|j| {
                ClosureFn::shared(format!("x^{j}"), usize::MAX, move |x: f64, k: usize| {
                    if k > j {
                        return Complex64::new(0.0, 0.0);
                    }
                    let c = factorial(j) / factorial(j - k);
                    Complex64::new(c * x.powi((j - k) as i32), 0.0)
                })
            })
            .collect()
    }

    fn exponentials(s: &[f64]) -> FunctionFamily {
        s.iter()
            .map(|&sj| {
                ClosureFn::shared("exp", usize::MAX, move |x: f64, k: usize| {
                    Complex64::new(0.0, sj).powu(k as u32) * Complex64::new(0.0, sj * x).exp()
                })
            })
            .collect()
    }

    fn naive_ratio(g: &FunctionFamily, v: &[f64]) -> Complex64 {
        let m: Vec<Vec<Complex64>> = g.iter().map(|gj| v.iter().map(|&x| gj.eval(x)).collect()).collect();
        determinant(m) / vandermonde(v)
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde(&[5.0]), 1.0);
        assert_eq!(vandermonde(&[0.0, 1.0, 2.0]), 2.0);
        assert_eq!(vandermonde(&[1.0, 2.0, 4.0]), 6.0);
        assert_eq!(vandermonde(&[2.0, 1.0, 4.0]), -6.0);
        let r: Vec<BigRational> = [1, 2, 4].iter().map(|&k| BigRational::from_i64(k)).collect();
        assert_eq!(vandermonde(&r), BigRational::from_i64(6));
    }

    #[test]
    fn determinant_small() {
        let m: Vec<Vec<f64>> = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        assert!((determinant(m) - 5.0).abs() < 1e-15);
        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(determinant(singular), 0.0);
        let perm = vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(determinant(perm), -1.0);
    }

    #[test]
    fn solve_recovers_solution() {
        let a = vec![vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 2.0]];
        let x = solve(a.clone(), vec![1.0, 2.0, 3.0]).unwrap();
        for (row, b) in a.iter().zip([1.0, 2.0, 3.0]) {
            let lhs: f64 = row.iter().zip(&x).map(|(p, q)| p * q).sum();
            assert!((lhs - b).abs() < 1e-14);
        }
    }

    #[test]
    fn monomial_ratio_is_one_even_when_confluent() {
        let g = monomials(3);
        for v in [[0.3, -1.0, 2.0], [1.0, 1.0, 1.0], [0.5, 0.5, 2.0]] {
            let r = confluent_det_ratio(&g, &v, CLUSTER_TOL).unwrap();
            assert!((r - 1.0).norm() < 1e-12, "{v:?}: {r}");
        }
    }

    #[test]
    fn exponential_limit_matches_perturbation() {
        let a = 0.4;
        let g = exponentials(&[0.3, -0.2]);
        let conf = confluent_det_ratio(&g, &[a, a], CLUSTER_TOL).unwrap();
        let pert = naive_ratio(&g, &[a, a + 1e-5]);
        assert!((conf - pert).norm() < 1e-6, "{conf} vs {pert}");

        // larger frequencies: the one-sided gap is first order in ε, the
        // centred one second order
        let g = exponentials(&[0.7, -1.3]);
        let conf = confluent_det_ratio(&g, &[a, a], CLUSTER_TOL).unwrap();
        let one_sided = |eps: f64| (naive_ratio(&g, &[a, a + eps]) - conf).norm();
        assert!(one_sided(1e-4) / one_sided(1e-3) < 0.11);
        let centred = naive_ratio(&g, &[a - 5e-6, a + 5e-6]);
        assert!((conf - centred).norm() < 1e-9, "{conf} vs {centred}");
    }

    #[test]
    fn distinct_points_agree_with_naive() {
        let g = exponentials(&[0.2, 1.1, -0.6, 2.0]);
        let v = [-1.2, 0.1, 0.9, 2.3];
        let a = confluent_det_ratio(&g, &v, CLUSTER_TOL).unwrap();
        let b = naive_ratio(&g, &v);
        assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn missing_derivative_is_reported() {
        let g: FunctionFamily = vec![
            ClosureFn::shared("no-deriv", 0, |x: f64, _| Complex64::new(x.sin(), 0.0)),
            ClosureFn::shared("no-deriv", 0, |x: f64, _| Complex64::new(x.cos(), 0.0)),
        ];
        assert!(confluent_det_ratio(&g, &[0.1, 0.5], CLUSTER_TOL).is_ok());
        assert!(matches!(
            confluent_det_ratio(&g, &[0.1, 0.1], CLUSTER_TOL),
            Err(Error::MissingDerivative { order: 1, .. })
        ));
    }

    #[test]
    fn finite_difference_derivatives() {
        let f = FiniteDifference::new(|x: f64| Complex64::new(x.sin(), 0.0), 1.0, 4);
        let x = 0.3;
        assert!((f.derivative(x, 1).unwrap().re - x.cos()).abs() < 1e-10);
        assert!((f.derivative(x, 2).unwrap().re + x.sin()).abs() < 1e-8);
        assert!((f.derivative(x, 3).unwrap().re + x.cos()).abs() < 1e-6);
        assert!(f.derivative(x, 5).is_none());
    }

    #[test]
    fn andreief_single_and_biorthonormal() {
        let one: FunctionFamily = vec![ClosureFn::shared("1", 0, |_, _| Complex64::new(1.0, 0.0))];
        let quad = QuadratureRule::legendre(4, 0.0, 1.0);
        assert!((andreief_det(&one, &one, &quad).unwrap() - 1.0).norm() < 1e-14);

        // shifted Legendre polynomials are orthonormal on [0, 1] after scaling
        let p: FunctionFamily = vec![
            ClosureFn::shared("P0", 0, |_, _| Complex64::new(1.0, 0.0)),
            ClosureFn::shared("P1", 0, |x: f64, _| Complex64::new(3f64.sqrt() * (2.0 * x - 1.0), 0.0)),
        ];
        let v = andreief_det(&p, &p, &quad).unwrap();
        assert!((v - 2.0).norm() < 1e-13);
    }

    #[test]
    fn adaptive_andreief_reports_nonconvergence() {
        let wild: FunctionFamily = vec![ClosureFn::shared("wild", 0, |x: f64, _| Complex64::new((1.0 / x).sin() / x, 0.0))];
        let quad = QuadratureRule::Adaptive { domain: Domain::Interval(0.0, 1.0), tol: 1e-14 };
        assert!(matches!(andreief_det(&wild, &wild, &quad), Err(Error::QuadratureNonConvergence { .. })));
    }
}
