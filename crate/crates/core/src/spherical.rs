//! Spherical functions of `U(n)` acting on Hermitian matrices.
//!
//! `φ_s(x) = (∏_{j<n} j!) det[e^{i s_j x_k}] / (i^{n(n-1)/2} Δ(s) Δ(x))`,
//! evaluated with divided differences in `x` and then in `s` so that
//! coincident entries take their limiting values.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::detkit::{cluster_nodes, confluent_det_ratio, newton_coefficients, SmoothFn, SpectralVector, CLUSTER_TOL};
use crate::error::{check_dim, Error, Result};
use crate::rng::map_chunks;
use crate::scalar::{binomial, factorial, superfactorial};

/// A real `n`-vector of spectral parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("frequency vector must have n >= 1".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("frequency vector entries must be finite".into()));
        }
        Ok(FrequencyVector(entries))
    }

    pub fn zeros(n: usize) -> Self {
        FrequencyVector(vec![0.0; n.max(1)])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FrequencyVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for FrequencyVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        FrequencyVector::new(v)
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `i^k` for integer `k`, exactly.
pub fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `n(n-1)/2`
pub fn pair_count(n: usize) -> i64 {
    (n * n.saturating_sub(1) / 2) as i64
}

/// `x ↦ ∂_σ^a e^{iσx} = (ix)^a e^{iσx}` with its `x`-derivatives.
struct MixedExp {
    sigma: f64,
    a: usize,
}

impl SmoothFn for MixedExp {
    fn eval(&self, x: f64) -> Complex64 {
        i_pow(self.a as i64) * x.powi(self.a as i32) * Complex64::new(0.0, self.sigma * x).exp()
    }

    fn derivative(&self, x: f64, b: usize) -> Option<Complex64> {
        // Leibniz on (ix)^a · e^{iσx}
        let e = Complex64::new(0.0, self.sigma * x).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..=self.a.min(b) {
            let coef = binomial(&(b as f64), r) * factorial(self.a) / factorial(self.a - r);
            acc += Complex64::new(0.0, self.sigma).powu((b - r) as u32) * (coef * x.powi((self.a - r) as i32));
        }
        Some(acc * i_pow(self.a as i64) * e)
    }
}

/// `σ ↦ e^{iσ·}[z_0, …, z_k]`, the `k`-th divided difference in `x`.
struct XDivided {
    z: Arc<Vec<f64>>,
    k: usize,
}

impl SmoothFn for XDivided {
    fn eval(&self, sigma: f64) -> Complex64 {
        self.derivative(sigma, 0).unwrap()
    }

    fn derivative(&self, sigma: f64, a: usize) -> Option<Complex64> {
        let z = &self.z[..=self.k];
        newton_coefficients(&MixedExp { sigma, a }, z).ok().map(|c| c[self.k])
    }
}

/// `φ_s(x)`
pub fn spherical_phi(s: &FrequencyVector, x: &SpectralVector) -> Result<Complex64> {
    check_dim(s.n(), x.n())?;
    let n = s.n();
    if s.iter().all(|v| *v == 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let z = Arc::new(cluster_nodes(x, CLUSTER_TOL));
    let family: Vec<Arc<dyn SmoothFn>> =
        (0..n).map(|k| Arc::new(XDivided { z: z.clone(), k }) as Arc<dyn SmoothFn>).collect();
    let ratio = confluent_det_ratio(&family, s, CLUSTER_TOL)?;
    Ok(ratio * superfactorial(n) * i_pow(-pair_count(n)))
}

/// `φ_s(A)` for a Hermitian matrix `A`.
pub fn spherical_phi_matrix(s: &FrequencyVector, a: &DMatrix<Complex64>) -> Result<Complex64> {
    spherical_phi(s, &hermitian_eigenvalues(a)?)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &DMatrix<Complex64>) -> Result<SpectralVector> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!("matrix is {}×{}, not square", a.nrows(), a.ncols())));
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    SpectralVector::new(ev)
}

/// `n × n` matrix of independent standard complex Gaussians (`E|z|² = 1`).
pub fn complex_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(h * re, h * im)
    })
}

/// Haar-distributed unitary matrix: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    assert!(n >= 1);
    let qr = complex_ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

/// Monte Carlo average of `e^{i Tr(S U X U*)}` over Haar `U`.
pub fn spherical_phi_mc(s: &FrequencyVector, x: &SpectralVector, samples: usize, seed: u64) -> Result<McEstimate> {
    check_dim(s.n(), x.n())?;
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let n = s.n();
    if s.iter().all(|v| *v == 0.0) {
        return Ok(McEstimate { estimate: Complex64::new(1.0, 0.0), stderr: 0.0, samples });
    }
    let parts = map_chunks(samples, seed, |rng, count| {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sq = 0.0;
        for _ in 0..count {
            let u = haar_unitary(n, rng);
            let mut tr = 0.0;
            for j in 0..n {
                for k in 0..n {
                    tr += s[j] * x[k] * u[(j, k)].norm_sqr();
                }
            }
            let z = Complex64::new(0.0, tr).exp();
            sum += z;
            sq += z.norm_sqr();
        }
        (sum, sq)
    });
    let (sum, sq) = parts.into_iter().fold((Complex64::new(0.0, 0.0), 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let m = samples as f64;
    let mean = sum / m;
    let var = if samples > 1 { ((sq - m * mean.norm_sqr()) / (m - 1.0)).max(0.0) } else { 0.0 };
    Ok(McEstimate { estimate: mean, stderr: (var / m).sqrt(), samples })
}
