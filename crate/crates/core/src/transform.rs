//! Spherical transforms of unitarily invariant densities.
//!
//! A transform is kept in one of three shapes: a product `∏ φ(s_j)`, a
//! ratio `c · det[h_k(s_j)] / Δ(s)`, or an opaque numeric callable. Products
//! and ratios are closed under multiplication by products, and both invert
//! through one-dimensional Fourier integrals.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::detkit::{central_difference, confluent_det_ratio, FunctionFamily, SmoothFn, SpectralVector, CLUSTER_TOL};
use crate::ensembles::{joint_eigen_density, EnsembleSpec};
use crate::error::{check_dim, Error, Result};
use crate::polynomial::Polynomial;
use crate::quadrature::{composite_legendre, QuadratureRule};
use crate::scalar::{binomial, factorial, superfactorial};
use crate::spherical::{i_pow, pair_count, spherical_phi, FrequencyVector};

/// Largest imaginary part tolerated in an inverted density.
pub const RESIDUE_LIMIT: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Scalar factors in s.

/// `e^{-c s²/2}`
pub struct GaussianFactor {
    pub c: f64,
}

impl SmoothFn for GaussianFactor {
    fn eval(&self, s: f64) -> Complex64 {
        Complex64::new((-self.c * s * s / 2.0).exp(), 0.0)
    }
    fn derivative(&self, s: f64, m: usize) -> Option<Complex64> {
        // P_{m+1} = P_m' - c s P_m
        let mut p = Polynomial::new(vec![1.0]);
        let lin = Polynomial::new(vec![0.0, -self.c]);
        for _ in 0..m {
            p = p.derivative(1).add(&p.mul(&lin));
        }
        Some(Complex64::new(p.eval_f64(s) * (-self.c * s * s / 2.0).exp(), 0.0))
    }
    fn label(&self) -> String {
        format!("exp(-{} s²/2)", self.c)
    }
}

/// `(1 + is)^{-a}`
pub struct LaguerreFactor {
    pub a: f64,
}

impl SmoothFn for LaguerreFactor {
    fn eval(&self, s: f64) -> Complex64 {
        Complex64::new(1.0, s).powf(-self.a)
    }
    fn derivative(&self, s: f64, m: usize) -> Option<Complex64> {
        let fall = binomial(&-self.a, m) * factorial(m);
        Some(i_pow(m as i64) * fall * Complex64::new(1.0, s).powf(-self.a - m as f64))
    }
    fn label(&self) -> String {
        format!("(1+is)^-{}", self.a)
    }
}

/// `coef · s^power`
pub struct MonomialFn {
    pub power: usize,
    pub coef: Complex64,
}

impl SmoothFn for MonomialFn {
    fn eval(&self, s: f64) -> Complex64 {
        self.coef * s.powi(self.power as i32)
    }
    fn derivative(&self, s: f64, m: usize) -> Option<Complex64> {
        if m > self.power {
            return Some(Complex64::new(0.0, 0.0));
        }
        let c = factorial(self.power) / factorial(self.power - m);
        Some(self.coef * c * s.powi((self.power - m) as i32))
    }
    fn label(&self) -> String {
        format!("s^{}", self.power)
    }
}

/// Pointwise product with Leibniz-rule derivatives.
pub struct ProductFn(pub Arc<dyn SmoothFn>, pub Arc<dyn SmoothFn>);

impl SmoothFn for ProductFn {
    fn eval(&self, s: f64) -> Complex64 {
        self.0.eval(s) * self.1.eval(s)
    }
    fn derivative(&self, s: f64, m: usize) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..=m {
            acc += self.0.derivative(s, r)? * self.1.derivative(s, m - r)? * binomial(&(m as f64), r);
        }
        Some(acc)
    }
    fn label(&self) -> String {
        format!("{} · {}", self.0.label(), self.1.label())
    }
}

/// `c · f`
pub struct ScaledFn(pub Complex64, pub Arc<dyn SmoothFn>);

impl SmoothFn for ScaledFn {
    fn eval(&self, s: f64) -> Complex64 {
        self.0 * self.1.eval(s)
    }
    fn derivative(&self, s: f64, m: usize) -> Option<Complex64> {
        self.1.derivative(s, m).map(|v| v * self.0)
    }
    fn label(&self) -> String {
        format!("{} · {}", self.0, self.1.label())
    }
}

pub fn constant_one() -> Arc<dyn SmoothFn> {
    Arc::new(MonomialFn { power: 0, coef: Complex64::new(1.0, 0.0) })
}

fn derivative_or_fd(f: &dyn SmoothFn, s: f64, m: usize, scale: f64) -> Complex64 {
    f.derivative(s, m).unwrap_or_else(|| central_difference(&|t| f.eval(t), s, m, scale))
}

// ---------------------------------------------------------------------------
// Representations.

type NumericFn = Arc<dyn Fn(&[f64]) -> Result<Complex64> + Send + Sync>;

#[derive(Clone)]
pub enum TransformForm {
    /// `∏_j factor(s_j)`
    Product { factor: Arc<dyn SmoothFn> },
    /// `prefactor · det[h_k(s_j)] / Δ(s)`
    DetRatio { h: FunctionFamily, prefactor: Complex64 },
    Numeric { f: NumericFn, label: String },
}

#[derive(Clone)]
pub struct TransformRep {
    pub form: TransformForm,
    pub n: usize,
}

impl TransformRep {
    pub fn product(n: usize, factor: Arc<dyn SmoothFn>) -> Self {
        TransformRep { form: TransformForm::Product { factor }, n }
    }

    pub fn det_ratio(h: FunctionFamily, prefactor: Complex64) -> Self {
        let n = h.len();
        TransformRep { form: TransformForm::DetRatio { h, prefactor }, n }
    }

    pub fn numeric(n: usize, label: impl Into<String>, f: impl Fn(&[f64]) -> Result<Complex64> + Send + Sync + 'static) -> Self {
        TransformRep { form: TransformForm::Numeric { f: Arc::new(f), label: label.into() }, n }
    }

    /// Transform of the point mass at the zero matrix.
    pub fn identity(n: usize) -> Self {
        Self::product(n, constant_one())
    }

    pub fn shape(&self) -> &'static str {
        match self.form {
            TransformForm::Product { .. } => "product",
            TransformForm::DetRatio { .. } => "det-ratio",
            TransformForm::Numeric { .. } => "numeric",
        }
    }

    pub fn evaluate(&self, s: &[f64]) -> Result<Complex64> {
        evaluate(self, s)
    }

    /// The same transform as a determinantal ratio, when it has one.
    /// Products become `h_k(s) = s^{k-1} φ(s)` with unit prefactor.
    pub fn as_det_ratio(&self) -> Option<(FunctionFamily, Complex64)> {
        match &self.form {
            TransformForm::Product { factor } => {
                let h = (0..self.n)
                    .map(|k| {
                        let mono: Arc<dyn SmoothFn> = Arc::new(MonomialFn { power: k, coef: Complex64::new(1.0, 0.0) });
                        Arc::new(ProductFn(mono, factor.clone())) as Arc<dyn SmoothFn>
                    })
                    .collect();
                Some((h, Complex64::new(1.0, 0.0)))
            }
            TransformForm::DetRatio { h, prefactor } => Some((h.clone(), *prefactor)),
            TransformForm::Numeric { .. } => None,
        }
    }
}

impl fmt::Debug for TransformRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            TransformForm::Product { factor } => write!(f, "Product(n={}, {})", self.n, factor.label()),
            TransformForm::DetRatio { h, prefactor } => {
                let labels: Vec<String> = h.iter().map(|g| g.label()).collect();
                write!(f, "DetRatio(n={}, {prefactor}, [{}])", self.n, labels.join("; "))
            }
            TransformForm::Numeric { label, .. } => write!(f, "Numeric(n={}, {label})", self.n),
        }
    }
}

pub fn evaluate(rep: &TransformRep, s: &[f64]) -> Result<Complex64> {
    check_dim(rep.n, s.len())?;
    match &rep.form {
        TransformForm::Product { factor } => Ok(s.iter().map(|&v| factor.eval(v)).product()),
        TransformForm::DetRatio { h, prefactor } => Ok(*prefactor * confluent_det_ratio(h, s, CLUSTER_TOL)?),
        TransformForm::Numeric { f, .. } => f(s),
    }
}

/// Transform of the sum of independent matrices: the pointwise product,
/// kept structured where possible.
pub fn multiply(a: &TransformRep, b: &TransformRep) -> Result<TransformRep> {
    check_dim(a.n, b.n)?;
    use TransformForm::*;
    Ok(match (&a.form, &b.form) {
        (Product { factor: fa }, Product { factor: fb }) => {
            TransformRep::product(a.n, Arc::new(ProductFn(fa.clone(), fb.clone())))
        }
        (Product { factor }, DetRatio { h, prefactor }) | (DetRatio { h, prefactor }, Product { factor }) => {
            let h = h.iter().map(|hk| Arc::new(ProductFn(factor.clone(), hk.clone())) as Arc<dyn SmoothFn>).collect();
            TransformRep::det_ratio(h, *prefactor)
        }
        _ => {
            let (a, b) = (a.clone(), b.clone());
            let label = format!("{a:?} × {b:?}");
            TransformRep::numeric(a.n, label, move |s| Ok(evaluate(&a, s)? * evaluate(&b, s)?))
        }
    })
}

// ---------------------------------------------------------------------------
// Forward transform by quadrature.

/// Largest `n` for the tensor-quadrature forward path.
pub const GENERIC_MAX_N: usize = 3;

/// `f̂(s) = ∫ f(X) φ_s(-X) dX` by quadrature.
///
/// Polynomial ensembles reduce to one-dimensional Fourier integrals of the
/// weights; other ensembles integrate the Weyl-weighted density on a tensor
/// grid of `quad` (with `n ≤ 3`).
pub fn forward_numeric(ens: &EnsembleSpec, s: &FrequencyVector, quad: &QuadratureRule) -> Result<Complex64> {
    check_dim(ens.n(), s.n())?;
    let n = s.n();
    if let Some(cols) = ens.column_weights() {
        // (πi)^N det[∫ w_k e^{-is_j x} dx] / (Δ(s) Z'),  Z' = (πi)^N Z''
        let h: FunctionFamily = cols.iter().map(|w| w.numeric_fourier_fn()).collect();
        let ratio = confluent_det_ratio(&h, s, CLUSTER_TOL)?;
        let mu = ens.moment_matrix()?;
        let det = crate::detkit::determinant(mu.into_iter().map(|r| r.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).collect());
        let z2 = det * i_pow(-pair_count(n)) / superfactorial(n);
        return Ok(ratio / z2);
    }
    if n > GENERIC_MAX_N {
        return Err(Error::DimensionTooLarge { n, max: GENERIC_MAX_N, path: "generic forward transform" });
    }
    let nodes = quad.node_set();
    let distinct = min_gap(s) > 1e-6;
    let pref = Complex64::new(PI, 0.0).powu(pair_count(n) as u32) * i_pow(pair_count(n)) / factorial(n);
    let mut err = None;
    let total = nodes.integrate_tensor(n, |x| {
        let xs = SpectralVector::new(x.to_vec()).unwrap();
        if distinct {
            // matrix density · det[e^{-i s_j x_k}] · Δ(x)
            let f = match crate::ensembles::matrix_density(ens, &xs) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return Complex64::new(0.0, 0.0);
                }
            };
            if f == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let m: Vec<Vec<Complex64>> =
                s.iter().map(|&sj| x.iter().map(|&xk| Complex64::new(0.0, -sj * xk).exp()).collect()).collect();
            crate::detkit::determinant(m) * (f * crate::detkit::vandermonde(x))
        } else {
            let p = match joint_eigen_density(ens, &xs) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return Complex64::new(0.0, 0.0);
                }
            };
            let neg = SpectralVector::new(x.iter().map(|v| -v).collect()).unwrap();
            spherical_phi(s, &neg).unwrap_or(Complex64::new(f64::NAN, 0.0)) * p
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(if distinct { total * pref / crate::detkit::vandermonde(s) } else { total })
}

fn min_gap(v: &[f64]) -> f64 {
    let mut z = v.to_vec();
    z.sort_by(f64::total_cmp);
    z.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Default tensor rule for the generic forward path.
pub fn default_forward_rule(ens: &EnsembleSpec) -> QuadratureRule {
    match ens {
        EnsembleSpec::Lue { alpha, .. } => QuadratureRule::laguerre(60, *alpha),
        _ => QuadratureRule::hermite(48),
    }
}

// ---------------------------------------------------------------------------
// Inversion.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    /// Density of the matrix with respect to Lebesgue measure on Hermitian
    /// matrices, evaluated at any matrix with the given spectrum.
    Matrix,
    /// Joint density of the unordered eigenvalues.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    pub value: f64,
    pub kind: DensityKind,
    /// Absolute imaginary part discarded from the inversion.
    pub residue: f64,
}

impl Density {
    /// Converts between matrix and joint densities with the Weyl factor
    /// `π^{n(n-1)/2} Δ(x)² / ∏_{j=1}^n j!`.
    pub fn to_kind(self, kind: DensityKind, x: &[f64]) -> Density {
        if kind == self.kind {
            return self;
        }
        let w = weyl_factor(x);
        let (value, residue) = match kind {
            DensityKind::Joint => (self.value * w, self.residue * w),
            DensityKind::Matrix => (self.value / w, self.residue / w),
        };
        Density { value, kind, residue }
    }
}

/// `π^{n(n-1)/2} Δ(x)² / ∏_{j=1}^n j!`
pub fn weyl_factor(x: &[f64]) -> f64 {
    let n = x.len();
    let d = crate::detkit::vandermonde(x);
    PI.powi(pair_count(n) as i32) * d * d / superfactorial(n + 1)
}

/// Panels for the inverse Fourier integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Upper bound on the truncation frequency.
    pub s_max: f64,
    /// Relative size below which `|h(±S)|` counts as negligible.
    pub cutoff: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions { order: 16, s_max: 256.0, cutoff: 1e-17 }
    }
}

/// `x ↦ (1/2π) ∫ h(s) e^{isx} ds` with `x`-derivatives
/// `(1/2π) ∫ (is)^m h(s) e^{isx} ds`.
pub struct InverseFourier {
    pub h: Arc<dyn SmoothFn>,
    pub opts: InverseOptions,
}

impl InverseFourier {
    pub fn new(h: Arc<dyn SmoothFn>) -> Self {
        InverseFourier { h, opts: InverseOptions::default() }
    }

    /// `(1/2π) ∫ g(s) e^{isx} ds` over the line: composite Gauss–Legendre on
    /// `[-S, S]` plus an asymptotic integration-by-parts tail.
    fn integral(&self, g: &dyn SmoothFn, x: f64) -> Result<Complex64> {
        let o = self.opts;
        let peak = [0.0, 0.5, -0.5, 1.0, -1.0].iter().map(|&s| g.eval(s).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut big_s = 8.0;
        let small = |s: f64| g.eval(s).norm().max(g.eval(-s).norm()) <= o.cutoff * peak;
        while !small(big_s) && big_s < o.s_max {
            big_s *= 2.0;
        }
        let width = if x == 0.0 { 0.5 } else { (PI / x.abs()).min(0.5) };
        let body = composite_legendre(-big_s, big_s, width, o.order, |s| g.eval(s) * Complex64::new(0.0, s * x).exp());
        let tail = if small(big_s) {
            Complex64::new(0.0, 0.0)
        } else {
            if x == 0.0 {
                return Err(Error::NonIntegrable(format!("|h(±{big_s})| has not decayed and x = 0")));
            }
            tail_correction(g, x, big_s)?
        };
        Ok((body + tail) / (2.0 * PI))
    }
}

/// `∫_{|s|>S} g(s) e^{isx} ds` from the asymptotic expansion
/// `∓ e^{±iSx} Σ_m (-1)^m g^{(m)}(±S) / (ix)^{m+1}`.
fn tail_correction(g: &dyn SmoothFn, x: f64, big_s: f64) -> Result<Complex64> {
    let ix = Complex64::new(0.0, x);
    let mut total = Complex64::new(0.0, 0.0);
    for (sign, at) in [(-1.0, big_s), (1.0, -big_s)] {
        let e = Complex64::new(0.0, at * x).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut last = f64::INFINITY;
        for m in 0..12 {
            let d = derivative_or_fd(g, at, m, big_s / 16.0);
            let term = d * (-1f64).powi(m as i32) / ix.powu(m as u32 + 1);
            if term.norm() > last {
                break;
            }
            last = term.norm();
            acc += term;
            if term.norm() <= 1e-17 * acc.norm() {
                break;
            }
        }
        total += e * acc * sign;
    }
    Ok(total)
}

impl SmoothFn for InverseFourier {
    fn eval(&self, x: f64) -> Complex64 {
        self.integral(self.h.as_ref(), x).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
    fn derivative(&self, x: f64, m: usize) -> Option<Complex64> {
        let mono: Arc<dyn SmoothFn> = Arc::new(MonomialFn { power: m, coef: i_pow(m as i64) });
        let g = ProductFn(mono, self.h.clone());
        self.integral(&g, x).ok()
    }
    fn label(&self) -> String {
        format!("F^-1[{}]", self.h.label())
    }
}

/// Density at `x` recovered from its transform.
///
/// Ratios and products reduce to `(πi)^{-N} c · det[H_k(x_j)] / Δ(x)` with
/// `H_k` the inverse Fourier transform of `h_k`. Numeric transforms are
/// integrated directly on a tensor grid and are limited to `n ≤ 2`.
pub fn inverse(rep: &TransformRep, x: &SpectralVector, kind: DensityKind) -> Result<Density> {
    inverse_with(rep, x, kind, InverseOptions::default())
}

pub fn inverse_with(rep: &TransformRep, x: &SpectralVector, kind: DensityKind, opts: InverseOptions) -> Result<Density> {
    check_dim(rep.n, x.n())?;
    let n = rep.n;
    let z = match rep.as_det_ratio() {
        Some((h, prefactor)) => {
            let big_h: FunctionFamily =
                h.into_iter().map(|hk| Arc::new(InverseFourier { h: hk, opts }) as Arc<dyn SmoothFn>).collect();
            let ratio = confluent_det_ratio(&big_h, x, CLUSTER_TOL)?;
            ratio * prefactor * Complex64::new(PI, 0.0).powi(-(pair_count(n) as i32)) * i_pow(-pair_count(n))
        }
        None => numeric_inverse(rep, x)?,
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonIntegrable(format!("inverse transform at {x} is not finite")));
    }
    let scale = z.re.abs().max(1.0);
    if z.im.abs() > RESIDUE_LIMIT * scale {
        return Err(Error::ImaginaryResidue { residue: z.im.abs(), limit: RESIDUE_LIMIT * scale });
    }
    Ok(Density { value: z.re, kind: DensityKind::Matrix, residue: z.im.abs() }.to_kind(kind, x))
}

/// Largest `n` for inverting an opaque numeric transform.
pub const NUMERIC_INVERSE_MAX_N: usize = 2;

fn numeric_inverse(rep: &TransformRep, x: &SpectralVector) -> Result<Complex64> {
    let n = rep.n;
    if n > NUMERIC_INVERSE_MAX_N {
        return Err(Error::DimensionTooLarge { n, max: NUMERIC_INVERSE_MAX_N, path: "numeric inversion" });
    }
    // f(x) = (πi)^{-N} / ((2π)^n n!) ∫ f̂(s) φ-kernel, written with the
    // spherical function: f(x) = c ∫ f̂(s) φ_s(x) Δ(s)² ds
    let c = 1.0 / ((2.0 * PI).powi(n as i32) * PI.powi(pair_count(n) as i32) * superfactorial(n + 1));
    let big_s = 24.0;
    let rule = QuadratureRule::legendre(8, -1.0, 1.0).node_set();
    let panels = 96;
    let width = 2.0 * big_s / panels as f64;
    let mut nodes = Vec::with_capacity(panels * rule.len());
    let mut weights = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let mid = -big_s + (p as f64 + 0.5) * width;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push(mid + 0.5 * width * t);
            weights.push(0.5 * width * w);
        }
    }
    let set = crate::quadrature::NodeSet { nodes, weights };
    let mut err = None;
    let total = set.integrate_tensor(n, |s| {
        let f = match evaluate(rep, s) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                return Complex64::new(0.0, 0.0);
            }
        };
        let d = crate::detkit::vandermonde(s);
        let phi = spherical_phi(&FrequencyVector::new(s.to_vec()).unwrap(), x).unwrap_or(Complex64::new(f64::NAN, 0.0));
        f * phi * (d * d)
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total * c)
}
