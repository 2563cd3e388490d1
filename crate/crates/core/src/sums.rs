//! Sums of independent invariant ensembles.
//!
//! Adding a GUE, an LUE or a derivative-type ensemble to a polynomial
//! ensemble gives another polynomial ensemble whose weights are convolutions
//! of the original ones. Other pairs go through generic transform inversion.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::detkit::{confluent_det_ratio, vandermonde, FunctionFamily, SmoothFn, SpectralVector, CLUSTER_TOL};
use crate::ensembles::{joint_eigen_density, matrix_density, transform_of, EnsembleSpec};
use crate::error::{check_dim, Error, Result};
use crate::quadrature::integrate_pieces;
use crate::scalar::{binomial, factorial};
use crate::transform::{inverse, multiply, Density, DensityKind, TransformForm};
use crate::weights::{laguerre_weight, Weight};

const SUM_TOL: f64 = 1e-11;

/// Which construction produced a sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumPath {
    AddGue,
    AddLue,
    AddDpe,
    AddDpePe,
    /// Both transforms are products; inverted factor by factor.
    ProductInverse,
    /// Opaque transform inverted on a tensor grid.
    GenericInverse,
}

impl fmt::Display for SumPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SumPath::AddGue => "add_gue",
            SumPath::AddLue => "add_lue",
            SumPath::AddDpe => "add_dpe",
            SumPath::AddDpePe => "add_dpe_pe",
            SumPath::ProductInverse => "product_inverse",
            SumPath::GenericInverse => "generic_inverse",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumDensity {
    pub density: Density,
    pub path: SumPath,
}

fn pe_weights(pe: &EnsembleSpec) -> Result<Vec<Weight>> {
    match pe.to_pe()? {
        EnsembleSpec::Pe(p) => Ok(p.weights().to_vec()),
        _ => unreachable!("to_pe returns a polynomial ensemble"),
    }
}

/// `PE(g_1..g_n)` with `g_k = e^{-x²/2} ∗ f_k`: eigenvalues of `X + G`, `G`
/// from the GUE.
pub fn add_gue(pe: &EnsembleSpec) -> Result<EnsembleSpec> {
    add_dpe_pe(&Weight::standard_gaussian(), pe)
}

/// `PE(g_1..g_n)` with `g_k(y) = ∫_0^∞ x^{α+n-1} e^{-x} f_k(y-x) dx`:
/// eigenvalues of `X + L`, `L` from LUE(α).
pub fn add_lue(pe: &EnsembleSpec, alpha: f64) -> Result<EnsembleSpec> {
    let n = pe.n();
    add_dpe_pe(&laguerre_weight(alpha, alpha + n as f64 - 1.0)?, pe)
}

/// Sum of two derivative-type ensembles of size `n`.
pub fn add_dpe(n: usize, w1: &Weight, w2: &Weight) -> Result<EnsembleSpec> {
    EnsembleSpec::dpe(n, w1.convolve(w2))
}

/// `PE(w ∗ f_1, …, w ∗ f_n)`: a polynomial ensemble plus the derivative-type
/// ensemble generated by `w`.
pub fn add_dpe_pe(w: &Weight, pe: &EnsembleSpec) -> Result<EnsembleSpec> {
    let weights = pe_weights(pe)?;
    EnsembleSpec::pe(weights.iter().map(|f| w.convolve(f)).collect())
}

/// The sum as a (derivative-type) polynomial ensemble, when one of the
/// corollaries applies.
pub fn sum_ensemble(a: &EnsembleSpec, b: &EnsembleSpec) -> Result<(EnsembleSpec, SumPath)> {
    check_dim(a.n(), b.n())?;
    use EnsembleSpec::*;
    Ok(match (a, b) {
        (Dpe(x), Dpe(y)) => (add_dpe(a.n(), x.generator(), y.generator())?, SumPath::AddDpe),
        (_, Gue { .. }) => (add_gue(a)?, SumPath::AddGue),
        (Gue { .. }, _) => (add_gue(b)?, SumPath::AddGue),
        (_, Lue { alpha, .. }) => (add_lue(a, *alpha)?, SumPath::AddLue),
        (Lue { alpha, .. }, _) => (add_lue(b, *alpha)?, SumPath::AddLue),
        (_, Dpe(y)) => (add_dpe_pe(y.generator(), a)?, SumPath::AddDpePe),
        (Dpe(x), _) => (add_dpe_pe(x.generator(), b)?, SumPath::AddDpePe),
        (Pe(_), Pe(_)) => {
            return Err(Error::Unsupported("the sum of two general polynomial ensembles is not a polynomial ensemble".into()))
        }
    })
}

fn is_product(e: &EnsembleSpec) -> bool {
    matches!(e, EnsembleSpec::Gue { .. } | EnsembleSpec::Lue { .. } | EnsembleSpec::Dpe(_))
}

/// Density of `X + Y` at spectrum `x`, choosing the cheapest structured path.
pub fn sum_density(a: &EnsembleSpec, b: &EnsembleSpec, x: &SpectralVector, kind: DensityKind) -> Result<SumDensity> {
    check_dim(a.n(), b.n())?;
    check_dim(a.n(), x.n())?;
    if is_product(a) && is_product(b) {
        let density = sum_density_generic(a, b, x, kind)?;
        return Ok(SumDensity { density, path: SumPath::ProductInverse });
    }
    match sum_ensemble(a, b) {
        Ok((ens, path)) => {
            let value = match kind {
                DensityKind::Joint => joint_eigen_density(&ens, x)?,
                DensityKind::Matrix => matrix_density(&ens, x)?,
            };
            Ok(SumDensity { density: Density { value, kind, residue: 0.0 }, path })
        }
        Err(Error::Unsupported(_)) => {
            let density = sum_density_generic(a, b, x, kind)?;
            Ok(SumDensity { density, path: SumPath::GenericInverse })
        }
        Err(e) => Err(e),
    }
}

/// `inverse(multiply(transform_of(a), transform_of(b)), x)`.
pub fn sum_density_generic(a: &EnsembleSpec, b: &EnsembleSpec, x: &SpectralVector, kind: DensityKind) -> Result<Density> {
    let rep = multiply(&transform_of(a)?, &transform_of(b)?)?;
    if let TransformForm::Numeric { .. } = rep.form {
        // numeric products are only invertible on small tensor grids
        if x.n() > crate::transform::NUMERIC_INVERSE_MAX_N {
            return Err(Error::DimensionTooLarge {
                n: x.n(),
                max: crate::transform::NUMERIC_INVERSE_MAX_N,
                path: "generic inversion",
            });
        }
    }
    inverse(&rep, x, kind)
}

// ---------------------------------------------------------------------------
// Fixed matrix plus LUE.

/// `x ↦ u(y - x)` for the shift kernel `u(t) = t_+^p e^{-t}`.
struct Reflected {
    u: Weight,
    y: f64,
}

impl SmoothFn for Reflected {
    fn eval(&self, x: f64) -> Complex64 {
        Complex64::new(self.u.eval_from(0.0, self.y - x), 0.0)
    }
    fn derivative(&self, x: f64, order: usize) -> Option<Complex64> {
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        self.u.derivative(self.y - x, order).map(|d| Complex64::new(sign * d, 0.0))
    }
    fn label(&self) -> String {
        format!("u({} - x)", self.y)
    }
}

/// `1 / (n! Γ(α+n)^n)`, the constant of [`lue_fixed_shift_density`].
pub fn fixed_shift_constant(n: usize, alpha: f64) -> f64 {
    (-(factorial(n).ln() + n as f64 * ln_gamma(alpha + n as f64))).exp()
}

/// `Δ(y)/Δ(x) det[(y_j - x_k)_+^{α+n-1} e^{-(y_j - x_k)}]` without constant.
fn fixed_shift_kernel(x_fixed: &SpectralVector, alpha: f64, y: &[f64]) -> Result<f64> {
    let n = x_fixed.n();
    let u = laguerre_weight(alpha, alpha + n as f64 - 1.0)?;
    let fam: FunctionFamily = y.iter().map(|&yj| Arc::new(Reflected { u: u.clone(), y: yj }) as Arc<dyn SmoothFn>).collect();
    let ratio = confluent_det_ratio(&fam, x_fixed, CLUSTER_TOL)?;
    Ok(vandermonde(y) * ratio.re)
}

/// Joint eigenvalue density of `X + L` with `X` fixed with spectrum
/// `x_fixed` and `L` from LUE(α):
/// `C Δ(y)/Δ(x) det[(y_j - x_k)_+^{α+n-1} e^{-(y_j - x_k)}]`,
/// `C = 1/(n! Γ(α+n)^n)`. Coincident `x_fixed` entries use the confluent
/// limit.
pub fn lue_fixed_shift_density(x_fixed: &SpectralVector, alpha: f64, y: &SpectralVector) -> Result<f64> {
    check_dim(x_fixed.n(), y.n())?;
    if !(alpha > -1.0) {
        return Err(Error::InvalidInput(format!("LUE parameter must exceed -1, got {alpha}")));
    }
    let lo = x_fixed.iter().copied().fold(f64::INFINITY, f64::min);
    if y.iter().any(|&v| v <= lo) {
        return Ok(0.0);
    }
    Ok(fixed_shift_constant(x_fixed.n(), alpha) * fixed_shift_kernel(x_fixed, alpha, y)?)
}

/// The constant of [`lue_fixed_shift_density`] fitted by integrating the
/// unnormalised density over `y`; `n ≤ 2`.
pub fn fit_fixed_shift_constant(x_fixed: &SpectralVector, alpha: f64) -> Result<f64> {
    let n = x_fixed.n();
    let lo = x_fixed.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x_fixed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut breaks: Vec<f64> = x_fixed.to_vec();
    breaks.extend([1.0, 4.0, 16.0, 40.0].map(|k| hi + k));
    let one = |f: &dyn Fn(f64) -> f64, tol: f64| {
        integrate_pieces(|t| Complex64::new(f(t), 0.0), Some(lo), None, &breaks, hi, tol).into_result().map(|c| c.re)
    };
    let total = match n {
        1 => one(&|y| fixed_shift_kernel(x_fixed, alpha, &[y]).unwrap_or(f64::NAN), SUM_TOL)?,
        2 => {
            let failure = std::sync::Mutex::new(None);
            let inner = |y1: f64| {
                one(&|y2| fixed_shift_kernel(x_fixed, alpha, &[y1, y2]).unwrap_or(f64::NAN), SUM_TOL).unwrap_or_else(|e| {
                    *failure.lock().unwrap() = Some(e);
                    0.0
                })
            };
            let total = one(&inner, 1e-9)?;
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            total
        }
        _ => return Err(Error::DimensionTooLarge { n, max: 2, path: "fixed-shift constant fit" }),
    };
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::NonIntegrable(format!("fixed-shift density integrates to {total}")));
    }
    Ok(1.0 / total)
}

/// The polynomial ensemble of `X + L` for fixed `X`: weights
/// `(y - x_k)_+^{α+n-1} e^{-(y - x_k)}`, with `x`-derivatives of the weight
/// replacing repeated entries.
pub fn fixed_shift_ensemble(x_fixed: &SpectralVector, alpha: f64) -> Result<EnsembleSpec> {
    let n = x_fixed.n();
    if !(alpha > -1.0) {
        return Err(Error::InvalidInput(format!("LUE parameter must exceed -1, got {alpha}")));
    }
    let p = alpha + n as f64 - 1.0;
    let mut xs = x_fixed.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut weights = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && xs[end] - xs[start] <= CLUSTER_TOL * xs[start].abs().max(1.0) {
            end += 1;
        }
        let c = xs[start..end].iter().sum::<f64>() / (end - start) as f64;
        for m in 0..end - start {
            // d^m/dt^m t^p e^{-t} = Σ_r C(m,r) (p)_r (-1)^{m-r} t^{p-r} e^{-t}
            let mut terms = Vec::new();
            let mut falling = 1.0;
            for r in 0..=m {
                let sign = if (m - r) % 2 == 0 { 1.0 } else { -1.0 };
                let coef = binomial(&(m as f64), r) * falling * sign;
                if coef != 0.0 {
                    terms.push((coef, p - r as f64));
                }
                falling *= p - r as f64;
            }
            weights.push(Weight::gamma_sum(terms, 1.0, c)?);
        }
        start = end;
    }
    EnsembleSpec::pe(weights)
}

/// The averaged fixed-shift route to the density of `X + L`, `X` from the
/// polynomial ensemble `pe`: by the Andreief identity,
/// `C n! Δ(y) det[∫ u(y_j - t) f_k(t) dt] / Z_n`.
pub fn lue_sum_via_fixed_shift(pe: &EnsembleSpec, alpha: f64, y: &SpectralVector) -> Result<f64> {
    let weights = pe_weights(pe)?;
    let n = weights.len();
    check_dim(n, y.n())?;
    let u = laguerre_weight(alpha, alpha + n as f64 - 1.0)?;
    let mut m = vec![vec![0.0; n]; n];
    for (j, &yj) in y.iter().enumerate() {
        for (k, f) in weights.iter().enumerate() {
            let s = f.support();
            let upper = s.upper().map_or(yj, |b| b.min(yj));
            if s.lower().is_some_and(|a| a >= upper) {
                continue;
            }
            let mut breaks = f.breakpoints();
            breaks.extend([1.0, 4.0, 16.0].map(|d| upper - d * f.scale()));
            let est = integrate_pieces(
                |t| Complex64::new(u.eval_from(0.0, yj - t) * f.eval(t), 0.0),
                s.lower(),
                Some(upper),
                &breaks,
                upper - f.scale(),
                SUM_TOL,
            );
            m[j][k] = est.into_result()?.re;
        }
    }
    let z = EnsembleSpec::pe(weights)?.partition()?;
    Ok(fixed_shift_constant(n, alpha) * factorial(n) * vandermonde(y) * crate::detkit::determinant(m) / z)
}
