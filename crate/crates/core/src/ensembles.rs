//! Unitarily invariant ensembles: densities and closed-form transforms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::detkit::{confluent_det_ratio, determinant, vandermonde, FunctionFamily, SmoothFn, SpectralVector, CLUSTER_TOL};
use crate::error::{check_dim, Error, Result};
use crate::scalar::{factorial, superfactorial};
use crate::spherical::{i_pow, pair_count};
use crate::transform::{DensityKind, GaussianFactor, LaguerreFactor, ScaledFn, TransformRep};
use crate::weights::{Support, Weight};

/// Weights of a polynomial ensemble with a lazily computed moment matrix.
#[derive(Clone)]
pub struct PolynomialEnsemble {
    weights: Vec<Weight>,
    moments: Arc<OnceLock<Result<Vec<Vec<f64>>>>>,
}

impl PolynomialEnsemble {
    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }
}

/// A derivative-type polynomial ensemble generated by `w`.
#[derive(Clone)]
pub struct DerivativeEnsemble {
    n: usize,
    w: Weight,
    mass: Arc<OnceLock<Result<f64>>>,
}

impl DerivativeEnsemble {
    pub fn generator(&self) -> &Weight {
        &self.w
    }
}

#[derive(Clone)]
pub enum EnsembleSpec {
    Gue { n: usize },
    Lue { n: usize, alpha: f64 },
    Pe(PolynomialEnsemble),
    Dpe(DerivativeEnsemble),
}

impl EnsembleSpec {
    pub fn gue(n: usize) -> Result<Self> {
        positive_n(n)?;
        Ok(EnsembleSpec::Gue { n })
    }

    pub fn lue(n: usize, alpha: f64) -> Result<Self> {
        positive_n(n)?;
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("LUE parameter must exceed -1, got {alpha}")));
        }
        Ok(EnsembleSpec::Lue { n, alpha })
    }

    /// Polynomial ensemble with weights `w_1..w_n`. Fails when the moment
    /// matrix `∫ x^j w_k` is singular.
    pub fn pe(weights: Vec<Weight>) -> Result<Self> {
        positive_n(weights.len())?;
        let pe = PolynomialEnsemble { weights, moments: Arc::new(OnceLock::new()) };
        let ens = EnsembleSpec::Pe(pe);
        ens.partition()?;
        Ok(ens)
    }

    /// Derivative-type ensemble with columns `w, w', …, w^{(n-1)}`.
    pub fn dpe(n: usize, w: Weight) -> Result<Self> {
        positive_n(n)?;
        for k in 1..n {
            if w.derivative(w.center(), k).is_none() {
                return Err(Error::MissingDerivative { order: k, what: w.label() });
            }
        }
        let ens = EnsembleSpec::Dpe(DerivativeEnsemble { n, w, mass: Arc::new(OnceLock::new()) });
        ens.partition()?;
        Ok(ens)
    }

    /// LUE(α) written as the polynomial ensemble `w_k = x^{α+k-1} e^{-x}`.
    pub fn lue_as_pe(n: usize, alpha: f64) -> Result<Self> {
        Self::lue(n, alpha)?;
        Self::pe((0..n).map(|k| Weight::laguerre(alpha + k as f64, 0.0)).collect::<Result<_>>()?)
    }

    /// LUE(α) as the derivative ensemble generated by `x^{α+n-1} e^{-x}`.
    pub fn lue_as_dpe(n: usize, alpha: f64) -> Result<Self> {
        Self::lue(n, alpha)?;
        Self::dpe(n, Weight::laguerre(alpha + n as f64 - 1.0, 0.0)?)
    }

    /// GUE as the derivative ensemble generated by `e^{-x²/2}`.
    pub fn gue_as_dpe(n: usize) -> Result<Self> {
        Self::dpe(n, Weight::standard_gaussian())
    }

    /// GUE as the polynomial ensemble `w_k = x^{k-1} e^{-x²/2}`.
    pub fn gue_as_pe(n: usize) -> Result<Self> {
        let weights = (0..n)
            .map(|k| Weight::poly_gaussian(crate::polynomial::Polynomial::monomial(k), 0.0, 1.0))
            .collect::<Result<_>>()?;
        Self::pe(weights)
    }

    pub fn n(&self) -> usize {
        match self {
            EnsembleSpec::Gue { n } | EnsembleSpec::Lue { n, .. } => *n,
            EnsembleSpec::Pe(pe) => pe.weights.len(),
            EnsembleSpec::Dpe(d) => d.n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleSpec::Gue { .. } => "gue",
            EnsembleSpec::Lue { .. } => "lue",
            EnsembleSpec::Pe(_) => "pe",
            EnsembleSpec::Dpe(_) => "dpe",
        }
    }

    /// Determinant columns of a (derivative-type) polynomial ensemble.
    pub fn columns(&self) -> Option<FunctionFamily> {
        match self {
            EnsembleSpec::Pe(pe) => Some(pe.weights.iter().map(|w| w.as_smooth()).collect()),
            EnsembleSpec::Dpe(d) => Some(
                (0..d.n)
                    .map(|k| Arc::new(DerivativeColumn { w: d.w.clone(), k }) as Arc<dyn SmoothFn>)
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Columns as weights, for quadrature-based Fourier transforms.
    pub fn column_weights(&self) -> Option<Vec<Weight>> {
        match self {
            EnsembleSpec::Pe(pe) => Some(pe.weights.clone()),
            EnsembleSpec::Dpe(d) => Some(
                (0..d.n)
                    .map(|k| {
                        if k == 0 {
                            return d.w.clone();
                        }
                        let w = d.w.clone();
                        let label = format!("d^{k}/dx^{k} {}", w.label());
                        Weight::custom(label, w.support(), w.decay_class(), w.scale(), move |x| {
                            w.derivative(x, k).unwrap_or(f64::NAN)
                        })
                        .with_breakpoints(d.w.breakpoints())
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// `M[j][k] = ∫ x^j c_k(x) dx`, `j, k < n`, for the determinant columns
    /// `c_k`. Derivative columns use `∫ x^j w^{(k)} = (-1)^k j!/(j-k)! μ_{j-k}`.
    pub fn moment_matrix(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.n();
        match self {
            EnsembleSpec::Pe(pe) => pe
                .moments
                .get_or_init(|| {
                    (0..n).map(|j| pe.weights.iter().map(|w| w.moment(j)).collect::<Result<Vec<_>>>()).collect()
                })
                .clone(),
            EnsembleSpec::Dpe(d) => {
                let mu = (0..n).map(|j| d.w.moment(j)).collect::<Result<Vec<_>>>()?;
                Ok((0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| {
                                if k > j {
                                    0.0
                                } else {
                                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                                    sign * factorial(j) / factorial(j - k) * mu[j - k]
                                }
                            })
                            .collect()
                    })
                    .collect())
            }
            _ => Err(Error::InvalidInput(format!("{} has no weight columns", self.name()))),
        }
    }

    /// `Z_n = n! det[∫ x^{j} c_k]`, normalising `Δ(x) det[c_k(x_j)]`.
    pub fn partition(&self) -> Result<f64> {
        if let EnsembleSpec::Dpe(d) = self {
            let mu0 = *d.mass.get_or_init(|| d.w.moment(0)).as_ref().map_err(Clone::clone)?;
            if mu0 == 0.0 || !mu0.is_finite() {
                return Err(Error::DegenerateEnsemble(format!("generator {} has total mass {mu0}", d.w.label())));
            }
        }
        let m = self.moment_matrix()?;
        let det = determinant(m.clone());
        let scale: f64 = m.iter().map(|r| r.iter().map(|v| v.abs()).fold(0.0, f64::max)).product();
        if !det.is_finite() || det.abs() <= 1e-13 * scale {
            return Err(Error::DegenerateEnsemble(format!("moment matrix is singular (det = {det:e})")));
        }
        Ok(factorial(self.n()) * det)
    }

    /// Moves a polynomial ensemble to the generic `Pe` representation.
    pub fn to_pe(&self) -> Result<EnsembleSpec> {
        match self {
            EnsembleSpec::Pe(_) => Ok(self.clone()),
            EnsembleSpec::Gue { n } => Self::gue_as_pe(*n),
            EnsembleSpec::Lue { n, alpha } => Self::lue_as_pe(*n, *alpha),
            EnsembleSpec::Dpe(_) => Self::pe(self.column_weights().unwrap()),
        }
    }

    /// Whether matrices of this ensemble can be sampled directly.
    pub fn samplable(&self) -> bool {
        match self {
            EnsembleSpec::Gue { .. } => true,
            EnsembleSpec::Lue { alpha, .. } => alpha.fract() == 0.0 && *alpha >= 0.0,
            _ => false,
        }
    }

    /// A box `[lo, hi]` holding nearly all eigenvalue mass.
    pub fn bulk_range(&self) -> (f64, f64) {
        let n = self.n() as f64;
        match self {
            EnsembleSpec::Gue { .. } => {
                let r = 2.0 * n.sqrt() + 4.0;
                (-r, r)
            }
            EnsembleSpec::Lue { alpha, .. } => (0.0, 4.0 * n + 2.0 * alpha + 12.0),
            EnsembleSpec::Pe(pe) => span(pe.weights.iter()),
            EnsembleSpec::Dpe(d) => span(std::iter::once(&d.w)),
        }
    }
}

fn span<'a>(ws: impl Iterator<Item = &'a Weight>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for w in ws {
        let (c, h) = (w.center(), w.scale().max(1.0) * 8.0);
        let s = w.support();
        lo = lo.min(s.lower().unwrap_or(c - h));
        hi = hi.max(s.upper().unwrap_or(c + h));
    }
    (lo, hi)
}

fn positive_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidInput("matrix dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}

impl fmt::Debug for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSpec::Gue { n } => write!(f, "GUE(n={n})"),
            EnsembleSpec::Lue { n, alpha } => write!(f, "LUE(n={n}, α={alpha})"),
            EnsembleSpec::Pe(pe) => {
                let l: Vec<String> = pe.weights.iter().map(|w| w.label()).collect();
                write!(f, "PE[{}]", l.join("; "))
            }
            EnsembleSpec::Dpe(d) => write!(f, "DPE(n={}, {})", d.n, d.w.label()),
        }
    }
}

/// Column `w^{(k)}` of a derivative-type ensemble.
struct DerivativeColumn {
    w: Weight,
    k: usize,
}

impl SmoothFn for DerivativeColumn {
    fn eval(&self, x: f64) -> Complex64 {
        Complex64::new(self.w.derivative(x, self.k).unwrap_or(f64::NAN), 0.0)
    }
    fn derivative(&self, x: f64, order: usize) -> Option<Complex64> {
        self.w.derivative(x, self.k + order).map(|v| Complex64::new(v, 0.0))
    }
    fn label(&self) -> String {
        format!("d^{}/dx^{} {}", self.k, self.k, self.w.label())
    }
}

/// Joint density of the unordered eigenvalues.
pub fn joint_eigen_density(ens: &EnsembleSpec, x: &SpectralVector) -> Result<f64> {
    check_dim(ens.n(), x.n())?;
    match ens {
        EnsembleSpec::Gue { .. } | EnsembleSpec::Lue { .. } => {
            let f = matrix_density(ens, x)?;
            Ok(crate::transform::weyl_factor(x) * f)
        }
        _ => {
            let cols = ens.columns().unwrap();
            let m: Vec<Vec<Complex64>> = x.iter().map(|&xj| cols.iter().map(|c| c.eval(xj)).collect()).collect();
            Ok(vandermonde(x) * determinant(m).re / ens.partition()?)
        }
    }
}

/// Matrix density `f(X)` at any Hermitian `X` with spectrum `x`.
pub fn matrix_density(ens: &EnsembleSpec, x: &SpectralVector) -> Result<f64> {
    check_dim(ens.n(), x.n())?;
    let n = ens.n();
    let big_n = pair_count(n) as i32;
    match ens {
        EnsembleSpec::Gue { .. } => {
            let sq: f64 = x.iter().map(|v| v * v).sum();
            Ok((-(n as f64) / 2.0 * 2f64.ln() - (n * n) as f64 / 2.0 * PI.ln() - sq / 2.0).exp())
        }
        EnsembleSpec::Lue { alpha, .. } => {
            if x.iter().any(|v| *v < 0.0) {
                return Ok(0.0);
            }
            if *alpha != 0.0 && x.iter().any(|v| *v == 0.0) {
                return Ok(if *alpha > 0.0 { 0.0 } else { f64::INFINITY });
            }
            let mut log = -(big_n as f64) * PI.ln();
            for (j, &v) in x.iter().enumerate() {
                log += if *alpha == 0.0 { 0.0 } else { alpha * v.ln() } - v - ln_gamma(alpha + j as f64 + 1.0);
            }
            Ok(log.exp())
        }
        _ => {
            // det[c_k(x_j)] / (Z' Δ(x)),  Z' = Z_n π^N / ∏_{j=1}^n j!
            let z1 = ens.partition()? * PI.powi(big_n) / superfactorial(n + 1);
            Ok(confluent_det_ratio(&ens.columns().unwrap(), x, CLUSTER_TOL)?.re / z1)
        }
    }
}

/// Density on a grid together with its ambient dimension and kind.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDensity {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n: usize,
    pub kind: EigenDensityKind,
    /// Whether a marginal is scaled to integrate to 1 rather than `n`.
    pub normalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenDensityKind {
    Joint,
    Marginal,
}

/// `Z''_n = (-i)^{n(n-1)/2} / ∏_{j<n} j! · det[∫ x^{j} w_k dx]`, the value at
/// `s = 0` of `det[F w_k(s_j)] / Δ(s)`.
pub fn pe_normalization(weights: &[Weight]) -> Result<Complex64> {
    let ens = EnsembleSpec::pe(weights.to_vec())?;
    let det = determinant(ens.moment_matrix()?);
    let n = weights.len();
    Ok(i_pow(-pair_count(n)) * det / superfactorial(n))
}

/// Closed-form spherical transform.
///
/// GUE and LUE give products of `e^{-s²/2}` and `(1+is)^{-(α+n)}`; a DPE
/// gives the product of `F w(s) / F w(0)`; a PE gives the ratio
/// `det[F w_k(s_j)] / Δ(s)` divided by its own value at `s = 0`.
pub fn transform_of(ens: &EnsembleSpec) -> Result<TransformRep> {
    let n = ens.n();
    Ok(match ens {
        EnsembleSpec::Gue { .. } => TransformRep::product(n, Arc::new(GaussianFactor { c: 1.0 })),
        EnsembleSpec::Lue { alpha, .. } => TransformRep::product(n, Arc::new(LaguerreFactor { a: alpha + n as f64 })),
        EnsembleSpec::Dpe(d) => {
            let mass = d.w.fourier(0.0)?;
            TransformRep::product(n, Arc::new(ScaledFn(mass.inv(), d.w.fourier_fn())))
        }
        EnsembleSpec::Pe(pe) => {
            let h: FunctionFamily = pe.weights.iter().map(|w| w.fourier_fn()).collect();
            let z = confluent_det_ratio(&h, &vec![0.0; n], CLUSTER_TOL)?;
            if z.norm() == 0.0 || !z.norm().is_finite() {
                return Err(Error::DegenerateEnsemble(format!("transform normaliser is {z}")));
            }
            TransformRep::det_ratio(h, z.inv())
        }
    })
}

/// Evaluates the joint density on `tuples` random sorted points in the bulk
/// and fails if any value is negative beyond rounding.
pub fn check_admissible(ens: &EnsembleSpec, tuples: usize, seed: u64) -> Result<()> {
    let n = ens.n();
    let (lo, hi) = ens.bulk_range();
    let mut rng = crate::rng::substream(seed, u64::MAX);
    let mut worst = 0.0_f64;
    let mut largest = 0.0_f64;
    for _ in 0..tuples {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        x.sort_by(f64::total_cmp);
        let p = joint_eigen_density(ens, &SpectralVector::new(x)?)?;
        worst = worst.min(p);
        largest = largest.max(p.abs());
    }
    if worst < -1e-10 * largest.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateEnsemble(format!("joint density takes the negative value {worst:e}")));
    }
    Ok(())
}

/// Joint density of the unordered eigenvalues for a matrix density given
/// as `kind`, for callers holding only a [`crate::transform::Density`].
pub fn as_joint(value: f64, kind: DensityKind, x: &[f64]) -> f64 {
    match kind {
        DensityKind::Joint => value,
        DensityKind::Matrix => value * crate::transform::weyl_factor(x),
    }
}

/// `∏_{j=1}^n Γ(α + j)`
pub fn lue_gamma_product(n: usize, alpha: f64) -> f64 {
    (1..=n).map(|j| gamma(alpha + j as f64)).product()
}

/// Support of a PE weight family, as the union of the weight supports.
pub fn family_support(ws: &[Weight]) -> Support {
    let lower = ws.iter().map(|w| w.support().lower()).try_fold(f64::INFINITY, |m, l| l.map(|l| m.min(l)));
    let upper = ws.iter().map(|w| w.support().upper()).try_fold(f64::NEG_INFINITY, |m, u| u.map(|u| m.max(u)));
    match (lower, upper) {
        (Some(a), Some(b)) => Support::Interval(a, b),
        (Some(a), None) => Support::Above(a),
        _ => Support::Line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureRule;
    use crate::transform::evaluate;

    fn sv(v: &[f64]) -> SpectralVector {
        SpectralVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn scalar_densities() {
        let g = EnsembleSpec::gue(1).unwrap();
        assert!((joint_eigen_density(&g, &sv(&[0.0])).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let l = EnsembleSpec::lue(1, 0.0).unwrap();
        assert!((joint_eigen_density(&l, &sv(&[1.3])).unwrap() - (-1.3f64).exp()).abs() < 1e-15);
        assert_eq!(joint_eigen_density(&l, &sv(&[-0.1])).unwrap(), 0.0);
        let l1 = EnsembleSpec::lue(1, 1.0).unwrap();
        assert!((matrix_density(&l1, &sv(&[2.0])).unwrap() - 2.0 * (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gue_matrix_density_prefactor() {
        let g = EnsembleSpec::gue(2).unwrap();
        assert!((matrix_density(&g, &sv(&[0.0, 0.0])).unwrap() - 1.0 / (2.0 * PI * PI)).abs() < 1e-16);
    }

    #[test]
    fn gue_joint_density_normalised() {
        let g = EnsembleSpec::gue(2).unwrap();
        let set = QuadratureRule::hermite(30).node_set();
        let total = set.integrate_tensor(2, |x| Complex64::new(joint_eigen_density(&g, &sv(x)).unwrap(), 0.0));
        assert!((total.re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lue_as_pe_density_matches() {
        for alpha in [0.0, 1.5] {
            let lue = EnsembleSpec::lue(3, alpha).unwrap();
            let pe = EnsembleSpec::lue_as_pe(3, alpha).unwrap();
            let dpe = EnsembleSpec::lue_as_dpe(3, alpha).unwrap();
            let x = sv(&[0.4, 2.2, 1.1]);
            let a = joint_eigen_density(&lue, &x).unwrap();
            let b = joint_eigen_density(&pe, &x).unwrap();
            let c = joint_eigen_density(&dpe, &x).unwrap();
            assert!((a - b).abs() < 1e-12 * a && (a - c).abs() < 1e-10 * a, "{a} {b} {c}");
            assert!((matrix_density(&lue, &x).unwrap() - matrix_density(&pe, &x).unwrap()).abs() < 1e-12 * a.max(1e-3));
        }
    }

    #[test]
    fn gue_as_dpe_and_pe_match() {
        let x = sv(&[-0.3, 0.9]);
        let a = joint_eigen_density(&EnsembleSpec::gue(2).unwrap(), &x).unwrap();
        let b = joint_eigen_density(&EnsembleSpec::gue_as_dpe(2).unwrap(), &x).unwrap();
        let c = joint_eigen_density(&EnsembleSpec::gue_as_pe(2).unwrap(), &x).unwrap();
        assert!((a - b).abs() < 1e-13 && (a - c).abs() < 1e-13);
    }

    #[test]
    fn pe_matrix_density_confluent() {
        let pe = EnsembleSpec::lue_as_pe(2, 0.5).unwrap();
        let at = matrix_density(&pe, &sv(&[1.0, 1.0])).unwrap();
        let near = matrix_density(&pe, &sv(&[1.0 - 5e-6, 1.0 + 5e-6])).unwrap();
        assert!(at.is_finite() && (at - near).abs() < 1e-8 * at);
        let lue = EnsembleSpec::lue(2, 0.5).unwrap();
        assert!((at - matrix_density(&lue, &sv(&[1.0, 1.0])).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_transforms() {
        let l = transform_of(&EnsembleSpec::lue(1, 0.0).unwrap()).unwrap();
        let v = evaluate(&l, &[0.6]).unwrap();
        assert!((v - Complex64::new(1.0, 0.6).inv()).norm() < 1e-15);
        let g = transform_of(&EnsembleSpec::gue(2).unwrap()).unwrap();
        assert!((evaluate(&g, &[1.0, -1.0]).unwrap().re - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn pe_transform_matches_lue_closed_form() {
        for alpha in [0.0, 1.5] {
            let closed = transform_of(&EnsembleSpec::lue(3, alpha).unwrap()).unwrap();
            let pe = transform_of(&EnsembleSpec::lue_as_pe(3, alpha).unwrap()).unwrap();
            let mut rng = crate::rng::substream(9, 0);
            for _ in 0..20 {
                let s: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
                let (a, b) = (evaluate(&closed, &s).unwrap(), evaluate(&pe, &s).unwrap());
                assert!((a - b).norm() < 1e-8, "{s:?}: {a} vs {b}");
            }
            assert!((evaluate(&pe, &[0.0, 0.0, 0.0]).unwrap() - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn pe_normalization_examples() {
        let z = pe_normalization(&[Weight::standard_gaussian()]).unwrap();
        assert!((z - Complex64::new((2.0 * PI).sqrt(), 0.0)).norm() < 1e-14);
        let w = vec![Weight::laguerre(0.0, 0.0).unwrap(), Weight::laguerre(1.0, 0.0).unwrap()];
        let z = pe_normalization(&w).unwrap();
        // (-i)^1 / (0! 1!) · det[[1, 1], [1, 2]]
        assert!((z - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        let dup = vec![Weight::laguerre(1.0, 0.0).unwrap(), Weight::laguerre(1.0, 0.0).unwrap()];
        assert!(matches!(pe_normalization(&dup), Err(Error::DegenerateEnsemble(_))));
    }

    #[test]
    fn transform_value_one_at_origin() {
        let specs = [
            EnsembleSpec::gue(3).unwrap(),
            EnsembleSpec::lue(2, 0.5).unwrap(),
            EnsembleSpec::lue_as_pe(4, 1.0).unwrap(),
            EnsembleSpec::gue_as_dpe(3).unwrap(),
        ];
        for e in &specs {
            let v = evaluate(&transform_of(e).unwrap(), &vec![0.0; e.n()]).unwrap();
            assert!((v - 1.0).norm() < 1e-12, "{e:?}: {v}");
        }
    }

    #[test]
    fn admissibility() {
        check_admissible(&EnsembleSpec::lue_as_pe(3, 0.5).unwrap(), 1000, 1).unwrap();
        check_admissible(&EnsembleSpec::gue_as_dpe(2).unwrap(), 1000, 1).unwrap();
        // det[w_k(x_j)] changes sign across x = 1
        let bad = EnsembleSpec::pe(vec![Weight::laguerre(0.0, 0.0).unwrap(), Weight::boxcar(0.0, 1.0, 1.0).unwrap()])
        .unwrap();
        assert!(check_admissible(&bad, 1000, 1).is_err());
    }
}
