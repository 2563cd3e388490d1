//! Biorthogonal systems of polynomial ensembles and their transformation
//! under addition of an LUE matrix.
//!
//! The operators act on polynomial coefficients and are generic over the
//! scalar field, so they run exactly over the rationals as well as in
//! floating point.

use statrs::function::gamma::gamma;

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::polynomial::{MonicPolynomial, Polynomial};
use crate::scalar::{binomial, Field};
use crate::weights::Weight;

/// Monic `p_k` and duals `q_k ∈ span{w_1..w_n}` with `∫ p_j q_k = δ_{jk}`.
#[derive(Debug, Clone)]
pub struct BiorthSystem {
    pub n: usize,
    pub polys: Vec<MonicPolynomial<f64>>,
    /// `q_k = Σ_l dual_coeffs[k][l] w_l`
    pub dual_coeffs: Vec<Vec<f64>>,
    pub duals: Vec<Weight>,
    pub base: EnsembleSpec,
}

/// Biorthogonal system of a polynomial ensemble from the LU factorisation
/// `M = L U` of the moment matrix `M_{jk} = ∫ x^j w_k`: the rows of `L^{-1}`
/// hold the coefficients of `p_j` and the columns of `U^{-1}` those of `q_k`.
pub fn build_biorth(pe: &EnsembleSpec) -> Result<BiorthSystem> {
    let base = pe.to_pe()?;
    let weights = match &base {
        EnsembleSpec::Pe(p) => p.weights().to_vec(),
        _ => unreachable!("to_pe returns a polynomial ensemble"),
    };
    let n = weights.len();
    let m = base.moment_matrix()?;
    let (l, u) = lu_nopivot(&m)?;
    let linv = lower_unit_inverse(&l);
    let uinv = upper_inverse(&u);
    let polys = (0..n)
        .map(|j| {
            let mut c = linv[j][..=j].to_vec();
            c[j] = 1.0;
            MonicPolynomial::new(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let dual_coeffs: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|l| uinv[l][k]).collect()).collect();
    let duals = dual_coeffs
        .iter()
        .map(|c| Weight::combination(c.iter().zip(&weights).filter(|(c, _)| **c != 0.0).map(|(c, w)| (*c, w.clone())).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(BiorthSystem { n, polys, dual_coeffs, duals, base })
}

fn lu_nopivot(m: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    let mut u = m.to_vec();
    for k in 0..n {
        l[k][k] = 1.0;
        let scale = m[k].iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !(u[k][k].abs() > 1e-13 * scale) {
            return Err(Error::DegenerateEnsemble(format!("leading {}x{} moment minor vanishes", k + 1, k + 1)));
        }
        for i in k + 1..n {
            let f = u[i][k] / u[k][k];
            l[i][k] = f;
            for j in k..n {
                u[i][j] -= f * u[k][j];
            }
        }
    }
    Ok((l, u))
}

fn lower_unit_inverse(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        inv[c][c] = 1.0;
        for i in c + 1..n {
            inv[i][c] = -(c..i).map(|k| l[i][k] * inv[k][c]).sum::<f64>();
        }
    }
    inv
}

fn upper_inverse(u: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut inv = vec![vec![0.0; n]; n];
    for c in (0..n).rev() {
        inv[c][c] = 1.0 / u[c][c];
        for i in (0..c).rev() {
            inv[i][c] = -(i + 1..=c).map(|k| u[i][k] * inv[k][c]).sum::<f64>() / u[i][i];
        }
    }
    inv
}

/// `L p = Σ_j binom(α+n+j-1, j) p^{(j)}`, the polynomial part of smoothing
/// by `x^{α+n-1} e^{-x} / Γ(α+n)`.
pub fn smoothing_l<T: Field>(p: &MonicPolynomial<T>, alpha: &T, n: usize) -> MonicPolynomial<T> {
    let a = alpha.clone() + T::from_usize(n);
    let q = p.as_poly().apply_derivative_series(|j| binomial(&(a.clone() + T::from_usize(j) - T::one()), j));
    MonicPolynomial::try_from(q).expect("derivative terms leave the leading coefficient unchanged")
}

/// `a_k = (-1)^k binom(α+n, k)` for `k = 0..=kmax`, the coefficients of
/// `L^{-1}`.
pub fn inverse_coeffs<T: Field>(alpha: &T, n: usize, kmax: usize) -> Vec<T> {
    let a = alpha.clone() + T::from_usize(n);
    (0..=kmax)
        .map(|k| {
            let b = binomial(&a, k);
            if k % 2 == 0 {
                b
            } else {
                -b
            }
        })
        .collect()
}

/// `Σ_{j=0}^k a_{k-j} binom(α+n+j-1, j)`, zero for `k ≥ 1`.
pub fn inverse_residual<T: Field>(alpha: &T, n: usize, k: usize) -> T {
    let a = inverse_coeffs(alpha, n, k);
    let s = alpha.clone() + T::from_usize(n) - T::one();
    (0..=k).fold(T::zero(), |acc, j| acc + a[k - j].clone() * binomial(&(s.clone() + T::from_usize(j)), j))
}

/// `P = Σ_j (-1)^j binom(α+n, j) p^{(j)}`, so that `L P = p`.
pub fn transform_p<T: Field>(p: &MonicPolynomial<T>, alpha: &T, n: usize) -> MonicPolynomial<T> {
    let a = inverse_coeffs(alpha, n, p.degree());
    let q = p.as_poly().apply_derivative_series(|j| a.get(j).cloned().unwrap_or_else(T::zero));
    MonicPolynomial::try_from(q).expect("derivative terms leave the leading coefficient unchanged")
}

fn check_shape(alpha: f64, n: usize) -> Result<()> {
    if alpha + n as f64 > 0.0 && alpha > -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("need α > -1 and α + n > 0, got α = {alpha}, n = {n}")))
    }
}

/// `Q(y) = (1/Γ(α+n)) ∫_0^∞ x^{α+n-1} e^{-x} q(y - x) dx`
pub fn transform_q(q: &Weight, alpha: f64, n: usize) -> Result<Weight> {
    check_shape(alpha, n)?;
    let a = alpha + n as f64;
    Ok(Weight::gamma_sum(vec![(1.0 / gamma(a), a - 1.0)], 1.0, 0.0)?.convolve(q))
}

/// `K(x, y) = Σ_k p_k(x) q_k(y)`
#[derive(Debug, Clone)]
pub struct Kernel {
    pub polys: Vec<Polynomial<f64>>,
    pub duals: Vec<Weight>,
}

impl Kernel {
    pub fn n(&self) -> usize {
        self.polys.len()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.polys.iter().zip(&self.duals).map(|(p, q)| p.eval_f64(x) * q.eval(y)).sum()
    }

    pub fn diagonal(&self, x: f64) -> f64 {
        self.eval(x, x)
    }

    /// One-point density `K(x, x) / n`.
    pub fn marginal(&self, x: f64) -> f64 {
        self.diagonal(x) / self.n() as f64
    }

    /// `G_{jk} = ∫ p_j q_k`
    pub fn gram(&self) -> Result<Vec<Vec<f64>>> {
        self.polys
            .iter()
            .map(|p| self.duals.iter().map(|q| q.integrate(|t| p.eval_f64(t).into()).into_result().map(|c| c.re)).collect())
            .collect()
    }

    /// `∫ K(x, x) dx`
    pub fn trace(&self) -> Result<f64> {
        let g = self.gram()?;
        Ok((0..self.n()).map(|k| g[k][k]).sum())
    }

    /// `∫ K(x, t) K(t, y) dt` through the Gram matrix of the system.
    pub fn square(&self, x: f64, y: f64) -> Result<f64> {
        let g = self.gram()?;
        let px: Vec<f64> = self.polys.iter().map(|p| p.eval_f64(x)).collect();
        let qy: Vec<f64> = self.duals.iter().map(|q| q.eval(y)).collect();
        let mut acc = 0.0;
        for k in 0..self.n() {
            for l in 0..self.n() {
                // K(x,t)K(t,y) = Σ p_k(x) q_k(t) p_l(t) q_l(y)
                acc += px[k] * g[l][k] * qy[l];
            }
        }
        Ok(acc)
    }

    /// A window `[lo, hi]` outside which the diagonal is negligible.
    pub fn window(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for q in &self.duals {
            let s = q.support();
            let (c, h) = (q.center(), q.scale().max(1.0));
            let reach = 2.0 * (self.n() as f64).sqrt() + 10.0;
            lo = lo.min(s.lower().unwrap_or(c - reach * h));
            hi = hi.max(s.upper().unwrap_or(c + (reach + 2.0 * self.n() as f64) * h));
        }
        (lo, hi)
    }
}

impl BiorthSystem {
    pub fn kernel(&self) -> Kernel {
        Kernel { polys: self.polys.iter().map(|p| p.as_poly().clone()).collect(), duals: self.duals.clone() }
    }

    /// `K^Y(x, y) = Σ_k P_k(x) Q_k(y)` for `Y = X + L`, `L` from LUE(α).
    pub fn transformed_kernel(&self, alpha: f64) -> Result<Kernel> {
        let polys = self.polys.iter().map(|p| transform_p(p, &alpha, self.n).into_poly()).collect();
        let duals = self.duals.iter().map(|q| transform_q(q, alpha, self.n)).collect::<Result<_>>()?;
        Ok(Kernel { polys, duals })
    }
}

pub fn kernel(system: &BiorthSystem) -> Kernel {
    system.kernel()
}

pub fn transformed_kernel(system: &BiorthSystem, alpha: f64) -> Result<Kernel> {
    system.transformed_kernel(alpha)
}

/// Correlation kernel of any ensemble with a polynomial-ensemble form.
pub fn ensemble_kernel(ens: &EnsembleSpec) -> Result<Kernel> {
    Ok(build_biorth(ens)?.kernel())
}
