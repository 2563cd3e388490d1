//! Matrix-level Monte Carlo: samplers, empirical distributions and
//! Kolmogorov–Smirnov distances.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::detkit::SpectralVector;
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::rng::{map_chunks, StreamRng};
use crate::spherical::{complex_ginibre, haar_unitary, hermitian_eigenvalues};

/// A summand that can be drawn at matrix level.
#[derive(Debug, Clone)]
pub enum Summand {
    Gue { n: usize },
    Lue { n: usize, alpha: usize },
    /// A fixed spectrum; drawn as `U diag(x) U*` with `U` Haar.
    Fixed(Vec<f64>),
}

impl Summand {
    pub fn n(&self) -> usize {
        match self {
            Summand::Gue { n } | Summand::Lue { n, .. } => *n,
            Summand::Fixed(x) => x.len(),
        }
    }

    pub fn from_ensemble(e: &EnsembleSpec) -> Result<Self> {
        match e {
            EnsembleSpec::Gue { n } => Ok(Summand::Gue { n: *n }),
            EnsembleSpec::Lue { n, alpha } if alpha.fract() == 0.0 && *alpha >= 0.0 => {
                Ok(Summand::Lue { n: *n, alpha: *alpha as usize })
            }
            EnsembleSpec::Lue { alpha, .. } => {
                Err(Error::Unsamplable(format!("LUE sampling needs a nonnegative integer α, got {alpha}")))
            }
            other => Err(Error::Unsamplable(format!("no matrix sampler for {other:?}"))),
        }
    }

    pub fn matrix(&self, rng: &mut StreamRng) -> DMatrix<Complex64> {
        match self {
            Summand::Gue { n } => gue_matrix(*n, rng),
            Summand::Lue { n, alpha } => lue_matrix(*n, *alpha, rng),
            Summand::Fixed(x) => {
                let u = haar_unitary(x.len(), rng);
                let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    x.len(),
                    x.iter().map(|v| Complex64::new(*v, 0.0)),
                ));
                &u * d * u.adjoint()
            }
        }
    }
}

/// Hermitian matrix with density `∝ e^{-Tr X²/2}`.
pub fn gue_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = complex_ginibre(n, n, rng);
    (&g + g.adjoint()) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// `G G*` with `G` an `n × (n + α)` complex Ginibre matrix.
pub fn lue_matrix<R: Rng + ?Sized>(n: usize, alpha: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = complex_ginibre(n, n + alpha, rng);
    &g * g.adjoint()
}

fn spectrum(m: &DMatrix<Complex64>) -> SpectralVector {
    // symmetrise against rounding before the eigen solve
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    hermitian_eigenvalues(&h).expect("square Hermitian matrix")
}

pub fn sample_gue(n: usize, rng: &mut StreamRng) -> SpectralVector {
    spectrum(&gue_matrix(n, rng))
}

pub fn sample_lue(n: usize, alpha: usize, rng: &mut StreamRng) -> SpectralVector {
    spectrum(&lue_matrix(n, alpha, rng))
}

/// Eigenvalues of `X + Y` with independent matrix-level draws.
pub fn sample_sum(a: &Summand, b: &Summand, rng: &mut StreamRng) -> Result<SpectralVector> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    let x = a.matrix(rng);
    let y = b.matrix(rng);
    Ok(spectrum(&(x + y)))
}

/// `count` spectra of the sum of `summands`, drawn in parallel chunks. The
/// output depends only on `seed` and `count`.
pub fn sample_many(summands: &[Summand], count: usize, seed: u64) -> Result<Vec<SpectralVector>> {
    let n = summands.first().ok_or_else(|| Error::InvalidInput("nothing to sample".into()))?.n();
    if let Some(bad) = summands.iter().find(|s| s.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.n() });
    }
    let chunks = map_chunks(count, seed, |rng, k| {
        (0..k)
            .map(|_| {
                let m = summands.iter().map(|s| s.matrix(rng)).reduce(|a, b| a + b).unwrap();
                spectrum(&m)
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// All eigenvalues of all spectra, sorted.
pub fn pooled(spectra: &[SpectralVector]) -> Vec<f64> {
    let mut v: Vec<f64> = spectra.iter().flat_map(|s| s.iter().copied()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup |F_emp - F|` for sorted `samples`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.len() < 100 {
        return Err(Error::InvalidInput(format!("KS distance needs at least 100 samples, got {}", samples.len())));
    }
    if samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("KS samples must be sorted".into()));
    }
    let m = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    Ok(d)
}

/// Distribution function of a density tabulated on `[lo, hi]`: cumulative
/// Gauss–Legendre integrals at the panel edges joined by cubic Hermite
/// interpolation with the density as slope.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    edges: Vec<f64>,
    cum: Vec<f64>,
    dens: Vec<f64>,
    mass: f64,
}

impl TabulatedCdf {
    /// With `normalize`, the table is rescaled to total mass one.
    pub fn from_density(f: impl Fn(f64) -> f64 + Sync, lo: f64, hi: f64, panels: usize, normalize: bool) -> Result<Self> {
        use rayon::prelude::*;
        if !(lo < hi) || panels == 0 {
            return Err(Error::InvalidInput(format!("bad CDF window [{lo}, {hi}] with {panels} panels")));
        }
        let rule = gauss_legendre(8);
        let (t, w) = (&rule.nodes, &rule.weights);
        let h = (hi - lo) / panels as f64;
        let edges: Vec<f64> = (0..=panels).map(|i| lo + h * i as f64).collect();
        let pieces: Vec<(f64, f64)> = (0..panels)
            .into_par_iter()
            .map(|i| {
                let mid = edges[i] + 0.5 * h;
                let area: f64 = t.iter().zip(w.iter()).map(|(t, w)| w * f(mid + 0.5 * h * t)).sum::<f64>() * 0.5 * h;
                (area, f(edges[i]))
            })
            .collect();
        let mut cum = Vec::with_capacity(panels + 1);
        let mut dens = Vec::with_capacity(panels + 1);
        let mut acc = 0.0_f64;
        cum.push(0.0);
        for (area, d) in &pieces {
            acc += area;
            cum.push(acc);
            dens.push(*d);
        }
        dens.push(f(hi));
        if !acc.is_finite() || acc <= 0.0 {
            return Err(Error::NonIntegrable(format!("density integrates to {acc} on [{lo}, {hi}]")));
        }
        let mass = acc;
        if normalize {
            cum.iter_mut().for_each(|c| *c /= mass);
            dens.iter_mut().for_each(|d| *d /= mass);
        }
        Ok(TabulatedCdf { edges, cum, dens, mass })
    }

    /// Mass of the density before any normalisation.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.edges.len() - 1;
        if x <= self.edges[0] {
            return 0.0;
        }
        if x >= self.edges[n] {
            return self.cum[n];
        }
        let h = self.edges[1] - self.edges[0];
        let i = (((x - self.edges[0]) / h) as usize).min(n - 1);
        let u = (x - self.edges[i]) / h;
        let (f0, f1) = (self.cum[i], self.cum[i + 1]);
        let (d0, d1) = (self.dens[i] * h, self.dens[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * f0 + (u3 - 2.0 * u2 + u) * d0 + (-2.0 * u3 + 3.0 * u2) * f1 + (u3 - u2) * d1
    }
}

/// Distribution function of the one-point density `K(x, x) / n`.
pub fn kernel_cdf(k: &crate::biorth::Kernel) -> Result<TabulatedCdf> {
    let (lo, hi) = k.window();
    TabulatedCdf::from_density(|x| k.marginal(x), lo, hi, 1500, false)
}

/// Fixed-width histogram that merges exactly: counts add, so any merge
/// order gives the same state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    lo_bits: u64,
    width_bits: u64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn new(lo: f64, width: f64, bins: usize) -> Result<Self> {
        if !(width > 0.0) || bins == 0 || !lo.is_finite() {
            return Err(Error::InvalidInput(format!("bad histogram: lo {lo}, width {width}, {bins} bins")));
        }
        Ok(Histogram { lo_bits: lo.to_bits(), width_bits: width.to_bits(), counts: vec![0; bins], below: 0, above: 0 })
    }

    /// Freedman–Diaconis bins `2 IQR m^{-1/3}` covering sorted `samples`.
    pub fn freedman_diaconis(samples: &[f64]) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InvalidInput("need at least 4 samples for binning".into()));
        }
        let q = |p: f64| samples[((samples.len() - 1) as f64 * p).round() as usize];
        let iqr = q(0.75) - q(0.25);
        let (lo, hi) = (samples[0], *samples.last().unwrap());
        let mut width = 2.0 * iqr / (samples.len() as f64).cbrt();
        if !(width > 0.0) {
            width = ((hi - lo) / 10.0).max(f64::EPSILON);
        }
        let bins = (((hi - lo) / width).floor() as usize + 1).min(100_000);
        Self::new(lo, width, bins)
    }

    pub fn lo(&self) -> f64 {
        f64::from_bits(self.lo_bits)
    }

    pub fn width(&self) -> f64 {
        f64::from_bits(self.width_bits)
    }

    pub fn add(&mut self, x: f64) {
        let k = ((x - self.lo()) / self.width()).floor();
        if k < 0.0 {
            self.below += 1;
        } else if k as usize >= self.counts.len() {
            self.above += 1;
        } else {
            self.counts[k as usize] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if (self.lo_bits, self.width_bits, self.counts.len()) != (other.lo_bits, other.width_bits, other.counts.len()) {
            return Err(Error::InvalidInput("histograms have different bins".into()));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.below += other.below;
        self.above += other.above;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }

    /// `(bin_left, bin_right, density)` rows.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        let total = self.total().max(1) as f64;
        let (lo, w) = (self.lo(), self.width());
        self.counts
            .iter()
            .enumerate()
            .map(|(i, c)| (lo + w * i as f64, lo + w * (i + 1) as f64, *c as f64 / (total * w)))
            .collect()
    }
}

/// Histogram of `values` filled in parallel chunks and merged.
pub fn histogram(values: &[f64], template: &Histogram) -> Histogram {
    use rayon::prelude::*;
    values
        .par_chunks(4096)
        .map(|c| {
            let mut h = template.clone();
            c.iter().for_each(|x| h.add(*x));
            h
        })
        .reduce(
            || template.clone(),
            |mut a, b| {
                a.merge(&b).expect("same bins");
                a
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn mean_stderr(v: &[f64]) -> (f64, f64) {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, (var / v.len() as f64).sqrt())
    }

    #[test]
    fn scalar_gue_is_standard_normal() {
        let s = sample_many(&[Summand::Gue { n: 1 }], 100_000, 1).unwrap();
        let v: Vec<f64> = s.iter().map(|x| x[0] * x[0]).collect();
        let (m, se) = mean_stderr(&v);
        assert!((m - 1.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn gue_trace_square() {
        let s = sample_many(&[Summand::Gue { n: 2 }], 20_000, 2).unwrap();
        let v: Vec<f64> = s.iter().map(|x| x.iter().map(|e| e * e).sum()).collect();
        let (m, se) = mean_stderr(&v);
        assert!((m - 4.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn lue_moments() {
        let s = sample_many(&[Summand::Lue { n: 1, alpha: 0 }], 50_000, 3).unwrap();
        let (m, se) = mean_stderr(&s.iter().map(|x| x[0]).collect::<Vec<_>>());
        assert!((m - 1.0).abs() < 3.0 * se);
        let s = sample_many(&[Summand::Lue { n: 2, alpha: 1 }], 20_000, 4).unwrap();
        let (m, se) = mean_stderr(&s.iter().map(|x| x.iter().sum()).collect::<Vec<_>>());
        assert!((m - 6.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn ks_distance_behaviour() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut rng = substream(11, 0);
        let mut v: Vec<f64> = (0..10_000).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        v.sort_by(f64::total_cmp);
        assert!(ks_distance(&v, |x| normal.cdf(x)).unwrap() < 0.02);
        assert!(ks_distance(&v, |_| 0.0).unwrap() > 0.99);
        let shifted = Normal::new(1.0, 1.0).unwrap();
        assert!(ks_distance(&v, |x| shifted.cdf(x)).unwrap() > 0.1);
        assert!(ks_distance(&v[..50], |x| normal.cdf(x)).is_err());
    }

    #[test]
    fn ks_null_rate() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut pass = 0;
        for seed in 0..100 {
            let mut rng = substream(seed, 7);
            let mut v: Vec<f64> = (0..10_000).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            v.sort_by(f64::total_cmp);
            if ks_distance(&v, |x| normal.cdf(x)).unwrap() < 0.02 {
                pass += 1;
            }
        }
        assert!(pass >= 99, "{pass}");
    }

    #[test]
    fn tabulated_cdf_of_normal() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let pdf = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let cdf = TabulatedCdf::from_density(pdf, -10.0, 10.0, 400, false).unwrap();
        for x in [-2.0, -0.3, 0.0, 1.7] {
            assert!((cdf.eval(x) - normal.cdf(x)).abs() < 1e-8);
        }
        assert!((cdf.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_merge_is_order_free() {
        let mut rng = substream(3, 0);
        let v: Vec<f64> = (0..10_000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let t = Histogram::freedman_diaconis(&sorted).unwrap();
        let a = histogram(&v, &t);
        let mut rev = v.clone();
        rev.reverse();
        let b = histogram(&rev, &t);
        assert_eq!(a, b);
        assert_eq!(a.total(), 10_000);
        let area: f64 = a.rows().iter().map(|(l, r, d)| (r - l) * d).sum();
        assert!((area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn conjugation_keeps_spectrum() {
        let mut rng = substream(8, 0);
        let x = gue_matrix(3, &mut rng);
        let u = haar_unitary(3, &mut rng);
        let a = spectrum(&x);
        let b = spectrum(&(&u * &x * u.adjoint()));
        for (p, q) in a.iter().zip(b.iter()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = sample_many(&[Summand::Gue { n: 2 }, Summand::Fixed(vec![0.0, 1.0])], 3000, 5).unwrap();
        let b = sample_many(&[Summand::Gue { n: 2 }, Summand::Fixed(vec![0.0, 1.0])], 3000, 5).unwrap();
        assert_eq!(a, b);
        assert!(Summand::from_ensemble(&EnsembleSpec::lue(2, 0.5).unwrap()).is_err());
    }
}
