//! Weight functions: evaluation, derivatives, Fourier transforms, moments and
//! convolutions.
//!
//! Parametric families carry analytic derivatives and closed-form Fourier
//! transforms. Tables, custom closures and convolutions fall back to
//! quadrature and finite differences.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::detkit::{central_difference, SmoothFn};
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::quadrature::{integrate_pieces, Estimate};
use crate::scalar::binomial;

/// Tolerance for the adaptive quadratures behind numeric Fourier transforms,
/// moments and convolutions.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Highest derivative order served by finite differences.
const FD_MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Line,
    /// `[a, ∞)`
    Above(f64),
    Interval(f64, f64),
}

impl Support {
    pub fn lower(&self) -> Option<f64> {
        match *self {
            Support::Line => None,
            Support::Above(a) | Support::Interval(a, _) => Some(a),
        }
    }

    pub fn upper(&self) -> Option<f64> {
        match *self {
            Support::Interval(_, b) => Some(b),
            _ => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower().is_none_or(|a| x >= a) && self.upper().is_none_or(|b| x <= b)
    }

    /// Smallest support holding both.
    fn union(&self, other: &Support) -> Support {
        let lower = self.lower().zip(other.lower()).map(|(a, c)| a.min(c));
        let upper = self.upper().zip(other.upper()).map(|(b, d)| b.max(d));
        match (lower, upper) {
            (None, _) => Support::Line,
            (Some(a), None) => Support::Above(a),
            (Some(a), Some(b)) => Support::Interval(a, b),
        }
    }

    /// Support of a convolution.
    fn sum(&self, other: &Support) -> Support {
        match (self.lower().zip(other.lower()), self.upper().zip(other.upper())) {
            (None, _) => Support::Line,
            (Some((a, c)), None) => Support::Above(a + c),
            (Some((a, c)), Some((b, d))) => Support::Interval(a + c, b + d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClass {
    Gaussian,
    Exponential,
    Compact,
}

/// An immutable, cheaply clonable weight function.
#[derive(Clone)]
pub struct Weight(Arc<Kind>);

enum Kind {
    /// `p(x) · exp(-(x - mean)² / (2 variance))`
    PolyGaussian { poly: Polynomial<f64>, mean: f64, variance: f64 },
    /// `Σ c_i t^{p_i} e^{-rate t}` with `t = x - shift ≥ 0`
    Gamma { terms: Vec<(f64, f64)>, rate: f64, shift: f64 },
    Boxcar { a: f64, b: f64, amplitude: f64 },
    Table(Spline),
    Custom { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, support: Support, decay: DecayClass, scale: f64, label: String, breaks: Vec<f64> },
    Convolution(Weight, Weight),
    Combination(Vec<(f64, Weight)>),
}

impl Weight {
    /// `amplitude · exp(-(x - mean)² / (2 variance))`
    pub fn gaussian(mean: f64, variance: f64, amplitude: f64) -> Result<Self> {
        Self::poly_gaussian(Polynomial::new(vec![amplitude]), mean, variance)
    }

    /// `e^{-x²/2}`
    pub fn standard_gaussian() -> Self {
        Self::gaussian(0.0, 1.0, 1.0).unwrap()
    }

    pub fn poly_gaussian(poly: Polynomial<f64>, mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidInput(format!("gaussian needs finite mean and variance > 0, got {mean}, {variance}")));
        }
        Ok(Weight(Arc::new(Kind::PolyGaussian { poly, mean, variance })))
    }

    /// `(x - shift)^power e^{-(x - shift)}` on `x ≥ shift`.
    pub fn laguerre(power: f64, shift: f64) -> Result<Self> {
        Self::gamma_sum(vec![(1.0, power)], 1.0, shift)
    }

    /// `Σ c_i (x - shift)^{p_i} e^{-rate (x - shift)}` on `x ≥ shift`.
    pub fn gamma_sum(terms: Vec<(f64, f64)>, rate: f64, shift: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("gamma weight needs at least one term".into()));
        }
        if let Some((_, p)) = terms.iter().find(|(_, p)| !(*p > -1.0)) {
            return Err(Error::InvalidInput(format!("power {p} is not integrable at the endpoint (need > -1)")));
        }
        if !(rate > 0.0) || !shift.is_finite() {
            return Err(Error::InvalidInput(format!("gamma weight needs rate > 0 and finite shift, got {rate}, {shift}")));
        }
        Ok(Weight(Arc::new(Kind::Gamma { terms, rate, shift })))
    }

    /// `p(x) e^{-rate x}` on `x ≥ 0`, coefficients lowest degree first.
    pub fn poly_exp(coeffs: &[f64], rate: f64) -> Result<Self> {
        let terms = coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(k, c)| (*c, k as f64)).collect();
        Self::gamma_sum(terms, rate, 0.0)
    }

    pub fn boxcar(a: f64, b: f64, amplitude: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!("boxcar needs a < b, got [{a}, {b}]")));
        }
        Ok(Weight(Arc::new(Kind::Boxcar { a, b, amplitude })))
    }

    /// Natural cubic spline through sorted `(x, w)` pairs, zero outside.
    pub fn table(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Ok(Weight(Arc::new(Kind::Table(Spline::new(xs, ys)?))))
    }

    /// `Σ c_i w_i`
    pub fn combination(terms: Vec<(f64, Weight)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("linear combination needs at least one weight".into()));
        }
        Ok(Weight(Arc::new(Kind::Combination(terms))))
    }

    /// A user weight. Derivatives come from finite differences and the
    /// Fourier transform from quadrature.
    pub fn custom(
        label: impl Into<String>,
        support: Support,
        decay: DecayClass,
        scale: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Weight(Arc::new(Kind::Custom { f: Arc::new(f), support, decay, scale, label: label.into(), breaks: vec![] }))
    }

    /// Adds interior kinks of a custom weight. Other kinds are unchanged.
    pub fn with_breakpoints(self, extra: Vec<f64>) -> Self {
        match &*self.0 {
            Kind::Custom { f, support, decay, scale, label, .. } => Weight(Arc::new(Kind::Custom {
                f: f.clone(),
                support: *support,
                decay: *decay,
                scale: *scale,
                label: label.clone(),
                breaks: extra,
            })),
            _ => self,
        }
    }

    pub fn support(&self) -> Support {
        match &*self.0 {
            Kind::PolyGaussian { .. } => Support::Line,
            Kind::Gamma { shift, .. } => Support::Above(*shift),
            Kind::Boxcar { a, b, .. } => Support::Interval(*a, *b),
            Kind::Table(s) => Support::Interval(s.xs[0], *s.xs.last().unwrap()),
            Kind::Custom { support, .. } => *support,
            Kind::Convolution(a, b) => a.support().sum(&b.support()),
            Kind::Combination(t) => t[1..].iter().fold(t[0].1.support(), |s, (_, w)| s.union(&w.support())),
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match &*self.0 {
            Kind::PolyGaussian { .. } => DecayClass::Gaussian,
            Kind::Gamma { .. } => DecayClass::Exponential,
            Kind::Boxcar { .. } | Kind::Table(_) => DecayClass::Compact,
            Kind::Custom { decay, .. } => *decay,
            Kind::Convolution(a, b) => {
                use DecayClass::*;
                match (a.decay_class(), b.decay_class()) {
                    (Exponential, _) | (_, Exponential) => Exponential,
                    (Gaussian, _) | (_, Gaussian) => Gaussian,
                    _ => Compact,
                }
            }
            Kind::Combination(t) => {
                let classes: Vec<DecayClass> = t.iter().map(|(_, w)| w.decay_class()).collect();
                if classes.contains(&DecayClass::Exponential) {
                    DecayClass::Exponential
                } else if classes.contains(&DecayClass::Gaussian) {
                    DecayClass::Gaussian
                } else {
                    DecayClass::Compact
                }
            }
        }
    }

    /// True when the weight is known to be nonnegative everywhere.
    pub fn nonneg(&self) -> bool {
        match &*self.0 {
            Kind::PolyGaussian { poly, .. } => poly.degree() == 0 && poly.coeffs()[0] >= 0.0,
            Kind::Gamma { terms, .. } => terms.iter().all(|(c, _)| *c >= 0.0),
            Kind::Boxcar { amplitude, .. } => *amplitude >= 0.0,
            Kind::Table(s) => s.ys.iter().all(|y| *y >= 0.0),
            Kind::Custom { .. } => false,
            Kind::Convolution(a, b) => a.nonneg() && b.nonneg(),
            Kind::Combination(t) => t.iter().all(|(c, w)| *c >= 0.0 && w.nonneg()),
        }
    }

    /// Points where the weight or one of its derivatives may be non-smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &*self.0 {
            Kind::PolyGaussian { .. } => vec![],
            Kind::Gamma { shift, .. } => vec![*shift],
            Kind::Boxcar { a, b, .. } => vec![*a, *b],
            Kind::Table(s) => s.xs.clone(),
            Kind::Custom { support, breaks, .. } => {
                support.lower().into_iter().chain(support.upper()).chain(breaks.iter().copied()).collect()
            }
            Kind::Convolution(a, b) => {
                let mut out = Vec::new();
                for x in a.breakpoints() {
                    for y in b.breakpoints() {
                        out.push(x + y);
                    }
                }
                out
            }
            Kind::Combination(t) => {
                let mut out: Vec<f64> = t.iter().flat_map(|(_, w)| w.breakpoints()).collect();
                out.sort_by(f64::total_cmp);
                out.dedup();
                out
            }
        }
    }

    /// A point near the bulk of the mass.
    pub fn center(&self) -> f64 {
        match &*self.0 {
            Kind::PolyGaussian { mean, .. } => *mean,
            Kind::Gamma { terms, rate, shift } => {
                let p = terms.iter().map(|(_, p)| *p).fold(f64::NEG_INFINITY, f64::max);
                shift + (p + 1.0) / rate
            }
            Kind::Boxcar { a, b, .. } => 0.5 * (a + b),
            Kind::Table(s) => 0.5 * (s.xs[0] + s.xs.last().unwrap()),
            Kind::Custom { support, .. } => match (support.lower(), support.upper()) {
                (Some(a), Some(b)) => 0.5 * (a + b),
                (Some(a), None) => a + 1.0,
                _ => 0.0,
            },
            Kind::Convolution(a, b) => a.center() + b.center(),
            Kind::Combination(t) => t.iter().map(|(_, w)| w.center()).sum::<f64>() / t.len() as f64,
        }
    }

    /// Typical length scale, used for finite-difference steps.
    pub fn scale(&self) -> f64 {
        match &*self.0 {
            Kind::PolyGaussian { variance, .. } => variance.sqrt(),
            Kind::Gamma { rate, .. } => 1.0 / rate,
            Kind::Boxcar { a, b, .. } => b - a,
            Kind::Table(s) => (s.xs.last().unwrap() - s.xs[0]) / s.xs.len() as f64,
            Kind::Custom { scale, .. } => *scale,
            Kind::Convolution(a, b) => a.scale().max(b.scale()),
            Kind::Combination(t) => t.iter().map(|(_, w)| w.scale()).fold(0.0, f64::max),
        }
    }

    pub fn label(&self) -> String {
        match &*self.0 {
            Kind::PolyGaussian { poly, mean, variance } => {
                if poly.degree() == 0 {
                    format!("{}·gaussian({mean}, {variance})", poly.coeffs()[0])
                } else {
                    format!("({poly})·gaussian({mean}, {variance})")
                }
            }
            Kind::Gamma { terms, rate, shift } => {
                let t: Vec<String> = terms.iter().map(|(c, p)| format!("{c}·t^{p}")).collect();
                format!("({})·e^(-{rate} t), t = x - {shift}", t.join(" + "))
            }
            Kind::Boxcar { a, b, amplitude } => format!("{amplitude}·1[{a}, {b}]"),
            Kind::Table(s) => format!("table({} points)", s.xs.len()),
            Kind::Custom { label, .. } => label.clone(),
            Kind::Convolution(a, b) => format!("({}) * ({})", a.label(), b.label()),
            Kind::Combination(t) => {
                let parts: Vec<String> = t.iter().map(|(c, w)| format!("{c}·[{}]", w.label())).collect();
                parts.join(" + ")
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.analytic_derivative(x, 0).unwrap_or_else(|| match &*self.0 {
            Kind::Custom { f, support, .. } => {
                if support.contains(x) {
                    f(x)
                } else {
                    0.0
                }
            }
            Kind::Convolution(a, b) => convolution_at(a, b, x, 0, 0).value.re,
            Kind::Combination(t) => t.iter().map(|(c, w)| c * w.eval(x)).sum(),
            _ => unreachable!("parametric weights evaluate analytically"),
        })
    }

    /// Analytic `k`-th derivative where the family provides one.
    pub fn analytic_derivative(&self, x: f64, k: usize) -> Option<f64> {
        match &*self.0 {
            Kind::PolyGaussian { poly, mean, variance } => {
                let mut p = poly.clone();
                let lin = Polynomial::new(vec![-mean / variance, 1.0 / variance]);
                for _ in 0..k {
                    p = p.derivative(1).sub(&p.mul(&lin));
                }
                let z = x - mean;
                Some(p.eval_f64(x) * (-z * z / (2.0 * variance)).exp())
            }
            Kind::Gamma { terms, rate, shift } => {
                let t = x - shift;
                if t < 0.0 {
                    return Some(0.0);
                }
                let e = (-rate * t).exp();
                let mut acc = 0.0;
                for &(c, p) in terms {
                    for j in 0..=k {
                        let fall = binomial(&p, j) * crate::scalar::factorial(j);
                        if fall == 0.0 {
                            continue;
                        }
                        acc += c * binomial(&(k as f64), j) * fall * t.powf(p - j as f64) * (-rate).powi((k - j) as i32);
                    }
                }
                Some(acc * e)
            }
            Kind::Boxcar { a, b, amplitude } => {
                if k > 0 {
                    return (x != *a && x != *b).then_some(0.0);
                }
                Some(if x >= *a && x <= *b { *amplitude } else { 0.0 })
            }
            Kind::Table(s) => (k <= 3).then(|| s.eval(x, k)),
            Kind::Custom { .. } => None,
            Kind::Convolution(a, b) => {
                if k == 0 {
                    return None;
                }
                let (ka, kb) = split_derivative(a, b, k)?;
                Some(convolution_at(a, b, x, ka, kb).value.re)
            }
            Kind::Combination(t) => {
                if k == 0 {
                    return None;
                }
                t.iter().map(|(c, w)| w.derivative(x, k).map(|d| c * d)).sum()
            }
        }
    }

    /// `k`-th derivative: analytic when available, otherwise by central
    /// finite differences up to order 8.
    pub fn derivative(&self, x: f64, k: usize) -> Option<f64> {
        if k == 0 {
            return Some(self.eval(x));
        }
        self.analytic_derivative(x, k).or_else(|| {
            (k <= FD_MAX_ORDER).then(|| {
                let f = |t: f64| Complex64::new(self.eval(t), 0.0);
                central_difference(&f, x, k, self.scale()).re
            })
        })
    }

    /// Largest `k` for which `(w ∗ v)^{(k)} = w^{(k)} ∗ v` holds for every
    /// integrable `v`.
    pub fn transferable_derivatives(&self) -> usize {
        match &*self.0 {
            Kind::PolyGaussian { .. } => usize::MAX,
            Kind::Gamma { terms, .. } => terms
                .iter()
                .map(|(_, p)| if p.fract() == 0.0 { *p as usize } else { p.ceil().max(0.0) as usize })
                .min()
                .unwrap_or(0),
            Kind::Boxcar { .. } | Kind::Custom { .. } => 0,
            Kind::Table(s) => {
                if s.ys[0] == 0.0 && *s.ys.last().unwrap() == 0.0 {
                    1
                } else {
                    0
                }
            }
            Kind::Convolution(a, b) => a.transferable_derivatives().saturating_add(b.transferable_derivatives()),
            Kind::Combination(t) => t.iter().map(|(_, w)| w.transferable_derivatives()).min().unwrap_or(0),
        }
    }

    /// `∫ f(x) w(x) dx` over the support, split at breakpoints.
    pub fn integrate(&self, f: impl Fn(f64) -> Complex64) -> Estimate {
        let s = self.support();
        let h = self.scale();
        let c = self.center();
        let mut breaks = self.breakpoints();
        // finite panels carry endpoint singularities and most of the
        // oscillation, the unbounded pieces only a decaying tail
        match (s.lower(), s.upper()) {
            (Some(a), upper) => {
                // local coordinate t = x - a keeps offsets from the endpoint exact
                let mut local: Vec<f64> = breaks.iter().map(|b| b - a).collect();
                if upper.is_none() {
                    local.extend([1.0, 4.0, 16.0].map(|k| k * h));
                }
                let g = |t: f64| f(a + t) * self.eval_from(a, t);
                return integrate_pieces(g, Some(0.0), upper.map(|b| b - a), &local, c - a, WEIGHT_TOL);
            }
            (None, Some(b)) => breaks.extend([1.0, 4.0, 16.0].map(|k| b - k * h)),
            (None, None) => breaks.extend([-8.0, 0.0, 8.0].map(|k| c + k * h)),
        }
        integrate_pieces(|x| f(x) * self.eval(x), s.lower(), s.upper(), &breaks, c, WEIGHT_TOL)
    }

    /// `w(a + t)`, exact in `t` when `a` is the endpoint of a gamma weight.
    pub fn eval_from(&self, a: f64, t: f64) -> f64 {
        match &*self.0 {
            Kind::Gamma { terms, rate, shift } if *shift == a => {
                if t < 0.0 {
                    return 0.0;
                }
                terms.iter().map(|(c, p)| c * t.powf(*p)).sum::<f64>() * (-rate * t).exp()
            }
            Kind::Combination(ws) => ws.iter().map(|(c, w)| c * w.eval_from(a, t)).sum(),
            _ => self.eval(a + t),
        }
    }

    /// Closed-form `∫ x^m w(x) e^{-isx} dx` when the family has one.
    pub fn fourier_moment_closed(&self, s: f64, m: usize) -> Option<Complex64> {
        match &*self.0 {
            Kind::PolyGaussian { poly, mean, variance } => {
                let base = Complex64::new(-variance * s * s / 2.0, -s * mean).exp() * (2.0 * PI * variance).sqrt();
                // I_k = Q_k(s) I_0 with Q_{k+1} = i (Q_k' + Q_k · (-i mean - variance s))
                let i = Complex64::i();
                let lin = Polynomial::new(vec![-i * *mean, Complex64::new(-variance, 0.0)]);
                let top = m + poly.degree();
                let mut q = Polynomial::new(vec![Complex64::new(1.0, 0.0)]);
                let mut qs = Vec::with_capacity(top + 1);
                for _ in 0..=top {
                    qs.push(q.eval(&Complex64::new(s, 0.0)));
                    q = q.derivative(1).add(&q.mul(&lin)).scale(&i);
                }
                let acc: Complex64 = poly.coeffs().iter().enumerate().map(|(k, a)| qs[k + m] * *a).sum();
                Some(acc * base)
            }
            Kind::Gamma { terms, rate, shift } => {
                let z = Complex64::new(*rate, s);
                let phase = Complex64::new(0.0, -s * shift).exp();
                let mut acc = Complex64::new(0.0, 0.0);
                for &(c, p) in terms {
                    for r in 0..=m {
                        let q = p + r as f64 + 1.0;
                        let coef = c * binomial(&(m as f64), r) * shift.powi((m - r) as i32) * gamma(q);
                        acc += z.powf(-q) * coef;
                    }
                }
                Some(acc * phase)
            }
            Kind::Boxcar { a, b, amplitude } => {
                if s == 0.0 {
                    let k = m as i32 + 1;
                    return Some(Complex64::new(amplitude * (b.powi(k) - a.powi(k)) / k as f64, 0.0));
                }
                if m > 0 && s.abs() < 1.0 {
                    return None;
                }
                // I_m = [x^m e^{-isx} / (-is)]_a^b + m / (is) · I_{m-1}
                let ea = Complex64::new(0.0, -s * a).exp();
                let eb = Complex64::new(0.0, -s * b).exp();
                let is = Complex64::new(0.0, s);
                let mut acc = (ea - eb) / is;
                for k in 1..=m {
                    acc = (ea * a.powi(k as i32) - eb * b.powi(k as i32)) / is + acc * k as f64 / is;
                }
                Some(acc * *amplitude)
            }
            Kind::Combination(t) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, w) in t {
                    acc += w.fourier_moment_closed(s, m)? * *c;
                }
                Some(acc)
            }
            Kind::Convolution(x, y) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..=m {
                    acc += x.fourier_moment_closed(s, r)? * y.fourier_moment_closed(s, m - r)? * binomial(&(m as f64), r);
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// `∫ x^m w(x) e^{-isx} dx` by quadrature.
    pub fn fourier_moment_numeric(&self, s: f64, m: usize) -> Estimate {
        self.integrate(|x| Complex64::new(0.0, -s * x).exp() * x.powi(m as i32))
    }

    /// `∫ x^m w(x) e^{-isx} dx`, closed form when available.
    pub fn fourier_moment(&self, s: f64, m: usize) -> Result<Complex64> {
        match self.fourier_moment_closed(s, m) {
            Some(v) => Ok(v),
            None => self.fourier_moment_numeric(s, m).into_result(),
        }
    }

    /// `∫ w(x) e^{-isx} dx`
    pub fn fourier(&self, s: f64) -> Result<Complex64> {
        self.fourier_moment(s, 0)
    }

    pub fn fourier_closed(&self, s: f64) -> Option<Complex64> {
        self.fourier_moment_closed(s, 0)
    }

    pub fn fourier_numeric(&self, s: f64) -> Result<Complex64> {
        self.fourier_moment_numeric(s, 0).into_result()
    }

    /// `∫ x^m w(x) dx`
    pub fn moment(&self, m: usize) -> Result<f64> {
        self.fourier_moment(0.0, m).map(|c| c.re)
    }

    /// Largest deviation between the closed-form and quadrature Fourier
    /// transforms on the grid `s ∈ {-4, -3.5, …, 4}`, or `None` when there is
    /// no closed form.
    pub fn fourier_consistency(&self) -> Result<Option<f64>> {
        if self.fourier_closed(0.0).is_none() {
            return Ok(None);
        }
        let mut worst: f64 = 0.0;
        for k in -8..=8 {
            let s = 0.5 * k as f64;
            let Some(closed) = self.fourier_closed(s) else { continue };
            worst = worst.max((closed - self.fourier_numeric(s)?).norm());
        }
        Ok(Some(worst))
    }

    /// `(self ∗ other)(x) = ∫ self(x - y) other(y) dy`, evaluated on demand.
    pub fn convolve(&self, other: &Weight) -> Weight {
        Weight(Arc::new(Kind::Convolution(self.clone(), other.clone())))
    }

    /// The factors when this weight is a convolution.
    pub fn factors(&self) -> Option<(&Weight, &Weight)> {
        match &*self.0 {
            Kind::Convolution(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// This weight as a complex-valued [`SmoothFn`] in `x`.
    pub fn as_smooth(&self) -> Arc<dyn SmoothFn> {
        Arc::new(self.clone())
    }

    /// `s ↦ ∫ w(x) e^{-isx} dx` as a [`SmoothFn`]; the `m`-th derivative is
    /// `(-i)^m ∫ x^m w(x) e^{-isx} dx`.
    pub fn fourier_fn(&self) -> Arc<dyn SmoothFn> {
        Arc::new(FourierOf(self.clone()))
    }

    /// As [`Weight::fourier_fn`] but always by quadrature.
    pub fn numeric_fourier_fn(&self) -> Arc<dyn SmoothFn> {
        Arc::new(NumericFourierOf(self.clone()))
    }
}

/// `(w1 ∗ w2)`
pub fn convolve(w1: &Weight, w2: &Weight) -> Weight {
    w1.convolve(w2)
}

/// `x^p e^{-x}` on `x ≥ 0`, the smoothing kernel of an LUE summand with
/// parameter `alpha` (typically `p = alpha + n - 1`).
pub fn laguerre_weight(alpha: f64, p: f64) -> Result<Weight> {
    if !(alpha > -1.0) {
        return Err(Error::InvalidInput(format!("LUE parameter must exceed -1, got {alpha}")));
    }
    Weight::laguerre(p, 0.0)
}

fn split_derivative(a: &Weight, b: &Weight, k: usize) -> Option<(usize, usize)> {
    let ta = a.transferable_derivatives();
    let tb = b.transferable_derivatives();
    if k <= ta {
        Some((k, 0))
    } else if k <= tb {
        Some((0, k))
    } else if k <= ta.saturating_add(tb) {
        Some((ta, k - ta))
    } else {
        None
    }
}

/// `∫ a^{(ka)}(x - y) b^{(kb)}(y) dy`
fn convolution_at(a: &Weight, b: &Weight, x: f64, ka: usize, kb: usize) -> Estimate {
    let (sa, sb) = (a.support(), b.support());
    let lower = match (sb.lower(), sa.upper()) {
        (Some(l), Some(u)) => Some(l.max(x - u)),
        (l, u) => l.or(u.map(|u| x - u)),
    };
    let upper = match (sb.upper(), sa.lower()) {
        (Some(u), Some(l)) => Some(u.min(x - l)),
        (u, l) => u.or(l.map(|l| x - l)),
    };
    if let (Some(l), Some(u)) = (lower, upper) {
        if l >= u {
            return Estimate { value: Complex64::new(0.0, 0.0), error: 0.0, converged: true };
        }
    }
    let mut breaks = b.breakpoints();
    breaks.extend(a.breakpoints().iter().map(|t| x - t));
    let center = 0.5 * ((x - a.center()) + b.center());
    let da = |t: f64| if ka == 0 { a.eval(t) } else { a.derivative(t, ka).unwrap_or(f64::NAN) };
    if let Some(l) = lower {
        // local coordinate from the lower limit, see `Weight::integrate`
        let db = |u: f64| if kb == 0 { b.eval_from(l, u) } else { b.derivative(l + u, kb).unwrap_or(f64::NAN) };
        let local: Vec<f64> = breaks.iter().map(|t| t - l).collect();
        let g = |u: f64| Complex64::new(da(x - l - u) * db(u), 0.0);
        return integrate_pieces(g, Some(0.0), upper.map(|u| u - l), &local, center - l, WEIGHT_TOL);
    }
    let db = |t: f64| if kb == 0 { b.eval(t) } else { b.derivative(t, kb).unwrap_or(f64::NAN) };
    integrate_pieces(|y| Complex64::new(da(x - y) * db(y), 0.0), lower, upper, &breaks, center, WEIGHT_TOL)
}

impl SmoothFn for Weight {
    fn eval(&self, x: f64) -> Complex64 {
        Complex64::new(Weight::eval(self, x), 0.0)
    }
    fn derivative(&self, x: f64, order: usize) -> Option<Complex64> {
        Weight::derivative(self, x, order).map(|v| Complex64::new(v, 0.0))
    }
    fn label(&self) -> String {
        Weight::label(self)
    }
}

struct FourierOf(Weight);

struct NumericFourierOf(Weight);

impl SmoothFn for NumericFourierOf {
    fn eval(&self, s: f64) -> Complex64 {
        self.0.fourier_moment_numeric(s, 0).value
    }
    fn derivative(&self, s: f64, order: usize) -> Option<Complex64> {
        Some(self.0.fourier_moment_numeric(s, order).value * Complex64::new(0.0, -1.0).powu(order as u32))
    }
    fn label(&self) -> String {
        format!("F~[{}]", self.0.label())
    }
}

impl SmoothFn for FourierOf {
    fn eval(&self, s: f64) -> Complex64 {
        self.0.fourier_moment_closed(s, 0).unwrap_or_else(|| self.0.fourier_moment_numeric(s, 0).value)
    }
    fn derivative(&self, s: f64, order: usize) -> Option<Complex64> {
        let v = self.0.fourier_moment_closed(s, order).unwrap_or_else(|| self.0.fourier_moment_numeric(s, order).value);
        Some(v * Complex64::new(0.0, -1.0).powu(order as u32))
    }
    fn label(&self) -> String {
        format!("F[{}]", self.0.label())
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.label())
    }
}

/// Natural cubic spline.
#[derive(Debug, Clone)]
struct Spline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// second derivatives at the knots
    m: Vec<f64>,
}

impl Spline {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
        }
        if xs.len() < 2 {
            return Err(Error::InvalidInput("table weight needs at least two points".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("table abscissae must be finite and strictly increasing".into()));
        }
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives (Thomas algorithm)
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut sup = vec![0.0; k];
            for i in 0..k {
                let (h0, h1) = (xs[i + 1] - xs[i], xs[i + 2] - xs[i + 1]);
                diag[i] = 2.0 * (h0 + h1);
                sup[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..k {
                let sub = xs[i + 1] - xs[i];
                let f = sub / diag[i - 1];
                diag[i] -= f * sup[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            for i in (0..k).rev() {
                let next = if i + 1 < k { sup[i] * m[i + 2] } else { 0.0 };
                m[i + 1] = (rhs[i] - next) / diag[i];
            }
        }
        Ok(Spline { xs, ys, m })
    }

    fn eval(&self, x: f64, k: usize) -> f64 {
        let xs = &self.xs;
        if x < xs[0] || x > *xs.last().unwrap() {
            return 0.0;
        }
        let i = xs.partition_point(|t| *t <= x).clamp(1, xs.len() - 1) - 1;
        let h = xs[i + 1] - xs[i];
        let (a, b) = ((xs[i + 1] - x) / h, (x - xs[i]) / h);
        let (y0, y1, m0, m1) = (self.ys[i], self.ys[i + 1], self.m[i], self.m[i + 1]);
        match k {
            0 => a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0,
            1 => (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0,
            2 => a * m0 + b * m1,
            3 => (m1 - m0) / h,
            _ => 0.0,
        }
    }
}
