use num_complex::Complex64;

use sphsum::biorth::{build_biorth, ensemble_kernel};
use sphsum::ensembles::{joint_eigen_density, matrix_density, transform_of};
use sphsum::mc::{histogram, kernel_cdf, ks_distance, pooled, sample_many, Histogram, Summand};
use sphsum::spherical::{spherical_phi, spherical_phi_mc};
use sphsum::sums::{add_lue, fixed_shift_ensemble, sum_density, sum_ensemble};
use sphsum::transform::{default_forward_rule, forward_numeric};
use sphsum::{DensityKind, EnsembleSpec, Error, FrequencyVector, Result, SpectralVector};

use crate::config::{EnsembleConfig, KernelConfig, PhiConfig, SampleConfig, SumConfig, TransformConfig, ValidateConfig};

/// CSV text plus notes for stderr.
#[derive(Default)]
pub struct Report {
    pub csv: String,
    pub notes: Vec<String>,
    /// Set when a quality gate failed; the report is still printed.
    pub gate_failed: bool,
}

impl Report {
    fn header(&mut self, cols: &[String]) {
        self.row(cols.iter().map(String::as_str));
    }

    fn row<'a>(&mut self, cells: impl IntoIterator<Item = &'a str>) {
        self.csv.push_str(&cells.into_iter().collect::<Vec<_>>().join(","));
        self.csv.push('\n');
    }

    fn values(&mut self, v: &[f64]) {
        let cells: Vec<String> = v.iter().map(|x| num(*x)).collect();
        self.row(cells.iter().map(String::as_str));
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }
}

/// Round-trip decimal, independent of locale.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn cols(parts: &[&[String]]) -> Vec<String> {
    parts.concat()
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub fn phi(cfg: PhiConfig, mc: Option<usize>, seed: u64) -> Result<Report> {
    let s = FrequencyVector::new(cfg.s)?;
    let x = SpectralVector::new(cfg.x)?;
    let v = spherical_phi(&s, &x)?;
    let mut r = Report::default();
    match mc {
        None => {
            r.header(&names(&["re", "im"]));
            r.values(&[v.re, v.im]);
        }
        Some(samples) => {
            let e = spherical_phi_mc(&s, &x, samples, seed)?;
            r.header(&names(&["re", "im", "mc_re", "mc_im", "stderr"]));
            r.values(&[v.re, v.im, e.estimate.re, e.estimate.im, e.stderr]);
        }
    }
    Ok(r)
}

pub fn transform(cfg: TransformConfig, numeric: bool) -> Result<Report> {
    let ens = cfg.ensemble.ensemble()?;
    let n = ens.n();
    let points = cfg.s.expand(n)?;
    let rep = transform_of(&ens)?;
    let mut r = Report::default();
    if numeric {
        let rule = default_forward_rule(&ens);
        r.header(&cols(&[&indexed("s", n), &names(&["re", "im", "check"])]));
        let mut worst: f64 = 0.0;
        for s in &points {
            let q = forward_numeric(&ens, &FrequencyVector::new(s.clone())?, &rule)?;
            let d = (q - rep.evaluate(s)?).norm();
            worst = worst.max(d);
            r.values(&[s.as_slice(), &[q.re, q.im, d]].concat());
        }
        r.note(format!("max |numeric - structured|: {}", num(worst)));
    } else {
        r.header(&cols(&[&indexed("s", n), &names(&["re", "im"])]));
        for s in &points {
            let h: Complex64 = rep.evaluate(s)?;
            r.values(&[s.as_slice(), &[h.re, h.im]].concat());
        }
        r.note(format!("form: {}", rep.shape()));
    }
    Ok(r)
}

/// A fixed spectrum next to an LUE, if that is what the pair is.
fn fixed_plus_lue(a: &EnsembleConfig, b: &EnsembleConfig) -> Result<Option<EnsembleSpec>> {
    let (x, other) = match (a.fixed_spectrum(), b.fixed_spectrum()) {
        (Some(x), None) => (x, b),
        (None, Some(x)) => (x, a),
        (None, None) => return Ok(None),
        (Some(_), Some(_)) => return Err(Error::Unsupported("the sum of two fixed spectra is not modelled".into())),
    };
    match other.ensemble()? {
        EnsembleSpec::Lue { n, alpha } => {
            sphsum::error::check_dim(x.len(), n)?;
            Ok(Some(fixed_shift_ensemble(&SpectralVector::new(x.to_vec())?, alpha)?))
        }
        _ => Err(Error::Unsupported("a fixed spectrum can only be added to an LUE".into())),
    }
}

/// Law of the sum as a polynomial ensemble, with the name of the construction.
fn sum_law(a: &EnsembleConfig, b: &EnsembleConfig) -> Result<(EnsembleSpec, String)> {
    if let Some(e) = fixed_plus_lue(a, b)? {
        return Ok((e, "fixed_shift".into()));
    }
    let (e, path) = sum_ensemble(&a.ensemble()?, &b.ensemble()?)?;
    Ok((e, path.to_string()))
}

pub fn sum(cfg: SumConfig, matrix: bool) -> Result<Report> {
    let mut r = Report::default();
    let kind = if matrix { DensityKind::Matrix } else { DensityKind::Joint };
    if cfg.marginal {
        let (law, path) = sum_law(&cfg.a, &cfg.b)?;
        let k = ensemble_kernel(&law)?;
        r.header(&names(&["x", "density"]));
        for x in cfg.x.line()? {
            r.values(&[x, k.marginal(x)]);
        }
        r.note(format!("path: {path}"));
        r.note("marginal: kernel diagonal".into());
        return Ok(r);
    }
    if let Some(law) = fixed_plus_lue(&cfg.a, &cfg.b)? {
        let n = law.n();
        r.header(&cols(&[&indexed("x", n), &names(&["density", "residue"])]));
        for x in cfg.x.expand(n)? {
            let sv = SpectralVector::new(x.clone())?;
            let v = if matrix { matrix_density(&law, &sv)? } else { joint_eigen_density(&law, &sv)? };
            r.values(&[x.as_slice(), &[v, 0.0]].concat());
        }
        r.note("path: fixed_shift".into());
        return Ok(r);
    }
    let (a, b) = (cfg.a.ensemble()?, cfg.b.ensemble()?);
    sphsum::error::check_dim(a.n(), b.n())?;
    let n = a.n();
    r.header(&cols(&[&indexed("x", n), &names(&["density", "residue"])]));
    let mut path = None;
    for x in cfg.x.expand(n)? {
        let d = sum_density(&a, &b, &SpectralVector::new(x.clone())?, kind)?;
        path = Some(d.path);
        r.values(&[x.as_slice(), &[d.density.value, d.density.residue]].concat());
    }
    if let Some(p) = path {
        r.note(format!("path: {p}"));
    }
    Ok(r)
}

pub fn kernel(cfg: KernelConfig, transformed: bool, alpha: Option<f64>) -> Result<Report> {
    let pe = cfg.ensemble.ensemble()?.to_pe()?;
    let sys = build_biorth(&pe)?;
    let xs = cfg.x.line()?;
    let mut r = Report::default();
    if transformed {
        let alpha = alpha.or(cfg.alpha).unwrap_or(0.0);
        let k = sys.transformed_kernel(alpha)?;
        let direct = ensemble_kernel(&add_lue(&pe, alpha)?)?;
        let trace = k.trace()?;
        r.header(&names(&["x", "k_xx", "marginal", "sum_marginal", "trace"]));
        let mut worst: f64 = 0.0;
        for x in xs {
            let (m, d) = (k.marginal(x), direct.marginal(x));
            worst = worst.max((m - d).abs());
            r.values(&[x, k.diagonal(x), m, d, trace]);
        }
        r.note(format!("max |transformed - sum marginal|: {}", num(worst)));
    } else {
        let k = sys.kernel();
        let trace = k.trace()?;
        r.header(&names(&["x", "k_xx", "marginal", "trace"]));
        for x in xs {
            r.values(&[x, k.diagonal(x), k.marginal(x), trace]);
        }
    }
    Ok(r)
}

pub const DEFAULT_COUNT: usize = 50_000;
pub const DEFAULT_GATE: f64 = 0.02;

pub fn validate(cfg: ValidateConfig, seed: u64, count: Option<usize>, gate: Option<f64>) -> Result<Report> {
    let count = count.or(cfg.count).unwrap_or(DEFAULT_COUNT);
    let gate = gate.or(cfg.gate).unwrap_or(DEFAULT_GATE);
    let mut summands = vec![cfg.a.summand()?];
    if let Some(b) = &cfg.b {
        summands.push(b.summand()?);
    }
    let target = match (&cfg.target, &cfg.b) {
        (Some(t), _) => t.ensemble()?,
        (None, Some(b)) => sum_law(&cfg.a, b)?.0,
        (None, None) => cfg.a.ensemble()?,
    };
    let n = summands[0].n();
    for s in &summands {
        sphsum::error::check_dim(n, s.n())?;
    }
    sphsum::error::check_dim(n, target.n())?;
    let ks = ks_statistic(&summands, &target, count, seed)?;
    let pass = ks < gate;
    let mut r = Report::default();
    r.header(&names(&["ks", "samples", "gate", "seed", "result"]));
    r.row([num(ks), count.to_string(), num(gate), seed.to_string(), (if pass { "pass" } else { "fail" }).to_string()].iter().map(String::as_str));
    r.gate_failed = !pass;
    Ok(r)
}

fn ks_statistic(summands: &[Summand], target: &EnsembleSpec, count: usize, seed: u64) -> Result<f64> {
    let samples = sample_many(summands, count, seed)?;
    let cdf = kernel_cdf(&ensemble_kernel(target)?)?;
    ks_distance(&pooled(&samples), |x| cdf.eval(x))
}

pub fn sample(cfg: SampleConfig, seed: u64, hist: bool) -> Result<Report> {
    let summands = cfg.summands.iter().map(EnsembleConfig::summand).collect::<Result<Vec<_>>>()?;
    if summands.is_empty() {
        return Err(Error::Config("sample needs at least one summand".into()));
    }
    let n = summands[0].n();
    for s in &summands {
        sphsum::error::check_dim(n, s.n())?;
    }
    let spectra = sample_many(&summands, cfg.count, seed)?;
    let mut r = Report::default();
    if hist {
        let values = pooled(&spectra);
        let h = histogram(&values, &Histogram::freedman_diaconis(&values)?);
        r.header(&names(&["bin_left", "bin_right", "density"]));
        for (lo, hi, d) in h.rows() {
            r.values(&[lo, hi, d]);
        }
    } else {
        r.header(&indexed("l", n));
        for s in &spectra {
            r.values(s);
        }
    }
    Ok(r)
}
