//! JSON schemas for weights, ensembles, summands and evaluation grids.

use serde::de::DeserializeOwned;
use serde::Deserialize;

use sphsum::mc::Summand;
use sphsum::polynomial::Polynomial;
use sphsum::{EnsembleSpec, Error, Result, Weight};

/// Inline JSON when the argument starts with `{`, otherwise a file path.
pub fn load<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Config(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Gaussian {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        variance: f64,
        #[serde(default = "one")]
        amplitude: f64,
        /// Polynomial prefactor, lowest degree first.
        #[serde(default)]
        poly: Option<Vec<f64>>,
    },
    Laguerre {
        power: f64,
        #[serde(default)]
        shift: f64,
    },
    PolyExp {
        coeffs: Vec<f64>,
        #[serde(default = "one")]
        rate: f64,
    },
    Boxcar {
        a: f64,
        b: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Table {
        points: Vec<(f64, f64)>,
    },
}

impl WeightSpec {
    pub fn build(&self) -> Result<Weight> {
        match self {
            WeightSpec::Gaussian { mean, variance, amplitude, poly } => match poly {
                Some(c) => Weight::poly_gaussian(Polynomial::new(c.iter().map(|v| v * amplitude).collect()), *mean, *variance),
                None => Weight::gaussian(*mean, *variance, *amplitude),
            },
            WeightSpec::Laguerre { power, shift } => Weight::laguerre(*power, *shift),
            WeightSpec::PolyExp { coeffs, rate } => Weight::poly_exp(coeffs, *rate),
            WeightSpec::Boxcar { a, b, amplitude } => Weight::boxcar(*a, *b, *amplitude),
            WeightSpec::Table { points } => {
                let (xs, ys) = points.iter().copied().unzip();
                Weight::table(xs, ys)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Gue,
    Lue,
    Pe,
    Dpe,
    /// A deterministic spectrum conjugated by a Haar unitary.
    Fixed,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub variant: Variant,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub weights: Option<Vec<WeightSpec>>,
    #[serde(default)]
    pub w: Option<WeightSpec>,
    /// Spectrum of a fixed summand.
    #[serde(default)]
    pub x: Option<Vec<f64>>,
}

fn missing(field: &str, variant: &str) -> Error {
    Error::Config(format!("{variant} ensemble needs \"{field}\""))
}

impl EnsembleConfig {
    pub fn n(&self) -> Result<usize> {
        match (self.variant, &self.weights, &self.x) {
            (Variant::Pe, Some(ws), _) => {
                if let Some(n) = self.n {
                    sphsum::error::check_dim(n, ws.len())?;
                }
                Ok(ws.len())
            }
            (Variant::Fixed, _, Some(x)) => Ok(x.len()),
            _ => self.n.ok_or_else(|| missing("n", "this")),
        }
    }

    pub fn ensemble(&self) -> Result<EnsembleSpec> {
        let n = self.n()?;
        match self.variant {
            Variant::Gue => EnsembleSpec::gue(n),
            Variant::Lue => EnsembleSpec::lue(n, self.alpha.unwrap_or(0.0)),
            Variant::Pe => {
                let ws = self.weights.as_ref().ok_or_else(|| missing("weights", "pe"))?;
                EnsembleSpec::pe(ws.iter().map(WeightSpec::build).collect::<Result<_>>()?)
            }
            Variant::Dpe => EnsembleSpec::dpe(n, self.w.as_ref().ok_or_else(|| missing("w", "dpe"))?.build()?),
            Variant::Fixed => Err(Error::Unsupported(
                "a fixed spectrum has no density of its own; it is only usable as a summand next to an LUE".into(),
            )),
        }
    }

    pub fn fixed_spectrum(&self) -> Option<&[f64]> {
        match self.variant {
            Variant::Fixed => self.x.as_deref(),
            _ => None,
        }
    }

    pub fn summand(&self) -> Result<Summand> {
        match self.variant {
            Variant::Fixed => Ok(Summand::Fixed(self.x.clone().ok_or_else(|| missing("x", "fixed"))?)),
            _ => Summand::from_ensemble(&self.ensemble()?),
        }
    }
}

/// Points given explicitly or as a tensor grid over `[lo, hi]^n`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Points {
    List(Vec<Vec<f64>>),
    Grid { lo: f64, hi: f64, points: usize },
}

impl Points {
    pub fn axis(lo: f64, hi: f64, points: usize) -> Vec<f64> {
        match points {
            0 => vec![],
            1 => vec![lo],
            _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
        }
    }

    pub fn expand(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Points::List(v) => {
                for p in v {
                    sphsum::error::check_dim(n, p.len())?;
                }
                Ok(v.clone())
            }
            Points::Grid { lo, hi, points } => {
                if !(lo < hi) || *points == 0 {
                    return Err(Error::Config(format!("grid needs lo < hi and points > 0, got [{lo}, {hi}] × {points}")));
                }
                let axis = Self::axis(*lo, *hi, *points);
                let mut out = vec![vec![]];
                for _ in 0..n {
                    out = out.iter().flat_map(|p| axis.iter().map(move |a| [p.as_slice(), &[*a]].concat())).collect();
                }
                Ok(out)
            }
        }
    }

    /// One-dimensional points.
    pub fn line(&self) -> Result<Vec<f64>> {
        Ok(self.expand(1)?.into_iter().map(|p| p[0]).collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub ensemble: EnsembleConfig,
    pub s: Points,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumConfig {
    pub a: EnsembleConfig,
    pub b: EnsembleConfig,
    pub x: Points,
    #[serde(default)]
    pub marginal: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub ensemble: EnsembleConfig,
    pub x: Points,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub a: EnsembleConfig,
    #[serde(default)]
    pub b: Option<EnsembleConfig>,
    /// Analytic target; defaults to the law of the sum.
    #[serde(default)]
    pub target: Option<EnsembleConfig>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub gate: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub summands: Vec<EnsembleConfig>,
    pub count: usize,
}
