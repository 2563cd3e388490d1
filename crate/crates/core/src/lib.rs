pub mod detkit;
pub mod error;
pub mod quadrature;
pub mod scalar;
pub mod polynomial;
pub mod rng;
pub mod spherical;
pub mod weights;
pub mod ensembles;
pub mod transform;
pub mod sums;
pub mod biorth;
pub mod mc;

pub use biorth::{BiorthSystem, Kernel, Kernel as KernelRep};
pub use detkit::{FunctionFamily, SpectralVector};
pub use ensembles::{EigenDensity, EnsembleSpec};
pub use error::{Error, Result};
pub use polynomial::MonicPolynomial;
pub use spherical::FrequencyVector;
pub use transform::{DensityKind, TransformRep};
pub use weights::Weight;
