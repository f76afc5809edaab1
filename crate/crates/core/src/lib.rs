//! Multi-secret summary-statistic privacy.
//!
//! Quantization release mechanisms that hide selected means and standard
//! deviations of a Gaussian data distribution, the privacy metrics used to
//! judge them (union, intersection, group and lp-norm), Wasserstein-2
//! distortion, and the privacy-distortion lower bounds they are compared to.

mod assignment;
pub mod bounds;
pub mod distortion;
pub mod error;
pub mod mechanisms;
pub mod model;
pub mod privacy;
pub mod rng;

pub use error::{Error, Result};
pub use model::{
    estimate_params, secret_values, BaselineConfig, CsvOptions, Dataset, Family, Gaussian2DParams,
    GaussianDiagParams, GaussianGeneralParams, GroupPartition, LpSpec, MechanismConfig, NormOrder,
    ParamEstimate, ParamKind, PriorSpec, QuantizationMode, Quantizer, SecretSource, SecretSpec,
    SecretTarget,
};
