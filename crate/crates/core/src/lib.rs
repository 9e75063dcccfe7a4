//! Heavy-tailed bivariate models with hidden regular variation, their limit
//! constants for conditional excess risk measures, and Monte Carlo checks.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod copulas;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod limits;
pub mod margins;
pub mod models;
pub mod quadrature;
pub mod rng;

pub use copulas::{EllKind, GumbelGenerator, SurvivalCopulaFamily, TailOrderPair};
pub use error::{Error, Result};
pub use estimators::{RiskEstimate, RiskMeasure};
pub use harness::{run_experiment, ConvergenceReport, ExperimentConfig};
pub use limits::{LimitKind, LimitMeasure, ScalingA};
pub use margins::{Margin, MarginKind, TailIndexEstimate};
pub use models::{validate_model, BivariateModel, Transform, ValidationReport};
