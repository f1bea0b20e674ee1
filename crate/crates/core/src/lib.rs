//! Structure learning for acyclic directed mixed graphs from linear
//! Gaussian data.
//!
//! The crate provides the graph model ([`admg`]), differentiable class
//! constraints ([`penalty`]), the linear SEM ([`linsem`]), scores
//! ([`scoring`]), regularized RICF ([`ricf`]), the augmented-Lagrangian
//! driver ([`discovery`]) and experiment utilities ([`evaluation`]).

pub mod admg;
pub mod discovery;
pub mod error;
pub mod evaluation;
pub mod linsem;
pub mod numfmt;
pub mod optim;
pub mod penalty;
pub mod ricf;
pub mod scoring;

pub use admg::{check_properties, mag_projection, random_admg, Admg, GraphClass, Properties};
pub use discovery::{discover, threshold_to_graph, DiscoveryResult, DualRecord, Hyperparams};
pub use error::{Error, Result};
pub use linsem::{gaussian_neg2_loglik, implied_covariance, random_parameters, sample_data, Dataset, SemParams};
pub use penalty::{class_penalty, PenaltyConfig, PenaltyMode};
pub use ricf::{fit_support, regularized_ricf, RicfConfig, RicfOutcome, RicfState};
pub use scoring::{abic, bic, ScoreConfig};
