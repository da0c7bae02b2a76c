//! Bayesian nonparametric prediction under Gibbs-type exchangeable random
//! partitions.
//!
//! Given a sample of species frequencies, the crate fits prior parameters
//! by maximizing the EPPF, then computes exact conditional distributions,
//! point estimators, HPD intervals and "unseen species" probabilities for
//! an additional sample of size `m`.

pub mod combinatorics;
pub mod error;
pub mod fitting;
pub mod models;
pub mod prediction;
pub mod retrodiction;
pub mod simulation;
pub mod workbench;

pub use combinatorics::{LogCoeffTable, LogValue};
pub use error::{GibbsError, Result};
pub use models::{GibbsModel, ModelFamily, SampleSummary};
