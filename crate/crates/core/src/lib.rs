//! Nonlocality without entanglement in polygon theories.
//!
//! Regular-polygon GPT systems and the Bloch circle, their minimal tensor
//! products, a catalog of product-state ensembles, optimal local
//! discrimination, quantum comparison protocols and classical signaling
//! checks.

pub mod catalog;
pub mod cli;
pub mod composition;
pub mod discrimination;
pub mod error;
pub mod format;
pub mod gpt;
pub mod optimize;
pub mod quantum;
pub mod signaling;

pub use catalog::{load, load_measurement, Ensemble, EnsembleId, PriorFamily};
pub use composition::{CompositeSystem, ProductEffect, ProductState, SeparableMeasurement};
pub use discrimination::{
    delta, eval_tree, optimal_local, DiscriminationReport, InferenceModel, ProtocolTree,
    SearchConfig,
};
pub use error::{NweError, Result};
pub use gpt::{Effect, GptSystem, Measurement, RealVec, State};
