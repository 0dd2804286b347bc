//! Experiment runner for the Favard-length toolkit: configuration,
//! audits, the lemma suite and CSV/JSONL persistence.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audits;
pub mod commands;
pub mod config;
pub mod decay;
pub mod error;
pub mod ledger;
pub mod lemmas;
pub mod output;
pub mod record;

pub use commands::{Session, COMMANDS};
pub use config::ExperimentConfig;
pub use error::{LabError, Result};
