//! Privacy threat elicitation for GenAI-based system architectures.
//!
//! The crate combines a domain-tagged LINDDUN threat knowledge base
//! ([`kb`]), a data-flow-diagram system model with GenAI role annotations
//! ([`model`]), interaction-based elicitation ([`elicit`]), the six Common
//! Attacker Models ([`cam`]), and deterministic reports and threat trees
//! ([`report`]).

pub mod analysis;
pub mod cam;
pub mod cli;
pub mod domain;
pub mod elicit;
mod error;
pub mod fixtures;
mod json;
pub mod kb;
pub mod model;
pub mod report;

pub use error::Error;
