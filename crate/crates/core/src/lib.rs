//! `mcc`: an explicit-state model checker for small guarded-action models.
//!
//! Models are written in the `.mc` language (see [`parser`]), explored
//! breadth-first ([`explorer`]) and checked for invariants, deadlock and
//! leads-to properties under weak fairness ([`liveness`]).

pub mod cli;
pub mod examples;
pub mod explorer;
pub mod kernel;
pub mod liveness;
pub mod parser;
