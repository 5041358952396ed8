//! Mechanism-design engine and verification harness for task delegation
//! under private ordering preferences.
//!
//! A principal wants a batch of tasks executed in a particular order; each
//! agent privately prefers a different order and bears a cost for deviating
//! from it. The engine implements the auctions that select agents and the
//! compensation rules that reward realized orders, simulates strategic
//! agents, and certifies incentive compatibility, individual rationality,
//! and social optimality by exhaustive oracles on small instances.
//!
//! Module map:
//! - [`rank`]: priority permutations and footrule misalignments
//! - [`money`]: exact rational payoffs
//! - [`econ`]: cost, profit, and payment families
//! - [`mech_static`]: single-winner auction for an indivisible task array
//! - [`mech_dynamic`]: per-stage and lookahead mechanisms for divisible arrays
//! - [`agents`]: truthful / misreporting / best-response behavior models
//! - [`verifier`]: brute-force certification of IC, IR, SO, and payment
//!   properties
//! - [`harness`]: scenario configs, seeded instance generation, experiment
//!   runs, CSV/JSON emission

pub mod agents;
pub mod econ;
pub mod error;
pub mod harness;
pub mod mech_dynamic;
pub mod mech_static;
pub mod money;
pub mod rank;
pub mod verifier;

pub use error::{Error, Result};
pub use money::Money;
