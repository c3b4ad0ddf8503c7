//! Simulation toolkit for duels between teams of players.
//!
//! - [`model`]: hidden team orders, win probabilities, generators and validators.
//! - [`oracle`]: duel oracles (deterministic, noisy, adversarial, amplified).
//! - [`witness`]: witness enumeration and predicates, pair expectations, gap, brute-force deducibility.
//! - [`reduction`]: simulated single-player duels and top-k identification.
//! - [`detalg`]: deterministic-feedback algorithms and the Condorcet-winning drivers.
//! - [`harness`]: seeded experiment batches, verification and reports.

pub mod detalg;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod reduction;
pub mod witness;
