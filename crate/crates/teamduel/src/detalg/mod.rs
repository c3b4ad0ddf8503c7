//! Algorithms for deterministic feedback: Uncover, ReducePlayers, NewCut,
//! Compare, the Condorcet-winning procedures and the two end-to-end drivers.

mod condorcet;
mod general;
mod graph;
mod partition;
mod primitives;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Player, Team};
use crate::oracle::{DuelOracle, DuelRecord, OracleError};
use crate::witness::Witness;

pub use condorcet::{condorcet_winning, find_condorcet_additive, CondorcetProof};
pub use general::{find_condorcet_general, GeneralRound, MAX_GENERAL_K};
pub use graph::{greedy_matching, reduce_players, reduce_players_bound, DominanceGraph, Reduction};
pub use partition::WeakOrderPartition;
pub use primitives::{
    compare, new_cut, new_cut_bound, uncover, uncover_bound, CompareOutcome, UncoverInput, UncoverResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetAlgError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("witness for {a} over {b} failed verification")]
    InvalidWitness { a: Player, b: Player },
    #[error("arc {a} -> {b} closes a cycle in the dominance graph")]
    Cycle { a: Player, b: Player },
    #[error("observed duels contradict a consistent order: {0}")]
    Inconsistent(String),
    #[error("team size {k} exceeds the supported maximum {max}")]
    TooLarge { k: usize, max: usize },
    #[error("no progress after {0} refinements")]
    Stalled(usize),
}

/// A team claimed to be Condorcet winning together with the duels that support it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondorcetCertificate {
    pub team: Team,
    pub proof: CondorcetProof,
    /// Every duel issued by the driver, in order.
    pub evidence: Vec<DuelRecord>,
    pub duels: u64,
    /// Duels spent in player reduction.
    pub reduction_duels: u64,
    /// Size of the reduced player set.
    pub reduced_players: usize,
    /// Number of partition refinements (additive driver) or rounds (general driver).
    pub refinements: usize,
    /// Per-round statistics of the general driver.
    pub rounds: Vec<GeneralRound>,
}

impl CondorcetCertificate {
    /// Re-issues every recorded duel and checks that the answers agree.
    pub fn replay<O: DuelOracle + ?Sized>(&self, oracle: &mut O) -> Result<bool, OracleError> {
        for r in &self.evidence {
            if oracle.beats(r.first, r.second)? != r.first_won {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Uncounted self-check of a witness in debug builds; a no-op for oracles
/// without ground truth.
pub(crate) fn debug_check<O: DuelOracle + ?Sized>(
    oracle: &O,
    a: Player,
    b: Player,
    witness: &Witness,
) -> Result<(), DetAlgError> {
    if cfg!(debug_assertions) && witness.audit(oracle, a, b) == Some(false) {
        return Err(DetAlgError::InvalidWitness { a, b });
    }
    Ok(())
}
