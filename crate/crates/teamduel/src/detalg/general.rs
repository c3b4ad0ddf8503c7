//! Condorcet-winning team search for arbitrary consistent orders.

use serde::Serialize;

use crate::model::{binomial, subsets, PlayerSet};
use crate::oracle::{DuelOracle, Recorder};
use crate::witness::Witness;

use super::graph::reduce_players;
use super::primitives::uncover;
use super::{debug_check, CondorcetCertificate, CondorcetProof, DetAlgError};

/// Largest team size accepted by [`find_condorcet_general`].
pub const MAX_GENERAL_K: usize = 4;

/// One exhaustive test of a candidate team.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GeneralRound {
    pub candidate: PlayerSet,
    /// Players with fewer than `2k` proven betters.
    pub v_size: usize,
    /// `C(v_size − k, k)`.
    pub opponents_total: u64,
    pub opponents_tested: u64,
    pub won: bool,
}

/// Player reduction, then repeatedly tests a team with no proven better
/// outsider against every disjoint team of the reduced players, learning one
/// new relation from each loss.
pub fn find_condorcet_general<O: DuelOracle>(oracle: &mut O) -> Result<CondorcetCertificate, DetAlgError> {
    let k = oracle.k();
    if k > MAX_GENERAL_K {
        return Err(DetAlgError::TooLarge { k, max: MAX_GENERAL_K });
    }
    let mut rec = Recorder::new(oracle);
    let reduction = reduce_players(&mut rec)?;
    let mut graph = reduction.graph;
    let mut rounds = Vec::new();
    let cap = reduction.players.len().pow(2) + 1;
    loop {
        let reduced = graph.low_indegree(2 * k);
        let candidate: PlayerSet = graph.topological_order(reduced).into_iter().take(k).collect();
        let rest = reduced - candidate;
        let opponents_total = binomial(rest.len(), k);
        let mut tested = 0;
        let mut beaten_by = None;
        for opponent in subsets(rest, k) {
            tested += 1;
            if !rec.beats(candidate, opponent)? {
                beaten_by = Some(opponent);
                break;
            }
        }
        rounds.push(GeneralRound {
            candidate,
            v_size: reduced.len(),
            opponents_total,
            opponents_tested: tested,
            won: beaten_by.is_none(),
        });
        let Some(opponent) = beaten_by else {
            let evidence = rec.into_records();
            return Ok(CondorcetCertificate {
                team: candidate,
                proof: CondorcetProof::Exhaustive { opponents: opponents_total },
                duels: evidence.len() as u64,
                evidence,
                reduction_duels: reduction.duels,
                reduced_players: reduction.players.len(),
                refinements: rounds.len(),
                rounds,
            });
        };
        if rounds.len() >= cap {
            return Err(DetAlgError::Stalled(rounds.len()));
        }
        let found = uncover(&mut rec, &opponent.to_vec(), &candidate.to_vec(), PlayerSet::EMPTY, PlayerSet::EMPTY)?;
        debug_check(&rec, found.a, found.b, &Witness::Subsets(found.witness))?;
        graph.insert(found.a, found.b, found.witness)?;
    }
}
