//! Dominance graph between players and the player-reduction loop.

use serde::Serialize;

use crate::model::{Player, PlayerSet};
use crate::oracle::DuelOracle;
use crate::witness::SubsetsCandidate;

use super::primitives::{uncover, uncover_bound};
use super::DetAlgError;

/// An arc added directly from an uncovered witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ArcProof {
    pub better: Player,
    pub worse: Player,
    pub witness: SubsetsCandidate,
}

/// Proven "better than" relation between players, kept transitively closed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominanceGraph {
    above: Vec<PlayerSet>,
    below: Vec<PlayerSet>,
    proofs: Vec<ArcProof>,
}

impl DominanceGraph {
    pub fn new(n: usize) -> Self {
        Self { above: vec![PlayerSet::EMPTY; n], below: vec![PlayerSet::EMPTY; n], proofs: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.above.len()
    }

    /// `true` if `a ≻ b` is proven.
    pub fn has_arc(&self, a: Player, b: Player) -> bool {
        self.below[a.index()].contains(b)
    }

    pub fn related(&self, a: Player, b: Player) -> bool {
        self.has_arc(a, b) || self.has_arc(b, a)
    }

    pub fn indegree(&self, p: Player) -> usize {
        self.above[p.index()].len()
    }

    pub fn above(&self, p: Player) -> PlayerSet {
        self.above[p.index()]
    }

    pub fn below(&self, p: Player) -> PlayerSet {
        self.below[p.index()]
    }

    pub fn arc_count(&self) -> usize {
        self.below.iter().map(|s| s.len()).sum()
    }

    pub fn proofs(&self) -> &[ArcProof] {
        &self.proofs
    }

    /// Players with fewer than `bound` proven betters.
    pub fn low_indegree(&self, bound: usize) -> PlayerSet {
        (0..self.n()).map(Player::from_index).filter(|&p| self.indegree(p) < bound).collect()
    }

    /// Adds `better ≻ worse` with its witness and closes transitively.
    /// Returns `false` if the arc was already implied.
    pub fn insert(&mut self, better: Player, worse: Player, witness: SubsetsCandidate) -> Result<bool, DetAlgError> {
        if better == worse || self.has_arc(worse, better) {
            return Err(DetAlgError::Cycle { a: better, b: worse });
        }
        if self.has_arc(better, worse) {
            return Ok(false);
        }
        self.proofs.push(ArcProof { better, worse, witness });
        let ups = self.above(better).with(better);
        let downs = self.below(worse).with(worse);
        for x in ups.iter() {
            self.below[x.index()] = self.below[x.index()] | downs;
        }
        for y in downs.iter() {
            self.above[y.index()] = self.above[y.index()] | ups;
        }
        Ok(true)
    }

    /// Topological order of the subgraph on `set`, smallest id first among ready nodes.
    pub fn topological_order(&self, set: PlayerSet) -> Vec<Player> {
        let mut remaining = set;
        let mut order = Vec::with_capacity(set.len());
        while let Some(next) = remaining.iter().find(|&p| self.above(p).is_disjoint(remaining)) {
            order.push(next);
            remaining.remove(next);
        }
        order
    }

    /// Pairs in `set` with no proven relation, in lexicographic order.
    pub fn unknown_pairs(&self, set: PlayerSet) -> Vec<(Player, Player)> {
        set.iter()
            .flat_map(|u| set.iter().filter(move |&v| v > u).map(move |v| (u, v)))
            .filter(|&(u, v)| !self.related(u, v))
            .collect()
    }
}

/// Greedy matching of at most `limit` edges, scanning edges in lexicographic order.
pub fn greedy_matching(edges: &[(Player, Player)], limit: usize) -> Vec<(Player, Player)> {
    let mut sorted = edges.to_vec();
    sorted.sort();
    let mut used = PlayerSet::EMPTY;
    let mut matching = Vec::new();
    for (u, v) in sorted {
        if matching.len() == limit {
            break;
        }
        if u != v && !used.contains(u) && !used.contains(v) {
            used = used.with(u).with(v);
            matching.push((u, v));
        }
    }
    matching
}

/// Outcome of [`reduce_players`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reduction {
    /// Players with fewer than `2k` proven betters; contains the top `2k`.
    pub players: PlayerSet,
    pub graph: DominanceGraph,
    pub duels: u64,
    pub iterations: usize,
}

/// Largest number of duels [`reduce_players`] issues.
pub fn reduce_players_bound(n: usize, k: usize) -> u64 {
    2 * (k as u64) * (n as u64) * (uncover_bound(k) + 2)
}

/// Repeatedly matches `k` unrelated pairs among the players with fewer than
/// `2k` proven betters, orients the matched teams with one duel and uncovers
/// one new relation, until no such matching exists.
pub fn reduce_players<O: DuelOracle + ?Sized>(oracle: &mut O) -> Result<Reduction, DetAlgError> {
    let (n, k) = (oracle.n(), oracle.k());
    let start = oracle.duel_count();
    let mut graph = DominanceGraph::new(n);
    let mut iterations = 0;
    loop {
        let candidates = graph.low_indegree(2 * k);
        let matching = greedy_matching(&graph.unknown_pairs(candidates), k);
        if matching.len() < k {
            return Ok(Reduction { players: candidates, graph, duels: oracle.duel_count() - start, iterations });
        }
        let mut a: Vec<Player> = matching.iter().map(|e| e.0).collect();
        let mut b: Vec<Player> = matching.iter().map(|e| e.1).collect();
        let team_a: PlayerSet = a.iter().copied().collect();
        let team_b: PlayerSet = b.iter().copied().collect();
        if !oracle.beats(team_a, team_b)? {
            std::mem::swap(&mut a, &mut b);
        }
        let found = uncover(oracle, &a, &b, PlayerSet::EMPTY, PlayerSet::EMPTY)?;
        graph.insert(found.a, found.b, found.witness)?;
        iterations += 1;
    }
}
