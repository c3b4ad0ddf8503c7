//! Condorcet-winning team search on a weak-order partition, for additive orders.

use serde::Serialize;

use crate::model::{Player, PlayerSet, Team};
use crate::oracle::{DuelOracle, Recorder};
use crate::witness::{SubsetTeamCandidate, SubsetsCandidate, Witness};

use super::graph::reduce_players;
use super::partition::WeakOrderPartition;
use super::primitives::{compare, new_cut, uncover, CompareOutcome, UncoverInput};
use super::{CondorcetCertificate, DetAlgError};

/// Why the returned team is Condorcet winning.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CondorcetProof {
    /// The leading blocks hold exactly `k` players: the top `k`.
    KPrefix,
    /// The leading blocks hold exactly the top `2k`; the winner of the duel
    /// between its two halves beats its own best response.
    TwoKPrefix { winner: Team, loser: Team },
    /// The `k`-th and `2k`-th positions fall in different blocks. `(u, v)`
    /// satisfies `v(u) − v(v) > |v(x) − v(y)|`; `skipped` lists the players of
    /// the `2k` boundary block already matched in earlier attempts.
    SplitBoundary { u: Player, v: Player, x: PlayerSet, y: PlayerSet, skipped: PlayerSet },
    /// Both positions fall in one block; every margin check around the
    /// uncovered pair `(u_bar, w_bar)` passed.
    SharedBoundary { u_bar: Player, w_bar: Player, checks: usize },
    /// The team beat every disjoint opponent among the reduced players.
    Exhaustive { opponents: u64 },
}

enum Step {
    Done(Team, CondorcetProof),
    Refined,
}

/// Finds a Condorcet winning team starting from `partition`, which must
/// contain the top `2k` players with every cross-block relation correct.
pub fn condorcet_winning<O: DuelOracle>(
    oracle: &mut O,
    partition: WeakOrderPartition,
) -> Result<CondorcetCertificate, DetAlgError> {
    let reduced_players = partition.players().len();
    let mut rec = Recorder::new(oracle);
    let (team, proof, refinements) = search(&mut rec, partition)?;
    let evidence = rec.into_records();
    Ok(CondorcetCertificate {
        team,
        proof,
        duels: evidence.len() as u64,
        evidence,
        reduction_duels: 0,
        reduced_players,
        refinements,
        rounds: Vec::new(),
    })
}

/// Player reduction followed by [`condorcet_winning`] on a single block.
pub fn find_condorcet_additive<O: DuelOracle>(oracle: &mut O) -> Result<CondorcetCertificate, DetAlgError> {
    let mut rec = Recorder::new(oracle);
    let reduction = reduce_players(&mut rec)?;
    let (team, proof, refinements) = search(&mut rec, WeakOrderPartition::new(reduction.players))?;
    let evidence = rec.into_records();
    Ok(CondorcetCertificate {
        team,
        proof,
        duels: evidence.len() as u64,
        evidence,
        reduction_duels: reduction.duels,
        reduced_players: reduction.players.len(),
        refinements,
        rounds: Vec::new(),
    })
}

fn search<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    mut partition: WeakOrderPartition,
) -> Result<(Team, CondorcetProof, usize), DetAlgError> {
    let k = oracle.k();
    let size = partition.players().len();
    if size < 2 * k {
        return Err(DetAlgError::InvalidInput(format!("{size} players cannot hold the top {}", 2 * k)));
    }
    let mut refinements = 0;
    loop {
        match step(oracle, &mut partition)? {
            Step::Done(team, proof) => return Ok((team, proof, refinements)),
            Step::Refined if refinements + 1 >= size => return Err(DetAlgError::Stalled(refinements + 1)),
            Step::Refined => refinements += 1,
        }
    }
}

fn step<O: DuelOracle + ?Sized>(oracle: &mut O, t: &mut WeakOrderPartition) -> Result<Step, DetAlgError> {
    let k = oracle.k();
    if let Some(top) = t.exact_prefix(k) {
        return Ok(Step::Done(top, CondorcetProof::KPrefix));
    }
    if let Some(top) = t.exact_prefix(2 * k) {
        let first: PlayerSet = t.block_order(top).into_iter().take(k).collect();
        let second = top - first;
        let (winner, loser) = if oracle.beats(first, second)? { (first, second) } else { (second, first) };
        return Ok(Step::Done(winner, CondorcetProof::TwoKPrefix { winner, loser }));
    }
    let missing = || DetAlgError::InvalidInput(format!("partition {t} holds fewer than {} players", 2 * k));
    let ik = t.boundary(k).ok_or_else(missing)?;
    let i2k = t.boundary(2 * k).ok_or_else(missing)?;
    if ik != i2k {
        split_boundary(oracle, t, ik, i2k)
    } else if t.block(ik).len() >= 2 * k {
        split_block(oracle, t, ik)
    } else {
        shared_boundary(oracle, t, ik)
    }
}

fn refine_with<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    t: &mut WeakOrderPartition,
    a: Player,
    b: Player,
    witness: Witness,
) -> Result<Step, DetAlgError> {
    let i = match (t.block_of(a), t.block_of(b)) {
        (Some(i), Some(j)) if i == j => i,
        _ => return Err(DetAlgError::Inconsistent(format!("{a} and {b} are not in one block of {t}"))),
    };
    let (upper, lower) = new_cut(oracle, t.block(i), a, b, witness)?;
    t.refine(i, upper, lower)?;
    Ok(Step::Refined)
}

fn refine_uncovered<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    t: &mut WeakOrderPartition,
    input: UncoverInput,
) -> Result<Step, DetAlgError> {
    let found = input.run(oracle)?;
    refine_with(oracle, t, found.a, found.b, Witness::Subsets(found.witness))
}

fn split_ids(block: PlayerSet, sizes: &[usize]) -> Vec<PlayerSet> {
    let ids = block.to_vec();
    let mut start = 0;
    let mut parts: Vec<PlayerSet> = sizes
        .iter()
        .map(|&len| {
            let part = ids[start..start + len].iter().collect();
            start += len;
            part
        })
        .collect();
    parts.push(ids[start..].iter().collect());
    parts
}

/// The boundary block holds at least `2k` players: duel two of its
/// `k`-subsets and split it along the uncovered pair.
fn split_block<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    t: &mut WeakOrderPartition,
    i: usize,
) -> Result<Step, DetAlgError> {
    let k = oracle.k();
    let parts = split_ids(t.block(i), &[k, k]);
    let (a, b) = if oracle.beats(parts[0], parts[1])? { (parts[0], parts[1]) } else { (parts[1], parts[0]) };
    refine_uncovered(oracle, t, UncoverInput::new(a, b, PlayerSet::EMPTY, PlayerSet::EMPTY))
}

fn split_boundary<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    t: &mut WeakOrderPartition,
    ik: usize,
    i2k: usize,
) -> Result<Step, DetAlgError> {
    let k = oracle.k();
    let settled = t.before(ik);
    let (t1, upto) = (settled.len(), t.up_to(ik).len());
    let j = (k - t1).min(upto - k);
    let parts = split_ids(t.block(ik), &[j, j]);
    let (x, y, w) = (parts[0], parts[1], parts[2]);
    let mid = t.union(ik + 1..i2k);
    let z_len = 2 * k - t.before(i2k).len();
    let attempts = t.up_to(i2k).len() - 2 * k + 1;
    let boundary = t.block(i2k);

    let mut skipped = PlayerSet::EMPTY;
    let mut last = None;
    while skipped.len() < attempts {
        let z = (boundary - skipped).take(z_len);
        let (u, v) = if upto - k < k - t1 { (settled | w, mid | z) } else { (settled, w | mid | z) };
        if oracle.beats(v | y, u | x)? {
            return refine_uncovered(oracle, t, UncoverInput::new(y, x, u, v));
        }
        if oracle.beats(v | x, u | y)? {
            return refine_uncovered(oracle, t, UncoverInput::new(x, y, u, v));
        }
        let found = uncover(oracle, &t.block_order(u), &t.block_order(v), x, y)?;
        if let CompareOutcome::Refuted(input) = compare(oracle, (found.a, found.b), found.oriented(x), x, y)? {
            return refine_uncovered(oracle, t, input);
        }
        last = Some((u, found.a, found.b));
        if !z.contains(found.b) {
            break;
        }
        skipped.insert(found.b);
    }
    let (u, a, b) = last.ok_or_else(|| DetAlgError::Inconsistent("no boundary attempt ran".into()))?;
    Ok(Step::Done(u | x, CondorcetProof::SplitBoundary { u: a, v: b, x, y, skipped }))
}

fn shared_boundary<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    t: &mut WeakOrderPartition,
    i: usize,
) -> Result<Step, DetAlgError> {
    let k = oracle.k();
    let settled = t.before(i);
    let t1 = settled.len();
    let parts = split_ids(t.block(i), &[k - t1, k - t1, t1]);
    let (x, y, w, z) = (parts[0], parts[1], parts[2], parts[3]);
    let w1 = w.take(z.len());
    let w2 = w - w1;
    let u1: PlayerSet = t.block_order(settled).into_iter().take(z.len()).collect();
    let u2 = settled - u1;
    if z.is_empty() || w2.is_empty() {
        return Err(DetAlgError::InvalidInput(format!(
            "shared boundary block {} of {t} has the wrong size",
            t.block(i)
        )));
    }

    if oracle.beats(w2 | y | w1, u2 | x | z)? {
        return refine_uncovered(oracle, t, UncoverInput::new(y | w1, x | z, u2, w2));
    }
    if oracle.beats(w2 | x | z, u2 | y | w1)? {
        return refine_uncovered(oracle, t, UncoverInput::new(x | z, y | w1, u2, w2));
    }
    let found = uncover(oracle, &t.block_order(u2), &t.block_order(w2), x | z, y | w1)?;
    let (u_bar, w_bar) = (found.a, found.b);
    let SubsetsCandidate { s, s_prime } = found.oriented(x | z);
    let class = t.block_of(u_bar).map(|c| t.block(c)).unwrap_or(PlayerSet::EMPTY);
    let us: Vec<Player> = std::iter::once(u_bar).chain((class & u1).iter()).collect();
    let ws: Vec<Player> = w1.iter().chain(std::iter::once(w_bar)).collect();

    let mut checks = 0;
    for &u in &us {
        for &wv in &ws {
            let s2 = if wv == w_bar { s_prime } else { s_prime.without(wv).with(w_bar) };
            let first = oracle.beats(s.with(u), s2.with(wv))?;
            let second = oracle.beats(s2.with(u), s.with(wv))?;
            checks += 1;
            if !(first && second) {
                return broken_witness(oracle, t, (u, wv), (u_bar, w_bar), (s, s_prime, s2), first, second);
            }
            let mut probes = vec![(x, y)];
            for zp in z.iter() {
                probes.extend((s2 & (w | y)).iter().map(|q| (PlayerSet::singleton(zp), PlayerSet::singleton(q))));
            }
            for (c, d) in probes {
                checks += 1;
                if let CompareOutcome::Refuted(input) =
                    compare(oracle, (u, wv), SubsetsCandidate { s, s_prime: s2 }, c, d)?
                {
                    return refine_uncovered(oracle, t, input);
                }
            }

            let w1_moved = if wv == w_bar { w1 } else { w1.without(wv).with(w_bar) };
            let (q, q2) = ((s - z) | w1_moved, (s2 - w1_moved) | z);
            let q_first = oracle.beats(q.with(u), q2.with(wv))?;
            let q_second = oracle.beats(q2.with(u), q.with(wv))?;
            checks += 1;
            match (q_first, q_second) {
                (true, true) => {}
                (true, false) => {
                    let input = UncoverInput::new(w1_moved, z, (s - z).with(wv), (s2 - w1_moved).with(u));
                    return refine_uncovered(oracle, t, input);
                }
                (false, true) => {
                    let input = UncoverInput::new(z, w1_moved, (s2 - w1_moved).with(wv), (s - z).with(u));
                    return refine_uncovered(oracle, t, input);
                }
                (false, false) => {
                    return Err(DetAlgError::Inconsistent(format!("{u} lost both duels against {wv}")));
                }
            }
            for zp in z.iter() {
                for wp in (q & w2).iter() {
                    checks += 1;
                    let witness = SubsetsCandidate { s: q, s_prime: q2 };
                    let (c, d) = (PlayerSet::singleton(wp), PlayerSet::singleton(zp));
                    if let CompareOutcome::Refuted(input) = compare(oracle, (u, wv), witness, c, d)? {
                        return refine_uncovered(oracle, t, input);
                    }
                }
            }
        }
    }
    Ok(Step::Done(settled | x, CondorcetProof::SharedBoundary { u_bar, w_bar, checks }))
}

/// `(S, S'')` failed as a witness for `u ≻ w`; turns the lost duel into a
/// witness between two players of one block.
fn broken_witness<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    t: &mut WeakOrderPartition,
    (u, wv): (Player, Player),
    (u_bar, w_bar): (Player, Player),
    (s, s_prime, s2): (PlayerSet, PlayerSet, PlayerSet),
    first: bool,
    second: bool,
) -> Result<Step, DetAlgError> {
    if u == u_bar {
        if !second && wv != w_bar {
            let witness = SubsetsCandidate { s, s_prime: s_prime.without(wv).with(u_bar) };
            return refine_with(oracle, t, wv, w_bar, Witness::Subsets(witness));
        }
        return Err(DetAlgError::Inconsistent(format!("uncovered witness for {u_bar} over {w_bar} lost a duel")));
    }
    let witness = if !second {
        SubsetTeamCandidate { s: s2, t: s.with(wv) }
    } else {
        debug_assert!(!first);
        SubsetTeamCandidate { s, t: s2.with(wv) }
    };
    refine_with(oracle, t, u_bar, u, Witness::SubsetTeam(witness))
}
