//! Uncover, NewCut and Compare.

use std::collections::VecDeque;

use serde::Serialize;

use crate::model::{Player, PlayerSet};
use crate::oracle::DuelOracle;
use crate::witness::{SubsetTeamCandidate, SubsetsCandidate, Witness};

use super::{debug_check, DetAlgError};

/// Arguments of one Uncover call: ordered `A1`, `B1` and the fixed parts `A2`, `B2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UncoverInput {
    pub a1: Vec<Player>,
    pub b1: Vec<Player>,
    pub a2: PlayerSet,
    pub b2: PlayerSet,
}

impl UncoverInput {
    pub fn new(a1: PlayerSet, b1: PlayerSet, a2: PlayerSet, b2: PlayerSet) -> Self {
        Self { a1: a1.to_vec(), b1: b1.to_vec(), a2, b2 }
    }

    pub fn run<O: DuelOracle + ?Sized>(&self, oracle: &mut O) -> Result<UncoverResult, DetAlgError> {
        uncover(oracle, &self.a1, &self.b1, self.a2, self.b2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UncoverResult {
    pub a: Player,
    pub b: Player,
    /// `(S, S')` with `a ≻ b` witnessed; `A2` lies in one side, `B2` in the other.
    pub witness: SubsetsCandidate,
    pub duels: u64,
}

impl UncoverResult {
    /// The witness with its sides swapped so that `part` lies in `S`.
    pub fn oriented(&self, part: PlayerSet) -> SubsetsCandidate {
        let w = self.witness;
        if part.is_subset(w.s) {
            w
        } else {
            SubsetsCandidate { s: w.s_prime, s_prime: w.s }
        }
    }
}

/// Largest number of duels Uncover issues for `|A1| = len`.
pub fn uncover_bound(len: usize) -> u64 {
    (len.max(1) as u64).next_power_of_two().trailing_zeros() as u64
}

/// Binary search for a pair `a ∈ A1`, `b ∈ B1` with a subsets witness,
/// given `A1∪A2 ≻ B1∪B2` and `A1∪B2 ≻ B1∪A2`.
pub fn uncover<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    a1: &[Player],
    b1: &[Player],
    a2: PlayerSet,
    b2: PlayerSet,
) -> Result<UncoverResult, DetAlgError> {
    let k = oracle.k();
    let (sa, sb): (PlayerSet, PlayerSet) = (a1.iter().copied().collect(), b1.iter().copied().collect());
    let m = a1.len();
    let sizes_ok =
        m >= 1 && sa.len() == m && sb.len() == m && b1.len() == m && a2.len() == b2.len() && m + a2.len() == k;
    let disjoint = [sa, sb, a2, b2].iter().map(|s| s.len()).sum::<usize>() == (sa | sb | a2 | b2).len();
    if !sizes_ok || !disjoint {
        return Err(DetAlgError::InvalidInput(format!("uncover({sa}, {sb}, {a2}, {b2}) for k={k}")));
    }

    let (mut s, mut t) = (sa | a2, sb | b2);
    let (mut l, mut r) = (0usize, m - 1);
    let mut duels = 0;
    while l < r {
        let i = (l + r) / 2;
        let tail_a: PlayerSet = a1[i + 1..=r].iter().copied().collect();
        let tail_b: PlayerSet = b1[i + 1..=r].iter().copied().collect();
        s = (s - tail_a) | tail_b;
        t = (t - tail_b) | tail_a;
        duels += 1;
        if oracle.beats(s, t)? {
            r = i;
        } else {
            l = i + 1;
            std::mem::swap(&mut s, &mut t);
        }
    }
    let (a, b) = (a1[l], b1[l]);
    let witness = SubsetsCandidate { s: s.without(a), s_prime: t.without(b) };
    debug_check(oracle, a, b, &Witness::Subsets(witness))?;
    Ok(UncoverResult { a, b, witness, duels })
}

/// Largest number of duels NewCut issues on `r` players.
pub fn new_cut_bound(r: usize) -> u64 {
    4 * (r as u64) * (r as u64)
}

fn check_witness_shape(k: usize, a: Player, b: Player, w: &Witness) -> Result<(), DetAlgError> {
    let (s, other) = (w.base(), w.other());
    let other_ok = match w {
        Witness::Subsets(_) => other.len() == k - 1,
        Witness::SubsetTeam(_) => other.len() == k,
    };
    let ab = PlayerSet::EMPTY.with(a).with(b);
    if a == b || s.len() != k - 1 || !other_ok || !s.is_disjoint(other) || !(s | other).is_disjoint(ab) {
        return Err(DetAlgError::InvalidInput(format!("malformed witness {s} / {other} for {a} over {b}")));
    }
    Ok(())
}

fn shaped(k: usize, s: PlayerSet, other: PlayerSet) -> Witness {
    if other.len() == k {
        Witness::SubsetTeam(SubsetTeamCandidate { s, t: other })
    } else {
        Witness::Subsets(SubsetsCandidate { s, s_prime: other })
    }
}

/// Splits `r` into `U ▷ L` with `a ∈ U`, `b ∈ L`, starting from a witness
/// for `a ≻ b` and propagating it with player exchanges.
pub fn new_cut<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    r: PlayerSet,
    a: Player,
    b: Player,
    witness: Witness,
) -> Result<(PlayerSet, PlayerSet), DetAlgError> {
    let k = oracle.k();
    if !r.contains(a) || !r.contains(b) {
        return Err(DetAlgError::InvalidInput(format!("{a} and {b} must lie in {r}")));
    }
    check_witness_shape(k, a, b, &witness)?;
    debug_check(oracle, a, b, &witness)?;

    let mut upper = PlayerSet::singleton(a);
    let mut rest = r.without(a).without(b);
    let mut queue = VecDeque::from([(witness.base(), witness.other(), a)]);
    while let Some((s, t, y)) = queue.pop_front() {
        for x in rest.iter() {
            let moved = shaped(k, s.exchange(x, y), t.exchange(x, y));
            let found = if moved.verify_by_duels(oracle, x, b)? {
                Some(moved)
            } else if t.len() == k && t.contains(x) {
                let reduced = Witness::Subsets(SubsetsCandidate { s, s_prime: t.without(x) });
                reduced.verify_by_duels(oracle, x, b)?.then_some(reduced)
            } else {
                None
            };
            if let Some(w) = found {
                upper.insert(x);
                rest.remove(x);
                queue.push_back((w.base(), w.other(), x));
            }
        }
    }
    Ok((upper, rest.with(b)))
}

/// Result of Compare.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CompareOutcome {
    /// Both duels won: `v(a) − v(b) > |v(C) − v(D)|` for additive orders.
    Proven,
    /// A duel was lost; running this Uncover yields a pair across `C` and `D`.
    Refuted(UncoverInput),
}

/// Two duels testing whether the witness `(S, S')` for `a ≻ b` survives
/// exchanging `C ⊆ S` with `D ⊆ S'`.
pub fn compare<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    (a, b): (Player, Player),
    witness: SubsetsCandidate,
    c: PlayerSet,
    d: PlayerSet,
) -> Result<CompareOutcome, DetAlgError> {
    let SubsetsCandidate { s, s_prime } = witness;
    if !c.is_subset(s) || !d.is_subset(s_prime) || c.len() != d.len() {
        return Err(DetAlgError::InvalidInput(format!("compare needs {c} ⊆ {s}, {d} ⊆ {s_prime}, equal sizes")));
    }
    let (s_rest, s_prime_rest) = (s - c, s_prime - d);
    let first = oracle.beats(s_rest | d.with(a), s_prime_rest | c.with(b))?;
    let second = oracle.beats(s_prime_rest | c.with(a), s_rest | d.with(b))?;
    if first && second {
        return Ok(CompareOutcome::Proven);
    }
    if c.is_empty() {
        return Err(DetAlgError::Inconsistent(format!("witness {s} / {s_prime} for {a} over {b} lost a duel")));
    }
    Ok(CompareOutcome::Refuted(if !first {
        UncoverInput::new(c, d, s_rest.with(a), s_prime_rest.with(b))
    } else {
        UncoverInput::new(d, c, s_rest.with(b), s_prime_rest.with(a))
    }))
}
