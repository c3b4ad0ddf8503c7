//! Brute-force validators for consistency and strong stochastic transitivity.

use std::fmt;

use serde::Serialize;

use super::players::{binomial, subsets, Player, PlayerSet, Team};
use super::{GroundTruthOrder, Instance, ModelError};

/// Two contexts that disagree on the direction of `a` versus `b`:
/// `S∪{a} ≻ S∪{b}` but `S'∪{b} ≻ S'∪{a}` (or the reverse).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyViolation {
    pub a: Player,
    pub b: Player,
    pub s: PlayerSet,
    pub s_prime: PlayerSet,
}

impl fmt::Display for ConsistencyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "players {} and {} flip between contexts {} and {}", self.a, self.b, self.s, self.s_prime)
    }
}

/// A triple `A ≻ B ≻ C` with `P(A,C) < max(P(A,B), P(B,C))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SstViolation {
    pub a: Team,
    pub b: Team,
    pub c: Team,
}

/// Checks that every pair of players compares the same way in every context.
pub fn validate_consistency(order: &GroundTruthOrder, cap: u64) -> Result<Option<ConsistencyViolation>, ModelError> {
    let (n, k) = (order.n(), order.k());
    let pairs = (n * (n - 1) / 2) as u64;
    let needed = pairs.saturating_mul(binomial(n - 2, k - 1));
    if needed > cap {
        return Err(ModelError::CapExceeded { needed, cap });
    }
    let all = PlayerSet::full(n);
    for a in all.iter() {
        for b in all.iter().filter(|&b| b > a) {
            let mut reference: Option<(PlayerSet, bool)> = None;
            for s in subsets(all.without(a).without(b), k - 1) {
                let dir = order.beats(s.with(a), s.with(b));
                match reference {
                    None => reference = Some((s, dir)),
                    Some((s0, d0)) if d0 != dir => {
                        return Ok(Some(ConsistencyViolation { a, b, s: s0, s_prime: s }));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(None)
}

/// Checks strong stochastic transitivity of an instance over all team triples.
pub fn validate_sst(instance: &Instance, cap: u64) -> Result<Option<SstViolation>, ModelError> {
    let teams = instance.order().sorted_teams(cap)?;
    validate_sst_with(&teams, |a, b| instance.prob(a, b), cap)
}

/// Checks strong stochastic transitivity for arbitrary probabilities over teams listed best first.
pub fn validate_sst_with<F>(teams_best_first: &[Team], prob: F, cap: u64) -> Result<Option<SstViolation>, ModelError>
where
    F: Fn(Team, Team) -> f64,
{
    let m = teams_best_first.len() as u64;
    let needed = if m < 3 { 0 } else { m * (m - 1) * (m - 2) / 6 };
    if needed > cap {
        return Err(ModelError::CapExceeded { needed, cap });
    }
    let t = teams_best_first;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            let p_ij = prob(t[i], t[j]);
            for l in j + 1..t.len() {
                let p_il = prob(t[i], t[l]);
                if p_il < p_ij.max(prob(t[j], t[l])) {
                    return Ok(Some(SstViolation { a: t[i], b: t[j], c: t[l] }));
                }
            }
        }
    }
    Ok(None)
}
