//! Duel oracles: the only channel through which algorithms observe an instance.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{GroundTruthOrder, Instance, Player, PlayerSet, Team};

/// Which side won a duel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuelOutcome {
    First,
    Second,
}

/// One answered duel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuelRecord {
    pub first: Team,
    pub second: Team,
    pub first_won: bool,
}

impl DuelRecord {
    pub fn winner(&self) -> Team {
        if self.first_won {
            self.first
        } else {
            self.second
        }
    }

    pub fn loser(&self) -> Team {
        if self.first_won {
            self.second
        } else {
            self.first
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{team} is not a team of size {k} over players 1..={n}")]
    InvalidTeam { team: Team, n: usize, k: usize },
    #[error("teams {0} and {1} overlap")]
    Overlap(Team, Team),
    #[error("duel budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("amplification margin must be positive, got {0}")]
    InvalidMargin(f64),
}

/// Duel counter with an optional trace and an optional budget.
#[derive(Clone, Debug, Default)]
pub struct DuelLog {
    count: u64,
    budget: Option<u64>,
    trace: Option<Vec<DuelRecord>>,
}

impl DuelLog {
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn trace(&self) -> Option<&[DuelRecord]> {
        self.trace.as_deref()
    }

    fn admit(&self) -> Result<(), OracleError> {
        match self.budget {
            Some(b) if self.count >= b => Err(OracleError::BudgetExhausted(b)),
            _ => Ok(()),
        }
    }

    fn record(&mut self, first: Team, second: Team, outcome: DuelOutcome) {
        self.count += 1;
        if let Some(trace) = &mut self.trace {
            trace.push(DuelRecord { first, second, first_won: outcome == DuelOutcome::First });
        }
    }
}

/// Checks the duel preconditions: two disjoint teams of size k over `1..=n`.
pub fn check_duel(n: usize, k: usize, a: Team, b: Team) -> Result<(), OracleError> {
    for t in [a, b] {
        if t.len() != k || t.max_id() > n {
            return Err(OracleError::InvalidTeam { team: t, n, k });
        }
    }
    if !a.is_disjoint(b) {
        return Err(OracleError::Overlap(a, b));
    }
    Ok(())
}

/// Answers duels between disjoint teams and counts them.
pub trait DuelOracle {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn duel(&mut self, a: Team, b: Team) -> Result<DuelOutcome, OracleError>;
    fn duel_count(&self) -> u64;

    /// Uncounted ground-truth answer, available only for deterministic
    /// oracles. Used for debug-mode self checks, never for decisions.
    fn audit(&self, _a: Team, _b: Team) -> Option<bool> {
        None
    }

    /// `true` iff `a` wins the duel against `b`.
    fn beats(&mut self, a: Team, b: Team) -> Result<bool, OracleError> {
        Ok(self.duel(a, b)? == DuelOutcome::First)
    }
}

/// Noise-free oracle: the better team always wins.
#[derive(Clone, Debug)]
pub struct DeterministicOracle<'a> {
    order: &'a GroundTruthOrder,
    log: DuelLog,
}

impl<'a> DeterministicOracle<'a> {
    pub fn new(order: &'a GroundTruthOrder) -> Self {
        Self { order, log: DuelLog::default() }
    }

    pub fn traced(mut self) -> Self {
        self.log.trace = Some(Vec::new());
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.log.budget = Some(budget);
        self
    }

    pub fn log(&self) -> &DuelLog {
        &self.log
    }
}

impl DuelOracle for DeterministicOracle<'_> {
    fn n(&self) -> usize {
        self.order.n()
    }

    fn k(&self) -> usize {
        self.order.k()
    }

    fn duel(&mut self, a: Team, b: Team) -> Result<DuelOutcome, OracleError> {
        check_duel(self.n(), self.k(), a, b)?;
        self.log.admit()?;
        let outcome = if self.order.beats(a, b) { DuelOutcome::First } else { DuelOutcome::Second };
        self.log.record(a, b, outcome);
        Ok(outcome)
    }

    fn duel_count(&self) -> u64 {
        self.log.count
    }

    fn audit(&self, a: Team, b: Team) -> Option<bool> {
        Some(self.order.beats(a, b))
    }
}

/// Noisy oracle: the first team wins with probability `P(A,B)`, one draw per duel.
#[derive(Clone, Debug)]
pub struct StochasticOracle<'a> {
    instance: &'a Instance,
    rng: ChaCha8Rng,
    log: DuelLog,
}

impl<'a> StochasticOracle<'a> {
    pub fn new(instance: &'a Instance, seed: u64) -> Self {
        Self { instance, rng: ChaCha8Rng::seed_from_u64(seed), log: DuelLog::default() }
    }

    pub fn traced(mut self) -> Self {
        self.log.trace = Some(Vec::new());
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.log.budget = Some(budget);
        self
    }

    pub fn log(&self) -> &DuelLog {
        &self.log
    }
}

impl DuelOracle for StochasticOracle<'_> {
    fn n(&self) -> usize {
        self.instance.n()
    }

    fn k(&self) -> usize {
        self.instance.k()
    }

    fn duel(&mut self, a: Team, b: Team) -> Result<DuelOutcome, OracleError> {
        check_duel(self.n(), self.k(), a, b)?;
        self.log.admit()?;
        let p = self.instance.prob(a, b);
        let outcome = if self.rng.gen::<f64>() < p { DuelOutcome::First } else { DuelOutcome::Second };
        self.log.record(a, b, outcome);
        Ok(outcome)
    }

    fn duel_count(&self) -> u64 {
        self.log.count
    }

    fn audit(&self, a: Team, b: Team) -> Option<bool> {
        self.instance.is_deterministic().then(|| self.instance.order().beats(a, b))
    }
}

/// Adversary that builds a reverse-lexicographic order on the fly: a duel is
/// lost by the team holding the worst fixed player, and when no participant is
/// fixed yet the lowest-id participant becomes the next worst player.
#[derive(Clone, Debug)]
pub struct AdversaryOracle {
    n: usize,
    k: usize,
    rank: Vec<Option<usize>>,
    fixed: usize,
    log: DuelLog,
}

impl AdversaryOracle {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k, rank: vec![None; n], fixed: 0, log: DuelLog { trace: Some(Vec::new()), ..DuelLog::default() } }
    }

    /// Number of players fixed so far.
    pub fn fixed_count(&self) -> usize {
        self.fixed
    }

    /// Assigned rank (1 = best) of a fixed player.
    pub fn rank_of(&self, p: Player) -> Option<usize> {
        self.rank[p.index()]
    }

    pub fn trace(&self) -> &[DuelRecord] {
        self.log.trace().unwrap_or(&[])
    }

    /// Completes the order: unfixed players take ranks `1..=n−t` by id, fixed
    /// players keep theirs. Returned best first.
    pub fn completion(&self) -> Vec<Player> {
        let mut players: Vec<(usize, Player)> = (0..self.n)
            .map(|i| {
                let p = Player::from_index(i);
                (self.rank[i].unwrap_or(0), p)
            })
            .collect();
        players.sort();
        players.into_iter().map(|(_, p)| p).collect()
    }

    /// The completed order as an additive order in which the worst member dominates.
    pub fn completed_order(&self) -> GroundTruthOrder {
        let ranking = self.completion();
        let mut values = vec![0.0; self.n];
        for (pos, p) in ranking.iter().enumerate() {
            values[p.index()] = -(2f64.powi(pos as i32 - self.n as i32));
        }
        GroundTruthOrder::additive(self.n, self.k, values).expect("sizes were validated")
    }

    /// `true` iff every recorded answer agrees with the completed order.
    pub fn replay_consistent(&self) -> bool {
        let order = self.completed_order();
        self.trace().iter().all(|r| order.beats(r.first, r.second) == r.first_won)
    }
}

impl DuelOracle for AdversaryOracle {
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn duel(&mut self, a: Team, b: Team) -> Result<DuelOutcome, OracleError> {
        check_duel(self.n, self.k, a, b)?;
        self.log.admit()?;
        let worst = |t: Team| t.iter().filter_map(|p| self.rank[p.index()]).max();
        let first_loses = match (worst(a), worst(b)) {
            (None, None) => {
                let p = (a | b).first().expect("teams are nonempty");
                self.rank[p.index()] = Some(self.n - self.fixed);
                self.fixed += 1;
                a.contains(p)
            }
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => x > y,
        };
        let outcome = if first_loses { DuelOutcome::Second } else { DuelOutcome::First };
        self.log.record(a, b, outcome);
        Ok(outcome)
    }

    fn duel_count(&self) -> u64 {
        self.log.count
    }
}

/// Number of repetitions so that a majority vote errs with probability at
/// most `delta / m` when every duel has margin at least `theta`.
pub fn amplification_repetitions(theta: f64, delta: f64, m: u64) -> Result<u64, OracleError> {
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(OracleError::InvalidMargin(theta));
    }
    let reps = ((m.max(1) as f64 / delta).ln() / (2.0 * theta * theta)).ceil();
    Ok(reps.max(1.0) as u64)
}

/// Simulates a deterministic oracle by majority votes over repeated noisy duels.
#[derive(Clone, Debug)]
pub struct AmplifiedOracle<O> {
    inner: O,
    repetitions: u64,
    log: DuelLog,
}

impl<O: DuelOracle> AmplifiedOracle<O> {
    /// Wraps `inner` for a caller that issues at most `m` duels, each with margin `theta`.
    pub fn new(inner: O, theta: f64, delta: f64, m: u64) -> Result<Self, OracleError> {
        Ok(Self { inner, repetitions: amplification_repetitions(theta, delta, m)?, log: DuelLog::default() })
    }

    pub fn repetitions(&self) -> u64 {
        self.repetitions
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: DuelOracle> DuelOracle for AmplifiedOracle<O> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn k(&self) -> usize {
        self.inner.k()
    }

    fn duel(&mut self, a: Team, b: Team) -> Result<DuelOutcome, OracleError> {
        check_duel(self.n(), self.k(), a, b)?;
        self.log.admit()?;
        let mut first_wins = 0u64;
        for _ in 0..self.repetitions {
            if self.inner.beats(a, b)? {
                first_wins += 1;
            }
        }
        let outcome = if 2 * first_wins > self.repetitions { DuelOutcome::First } else { DuelOutcome::Second };
        self.log.record(a, b, outcome);
        Ok(outcome)
    }

    fn duel_count(&self) -> u64 {
        self.log.count
    }
}

/// Forwards duels to another oracle and keeps a copy of every answer.
pub struct Recorder<'a> {
    inner: &'a mut dyn DuelOracle,
    records: Vec<DuelRecord>,
}

impl<'a> Recorder<'a> {
    pub fn new(inner: &'a mut dyn DuelOracle) -> Self {
        Self { inner, records: Vec::new() }
    }

    pub fn into_records(self) -> Vec<DuelRecord> {
        self.records
    }
}

impl DuelOracle for Recorder<'_> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn k(&self) -> usize {
        self.inner.k()
    }

    fn duel(&mut self, a: Team, b: Team) -> Result<DuelOutcome, OracleError> {
        let outcome = self.inner.duel(a, b)?;
        self.records.push(DuelRecord { first: a, second: b, first_won: outcome == DuelOutcome::First });
        Ok(outcome)
    }

    fn duel_count(&self) -> u64 {
        self.inner.duel_count()
    }

    fn audit(&self, a: Team, b: Team) -> Option<bool> {
        self.inner.audit(a, b)
    }
}

/// Writes one JSON record per duel.
pub fn write_trace<W: Write>(records: &[DuelRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Players appearing in a team, as a convenience for building teams from ids.
pub fn team(ids: &[usize]) -> Team {
    PlayerSet::from_ids(ids.iter().copied())
}
