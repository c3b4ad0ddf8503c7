//! Reduction from team duels to duels between single players, and a top-k
//! identification procedure built on it.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Player, PlayerSet, Team};
use crate::oracle::{DuelOracle, OracleError};
use crate::witness::{sample_triple, WitnessError, WitnessTriple};

/// Default cap on singles samples drawn by [`identify_top_k`].
pub const DEFAULT_SAMPLE_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("sample budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("decided relations do not single out {k} players")]
    Inconsistent { k: usize },
}

/// One draw of the four-duel statistic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SinglesSample {
    pub triple: WitnessTriple,
    /// The statistic in units of 1/4, in `-2..=2`.
    pub quarters: i8,
}

impl SinglesSample {
    pub const DUELS: u64 = 4;

    pub fn x(&self) -> f64 {
        self.quarters as f64 / 4.0
    }
}

/// Draws a uniform triple and plays its four duels.
pub fn sample_x<O, R>(oracle: &mut O, a: Player, b: Player, rng: &mut R) -> Result<SinglesSample, ReductionError>
where
    O: DuelOracle + ?Sized,
    R: Rng + ?Sized,
{
    let triple = sample_triple(oracle.n(), oracle.k(), a, b, rng)?;
    let WitnessTriple { s, s_prime, t } = triple;
    let mut quarters = 0i8;
    quarters += oracle.beats(s.with(a), s_prime.with(b))? as i8;
    quarters -= oracle.beats(s.with(b), s_prime.with(a))? as i8;
    quarters += oracle.beats(s.with(a), t)? as i8;
    quarters -= oracle.beats(s.with(b), t)? as i8;
    Ok(SinglesSample { triple, quarters })
}

/// Simulates a duel between two players: `true` means `a` wins, which
/// happens with probability `1/2 + E[X_{a,b}]`.
pub fn singles_duel<O, R>(oracle: &mut O, a: Player, b: Player, rng: &mut R) -> Result<bool, ReductionError>
where
    O: DuelOracle + ?Sized,
    R: Rng + ?Sized,
{
    let x = sample_x(oracle, a, b, rng)?.x();
    Ok(rng.gen::<f64>() < 0.5 + x)
}

/// Running mean of samples for one pair, oriented from the lower id.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PairEstimator {
    pub samples: u64,
    sum_quarters: i64,
}

impl PairEstimator {
    pub fn push(&mut self, sample: &SinglesSample) {
        self.samples += 1;
        self.sum_quarters += sample.quarters as i64;
    }

    pub fn mean(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.sum_quarters as f64 / (4.0 * self.samples as f64)
        }
    }

    /// Anytime confidence radius after `samples` draws, union-bounded over
    /// all player pairs and all sample counts.
    pub fn radius(&self, n: usize, delta: f64) -> f64 {
        confidence_radius(self.samples, n, delta)
    }
}

/// `sqrt(ln(4 n² s² / δ) / (2 s))`; infinite before the first sample.
pub fn confidence_radius(samples: u64, n: usize, delta: f64) -> f64 {
    if samples == 0 {
        return f64::INFINITY;
    }
    let s = samples as f64;
    let nn = n as f64;
    ((4.0 * nn * nn * s * s / delta).ln() / (2.0 * s)).sqrt()
}

/// Per-pair tally reported with the result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairTally {
    pub a: Player,
    pub b: Player,
    pub samples: u64,
    pub mean: f64,
    /// `Some(true)` when `a` was decided better, `Some(false)` for `b`.
    pub decided_a_better: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopKResult {
    pub team: Team,
    pub samples: u64,
    pub duels: u64,
    pub pairs: Vec<PairTally>,
}

/// Successive elimination over player pairs: every round draws one sample
/// for each undecided pair that can still matter, decides a pair once its
/// mean leaves the confidence radius, and stops when the decided relation
/// separates `k` players from the rest.
pub fn identify_top_k<O, R>(
    oracle: &mut O,
    delta: f64,
    rng: &mut R,
    sample_budget: u64,
) -> Result<TopKResult, ReductionError>
where
    O: DuelOracle + ?Sized,
    R: Rng + ?Sized,
{
    let (n, k) = (oracle.n(), oracle.k());
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ReductionError::InvalidDelta(delta));
    }
    if n < 3 * k {
        return Err(WitnessError::NoTriples { n, k }.into());
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut est = vec![PairEstimator::default(); pairs.len()];
    let mut decided: Vec<Option<bool>> = vec![None; pairs.len()];
    let mut closure = Dominance::new(n);
    let mut samples = 0u64;

    loop {
        if let Some(team) = closure.top(k) {
            let tallies = pairs
                .iter()
                .zip(&est)
                .zip(&decided)
                .map(|((&(i, j), e), d)| PairTally {
                    a: Player::from_index(i),
                    b: Player::from_index(j),
                    samples: e.samples,
                    mean: e.mean(),
                    decided_a_better: *d,
                })
                .collect();
            return Ok(TopKResult { team, samples, duels: samples * SinglesSample::DUELS, pairs: tallies });
        }
        let resolved = closure.resolved(k);
        let active: Vec<usize> = (0..pairs.len())
            .filter(|&p| {
                let (i, j) = pairs[p];
                decided[p].is_none() && !closure.related(i, j) && !(resolved[i] && resolved[j])
            })
            .collect();
        if active.is_empty() {
            return Err(ReductionError::Inconsistent { k });
        }
        for p in active {
            if samples >= sample_budget {
                return Err(ReductionError::BudgetExhausted(sample_budget));
            }
            let (i, j) = pairs[p];
            let sample = sample_x(oracle, Player::from_index(i), Player::from_index(j), rng)?;
            samples += 1;
            est[p].push(&sample);
            let mean = est[p].mean();
            if mean.abs() > est[p].radius(n, delta) {
                decided[p] = Some(mean > 0.0);
                let (w, l) = if mean > 0.0 { (i, j) } else { (j, i) };
                closure.insert(w, l);
            }
        }
    }
}

/// Transitively closed "better than" relation over player indices.
struct Dominance {
    below: Vec<PlayerSet>,
}

impl Dominance {
    fn new(n: usize) -> Self {
        Self { below: vec![PlayerSet::EMPTY; n] }
    }

    fn related(&self, i: usize, j: usize) -> bool {
        self.below[i].contains(Player::from_index(j)) || self.below[j].contains(Player::from_index(i))
    }

    /// Adds `w ≻ l` and closes; a decision contradicting the closure is dropped.
    fn insert(&mut self, w: usize, l: usize) {
        if self.below[l].contains(Player::from_index(w)) {
            return;
        }
        let added = self.below[l].with(Player::from_index(l));
        for x in 0..self.below.len() {
            if x == w || self.below[x].contains(Player::from_index(w)) {
                self.below[x] = self.below[x] | added;
            }
        }
    }

    fn above_count(&self, i: usize) -> usize {
        let p = Player::from_index(i);
        self.below.iter().filter(|s| s.contains(p)).count()
    }

    /// Players whose side of the top-k boundary is settled.
    fn resolved(&self, k: usize) -> Vec<bool> {
        let n = self.below.len();
        (0..n).map(|i| self.below[i].len() >= n - k || self.above_count(i) >= k).collect()
    }

    fn top(&self, k: usize) -> Option<Team> {
        let n = self.below.len();
        let top: PlayerSet = (0..n).filter(|&i| self.below[i].len() >= n - k).map(Player::from_index).collect();
        let settled = (0..n).all(|i| self.below[i].len() >= n - k || self.above_count(i) >= k);
        (settled && top.len() == k).then_some(top)
    }
}
