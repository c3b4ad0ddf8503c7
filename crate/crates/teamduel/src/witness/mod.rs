//! Witness calculus: candidate enumeration, witness predicates, exact
//! expectations of the pair statistics and the gap.

mod bruteforce;

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{binomial, subsets, unrank_subset, Instance, ModelError, Player, PlayerSet, Team};
use crate::oracle::{DuelOracle, OracleError};

pub use bruteforce::{deducible_bruteforce, deducible_by_order_enumeration, ObservableRankings};

/// Comparison tolerance for floating-point probabilities.
pub const TOLERANCE: f64 = 1e-12;
/// Default cap on enumerated candidates.
pub const DEFAULT_CANDIDATE_CAP: u64 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("players must differ, got {0} twice")]
    SamePlayer(Player),
    #[error("player {player} is outside 1..={n}")]
    PlayerOutOfRange { player: Player, n: usize },
    #[error("malformed candidate: {0}")]
    Malformed(String),
    #[error("no witness triples exist for n={n}, k={k} (requires n >= 3k)")]
    NoTriples { n: usize, k: usize },
    #[error("enumeration needs {needed} items, cap is {cap}")]
    CapExceeded { needed: u64, cap: u64 },
    #[error("brute force needs a deterministic instance")]
    NotDeterministic,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A pair `(S, S')` of disjoint `(k−1)`-sets avoiding both players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetsCandidate {
    pub s: PlayerSet,
    pub s_prime: PlayerSet,
}

/// A `(k−1)`-set `S` and a disjoint team `T`, both avoiding the two players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetTeamCandidate {
    pub s: PlayerSet,
    pub t: Team,
}

/// Pairwise disjoint `S`, `S'` (size `k−1`) and `T` (size `k`) avoiding both players.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WitnessTriple {
    pub s: PlayerSet,
    pub s_prime: PlayerSet,
    pub t: Team,
}

impl WitnessTriple {
    pub fn subsets(&self) -> SubsetsCandidate {
        SubsetsCandidate { s: self.s, s_prime: self.s_prime }
    }

    pub fn subset_team(&self) -> SubsetTeamCandidate {
        SubsetTeamCandidate { s: self.s, t: self.t }
    }
}

/// A certificate that one player is better than another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Subsets(SubsetsCandidate),
    SubsetTeam(SubsetTeamCandidate),
}

impl Witness {
    /// The `(k−1)`-set common to both shapes.
    pub fn base(&self) -> PlayerSet {
        match self {
            Witness::Subsets(c) => c.s,
            Witness::SubsetTeam(c) => c.s,
        }
    }

    /// The other side: `S'` or `T`.
    pub fn other(&self) -> PlayerSet {
        match self {
            Witness::Subsets(c) => c.s_prime,
            Witness::SubsetTeam(c) => c.t,
        }
    }

    /// Re-checks the witness for `a ≻ b` with two duels.
    pub fn verify_by_duels<O: DuelOracle + ?Sized>(
        &self,
        oracle: &mut O,
        a: Player,
        b: Player,
    ) -> Result<bool, OracleError> {
        match self {
            Witness::Subsets(c) => subsets_witness_by_duels(oracle, a, b, c),
            Witness::SubsetTeam(c) => subset_team_witness_by_duels(oracle, a, b, c),
        }
    }

    /// Uncounted ground-truth check through [`DuelOracle::audit`].
    pub fn audit<O: DuelOracle + ?Sized>(&self, oracle: &O, a: Player, b: Player) -> Option<bool> {
        match self {
            Witness::Subsets(c) => {
                Some(oracle.audit(c.s.with(a), c.s_prime.with(b))? && oracle.audit(c.s_prime.with(a), c.s.with(b))?)
            }
            Witness::SubsetTeam(c) => Some(oracle.audit(c.s.with(a), c.t)? && oracle.audit(c.t, c.s.with(b))?),
        }
    }

    pub fn is_witness(&self, instance: &Instance, a: Player, b: Player) -> Result<bool, WitnessError> {
        match self {
            Witness::Subsets(c) => is_subsets_witness(instance, a, b, c),
            Witness::SubsetTeam(c) => is_subset_team_witness(instance, a, b, c),
        }
    }
}

/// Which of two players is deducibly better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deduction {
    ABetter,
    BBetter,
    Undeducible,
}

impl fmt::Display for Deduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Deduction::ABetter => "a_better",
            Deduction::BBetter => "b_better",
            Deduction::Undeducible => "undeducible",
        })
    }
}

/// An expectation, exact for rational models and floating-point otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum GapValue {
    Exact(BigRational),
    Approx(f64),
}

impl GapValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            GapValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            GapValue::Approx(x) => *x,
        }
    }

    /// Sign, treating floating values within [`TOLERANCE`] of zero as zero.
    pub fn signum(&self) -> Ordering {
        match self {
            GapValue::Exact(q) => q.cmp(&BigRational::zero()),
            GapValue::Approx(x) if x.abs() <= TOLERANCE => Ordering::Equal,
            GapValue::Approx(x) => x.partial_cmp(&0.0).unwrap_or(Ordering::Equal),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    /// Compares two values, exactly when both are exact.
    pub fn compare(&self, other: &GapValue) -> Ordering {
        match (self, other) {
            (GapValue::Exact(x), GapValue::Exact(y)) => x.cmp(y),
            _ => {
                let d = self.to_f64() - other.to_f64();
                if d.abs() <= TOLERANCE {
                    Ordering::Equal
                } else if d > 0.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        }
    }

    fn neg(&self) -> GapValue {
        match self {
            GapValue::Exact(q) => GapValue::Exact(-q),
            GapValue::Approx(x) => GapValue::Approx(-x),
        }
    }
}

impl fmt::Display for GapValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapValue::Exact(q) => write!(f, "{q}"),
            GapValue::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Expectations of the pair statistics for `(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGapReport {
    pub a: Player,
    pub b: Player,
    pub triples: u64,
    pub e_z: GapValue,
    pub e_y: GapValue,
    pub e_x: GapValue,
    pub deducible: Deduction,
}

/// Running sum in the model's number system.
enum Acc {
    Exact(BigRational),
    Approx(f64),
}

impl Acc {
    fn new(instance: &Instance) -> Self {
        if instance.is_rational() {
            Acc::Exact(BigRational::zero())
        } else {
            Acc::Approx(0.0)
        }
    }

    fn add_prob(&mut self, instance: &Instance, a: Team, b: Team, sign: i32) {
        match self {
            Acc::Exact(sum) => {
                let p = instance.prob_exact(a, b).expect("rational model");
                if sign > 0 {
                    *sum += p;
                } else {
                    *sum -= p;
                }
            }
            Acc::Approx(sum) => *sum += sign as f64 * instance.prob(a, b),
        }
    }

    fn mean(self, denom: u64) -> GapValue {
        match self {
            Acc::Exact(sum) => GapValue::Exact(sum / BigRational::from_integer(denom.into())),
            Acc::Approx(sum) => GapValue::Approx(sum / denom as f64),
        }
    }
}

fn check_pair(n: usize, a: Player, b: Player) -> Result<(), WitnessError> {
    for p in [a, b] {
        if p.id() > n {
            return Err(WitnessError::PlayerOutOfRange { player: p, n });
        }
    }
    if a == b {
        return Err(WitnessError::SamePlayer(a));
    }
    Ok(())
}

fn rest(n: usize, a: Player, b: Player) -> PlayerSet {
    PlayerSet::full(n).without(a).without(b)
}

/// `|S_{a,b}|`.
pub fn subsets_count(n: usize, k: usize) -> u64 {
    if n < 2 * k {
        return 0;
    }
    binomial(n - 2, k - 1).saturating_mul(binomial(n - k - 1, k - 1))
}

/// `|T_{a,b}|`.
pub fn subset_team_count(n: usize, k: usize) -> u64 {
    if n < 2 * k {
        return 0;
    }
    binomial(n - 2, k - 1).saturating_mul(binomial(n - k - 1, k))
}

/// `|X_{a,b}|`.
pub fn triple_count(n: usize, k: usize) -> u64 {
    if n < 3 * k {
        return 0;
    }
    subsets_count(n, k).saturating_mul(binomial(n - 2 * k, k))
}

/// All `(S, S')` in lexicographic order.
pub fn subsets_candidates(
    n: usize,
    k: usize,
    a: Player,
    b: Player,
) -> Result<impl Iterator<Item = SubsetsCandidate>, WitnessError> {
    check_pair(n, a, b)?;
    let r = rest(n, a, b);
    Ok(subsets(r, k - 1).flat_map(move |s| subsets(r - s, k - 1).map(move |s_prime| SubsetsCandidate { s, s_prime })))
}

/// All `(S, T)` in lexicographic order.
pub fn subset_team_candidates(
    n: usize,
    k: usize,
    a: Player,
    b: Player,
) -> Result<impl Iterator<Item = SubsetTeamCandidate>, WitnessError> {
    check_pair(n, a, b)?;
    let r = rest(n, a, b);
    Ok(subsets(r, k - 1).flat_map(move |s| subsets(r - s, k).map(move |t| SubsetTeamCandidate { s, t })))
}

/// All `(S, S', T)` in lexicographic order.
pub fn witness_triples(
    n: usize,
    k: usize,
    a: Player,
    b: Player,
) -> Result<impl Iterator<Item = WitnessTriple>, WitnessError> {
    Ok(subsets_candidates(n, k, a, b)?.flat_map(move |c| {
        let r = rest(n, a, b) - c.s - c.s_prime;
        subsets(r, k).map(move |t| WitnessTriple { s: c.s, s_prime: c.s_prime, t })
    }))
}

/// Draws a uniform triple from `X_{a,b}`: `S`, then `S'`, then `T` by unranking.
pub fn sample_triple<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    a: Player,
    b: Player,
    rng: &mut R,
) -> Result<WitnessTriple, WitnessError> {
    check_pair(n, a, b)?;
    if n < 3 * k {
        return Err(WitnessError::NoTriples { n, k });
    }
    let mut pool = rest(n, a, b).to_vec();
    let mut draw = |size: usize, pool: &mut Vec<Player>| {
        let set = unrank_subset(pool, size, rng.gen_range(0..binomial(pool.len(), size)));
        pool.retain(|p| !set.contains(*p));
        set
    };
    let s = draw(k - 1, &mut pool);
    let s_prime = draw(k - 1, &mut pool);
    let t = draw(k, &mut pool);
    Ok(WitnessTriple { s, s_prime, t })
}

fn check_parts(n: usize, a: Player, b: Player, parts: &[(PlayerSet, usize)]) -> Result<(), WitnessError> {
    check_pair(n, a, b)?;
    let mut seen = PlayerSet::EMPTY.with(a).with(b);
    for &(set, size) in parts {
        if set.len() != size || set.max_id() > n || !set.is_disjoint(seen) {
            return Err(WitnessError::Malformed(format!("{set} must be a {size}-set avoiding {seen}")));
        }
        seen = seen | set;
    }
    Ok(())
}

/// `P(A,B) > P(C,D)`, exactly for rational models and with [`TOLERANCE`] otherwise.
fn prob_greater(instance: &Instance, (a, b): (Team, Team), (c, d): (Team, Team)) -> bool {
    match (instance.prob_exact(a, b), instance.prob_exact(c, d)) {
        (Some(x), Some(y)) => x > y,
        _ => instance.prob(a, b) > instance.prob(c, d) + TOLERANCE,
    }
}

/// `P(S∪a, S'∪b) > P(S∪b, S'∪a)`.
pub fn is_subsets_witness(
    instance: &Instance,
    a: Player,
    b: Player,
    c: &SubsetsCandidate,
) -> Result<bool, WitnessError> {
    let k = instance.k();
    check_parts(instance.n(), a, b, &[(c.s, k - 1), (c.s_prime, k - 1)])?;
    Ok(prob_greater(instance, (c.s.with(a), c.s_prime.with(b)), (c.s.with(b), c.s_prime.with(a))))
}

/// `P(S∪a, T) > P(S∪b, T)`.
pub fn is_subset_team_witness(
    instance: &Instance,
    a: Player,
    b: Player,
    c: &SubsetTeamCandidate,
) -> Result<bool, WitnessError> {
    let k = instance.k();
    check_parts(instance.n(), a, b, &[(c.s, k - 1), (c.t, k)])?;
    Ok(prob_greater(instance, (c.s.with(a), c.t), (c.s.with(b), c.t)))
}

/// Deterministic criterion: `S∪a` beats `S'∪b` and `S'∪a` beats `S∪b`.
pub fn subsets_witness_by_duels<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    a: Player,
    b: Player,
    c: &SubsetsCandidate,
) -> Result<bool, OracleError> {
    Ok(oracle.beats(c.s.with(a), c.s_prime.with(b))? && oracle.beats(c.s_prime.with(a), c.s.with(b))?)
}

/// Deterministic criterion: `S∪a` beats `T` and `T` beats `S∪b`.
pub fn subset_team_witness_by_duels<O: DuelOracle + ?Sized>(
    oracle: &mut O,
    a: Player,
    b: Player,
    c: &SubsetTeamCandidate,
) -> Result<bool, OracleError> {
    Ok(oracle.beats(c.s.with(a), c.t)? && oracle.beats(c.t, c.s.with(b))?)
}

fn check_cap(needed: u64, cap: u64) -> Result<(), WitnessError> {
    if needed > cap {
        Err(WitnessError::CapExceeded { needed, cap })
    } else {
        Ok(())
    }
}

/// First witness (subsets candidates before subset-team candidates) certifying `better ≻ worse`.
pub fn find_witness(
    instance: &Instance,
    better: Player,
    worse: Player,
    cap: u64,
) -> Result<Option<Witness>, WitnessError> {
    let (n, k) = (instance.n(), instance.k());
    check_cap(subsets_count(n, k).saturating_add(subset_team_count(n, k)), cap)?;
    for c in subsets_candidates(n, k, better, worse)? {
        if is_subsets_witness(instance, better, worse, &c)? {
            return Ok(Some(Witness::Subsets(c)));
        }
    }
    for c in subset_team_candidates(n, k, better, worse)? {
        if is_subset_team_witness(instance, better, worse, &c)? {
            return Ok(Some(Witness::SubsetTeam(c)));
        }
    }
    Ok(None)
}

/// Decides the pair by searching for a witness in either direction.
pub fn deducible_by_witness(instance: &Instance, a: Player, b: Player, cap: u64) -> Result<Deduction, WitnessError> {
    if find_witness(instance, a, b, cap)?.is_some() {
        Ok(Deduction::ABetter)
    } else if find_witness(instance, b, a, cap)?.is_some() {
        Ok(Deduction::BBetter)
    } else {
        Ok(Deduction::Undeducible)
    }
}

/// Exact `E[Z]`, `E[Y]` and `E[X] = (E[Z] + E[Y] − 1)/2` for a pair.
pub fn exact_expectations(instance: &Instance, a: Player, b: Player, cap: u64) -> Result<PairGapReport, WitnessError> {
    let (n, k) = (instance.n(), instance.k());
    check_pair(n, a, b)?;
    let triples = triple_count(n, k);
    if triples == 0 {
        return Err(WitnessError::NoTriples { n, k });
    }
    let (count_s, count_t) = (subsets_count(n, k), subset_team_count(n, k));
    check_cap(count_s.saturating_add(count_t), cap)?;

    let mut z = Acc::new(instance);
    for c in subsets_candidates(n, k, a, b)? {
        z.add_prob(instance, c.s.with(a), c.s_prime.with(b), 1);
        z.add_prob(instance, c.s_prime.with(a), c.s.with(b), 1);
    }
    let mut y = Acc::new(instance);
    for c in subset_team_candidates(n, k, a, b)? {
        y.add_prob(instance, c.s.with(a), c.t, 1);
        y.add_prob(instance, c.t, c.s.with(b), 1);
    }
    let e_z = z.mean(2 * count_s);
    let e_y = y.mean(2 * count_t);
    let e_x = match (&e_z, &e_y) {
        (GapValue::Exact(z), GapValue::Exact(y)) => {
            GapValue::Exact((z + y - BigRational::one()) / BigRational::from_integer(2.into()))
        }
        _ => GapValue::Approx((e_z.to_f64() + e_y.to_f64() - 1.0) / 2.0),
    };
    let deducible = deducible_by_witness(instance, a, b, cap)?;
    Ok(PairGapReport { a, b, triples, e_z, e_y, e_x, deducible })
}

/// `E[X]` as the plain mean of the four-duel statistic over every triple.
pub fn triple_expectation(instance: &Instance, a: Player, b: Player, cap: u64) -> Result<GapValue, WitnessError> {
    let (n, k) = (instance.n(), instance.k());
    check_pair(n, a, b)?;
    let triples = triple_count(n, k);
    if triples == 0 {
        return Err(WitnessError::NoTriples { n, k });
    }
    check_cap(triples, cap)?;
    let mut acc = Acc::new(instance);
    for w in witness_triples(n, k, a, b)? {
        acc.add_prob(instance, w.s.with(a), w.s_prime.with(b), 1);
        acc.add_prob(instance, w.s.with(b), w.s_prime.with(a), -1);
        acc.add_prob(instance, w.s.with(a), w.t, 1);
        acc.add_prob(instance, w.s.with(b), w.t, -1);
    }
    Ok(acc.mean(4 * triples))
}

/// `E[X]` for the k-th and (k+1)-th best players.
pub fn gap(instance: &Instance, cap: u64) -> Result<GapValue, WitnessError> {
    let (n, k) = (instance.n(), instance.k());
    if n < 3 * k {
        return Err(WitnessError::NoTriples { n, k });
    }
    let ranking = instance.order().induced_ranking();
    Ok(exact_expectations(instance, ranking[k - 1], ranking[k], cap)?.e_x)
}

/// `E[X_{b,a}]` from `E[X_{a,b}]`.
pub fn reversed(e_x: &GapValue) -> GapValue {
    e_x.neg()
}

/// Numerically safe magnitude check for reports.
pub fn is_within_half(v: &GapValue) -> bool {
    match v {
        GapValue::Exact(q) => q.abs() <= BigRational::new(1.into(), 2.into()),
        GapValue::Approx(x) => x.abs() <= 0.5 + TOLERANCE,
    }
}
