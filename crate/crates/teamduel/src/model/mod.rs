//! Ground-truth instances: team orders, win probabilities, generators and
//! brute-force validators.

mod additivity;
mod generate;
mod lp;
mod order;
mod players;
mod validate;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use additivity::{check_additive_representable, AdditivityCertificate};
pub use generate::{generate_instance, random_consistent_order, GeneratorSpec, OrderSpec};
pub use order::{Better, GroundTruthOrder, OrderRepr, EXPLICIT_TEAM_CAP};
pub use players::{all_teams, binomial, subset_rank, subsets, unrank_subset, Player, PlayerSet, Team, MAX_PLAYERS};
pub use validate::{validate_consistency, validate_sst, validate_sst_with, ConsistencyViolation, SstViolation};

/// Default cap on brute-force team comparisons.
pub const DEFAULT_COMPARISON_CAP: u64 = 100_000;
/// Default cap on brute-force team triples.
pub const DEFAULT_TRIPLE_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid size n={n}, k={k}: need 1 <= k <= n/2 and n <= 128")]
    InvalidSize { n: usize, k: usize },
    #[error("{team} is not a team of size {k} over players 1..={n}")]
    InvalidTeam { team: Team, n: usize, k: usize },
    #[error("a team cannot be compared with itself: {0}")]
    SameTeam(Team),
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("invalid noise: {0}")]
    InvalidNoise(String),
    #[error("enumeration needs {needed} steps, cap is {cap}")]
    CapExceeded { needed: u64, cap: u64 },
    #[error("logistic noise requires an additive order")]
    LogisticNeedsAdditive,
    #[error("order is not consistent: {0}")]
    Inconsistent(ConsistencyViolation),
}

/// How duel outcomes relate to the team order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    /// The better team always wins.
    Deterministic,
    /// The better team wins with probability `p`.
    Uniform { p: f64 },
    /// `P(A beats B) = 1 / (1 + exp(-beta (v(A) - v(B))))` on additive values.
    Logistic { beta: f64 },
}

/// A hidden environment: a team order plus a noise model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    order: GroundTruthOrder,
    noise: Noise,
    seed: u64,
    exact_p: Option<BigRational>,
}

/// On-disk layout of an instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceRepr {
    pub n: usize,
    pub k: usize,
    pub order: OrderRepr,
    pub noise: Noise,
    pub seed: u64,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = ModelError;

    fn try_from(r: InstanceRepr) -> Result<Self, ModelError> {
        Instance::new(GroundTruthOrder::from_repr(r.n, r.k, r.order)?, r.noise, r.seed)
    }
}

impl From<Instance> for InstanceRepr {
    fn from(i: Instance) -> Self {
        InstanceRepr { n: i.n(), k: i.k(), order: i.order.to_repr(), noise: i.noise, seed: i.seed }
    }
}

impl Instance {
    pub fn new(order: GroundTruthOrder, noise: Noise, seed: u64) -> Result<Self, ModelError> {
        let exact_p = match noise {
            Noise::Deterministic => None,
            Noise::Uniform { p } => {
                if !(p > 0.5 && p <= 1.0) {
                    return Err(ModelError::InvalidNoise(format!("uniform p must lie in (1/2, 1], got {p}")));
                }
                Ratio::<i64>::approximate_float(p)
                    .filter(|r| (*r.numer() as f64 / *r.denom() as f64 - p).abs() < 1e-15)
                    .map(|r| BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())))
            }
            Noise::Logistic { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(ModelError::InvalidNoise(format!("logistic beta must be positive, got {beta}")));
                }
                if order.values().is_none() {
                    return Err(ModelError::LogisticNeedsAdditive);
                }
                None
            }
        };
        Ok(Self { order, noise, seed, exact_p })
    }

    pub fn deterministic(order: GroundTruthOrder) -> Self {
        Self::new(order, Noise::Deterministic, 0).expect("deterministic noise is always valid")
    }

    pub fn n(&self) -> usize {
        self.order.n()
    }

    pub fn k(&self) -> usize {
        self.order.k()
    }

    pub fn order(&self) -> &GroundTruthOrder {
        &self.order
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.noise, Noise::Deterministic)
    }

    /// `true` when every win probability is an exact rational.
    pub fn is_rational(&self) -> bool {
        match self.noise {
            Noise::Deterministic => true,
            Noise::Uniform { .. } => self.exact_p.is_some(),
            Noise::Logistic { .. } => false,
        }
    }

    /// The smallest `|P(A,B) − 1/2|` over distinct teams, when it is uniform.
    pub fn uniform_margin(&self) -> Option<f64> {
        match self.noise {
            Noise::Deterministic => Some(0.5),
            Noise::Uniform { p } => Some(p - 0.5),
            Noise::Logistic { .. } => None,
        }
    }

    /// Probability that `a` beats `b`, with validation.
    pub fn win_probability(&self, a: Team, b: Team) -> Result<f64, ModelError> {
        self.order.check_team(a)?;
        self.order.check_team(b)?;
        if a == b {
            return Err(ModelError::SameTeam(a));
        }
        Ok(self.prob(a, b))
    }

    /// Probability that `a` beats `b`; 1/2 when they are equal. Teams are not validated.
    pub fn prob(&self, a: Team, b: Team) -> f64 {
        if a == b {
            return 0.5;
        }
        match self.noise {
            Noise::Deterministic => {
                if self.order.beats(a, b) {
                    1.0
                } else {
                    0.0
                }
            }
            Noise::Uniform { p } => {
                if self.order.beats(a, b) {
                    p
                } else {
                    1.0 - p
                }
            }
            Noise::Logistic { beta } => {
                let diff = self.order.value_of(a).unwrap_or(0.0) - self.order.value_of(b).unwrap_or(0.0);
                1.0 / (1.0 + (-beta * diff).exp())
            }
        }
    }

    /// Exact probability that `a` beats `b`, for rational models.
    pub fn prob_exact(&self, a: Team, b: Team) -> Option<BigRational> {
        if a == b {
            return Some(BigRational::new(BigInt::one(), BigInt::from(2)));
        }
        let better = self.order.beats(a, b);
        match self.noise {
            Noise::Deterministic => Some(if better { BigRational::one() } else { BigRational::zero() }),
            Noise::Uniform { .. } => {
                let p = self.exact_p.clone()?;
                Some(if better { p } else { BigRational::one() - p })
            }
            Noise::Logistic { .. } => None,
        }
    }
}

/// Exhaustive check that `w` beats every disjoint team.
pub fn is_condorcet_winning(order: &GroundTruthOrder, w: Team, cap: u64) -> Result<bool, ModelError> {
    order.check_team(w)?;
    let opponents = binomial(order.n() - order.k(), order.k());
    if opponents > cap {
        return Err(ModelError::CapExceeded { needed: opponents, cap });
    }
    let rest = PlayerSet::full(order.n()) - w;
    Ok(subsets(rest, order.k()).all(|b| order.beats(w, b)))
}

/// Checks `w` against its strongest disjoint opponent only. For consistent
/// orders this decides the Condorcet property exactly.
pub fn beats_best_response(order: &GroundTruthOrder, w: Team) -> Result<bool, ModelError> {
    order.check_team(w)?;
    Ok(order.beats(w, order.best_response(w)))
}

/// Exhaustive check when at most `cap` opponents exist, otherwise the
/// best-response check.
pub fn verify_condorcet(order: &GroundTruthOrder, w: Team, cap: u64) -> Result<bool, ModelError> {
    match is_condorcet_winning(order, w, cap) {
        Err(ModelError::CapExceeded { .. }) => beats_best_response(order, w),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(ids: &[usize]) -> Team {
        PlayerSet::from_ids(ids.iter().copied())
    }

    fn lex4() -> GroundTruthOrder {
        GroundTruthOrder::lexicographic(4, 2, (1..=4).map(Player::new).collect()).unwrap()
    }

    #[test]
    fn win_probabilities() {
        let det = Instance::deterministic(lex4());
        assert_eq!(det.win_probability(t(&[1, 2]), t(&[3, 4])).unwrap(), 1.0);
        let uni = Instance::new(lex4(), Noise::Uniform { p: 0.6 }, 0).unwrap();
        assert_eq!(uni.win_probability(t(&[1, 2]), t(&[3, 4])).unwrap(), 0.6);
        assert_eq!(uni.prob_exact(t(&[1, 2]), t(&[3, 4])).unwrap(), BigRational::new(3.into(), 5.into()));
        assert!(uni.win_probability(t(&[1, 2]), t(&[1, 2])).is_err());

        let add = GroundTruthOrder::additive(4, 2, vec![3.0, 1.0, 0.5, 0.0]).unwrap();
        let logit = Instance::new(add, Noise::Logistic { beta: 1.0 }, 0).unwrap();
        // v({1,3}) - v({2,4}) = 3.5 - 1 = 2.5; v({1,4}) - v({2,3}) = 3 - 1.5 = 1.5
        let p = logit.win_probability(t(&[1, 4]), t(&[2, 3])).unwrap();
        assert!((p - 1.0 / (1.0 + (-1.5f64).exp())).abs() < 1e-15);
        let add = GroundTruthOrder::additive(4, 2, vec![3.0, 1.0, 0.0, 0.0]).unwrap();
        let logit = Instance::new(add, Noise::Logistic { beta: 1.0 }, 0).unwrap();
        let p = logit.win_probability(t(&[1, 4]), t(&[2, 3])).unwrap();
        assert!((p - 0.880797).abs() < 1e-6);
    }

    #[test]
    fn probability_coherence() {
        let uni = Instance::new(lex4(), Noise::Uniform { p: 0.75 }, 0).unwrap();
        for a in all_teams(4, 2) {
            for b in all_teams(4, 2) {
                if a != b {
                    assert_eq!(uni.prob(a, b) + uni.prob(b, a), 1.0);
                    assert_eq!(uni.prob(a, b) > 0.5, uni.order().beats(a, b));
                }
            }
        }
    }

    #[test]
    fn noise_validation() {
        assert!(Instance::new(lex4(), Noise::Uniform { p: 0.5 }, 0).is_err());
        assert!(matches!(
            Instance::new(lex4(), Noise::Logistic { beta: 1.0 }, 0),
            Err(ModelError::LogisticNeedsAdditive)
        ));
    }

    #[test]
    fn condorcet_examples() {
        let order = lex4();
        assert!(is_condorcet_winning(&order, t(&[1, 3]), 100).unwrap());
        assert!(!is_condorcet_winning(&order, t(&[2, 3]), 100).unwrap());
        assert!(is_condorcet_winning(&order, order.top_players(2), 100).unwrap());
        assert!(beats_best_response(&order, t(&[1, 4])).unwrap());
        assert!(!beats_best_response(&order, t(&[2, 4])).unwrap());
    }

    #[test]
    fn instance_roundtrip_through_json() {
        let inst = Instance::new(lex4(), Noise::Uniform { p: 0.6 }, 9).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        assert!(text.starts_with(r#"{"n":4,"k":2,"order":{"kind":"lexicographic""#));
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
    }
}
