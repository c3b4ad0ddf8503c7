//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::players::{all_teams, binomial, subset_rank, Player, PlayerSet};
use super::{GroundTruthOrder, Instance, ModelError, Noise, EXPLICIT_TEAM_CAP};

/// Largest C(n,k) for which additive values are checked for distinct team sums.
const DISTINCT_SUM_CHECK_CAP: u64 = 1_000_000;
const MAX_RESAMPLES: usize = 64;

/// Parameters for [`generate_instance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub k: usize,
    pub order: OrderSpec,
    pub noise: Noise,
}

/// Which kind of team order to draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderSpec {
    /// Player values drawn uniformly from `[0, scale)`.
    Additive {
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    /// Lexicographic order; players ranked by id unless `shuffled`.
    Lexicographic {
        #[serde(default)]
        shuffled: bool,
    },
    /// A uniformly shuffled player ranking extended to a random consistent team order.
    Explicit,
}

fn unit_scale() -> f64 {
    1.0
}

/// Draws an instance; a deterministic function of `(spec, seed)`.
pub fn generate_instance(spec: &GeneratorSpec, seed: u64) -> Result<Instance, ModelError> {
    let (n, k) = (spec.n, spec.k);
    if k == 0 || 2 * k > n || n > super::MAX_PLAYERS {
        return Err(ModelError::InvalidSize { n, k });
    }
    if matches!(spec.noise, Noise::Logistic { .. }) && !matches!(spec.order, OrderSpec::Additive { .. }) {
        return Err(ModelError::LogisticNeedsAdditive);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = match spec.order {
        OrderSpec::Additive { scale } => {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(ModelError::InvalidOrder(format!("scale must be positive, got {scale}")));
            }
            GroundTruthOrder::additive(n, k, distinct_sum_values(n, k, scale, &mut rng)?)?
        }
        OrderSpec::Lexicographic { shuffled } => {
            let mut ranking: Vec<Player> = (1..=n).map(Player::new).collect();
            if shuffled {
                ranking.shuffle(&mut rng);
            }
            GroundTruthOrder::lexicographic(n, k, ranking)?
        }
        OrderSpec::Explicit => random_consistent_order(n, k, &mut rng)?,
    };
    Instance::new(order, spec.noise, seed)
}

fn distinct_sum_values(n: usize, k: usize, scale: f64, rng: &mut impl Rng) -> Result<Vec<f64>, ModelError> {
    for _ in 0..MAX_RESAMPLES {
        let values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * scale).collect();
        if binomial(n, k) > DISTINCT_SUM_CHECK_CAP || sums_are_distinct(&values, n, k, scale) {
            return Ok(values);
        }
    }
    Err(ModelError::InvalidOrder("could not draw values with distinct team sums".into()))
}

fn sums_are_distinct(values: &[f64], n: usize, k: usize, scale: f64) -> bool {
    let mut sums: Vec<f64> = all_teams(n, k).map(|t| t.iter().map(|p| values[p.index()]).sum()).collect();
    sums.sort_by(|a, b| a.total_cmp(b));
    let tolerance = 8.0 * f64::EPSILON * k as f64 * scale;
    sums.windows(2).all(|w| w[1] - w[0] > tolerance)
}

/// A random consistent team order: a shuffled player ranking, extended to a
/// uniformly chosen topological order of the componentwise dominance it implies.
pub fn random_consistent_order(n: usize, k: usize, rng: &mut impl Rng) -> Result<GroundTruthOrder, ModelError> {
    let total = binomial(n, k);
    if total > EXPLICIT_TEAM_CAP {
        return Err(ModelError::CapExceeded { needed: total, cap: EXPLICIT_TEAM_CAP });
    }
    let mut ranking: Vec<Player> = (1..=n).map(Player::new).collect();
    ranking.shuffle(rng);

    let teams: Vec<PlayerSet> = all_teams(n, k).collect();
    // Covering moves: replace a member by the next player in the ranking when that player is free.
    let successors = |team: PlayerSet| {
        ranking
            .windows(2)
            .filter(move |w| team.contains(w[0]) && !team.contains(w[1]))
            .map(move |w| team.without(w[0]).with(w[1]))
    };
    let mut indegree = vec![0u32; teams.len()];
    for &t in &teams {
        for s in successors(t) {
            indegree[subset_rank(n, s) as usize] += 1;
        }
    }
    let mut available: Vec<usize> = (0..teams.len()).filter(|&i| indegree[i] == 0).collect();
    let mut ranked = Vec::with_capacity(teams.len());
    while !available.is_empty() {
        let pick = rng.gen_range(0..available.len());
        let i = available.swap_remove(pick);
        ranked.push(teams[i]);
        for s in successors(teams[i]) {
            let j = subset_rank(n, s) as usize;
            indegree[j] -= 1;
            if indegree[j] == 0 {
                available.push(j);
            }
        }
    }
    GroundTruthOrder::explicit(n, k, ranked)
}
