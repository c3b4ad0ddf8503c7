//! Strict total orders on teams.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::players::{all_teams, binomial, subset_rank, Player, PlayerSet, Team};
use super::ModelError;

/// Largest number of teams an explicit order may list.
pub const EXPLICIT_TEAM_CAP: u64 = 2_000_000;

/// Which side of a comparison is better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Better {
    First,
    Second,
}

/// A hidden strict total order on all teams of size k out of n players.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthOrder {
    n: usize,
    k: usize,
    kind: OrderKind,
}

#[derive(Clone, Debug, PartialEq)]
enum OrderKind {
    Additive { values: Vec<f64> },
    Lexicographic { ranking: Vec<Player>, position: Vec<u8> },
    Explicit { ranked: Vec<Team>, position: Vec<u32> },
}

/// Serialized form of an order, tagged by kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderRepr {
    Additive { values: Vec<f64> },
    Lexicographic { ranking: Vec<Player> },
    Explicit { ranked_teams: Vec<Team> },
}

fn check_size(n: usize, k: usize) -> Result<(), ModelError> {
    if k == 0 || 2 * k > n || n > super::players::MAX_PLAYERS {
        return Err(ModelError::InvalidSize { n, k });
    }
    Ok(())
}

impl GroundTruthOrder {
    /// Additive order: a team's strength is the sum of its members' values.
    pub fn additive(n: usize, k: usize, values: Vec<f64>) -> Result<Self, ModelError> {
        check_size(n, k)?;
        if values.len() != n || values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidOrder(format!("expected {n} finite values")));
        }
        Ok(Self { n, k, kind: OrderKind::Additive { values } })
    }

    /// Lexicographic order: teams compare by their best members, then second best, and so on.
    /// `ranking` lists players best first.
    pub fn lexicographic(n: usize, k: usize, ranking: Vec<Player>) -> Result<Self, ModelError> {
        check_size(n, k)?;
        let position = permutation_positions(n, &ranking)?;
        Ok(Self { n, k, kind: OrderKind::Lexicographic { ranking, position } })
    }

    /// Explicit order given by the list of all C(n,k) teams, best first.
    pub fn explicit(n: usize, k: usize, ranked: Vec<Team>) -> Result<Self, ModelError> {
        check_size(n, k)?;
        let total = binomial(n, k);
        if total > EXPLICIT_TEAM_CAP {
            return Err(ModelError::CapExceeded { needed: total, cap: EXPLICIT_TEAM_CAP });
        }
        if ranked.len() as u64 != total {
            return Err(ModelError::InvalidOrder(format!("expected {total} teams, got {}", ranked.len())));
        }
        let mut position = vec![u32::MAX; total as usize];
        for (pos, team) in ranked.iter().enumerate() {
            if team.len() != k || team.max_id() > n {
                return Err(ModelError::InvalidOrder(format!("bad team {team}")));
            }
            let slot = &mut position[subset_rank(n, *team) as usize];
            if *slot != u32::MAX {
                return Err(ModelError::InvalidOrder(format!("team {team} listed twice")));
            }
            *slot = pos as u32;
        }
        Ok(Self { n, k, kind: OrderKind::Explicit { ranked, position } })
    }

    pub fn from_repr(n: usize, k: usize, repr: OrderRepr) -> Result<Self, ModelError> {
        match repr {
            OrderRepr::Additive { values } => Self::additive(n, k, values),
            OrderRepr::Lexicographic { ranking } => Self::lexicographic(n, k, ranking),
            OrderRepr::Explicit { ranked_teams } => Self::explicit(n, k, ranked_teams),
        }
    }

    pub fn to_repr(&self) -> OrderRepr {
        match &self.kind {
            OrderKind::Additive { values } => OrderRepr::Additive { values: values.clone() },
            OrderKind::Lexicographic { ranking, .. } => OrderRepr::Lexicographic { ranking: ranking.clone() },
            OrderKind::Explicit { ranked, .. } => OrderRepr::Explicit { ranked_teams: ranked.clone() },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OrderKind::Additive { .. } => "additive",
            OrderKind::Lexicographic { .. } => "lexicographic",
            OrderKind::Explicit { .. } => "explicit",
        }
    }

    /// Player values of an additive order.
    pub fn values(&self) -> Option<&[f64]> {
        match &self.kind {
            OrderKind::Additive { values } => Some(values),
            _ => None,
        }
    }

    /// Sum of the values of `set`, for additive orders.
    pub fn value_of(&self, set: PlayerSet) -> Option<f64> {
        self.values().map(|v| set.iter().map(|p| v[p.index()]).sum())
    }

    /// Checks that `team` is a team of this instance.
    pub fn check_team(&self, team: Team) -> Result<(), ModelError> {
        if team.len() != self.k || team.max_id() > self.n {
            return Err(ModelError::InvalidTeam { team, n: self.n, k: self.k });
        }
        Ok(())
    }

    /// Compares two distinct teams (overlap allowed).
    pub fn compare_teams(&self, a: Team, b: Team) -> Result<Better, ModelError> {
        self.check_team(a)?;
        self.check_team(b)?;
        if a == b {
            return Err(ModelError::SameTeam(a));
        }
        Ok(if self.beats(a, b) { Better::First } else { Better::Second })
    }

    /// `true` iff `a ≻ b`. Both must be valid, distinct teams.
    pub fn beats(&self, a: Team, b: Team) -> bool {
        match &self.kind {
            OrderKind::Additive { values } => {
                let sum = |t: Team| t.iter().map(|p| values[p.index()]).sum::<f64>();
                match sum(a).partial_cmp(&sum(b)) {
                    Some(Ordering::Greater) => true,
                    Some(Ordering::Less) => false,
                    _ => subset_rank(self.n, a) < subset_rank(self.n, b),
                }
            }
            OrderKind::Lexicographic { position, .. } => {
                let mask = |t: Team| t.iter().fold(0u128, |m, p| m | 1u128 << position[p.index()]);
                let (ma, mb) = (mask(a), mask(b));
                let diff = ma ^ mb;
                diff != 0 && ma & (diff & diff.wrapping_neg()) != 0
            }
            OrderKind::Explicit { position, .. } => {
                position[subset_rank(self.n, a) as usize] < position[subset_rank(self.n, b) as usize]
            }
        }
    }

    /// All teams, best first.
    pub fn sorted_teams(&self, cap: u64) -> Result<Vec<Team>, ModelError> {
        if let OrderKind::Explicit { ranked, .. } = &self.kind {
            return Ok(ranked.clone());
        }
        let total = binomial(self.n, self.k);
        if total > cap {
            return Err(ModelError::CapExceeded { needed: total, cap });
        }
        let mut teams: Vec<Team> = all_teams(self.n, self.k).collect();
        teams.sort_by(|&a, &b| match a == b {
            true => Ordering::Equal,
            false if self.beats(a, b) => Ordering::Less,
            false => Ordering::Greater,
        });
        Ok(teams)
    }

    /// Players best to worst, as induced by `S∪{a}` versus `S∪{b}`.
    ///
    /// For explicit orders the comparison uses one fixed context per pair; the
    /// result is only meaningful for consistent orders.
    pub fn induced_ranking(&self) -> Vec<Player> {
        match &self.kind {
            OrderKind::Lexicographic { ranking, .. } => ranking.clone(),
            OrderKind::Additive { values } => {
                let mut players: Vec<Player> = (0..self.n).map(Player::from_index).collect();
                players.sort_by(|a, b| {
                    values[b.index()].partial_cmp(&values[a.index()]).unwrap_or(Ordering::Equal).then(a.cmp(b))
                });
                players
            }
            OrderKind::Explicit { .. } => {
                // Sort by number of pairwise wins; for a consistent order these are n-1, ..., 0.
                let players: Vec<Player> = (0..self.n).map(Player::from_index).collect();
                let mut scored: Vec<(usize, Player)> = players
                    .iter()
                    .map(|&a| (players.iter().filter(|&&b| a != b && self.player_beats(a, b)).count(), a))
                    .collect();
                scored.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
                scored.into_iter().map(|(_, p)| p).collect()
            }
        }
    }

    /// Compares two players through the lowest-id context of size k−1.
    pub fn player_beats(&self, a: Player, b: Player) -> bool {
        let context = (PlayerSet::full(self.n).without(a).without(b)).take(self.k - 1);
        self.beats(context.with(a), context.with(b))
    }

    /// The best `m` players.
    pub fn top_players(&self, m: usize) -> PlayerSet {
        self.induced_ranking().into_iter().take(m).collect()
    }

    /// The strongest team disjoint from `team`, i.e. the best k players outside it.
    pub fn best_response(&self, team: Team) -> Team {
        self.induced_ranking().into_iter().filter(|p| !team.contains(*p)).take(self.k).collect()
    }
}

fn permutation_positions(n: usize, ranking: &[Player]) -> Result<Vec<u8>, ModelError> {
    if ranking.len() != n {
        return Err(ModelError::InvalidOrder(format!("ranking must list all {n} players")));
    }
    let mut position = vec![u8::MAX; n];
    for (pos, p) in ranking.iter().enumerate() {
        if p.id() > n || position[p.index()] != u8::MAX {
            return Err(ModelError::InvalidOrder(format!("ranking is not a permutation of 1..={n}")));
        }
        position[p.index()] = pos as u8;
    }
    Ok(position)
}
