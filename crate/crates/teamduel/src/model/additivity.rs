//! Deciding whether a team order can be realised by additive player values.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::lp::{find_feasible, Constraint, Relation};
use super::players::{binomial, Team};
use super::{GroundTruthOrder, ModelError};

/// Largest number of teams accepted by [`check_additive_representable`].
pub const ADDITIVITY_TEAM_CAP: u64 = 120;

/// Outcome of the representability check, with a certificate either way.
#[derive(Clone, Debug, PartialEq)]
pub enum AdditivityCertificate {
    /// Nonnegative values under which every relation holds with margin at least 1.
    Representable { values: Vec<BigRational> },
    /// Pairs `better[j] ≻ worse[j]` such that every player occurs equally often
    /// on both sides, so summing the relations gives `0 > 0`.
    NotRepresentable { better: Vec<Team>, worse: Vec<Team> },
}

impl AdditivityCertificate {
    pub fn is_representable(&self) -> bool {
        matches!(self, AdditivityCertificate::Representable { .. })
    }

    /// Re-checks the certificate against `order`.
    pub fn verify(&self, order: &GroundTruthOrder) -> Result<bool, ModelError> {
        match self {
            AdditivityCertificate::Representable { values } => {
                if values.len() != order.n() || values.iter().any(|v| v.is_negative()) {
                    return Ok(false);
                }
                let teams = order.sorted_teams(ADDITIVITY_TEAM_CAP)?;
                let sums: Vec<BigRational> = teams.iter().map(|t| team_sum(values, *t)).collect();
                Ok(sums.windows(2).all(|w| &w[0] - &w[1] >= BigRational::one()))
            }
            AdditivityCertificate::NotRepresentable { better, worse } => {
                if better.is_empty() || better.len() != worse.len() {
                    return Ok(false);
                }
                let mut balance = vec![0i64; order.n()];
                for (a, b) in better.iter().zip(worse) {
                    order.check_team(*a)?;
                    order.check_team(*b)?;
                    if a == b || !order.beats(*a, *b) {
                        return Ok(false);
                    }
                    a.iter().for_each(|p| balance[p.index()] += 1);
                    b.iter().for_each(|p| balance[p.index()] -= 1);
                }
                Ok(balance.iter().all(|&c| c == 0))
            }
        }
    }
}

fn team_sum(values: &[BigRational], team: Team) -> BigRational {
    team.iter().fold(BigRational::zero(), |acc, p| acc + &values[p.index()])
}

/// Solves the exact linear feasibility problem "values x >= 0 with
/// x(B) − x(A) <= −1 for every A ≻ B" and returns a certificate for the answer.
///
/// Only consecutive pairs of the sorted order are encoded; the remaining
/// relations follow by chaining.
pub fn check_additive_representable(order: &GroundTruthOrder) -> Result<AdditivityCertificate, ModelError> {
    let total = binomial(order.n(), order.k());
    if total > ADDITIVITY_TEAM_CAP {
        return Err(ModelError::CapExceeded { needed: total, cap: ADDITIVITY_TEAM_CAP });
    }
    let n = order.n();
    let teams = order.sorted_teams(ADDITIVITY_TEAM_CAP)?;
    let pairs: Vec<(Team, Team)> = teams.windows(2).map(|w| (w[0], w[1])).collect();
    let indicator = |team: Team, i: usize| -> i64 { team.iter().any(|p| p.index() == i) as i64 };

    let primal: Vec<Constraint> = pairs
        .iter()
        .map(|&(a, b)| Constraint {
            coeffs: (0..n).map(|i| int(indicator(b, i) - indicator(a, i))).collect(),
            relation: Relation::AtMost,
            rhs: int(-1),
        })
        .collect();
    if let Some(values) = find_feasible(n, &primal) {
        return Ok(AdditivityCertificate::Representable { values });
    }

    // Farkas alternative: y >= 0 with y^T M >= 0 and sum y = 1.
    let mut dual: Vec<Constraint> = (0..n)
        .map(|i| Constraint {
            coeffs: pairs.iter().map(|&(a, b)| int(indicator(a, i) - indicator(b, i))).collect(),
            relation: Relation::AtMost,
            rhs: BigRational::zero(),
        })
        .collect();
    dual.push(Constraint { coeffs: vec![int(1); pairs.len()], relation: Relation::Equal, rhs: int(1) });
    let y = find_feasible(pairs.len(), &dual)
        .ok_or_else(|| ModelError::InvalidOrder("neither values nor a counterexample were found".into()))?;

    let lcm = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let (mut better, mut worse) = (Vec::new(), Vec::new());
    for (&(a, b), yj) in pairs.iter().zip(&y) {
        let count = (yj * BigRational::from_integer(lcm.clone())).to_integer();
        let count = count.to_usize().ok_or_else(|| ModelError::InvalidOrder("certificate too large".into()))?;
        better.extend(std::iter::repeat_n(a, count));
        worse.extend(std::iter::repeat_n(b, count));
    }
    Ok(AdditivityCertificate::NotRepresentable { better, worse })
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{all_teams, Player, PlayerSet};

    #[test]
    fn lexicographic_four_two_is_additive() {
        let order = GroundTruthOrder::lexicographic(4, 2, (1..=4).map(Player::new).collect()).unwrap();
        let cert = check_additive_representable(&order).unwrap();
        assert!(cert.is_representable());
        assert!(cert.verify(&order).unwrap());
    }

    #[test]
    fn additive_orders_are_representable() {
        let order = GroundTruthOrder::additive(6, 2, vec![0.91, 0.17, 0.55, 0.38, 0.02, 0.73]).unwrap();
        let cert = check_additive_representable(&order).unwrap();
        assert!(cert.verify(&order).unwrap() && cert.is_representable());
    }

    #[test]
    fn lexicographic_six_three_is_additive_too() {
        // Powers of two realise every lexicographic order.
        let order = GroundTruthOrder::lexicographic(6, 3, (1..=6).map(Player::new).collect()).unwrap();
        assert!(check_additive_representable(&order).unwrap().is_representable());
    }

    #[test]
    fn cyclic_sums_are_not_representable() {
        let t = |a: usize, b: usize| PlayerSet::from_ids([a, b]);
        // Put the three conflicting relations at the top, everything else after.
        let head = [t(1, 2), t(3, 4), t(3, 5), t(1, 6), t(4, 6), t(2, 5)];
        let mut ranked: Vec<Team> = head.to_vec();
        ranked.extend(all_teams(6, 2).filter(|x| !head.contains(x)));
        let order = GroundTruthOrder::explicit(6, 2, ranked).unwrap();
        let cert = check_additive_representable(&order).unwrap();
        assert!(!cert.is_representable());
        assert!(cert.verify(&order).unwrap());
    }
}
