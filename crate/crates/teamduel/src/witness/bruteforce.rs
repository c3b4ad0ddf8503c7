//! Brute-force deducibility for deterministic orders.
//!
//! A consistent total order on teams induces a player ranking and extends the
//! componentwise dominance of that ranking; conversely any linear extension of
//! that dominance is consistent. So the consistent orders agreeing with every
//! observable (disjoint) comparison are grouped by player ranking, and a
//! ranking is feasible iff observations plus its dominance arcs form a DAG.

use itertools::Itertools;

use crate::model::{all_teams, binomial, subset_rank, GroundTruthOrder, Player, PlayerSet, Team};

use super::{Deduction, WitnessError};

/// Largest `n` accepted by the ranking enumeration.
pub const MAX_RANKING_PLAYERS: usize = 8;
/// Largest team count accepted by the literal order enumeration.
pub const MAX_ENUMERATED_TEAMS: u64 = 8;

/// Player rankings compatible with the observable part of an order.
#[derive(Clone, Debug)]
pub struct ObservableRankings {
    /// Position (0 = best) of each player, one entry per feasible ranking.
    positions: Vec<Vec<usize>>,
}

impl ObservableRankings {
    pub fn new(order: &GroundTruthOrder) -> Result<Self, WitnessError> {
        let (n, k) = (order.n(), order.k());
        if n > MAX_RANKING_PLAYERS {
            return Err(WitnessError::CapExceeded { needed: n as u64, cap: MAX_RANKING_PLAYERS as u64 });
        }
        let teams: Vec<Team> = all_teams(n, k).collect();
        let mut observed: Vec<Vec<usize>> = vec![Vec::new(); teams.len()];
        for (i, &x) in teams.iter().enumerate() {
            for (j, &y) in teams.iter().enumerate() {
                if x.is_disjoint(y) && order.beats(x, y) {
                    observed[i].push(j);
                }
            }
        }
        let positions = (1..=n)
            .map(Player::new)
            .permutations(n)
            .filter(|ranking| is_acyclic(n, &teams, &observed, ranking))
            .map(|ranking| {
                let mut pos = vec![0; n];
                for (i, p) in ranking.iter().enumerate() {
                    pos[p.index()] = i;
                }
                pos
            })
            .collect();
        Ok(Self { positions })
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn deduce(&self, a: Player, b: Player) -> Deduction {
        let a_first = self.positions.iter().filter(|pos| pos[a.index()] < pos[b.index()]).count();
        if a_first == self.positions.len() {
            Deduction::ABetter
        } else if a_first == 0 {
            Deduction::BBetter
        } else {
            Deduction::Undeducible
        }
    }
}

fn is_acyclic(n: usize, teams: &[Team], observed: &[Vec<usize>], ranking: &[Player]) -> bool {
    let covering = |t: Team| {
        ranking
            .windows(2)
            .filter(move |w| t.contains(w[0]) && !t.contains(w[1]))
            .map(move |w| t.without(w[0]).with(w[1]))
    };
    let mut indegree = vec![0u32; teams.len()];
    for (i, &t) in teams.iter().enumerate() {
        for &j in &observed[i] {
            indegree[j] += 1;
        }
        for s in covering(t) {
            indegree[subset_rank(n, s) as usize] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..teams.len()).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = stack.pop() {
        seen += 1;
        let succ = observed[i].iter().copied().chain(covering(teams[i]).map(|s| subset_rank(n, s) as usize));
        for j in succ.collect::<Vec<_>>() {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                stack.push(j);
            }
        }
    }
    seen == teams.len()
}

/// Decides the pair over every consistent order agreeing with all observable comparisons.
pub fn deducible_bruteforce(order: &GroundTruthOrder, a: Player, b: Player) -> Result<Deduction, WitnessError> {
    super::check_pair(order.n(), a, b)?;
    Ok(ObservableRankings::new(order)?.deduce(a, b))
}

/// Same question answered by listing every total order on teams and keeping
/// the consistent ones that agree on disjoint pairs. Feasible only for a handful of teams.
pub fn deducible_by_order_enumeration(
    order: &GroundTruthOrder,
    a: Player,
    b: Player,
) -> Result<Deduction, WitnessError> {
    let (n, k) = (order.n(), order.k());
    super::check_pair(n, a, b)?;
    let m = binomial(n, k);
    if m > MAX_ENUMERATED_TEAMS {
        return Err(WitnessError::CapExceeded { needed: m, cap: MAX_ENUMERATED_TEAMS });
    }
    let teams: Vec<Team> = all_teams(n, k).collect();
    let context = PlayerSet::full(n).without(a).without(b).take(k - 1);
    let (mut a_above, mut b_above) = (false, false);
    for perm in teams.iter().copied().permutations(teams.len()) {
        let mut rank = vec![0usize; teams.len()];
        for (pos, t) in perm.iter().enumerate() {
            rank[subset_rank(n, *t) as usize] = pos;
        }
        let above = |x: Team, y: Team| rank[subset_rank(n, x) as usize] < rank[subset_rank(n, y) as usize];
        let observable_ok = teams
            .iter()
            .all(|&x| teams.iter().all(|&y| !x.is_disjoint(y) || x == y || above(x, y) == order.beats(x, y)));
        if !observable_ok || !is_consistent(n, k, &above) {
            continue;
        }
        if above(context.with(a), context.with(b)) {
            a_above = true;
        } else {
            b_above = true;
        }
    }
    Ok(match (a_above, b_above) {
        (true, false) => Deduction::ABetter,
        (false, true) => Deduction::BBetter,
        _ => Deduction::Undeducible,
    })
}

fn is_consistent(n: usize, k: usize, above: &impl Fn(Team, Team) -> bool) -> bool {
    let all = PlayerSet::full(n);
    all.iter().tuple_combinations().all(|(x, y)| {
        let mut dirs = crate::model::subsets(all.without(x).without(y), k - 1).map(|s| above(s.with(x), s.with(y)));
        let first = dirs.next();
        dirs.all(|d| Some(d) == first)
    })
}
