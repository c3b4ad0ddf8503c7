//! Exact phase-one simplex for small feasibility problems over the rationals.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Relation {
    AtMost,
    Equal,
}

#[derive(Clone, Debug)]
pub(crate) struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

/// Finds `x >= 0` satisfying every constraint, or `None` if none exists.
/// Uses Bland's rule, so it terminates on degenerate problems.
pub(crate) fn find_feasible(num_vars: usize, constraints: &[Constraint]) -> Option<Vec<BigRational>> {
    let m = constraints.len();
    let slack_count = constraints.iter().filter(|c| c.relation == Relation::AtMost).count();
    let needs_artificial: Vec<bool> =
        constraints.iter().map(|c| c.relation == Relation::Equal || c.rhs.is_negative()).collect();
    let art_count = needs_artificial.iter().filter(|&&b| b).count();
    let cols = num_vars + slack_count + art_count;
    let rhs_col = cols;

    let mut tableau = vec![vec![BigRational::zero(); cols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut is_artificial = vec![false; cols];
    let (mut next_slack, mut next_art) = (num_vars, num_vars + slack_count);
    for (i, c) in constraints.iter().enumerate() {
        assert_eq!(c.coeffs.len(), num_vars, "constraint width mismatch");
        let row = &mut tableau[i];
        let sign = if c.rhs.is_negative() { -BigRational::one() } else { BigRational::one() };
        for (j, a) in c.coeffs.iter().enumerate() {
            row[j] = a * &sign;
        }
        row[rhs_col] = &c.rhs * &sign;
        if c.relation == Relation::AtMost {
            row[next_slack] = sign.clone();
            if !needs_artificial[i] {
                basis[i] = next_slack;
            }
            next_slack += 1;
        }
        if needs_artificial[i] {
            row[next_art] = BigRational::one();
            is_artificial[next_art] = true;
            basis[i] = next_art;
            next_art += 1;
        }
    }

    // Reduced costs of the phase-one objective: minimise the sum of artificials.
    let mut reduced = vec![BigRational::zero(); cols + 1];
    for j in 0..cols {
        if is_artificial[j] {
            reduced[j] = BigRational::one();
        }
    }
    for i in 0..m {
        if is_artificial[basis[i]] {
            for j in 0..=cols {
                reduced[j] = &reduced[j] - &tableau[i][j];
            }
        }
    }

    while let Some(enter) = (0..cols).find(|&j| reduced[j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if tableau[i][enter].is_positive() {
                let ratio = &tableau[i][rhs_col] / &tableau[i][enter];
                let better = match &leave {
                    None => true,
                    Some((r, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // The phase-one objective is bounded below by zero, so a leaving row always exists.
        let (r, _) = leave.expect("phase-one objective is bounded");
        pivot(&mut tableau, &mut reduced, r, enter);
        basis[r] = enter;
    }

    // The objective row's rhs entry holds minus the objective value.
    if !reduced[rhs_col].is_zero() {
        return None;
    }
    let mut x = vec![BigRational::zero(); num_vars];
    for i in 0..m {
        if basis[i] < num_vars {
            x[basis[i]] = tableau[i][rhs_col].clone();
        }
    }
    Some(x)
}

fn pivot(tableau: &mut [Vec<BigRational>], reduced: &mut [BigRational], r: usize, c: usize) {
    let inv = BigRational::one() / &tableau[r][c];
    for v in tableau[r].iter_mut() {
        *v = &*v * &inv;
    }
    let pivot_row = tableau[r].clone();
    for (i, row) in tableau.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v = &*v - &f * p;
                }
            }
        }
    }
    if !reduced[c].is_zero() {
        let f = reduced[c].clone();
        for (v, p) in reduced.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *v = &*v - &f * p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn c(coeffs: &[i64], relation: Relation, rhs: i64) -> Constraint {
        Constraint { coeffs: coeffs.iter().map(|&v| q(v)).collect(), relation, rhs: q(rhs) }
    }

    #[test]
    fn feasible_system() {
        // x1 - x2 <= -1, x1 + x2 = 4
        let cs = [c(&[1, -1], Relation::AtMost, -1), c(&[1, 1], Relation::Equal, 4)];
        let x = find_feasible(2, &cs).unwrap();
        assert!(&x[0] - &x[1] <= q(-1));
        assert_eq!(&x[0] + &x[1], q(4));
    }

    #[test]
    fn infeasible_system() {
        // x1 - x2 <= -1 and x2 - x1 <= -1
        let cs = [c(&[1, -1], Relation::AtMost, -1), c(&[-1, 1], Relation::AtMost, -1)];
        assert!(find_feasible(2, &cs).is_none());
    }
}
