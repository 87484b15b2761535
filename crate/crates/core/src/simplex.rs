//! Dense-tableau two-phase simplex over exact rationals with Bland's rule.
//!
//! Problems are stated as `maximize c·x` subject to `aᵢ·x (≤|=|≥) bᵢ`,
//! `x ≥ 0`. Bland's smallest-index rule for both the entering and the
//! leaving variable guarantees termination, and exact arithmetic makes
//! every reported optimum, dual and certificate exact.

use num_traits::{Signed, Zero};

use crate::arith::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub relation: Relation,
    pub rhs: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<Q>, relation: Relation, rhs: Q) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    /// Maximized objective, one coefficient per variable.
    pub objective: Vec<Q>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub x: Vec<Q>,
    pub value: Q,
    /// One dual value per constraint; zero for constraints found redundant.
    pub duals: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(Solution),
    /// `farkas` satisfies `farkas·Aⱼ ≥ 0` for every column and
    /// `farkas·b < 0`, with sign constraints matching each relation
    /// (`≥ 0` on `≤` rows, `≤ 0` on `≥` rows).
    Infeasible {
        farkas: Vec<Q>,
    },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    /// Original constraint index of each tableau row.
    origin: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Q {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[Q]) -> Vec<Q> {
        let mut r: Vec<Q> = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[i][..self.width].iter().enumerate() {
                if !v.is_zero() {
                    r[j] -= cb * v;
                }
            }
        }
        r
    }

    /// Runs Bland-rule pivots to optimality; `false` means unbounded.
    fn optimize(&mut self, cost: &[Q], allowed: &[bool]) -> bool {
        loop {
            let r = self.reduced_costs(cost);
            let entering = (0..self.width).find(|&j| allowed[j] && r[j].is_positive());
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best || (ratio == best && self.basis[i] < self.basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            match leave {
                None => return false,
                Some((row, _)) => self.pivot(row, c),
            }
        }
    }

    fn value(&self, cost: &[Q]) -> Q {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, &b)| &cost[b] * self.rhs(i))
            .sum()
    }
}

/// Solves the program exactly.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.objective.len();
    let m = lp.constraints.len();
    // Normalize to nonnegative right-hand sides.
    let mut flipped = vec![false; m];
    let mut rels = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        assert_eq!(c.coeffs.len(), n, "constraint {i} has the wrong arity");
        flipped[i] = c.rhs.is_negative();
        rels.push(match (c.relation, flipped[i]) {
            (r, false) => r,
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (Relation::Eq, true) => Relation::Eq,
        });
    }
    let slack_count = rels.iter().filter(|r| **r != Relation::Eq).count();
    let art_count = rels.iter().filter(|r| **r != Relation::Le).count();
    let width = n + slack_count + art_count;
    let mut rows = vec![vec![Q::zero(); width + 1]; m];
    let mut basis = vec![0; m];
    let mut unit_col = vec![0; m];
    let mut is_art = vec![false; width];
    let (mut next_slack, mut next_art) = (n, n + slack_count);
    for (i, c) in lp.constraints.iter().enumerate() {
        let sign = if flipped[i] {
            -Q::from_integer(1.into())
        } else {
            Q::from_integer(1.into())
        };
        for (j, a) in c.coeffs.iter().enumerate() {
            rows[i][j] = a * &sign;
        }
        rows[i][width] = &c.rhs * &sign;
        match rels[i] {
            Relation::Le => {
                rows[i][next_slack] = Q::from_integer(1.into());
                basis[i] = next_slack;
                unit_col[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                rows[i][next_slack] = -Q::from_integer(1.into());
                next_slack += 1;
                rows[i][next_art] = Q::from_integer(1.into());
                is_art[next_art] = true;
                basis[i] = next_art;
                unit_col[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                rows[i][next_art] = Q::from_integer(1.into());
                is_art[next_art] = true;
                basis[i] = next_art;
                unit_col[i] = next_art;
                next_art += 1;
            }
        }
    }
    let mut t = Tableau {
        rows,
        basis,
        origin: (0..m).collect(),
        width,
    };
    let sign_of = |i: usize| {
        if flipped[i] {
            -Q::from_integer(1.into())
        } else {
            Q::from_integer(1.into())
        }
    };

    if art_count > 0 {
        let phase1: Vec<Q> = (0..width)
            .map(|j| {
                if is_art[j] {
                    -Q::from_integer(1.into())
                } else {
                    Q::zero()
                }
            })
            .collect();
        let all = vec![true; width];
        let bounded = t.optimize(&phase1, &all);
        debug_assert!(bounded, "phase one is bounded above by zero");
        if t.value(&phase1).is_negative() {
            let r = t.reduced_costs(&phase1);
            let farkas = (0..m)
                .map(|i| (&phase1[unit_col[i]] - &r[unit_col[i]]) * sign_of(i))
                .collect();
            return LpOutcome::Infeasible { farkas };
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if is_art[t.basis[i]] {
                match (0..width).find(|&j| !is_art[j] && !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        t.origin.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![Q::zero(); width];
    cost[..n].clone_from_slice(&lp.objective);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    if !t.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i).clone();
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let r = t.reduced_costs(&cost);
    let mut duals = vec![Q::zero(); m];
    for &i in &t.origin {
        duals[i] = (&cost[unit_col[i]] - &r[unit_col[i]]) * sign_of(i);
    }
    LpOutcome::Optimal(Solution { x, value, duals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qi};

    fn c(coeffs: &[i64], rel: Relation, rhs: i64) -> Constraint {
        Constraint::new(coeffs.iter().map(|&v| qi(v)).collect(), rel, qi(rhs))
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let lp = LinearProgram {
            objective: vec![qi(3), qi(5)],
            constraints: vec![
                c(&[1, 0], Relation::Le, 4),
                c(&[0, 2], Relation::Le, 12),
                c(&[3, 2], Relation::Le, 18),
            ],
        };
        let LpOutcome::Optimal(s) = solve(&lp) else { panic!() };
        assert_eq!(s.x, vec![qi(2), qi(6)]);
        assert_eq!(s.value, qi(36));
        assert_eq!(s.duals, vec![qi(0), q(3, 2), qi(1)]);
        let dual_obj: Q = s.duals.iter().zip([4, 12, 18]).map(|(y, b)| y * qi(b)).sum();
        assert_eq!(dual_obj, s.value);
    }

    #[test]
    fn equality_and_redundancy() {
        // x + y = 1, x + y = 1 (redundant), x - y ≥ -1/2 handled via negative rhs; max x
        let lp = LinearProgram {
            objective: vec![qi(1), qi(0)],
            constraints: vec![
                c(&[1, 1], Relation::Eq, 1),
                c(&[1, 1], Relation::Eq, 1),
                Constraint::new(vec![qi(-1), qi(1)], Relation::Ge, q(-1, 2)),
            ],
        };
        let LpOutcome::Optimal(s) = solve(&lp) else { panic!() };
        assert_eq!(s.x, vec![q(3, 4), q(1, 4)]);
    }

    #[test]
    fn infeasible_has_certificate() {
        // x + y = 1 and x + y = 2
        let lp = LinearProgram {
            objective: vec![qi(0), qi(0)],
            constraints: vec![c(&[1, 1], Relation::Eq, 1), c(&[1, 1], Relation::Eq, 2)],
        };
        let LpOutcome::Infeasible { farkas } = solve(&lp) else {
            panic!()
        };
        let ya: Vec<Q> = (0..2)
            .map(|j| &farkas[0] * qi([1, 1][j]) + &farkas[1] * qi([1, 1][j]))
            .collect();
        assert!(ya.iter().all(|v| !v.is_negative()));
        assert!((&farkas[0] * qi(1) + &farkas[1] * qi(2)).is_negative());
    }

    #[test]
    fn unbounded() {
        let lp = LinearProgram {
            objective: vec![qi(1)],
            constraints: vec![c(&[-1], Relation::Le, 3)],
        };
        assert_eq!(solve(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the largest-coefficient rule.
        let lp = LinearProgram {
            objective: vec![q(3, 4), qi(-150), q(1, 50), qi(-6)],
            constraints: vec![
                Constraint::new(vec![q(1, 4), qi(-60), q(-1, 25), qi(9)], Relation::Le, qi(0)),
                Constraint::new(vec![q(1, 2), qi(-90), q(-1, 50), qi(3)], Relation::Le, qi(0)),
                Constraint::new(vec![qi(0), qi(0), qi(1), qi(0)], Relation::Le, qi(1)),
            ],
        };
        let LpOutcome::Optimal(s) = solve(&lp) else { panic!() };
        assert_eq!(s.value, q(1, 20));
    }
}
