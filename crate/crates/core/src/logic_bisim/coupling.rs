use num_traits::{Signed, Zero};

use crate::arith::Q;
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::simplex::{solve, Constraint, LinearProgram, LpOutcome, Relation};
use crate::spaces::{product_space, MeasurableSet};

/// Find ω on Y₁ × Y₂ with marginals `left`, `right` and ω = 0 outside `support`.
#[derive(Debug, Clone)]
pub struct CouplingProblem {
    pub left: Measure,
    pub right: Measure,
    /// Allowed (left atom, right atom) pairs.
    pub support: Vec<(usize, usize)>,
}

/// A set R of left atoms whose mass exceeds the right mass of all atoms
/// reachable from R through the support, so no coupling exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallViolation {
    pub rows: MeasurableSet,
    pub neighbours: MeasurableSet,
    /// a(R) − b(N(R)) > 0.
    pub excess: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CouplingOutcome {
    Feasible(Measure),
    Infeasible(HallViolation),
}

pub fn solve_coupling(problem: &CouplingProblem) -> Result<CouplingOutcome> {
    let (a, b) = (&problem.left, &problem.right);
    if a.total() != b.total() {
        return Err(Error::MassMismatch {
            left: a.total().to_string(),
            right: b.total().to_string(),
        });
    }
    let (m, n) = (a.weights().len(), b.weights().len());
    let mut pairs = problem.support.clone();
    pairs.sort_unstable();
    pairs.dedup();
    if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= m || j >= n) {
        return Err(Error::SpaceMismatch(format!("support pair ({i}, {j}) is out of range")));
    }
    let mut constraints = Vec::with_capacity(m + n);
    for i in 0..m {
        let coeffs = pairs.iter().map(|&(r, _)| indicator(r == i)).collect();
        constraints.push(Constraint::new(coeffs, Relation::Eq, a.weight(i).clone()));
    }
    for j in 0..n {
        let coeffs = pairs.iter().map(|&(_, c)| indicator(c == j)).collect();
        constraints.push(Constraint::new(coeffs, Relation::Eq, b.weight(j).clone()));
    }
    let lp = LinearProgram {
        objective: vec![Q::zero(); pairs.len()],
        constraints,
    };
    let space = product_space(a.space(), b.space());
    match solve(&lp) {
        LpOutcome::Optimal(sol) => {
            let mut weights = vec![Q::zero(); space.atom_count()];
            for (&(i, j), x) in pairs.iter().zip(sol.x) {
                weights[space.pair_atom(i, j)] = x;
            }
            Ok(CouplingOutcome::Feasible(Measure::new(&space, weights)?))
        }
        LpOutcome::Infeasible { farkas } => hall_cut(problem, &pairs, &farkas).map(CouplingOutcome::Infeasible),
        LpOutcome::Unbounded => Err(Error::Internal("zero objective reported unbounded".into())),
    }
}

fn indicator(b: bool) -> Q {
    if b {
        Q::from_integer(1.into())
    } else {
        Q::zero()
    }
}

/// Rounds the Farkas duals (u, v) to a Hall set.
///
/// With α = −u the certificate reads α_i ≤ v_j on the support and
/// Σ α a > Σ v b. Integrating over thresholds t, some upper level set
/// R = {α ≥ t} has a(R) > b({v ≥ t}) ≥ b(N(R)); t may be taken at a value of α.
fn hall_cut(problem: &CouplingProblem, pairs: &[(usize, usize)], farkas: &[Q]) -> Result<HallViolation> {
    let (a, b) = (&problem.left, &problem.right);
    let m = a.weights().len();
    let alpha: Vec<Q> = farkas[..m].iter().map(|u| -u).collect();
    let mut levels = alpha.clone();
    levels.sort();
    levels.dedup();
    for t in levels.iter().rev() {
        let rows: Vec<bool> = alpha.iter().map(|x| x >= t).collect();
        let mut neighbours = vec![false; b.weights().len()];
        for &(i, j) in pairs {
            if rows[i] {
                neighbours[j] = true;
            }
        }
        let mass = |w: &[Q], mask: &[bool]| -> Q { w.iter().zip(mask).filter(|(_, &k)| k).map(|(x, _)| x).sum() };
        let excess = mass(a.weights(), &rows) - mass(b.weights(), &neighbours);
        if excess.is_positive() {
            return Ok(HallViolation {
                rows: MeasurableSet::from_atoms(a.space(), (0..m).filter(|&i| rows[i]))?,
                neighbours: MeasurableSet::from_atoms(b.space(), (0..neighbours.len()).filter(|&j| neighbours[j]))?,
                excess,
            });
        }
    }
    Err(Error::Internal("Farkas certificate did not round to a Hall set".into()))
}
