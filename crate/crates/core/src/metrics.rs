//! Finite metric spaces and distances between measures on them.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::Q;
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::simplex::{self, Constraint, LinearProgram, LpOutcome, Relation};
use crate::spaces::{check_cap, same_space, MeasurableSet, SpaceRef};

/// A metric on a space with singleton atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetric {
    space: SpaceRef,
    dist: Vec<Vec<Q>>,
    normalized: bool,
}

impl FiniteMetric {
    /// Validates symmetry, zero diagonal, positivity and the triangle inequality.
    pub fn new(space: &SpaceRef, dist: Vec<Vec<Q>>) -> Result<Self> {
        if !space.is_discrete() {
            return Err(Error::NotDiscrete);
        }
        let n = space.atom_count();
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMetric(format!("distance matrix must be {n}×{n}")));
        }
        let label = |i: usize| space.atom_label(i);
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::InvalidMetric(format!("d({0}, {0}) ≠ 0", label(i))));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidMetric(format!(
                        "d({}, {}) is not symmetric",
                        label(i),
                        label(j)
                    )));
                }
                if i != j && !dist[i][j].is_positive() {
                    return Err(Error::InvalidMetric(format!(
                        "d({}, {}) must be positive",
                        label(i),
                        label(j)
                    )));
                }
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for {}, {}, {}",
                            label(i),
                            label(j),
                            label(k)
                        )));
                    }
                }
            }
        }
        let normalized = dist.iter().flatten().all(|d| *d <= Q::one());
        Ok(FiniteMetric {
            space: space.clone(),
            dist,
            normalized,
        })
    }

    /// d(x, y) = 1 for x ≠ y.
    pub fn discrete(space: &SpaceRef) -> Result<Self> {
        let n = space.atom_count();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Q::zero() } else { Q::one() }).collect())
            .collect();
        Self::new(space, dist)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn dist(&self, i: usize, j: usize) -> &Q {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Q>] {
        &self.dist
    }

    /// All distances are at most 1.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

#[derive(Debug, Clone)]
pub struct Support {
    pub set: MeasurableSet,
    /// μ(X) = 0; the support is then empty by convention.
    pub zero_mass: bool,
}

/// The smallest set of full measure: the atoms of positive weight.
pub fn support(mu: &Measure) -> Support {
    Support {
        set: mu.support(),
        zero_mass: mu.is_zero(),
    }
}

#[derive(Debug, Clone)]
pub struct ProhorovReport {
    pub distance: Q,
    /// Whether ε = distance itself satisfies every constraint.
    pub attained: bool,
    /// A set whose constraint determines the distance (absent when it is 0).
    pub binding_set: Option<MeasurableSet>,
}

/// Lévy-Prohorov distance inf{ε > 0 : ν(B) ≤ μ(B^ε) + ε, μ(B) ≤ ν(B^ε) + ε ∀B}.
pub fn prohorov_distance(mu: &Measure, nu: &Measure, metric: &FiniteMetric) -> Result<Q> {
    Ok(prohorov_report(mu, nu, metric)?.distance)
}

/// Exact Lévy-Prohorov distance with open neighbourhoods `B^ε = {x : d(x, B) < ε}`.
///
/// For a fixed B and direction, `ε ↦ σ(B^ε)` is constant on each interval
/// `(rⱼ, rⱼ₊₁]` between consecutive distinct values of `d(·, B)`, so the
/// least admissible ε on that interval is `max(rⱼ, ρ(B) − σ(B^ε))` when it
/// does not pass `rⱼ₊₁`. Every per-set admissible region is upward closed,
/// hence the distance is the largest per-set infimum.
pub fn prohorov_report(mu: &Measure, nu: &Measure, metric: &FiniteMetric) -> Result<ProhorovReport> {
    same_space(mu.space(), metric.space(), "first measure is not on the metric space")?;
    same_space(nu.space(), metric.space(), "second measure is not on the metric space")?;
    let n = metric.space.atom_count();
    check_cap("Prohorov distance", n)?;

    // Rank distances so the subset scan compares integers.
    let mut levels: Vec<&Q> = metric.dist.iter().flatten().collect();
    levels.sort();
    levels.dedup();
    let rank = |d: &Q| levels.binary_search(&d).expect("distance is a level");
    let ranks: Vec<Vec<usize>> = metric.dist.iter().map(|r| r.iter().map(rank).collect()).collect();

    let mut best = Q::zero();
    let mut binding: Option<u64> = None;
    let mut dist_to_b = vec![0usize; n];
    let mut order: Vec<usize> = (0..n).collect();
    for bits in 1u64..(1u64 << n) {
        for (x, d) in dist_to_b.iter_mut().enumerate() {
            *d = (0..n)
                .filter(|&b| bits >> b & 1 == 1)
                .map(|b| ranks[x][b])
                .min()
                .expect("B nonempty");
        }
        order.sort_by_key(|&x| dist_to_b[x]);
        for (rho, sigma) in [(mu, nu), (nu, mu)] {
            let mass: Q = (0..n).filter(|&b| bits >> b & 1 == 1).map(|b| rho.weight(b)).sum();
            let eps = least_epsilon(&mass, sigma, &order, &dist_to_b, &levels);
            if eps > best {
                best = eps;
                binding = Some(bits);
            }
        }
    }
    let attained = best.is_positive() && feasible_at(mu, nu, &ranks, &levels, &best);
    let binding_set = binding.map(|bits| {
        MeasurableSet::from_atoms(&metric.space, (0..n).filter(|&b| bits >> b & 1 == 1)).expect("atoms in range")
    });
    Ok(ProhorovReport {
        distance: best,
        attained,
        binding_set,
    })
}

fn least_epsilon(mass: &Q, sigma: &Measure, order: &[usize], dist_to_b: &[usize], levels: &[&Q]) -> Q {
    let mut covered = Q::zero();
    let mut k = 0;
    while k < order.len() {
        let r = dist_to_b[order[k]];
        while k < order.len() && dist_to_b[order[k]] == r {
            covered += sigma.weight(order[k]);
            k += 1;
        }
        let need = mass - &covered;
        let candidate = if need > *levels[r] { need } else { levels[r].clone() };
        match order.get(k) {
            Some(&next) if candidate > *levels[dist_to_b[next]] => continue,
            _ => return candidate,
        }
    }
    unreachable!("the last piece is unbounded")
}

fn feasible_at(mu: &Measure, nu: &Measure, ranks: &[Vec<usize>], levels: &[&Q], eps: &Q) -> bool {
    let n = ranks.len();
    (1u64..(1u64 << n)).all(|bits| {
        let in_b = |b: usize| bits >> b & 1 == 1;
        let near: Vec<usize> = (0..n)
            .filter(|&x| (0..n).any(|b| in_b(b) && *levels[ranks[x][b]] < *eps))
            .collect();
        [(mu, nu), (nu, mu)].iter().all(|(rho, sigma)| {
            let lhs: Q = (0..n).filter(|&b| in_b(b)).map(|b| rho.weight(b)).sum();
            let rhs: Q = near.iter().map(|&x| sigma.weight(x)).sum::<Q>() + eps;
            lhs <= rhs
        })
    })
}

/// A function in V_γ: 1-Lipschitz and bounded by γ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipschitzWitness {
    pub values: Vec<Q>,
    pub gamma: Q,
}

impl LipschitzWitness {
    pub fn is_feasible(&self, metric: &FiniteMetric) -> bool {
        let n = self.values.len();
        n == metric.space.atom_count()
            && self.values.iter().all(|v| v.abs() <= self.gamma)
            && (0..n).all(|i| (0..n).all(|j| (&self.values[i] - &self.values[j]).abs() <= metric.dist[i][j]))
    }

    /// ∫ f dμ − ∫ f dν.
    pub fn objective(&self, mu: &Measure, nu: &Measure) -> Q {
        self.values
            .iter()
            .zip(mu.weights().iter().zip(nu.weights()))
            .map(|(f, (a, b))| f * (a - b))
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct HutchinsonReport {
    pub distance: Q,
    pub witness: LipschitzWitness,
}

/// H_γ(μ, ν) = sup over V_γ of ∫ f dμ − ∫ f dν.
pub fn hutchinson_distance(mu: &Measure, nu: &Measure, metric: &FiniteMetric, gamma: &Q) -> Result<Q> {
    Ok(hutchinson_report(mu, nu, metric, gamma)?.distance)
}

/// Solves the Hutchinson LP exactly and returns an optimal witness.
///
/// Shifting `uᵢ = fᵢ + γ` puts the box `−γ ≤ fᵢ ≤ γ` into the form
/// `0 ≤ uᵢ ≤ 2γ`, so the origin is a feasible basis and no phase one runs.
pub fn hutchinson_report(mu: &Measure, nu: &Measure, metric: &FiniteMetric, gamma: &Q) -> Result<HutchinsonReport> {
    same_space(mu.space(), metric.space(), "first measure is not on the metric space")?;
    same_space(nu.space(), metric.space(), "second measure is not on the metric space")?;
    if !gamma.is_positive() {
        return Err(Error::InvalidGamma(gamma.to_string()));
    }
    let n = metric.space.atom_count();
    let objective: Vec<Q> = mu.weights().iter().zip(nu.weights()).map(|(a, b)| a - b).collect();
    let two_gamma = gamma * Q::from_integer(2.into());
    let mut constraints = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut row = vec![Q::zero(); n];
            row[i] = Q::one();
            row[j] = -Q::one();
            constraints.push(Constraint::new(row, Relation::Le, metric.dist[i][j].clone()));
        }
        let mut row = vec![Q::zero(); n];
        row[i] = Q::one();
        constraints.push(Constraint::new(row, Relation::Le, two_gamma.clone()));
    }
    let lp = LinearProgram {
        objective: objective.clone(),
        constraints,
    };
    match simplex::solve(&lp) {
        LpOutcome::Optimal(sol) => {
            let values: Vec<Q> = sol.x.iter().map(|u| u - gamma).collect();
            let shift: Q = objective.iter().sum::<Q>() * gamma;
            let witness = LipschitzWitness {
                values,
                gamma: gamma.clone(),
            };
            let distance = sol.value - shift;
            debug_assert_eq!(distance, witness.objective(mu, nu));
            Ok(HutchinsonReport { distance, witness })
        }
        other => Err(Error::Internal(format!("bounded Hutchinson LP reported {other:?}"))),
    }
}

#[derive(Debug, Clone)]
pub struct WeakLimitReport {
    /// Index of the first element of the tail that is examined.
    pub tail_start: usize,
    /// Every atom weight in the tail is within `tol` of the limit.
    pub per_atom: bool,
    /// For every set F, the tail supremum of μₙ(F) is at most μ(F) + tol.
    pub closed_sets: bool,
    /// Total masses in the tail are within `tol` of the limit's.
    pub total_mass: bool,
    /// The per-atom verdict matches the joint verdict of the other two.
    pub criteria_agree: bool,
    pub converges: bool,
    pub max_atom_residual: Q,
    /// A set showing non-convergence, when there is one.
    pub witness: Option<MeasurableSet>,
}

/// Portmanteau-style diagnostics for a finite sequence against a candidate limit.
///
/// The limit superior of a finite sequence is read off its tail, the second
/// half of the sequence (at least the last element).
pub fn check_weak_limit(
    sequence: &[Measure],
    limit: &Measure,
    metric: &FiniteMetric,
    tol: f64,
) -> Result<WeakLimitReport> {
    same_space(limit.space(), metric.space(), "limit is not on the metric space")?;
    for m in sequence {
        same_space(m.space(), metric.space(), "sequence element is not on the metric space")?;
    }
    if sequence.is_empty() {
        return Err(Error::LengthMismatch { expected: 1, found: 0 });
    }
    let tol = BigRational::from_float(tol)
        .filter(|t| !t.is_negative())
        .ok_or_else(|| Error::Internal(format!("tolerance {tol} is not a nonnegative number")))?;
    let n = metric.space.atom_count();
    check_cap("weak-limit check", n)?;
    let tail_start = sequence.len() / 2;
    let tail = &sequence[tail_start..];

    let mut max_atom_residual = Q::zero();
    let mut bad_atom = None;
    for m in tail {
        for a in 0..n {
            let r = (m.weight(a) - limit.weight(a)).abs();
            if r > tol && bad_atom.is_none() {
                bad_atom = Some(a);
            }
            if r > max_atom_residual {
                max_atom_residual = r;
            }
        }
    }
    let limit_total = limit.total();
    let total_mass = tail.iter().all(|m| (m.total() - &limit_total).abs() <= tol);

    let mut bad_set = None;
    for bits in 1u64..(1u64 << n) {
        let in_f = |a: usize| bits >> a & 1 == 1;
        let target: Q = (0..n).filter(|&a| in_f(a)).map(|a| limit.weight(a)).sum();
        let sup = tail
            .iter()
            .map(|m| (0..n).filter(|&a| in_f(a)).map(|a| m.weight(a)).sum::<Q>())
            .max()
            .expect("tail nonempty");
        if sup > target + &tol {
            bad_set = Some(bits);
            break;
        }
    }
    let per_atom = bad_atom.is_none();
    let closed_sets = bad_set.is_none();
    let witness = if let Some(bits) = bad_set {
        Some(MeasurableSet::from_atoms(
            &metric.space,
            (0..n).filter(|&a| bits >> a & 1 == 1),
        )?)
    } else if let Some(a) = bad_atom {
        Some(MeasurableSet::from_atoms(&metric.space, [a])?)
    } else if !total_mass {
        Some(metric.space.full_set())
    } else {
        None
    };
    Ok(WeakLimitReport {
        tail_start,
        per_atom,
        closed_sets,
        total_mass,
        criteria_agree: per_atom == (closed_sets && total_mass),
        converges: per_atom && closed_sets && total_mass,
        max_atom_residual,
        witness,
    })
}
