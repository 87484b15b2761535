//! Finite measures, signed measures, and their decompositions.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{weighted_norm, Exponent, NormValue, Q};
use crate::error::{Error, Result};
use crate::integrate::StepFunction;
use crate::spaces::{same_space, MeasurableSet, SpaceRef};

/// A nonnegative rational weight on every atom.
#[derive(Clone, PartialEq, Eq)]
pub struct Measure {
    space: SpaceRef,
    weights: Vec<Q>,
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "Measure({})", w.join(", "))
    }
}

impl Measure {
    pub fn new(space: &SpaceRef, weights: Vec<Q>) -> Result<Self> {
        if weights.len() != space.atom_count() {
            return Err(Error::LengthMismatch {
                expected: space.atom_count(),
                found: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::NegativeWeight {
                atom: i,
                label: space.atom_label(i).to_string(),
            });
        }
        Ok(Measure {
            space: space.clone(),
            weights,
        })
    }

    pub(crate) fn from_parts(space: SpaceRef, weights: Vec<Q>) -> Self {
        debug_assert!(weights.iter().all(|w| !w.is_negative()));
        debug_assert_eq!(weights.len(), space.atom_count());
        Measure { space, weights }
    }

    pub fn zero(space: &SpaceRef) -> Self {
        Self::from_parts(space.clone(), vec![Q::zero(); space.atom_count()])
    }

    /// Point mass on an atom.
    pub fn dirac(space: &SpaceRef, atom: usize) -> Self {
        let mut w = vec![Q::zero(); space.atom_count()];
        w[atom] = Q::one();
        Self::from_parts(space.clone(), w)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> &Q {
        &self.weights[atom]
    }

    pub fn total(&self) -> Q {
        self.weights.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(Zero::is_zero)
    }

    pub fn is_probability(&self) -> bool {
        self.total().is_one()
    }

    pub fn is_subprobability(&self) -> bool {
        self.total() <= Q::one()
    }

    /// μ(A), the sum of the weights of the atoms inside `set`.
    pub fn eval(&self, set: &MeasurableSet) -> Result<Q> {
        same_space(&self.space, set.space(), "set is not on the measure's space")?;
        Ok(set.atoms().map(|a| &self.weights[a]).sum())
    }

    /// Atoms with strictly positive weight.
    pub fn support(&self) -> MeasurableSet {
        MeasurableSet::from_atoms(
            &self.space,
            (0..self.weights.len()).filter(|&i| self.weights[i].is_positive()),
        )
        .expect("atoms in range")
    }

    pub fn add(&self, other: &Measure) -> Result<Measure> {
        same_space(&self.space, &other.space, "adding measures on different spaces")?;
        Ok(Self::from_parts(
            self.space.clone(),
            self.weights.iter().zip(&other.weights).map(|(a, b)| a + b).collect(),
        ))
    }

    /// `c·μ` for `c ≥ 0`.
    pub fn scale(&self, c: &Q) -> Result<Measure> {
        Measure::new(&self.space, self.weights.iter().map(|w| w * c).collect())
    }

    pub fn to_signed(&self) -> SignedMeasure {
        SignedMeasure {
            space: self.space.clone(),
            weights: self.weights.clone(),
        }
    }
}

/// A rational weight of any sign on every atom.
#[derive(Clone, PartialEq, Eq)]
pub struct SignedMeasure {
    space: SpaceRef,
    weights: Vec<Q>,
}

impl fmt::Debug for SignedMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "SignedMeasure({})", w.join(", "))
    }
}

impl SignedMeasure {
    pub fn new(space: &SpaceRef, weights: Vec<Q>) -> Result<Self> {
        if weights.len() != space.atom_count() {
            return Err(Error::LengthMismatch {
                expected: space.atom_count(),
                found: weights.len(),
            });
        }
        Ok(SignedMeasure {
            space: space.clone(),
            weights,
        })
    }

    /// `μ − ν` of two measures on the same space.
    pub fn difference(mu: &Measure, nu: &Measure) -> Result<Self> {
        same_space(&mu.space, &nu.space, "difference of measures on different spaces")?;
        Ok(SignedMeasure {
            space: mu.space.clone(),
            weights: mu.weights.iter().zip(&nu.weights).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn eval(&self, set: &MeasurableSet) -> Result<Q> {
        same_space(&self.space, set.space(), "set is not on the measure's space")?;
        Ok(set.atoms().map(|a| &self.weights[a]).sum())
    }
}

#[derive(Debug, Clone)]
pub struct Jordan {
    pub plus: Measure,
    pub minus: Measure,
    pub total_variation: Measure,
    /// Atoms of positive weight (X⁺).
    pub positive_set: MeasurableSet,
    /// Atoms of negative weight (X⁻).
    pub negative_set: MeasurableSet,
}

/// Splits a signed measure atom by atom into mutually singular parts.
pub fn jordan_decompose(nu: &SignedMeasure) -> Jordan {
    let zero = Q::zero();
    let plus: Vec<Q> = nu.weights.iter().map(|w| w.max(&zero).clone()).collect();
    let minus: Vec<Q> = nu.weights.iter().map(|w| (-w).max(zero.clone())).collect();
    let total: Vec<Q> = nu.weights.iter().map(Signed::abs).collect();
    let space = &nu.space;
    Jordan {
        positive_set: MeasurableSet::from_atoms(space, (0..plus.len()).filter(|&i| plus[i].is_positive()))
            .expect("atoms in range"),
        negative_set: MeasurableSet::from_atoms(space, (0..minus.len()).filter(|&i| minus[i].is_positive()))
            .expect("atoms in range"),
        plus: Measure::from_parts(space.clone(), plus),
        minus: Measure::from_parts(space.clone(), minus),
        total_variation: Measure::from_parts(space.clone(), total),
    }
}

/// First atom that is ν-null but charged by μ.
fn continuity_violation(mu: &Measure, nu: &Measure) -> Option<usize> {
    (0..mu.weights.len()).find(|&i| nu.weights[i].is_zero() && mu.weights[i].is_positive())
}

/// μ ≪ ν: every ν-null atom is μ-null.
pub fn absolutely_continuous(mu: &Measure, nu: &Measure) -> Result<bool> {
    same_space(&mu.space, &nu.space, "absolute continuity across spaces")?;
    Ok(continuity_violation(mu, nu).is_none())
}

#[derive(Debug, Clone)]
pub struct Singularity {
    pub singular: bool,
    pub mu_support: MeasurableSet,
    pub nu_support: MeasurableSet,
}

/// μ ⊥ ν: the positive supports are disjoint. The supports are the witnesses.
pub fn mutually_singular(mu: &Measure, nu: &Measure) -> Result<Singularity> {
    same_space(&mu.space, &nu.space, "singularity across spaces")?;
    let mu_support = mu.support();
    let nu_support = nu.support();
    Ok(Singularity {
        singular: mu_support.intersection(&nu_support)?.is_empty(),
        mu_support,
        nu_support,
    })
}

#[derive(Debug, Clone)]
pub struct Lebesgue {
    /// Part of μ absolutely continuous with respect to ν.
    pub continuous: Measure,
    /// Part of μ singular to ν.
    pub singular: Measure,
    /// dμ_a/dν; zero on ν-null atoms.
    pub density: StepFunction,
}

/// μ = μ_a + μ_s with μ_a ≪ ν and μ_s ⊥ ν.
pub fn lebesgue_decompose(mu: &Measure, nu: &Measure) -> Result<Lebesgue> {
    same_space(&mu.space, &nu.space, "Lebesgue decomposition across spaces")?;
    let n = mu.weights.len();
    let mut cont = vec![Q::zero(); n];
    let mut sing = vec![Q::zero(); n];
    let mut dens = vec![Q::zero(); n];
    for i in 0..n {
        if nu.weights[i].is_zero() {
            sing[i] = mu.weights[i].clone();
        } else {
            cont[i] = mu.weights[i].clone();
            dens[i] = &mu.weights[i] / &nu.weights[i];
        }
    }
    Ok(Lebesgue {
        continuous: Measure::from_parts(mu.space.clone(), cont),
        singular: Measure::from_parts(mu.space.clone(), sing),
        density: StepFunction::new(&mu.space, dens)?,
    })
}

/// dμ/dν for μ ≪ ν; the density is zero on ν-null atoms.
pub fn radon_nikodym(mu: &Measure, nu: &Measure) -> Result<StepFunction> {
    same_space(&mu.space, &nu.space, "Radon-Nikodym derivative across spaces")?;
    if let Some(i) = continuity_violation(mu, nu) {
        return Err(Error::AbsoluteContinuityViolated {
            atom: i,
            label: mu.space.atom_label(i).to_string(),
        });
    }
    Ok(lebesgue_decompose(mu, nu)?.density)
}

/// A linear functional on step functions, given on the atom indicators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFunctional {
    space: SpaceRef,
    values: Vec<Q>,
    declared_total: Q,
}

impl LinearFunctional {
    /// `values[i] = L(χ_atom_i)`; `declared_total = L(1)` must be their sum.
    pub fn new(space: &SpaceRef, values: Vec<Q>, declared_total: Q) -> Result<Self> {
        if values.len() != space.atom_count() {
            return Err(Error::LengthMismatch {
                expected: space.atom_count(),
                found: values.len(),
            });
        }
        let sum: Q = values.iter().sum();
        if sum != declared_total {
            return Err(Error::InconsistentTotal {
                declared: declared_total.to_string(),
                sum: sum.to_string(),
            });
        }
        Ok(LinearFunctional {
            space: space.clone(),
            values,
            declared_total,
        })
    }

    /// `f ↦ ∫ f dμ`.
    pub fn integration(mu: &Measure) -> Self {
        LinearFunctional {
            space: mu.space.clone(),
            values: mu.weights.clone(),
            declared_total: mu.total(),
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn declared_total(&self) -> &Q {
        &self.declared_total
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    /// L(f), expanded over the indicator basis.
    pub fn apply(&self, f: &StepFunction) -> Result<Q> {
        same_space(
            &self.space,
            f.space(),
            "functional applied to a function on another space",
        )?;
        Ok(f.values().iter().zip(&self.values).map(|(a, b)| a * b).sum())
    }
}

/// The measure representing a positive functional: μ(atom) = L(χ_atom).
pub fn measure_from_functional(l: &LinearFunctional) -> Result<Measure> {
    if let Some(i) = l.values.iter().position(|v| v.is_negative()) {
        return Err(Error::NegativeFunctional {
            atom: i,
            label: l.space.atom_label(i).to_string(),
        });
    }
    Ok(Measure::from_parts(l.space.clone(), l.values.clone()))
}

#[derive(Debug, Clone)]
pub struct DualDensity {
    pub density: StepFunction,
    /// The exponent `q` conjugate to the requested `p`.
    pub conjugate: Exponent,
    /// ‖Λ‖ = ‖g‖_q with respect to μ.
    pub operator_norm: NormValue,
}

/// The density `g` with Λ(f) = ∫ f·g dμ, and ‖Λ‖ on Lp(μ).
pub fn lp_dual_density(lambda: &LinearFunctional, mu: &Measure, p: &Exponent) -> Result<DualDensity> {
    same_space(&lambda.space, &mu.space, "functional and measure on different spaces")?;
    if let Some(i) = lambda.values.iter().position(|v| v.is_negative()) {
        return Err(Error::NegativeFunctional {
            atom: i,
            label: mu.space.atom_label(i).to_string(),
        });
    }
    let mut g = Vec::with_capacity(mu.weights.len());
    for (i, (l, m)) in lambda.values.iter().zip(&mu.weights).enumerate() {
        if m.is_zero() {
            if !l.is_zero() {
                return Err(Error::UnsupportedFunctional {
                    atom: i,
                    label: mu.space.atom_label(i).to_string(),
                });
            }
            g.push(Q::zero());
        } else {
            g.push(l / m);
        }
    }
    let conjugate = p.conjugate();
    let operator_norm = weighted_norm(&g, &mu.weights, &conjugate);
    Ok(DualDensity {
        density: StepFunction::new(&mu.space, g)?,
        conjugate,
        operator_norm,
    })
}
