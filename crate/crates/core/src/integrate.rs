//! Step functions, integrals, Lp norms and the convergence-in-measure distance.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::arith::{to_f64, weighted_norm, Exponent, NormValue, Q};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::spaces::{same_space, MeasurableSet, SpaceRef};

/// Tolerance for inequality checks decided in floating point.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// A function constant on every atom.
#[derive(Clone, PartialEq, Eq)]
pub struct StepFunction {
    space: SpaceRef,
    values: Vec<Q>,
}

impl fmt::Debug for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.values.iter().map(|w| w.to_string()).collect();
        write!(f, "StepFunction({})", v.join(", "))
    }
}

impl StepFunction {
    pub fn new(space: &SpaceRef, values: Vec<Q>) -> Result<Self> {
        if values.len() != space.atom_count() {
            return Err(Error::LengthMismatch {
                expected: space.atom_count(),
                found: values.len(),
            });
        }
        Ok(StepFunction {
            space: space.clone(),
            values,
        })
    }

    pub fn constant(space: &SpaceRef, c: Q) -> Self {
        StepFunction {
            space: space.clone(),
            values: vec![c; space.atom_count()],
        }
    }

    /// χ_A.
    pub fn indicator(set: &MeasurableSet) -> Self {
        StepFunction {
            space: set.space().clone(),
            values: set
                .mask()
                .iter()
                .map(|&m| if m { Q::from_integer(1.into()) } else { Q::zero() })
                .collect(),
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> &Q {
        &self.values[atom]
    }

    pub fn map(&self, f: impl Fn(&Q) -> Q) -> Self {
        StepFunction {
            space: self.space.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&Q, &Q) -> Q) -> Result<Self> {
        same_space(&self.space, &other.space, "functions on different spaces")?;
        Ok(StepFunction {
            space: self.space.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map(|v| v * c)
    }

    pub fn abs(&self) -> Self {
        self.map(Signed::abs)
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.min(b).clone())
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.max(b).clone())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    /// {f ≥ r} as a measurable set.
    pub fn level_set(&self, r: &Q) -> MeasurableSet {
        MeasurableSet::from_atoms(&self.space, (0..self.values.len()).filter(|&i| self.values[i] >= *r))
            .expect("atoms in range")
    }
}

/// ∫ f dμ = Σ f(atom)·μ(atom).
pub fn integral(f: &StepFunction, mu: &Measure) -> Result<Q> {
    same_space(f.space(), mu.space(), "function and measure on different spaces")?;
    Ok(f.values.iter().zip(mu.weights()).map(|(a, b)| a * b).sum())
}

/// ‖f‖_p with respect to μ; for `p = ∞` the maximum of |f| over μ-positive atoms.
pub fn lp_norm(f: &StepFunction, mu: &Measure, p: &Exponent) -> Result<NormValue> {
    same_space(f.space(), mu.space(), "function and measure on different spaces")?;
    if let Exponent::Finite(pq) = p {
        if *pq < Q::from_integer(1.into()) {
            return Err(Error::InvalidExponent(format!("p = {pq} is below 1")));
        }
    }
    Ok(weighted_norm(&f.values, mu.weights(), p))
}

/// Both sides of an inequality compared exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactSides {
    /// lhs ≤ rhs compared directly.
    Direct { lhs: Q, rhs: Q },
    /// lhs² ≤ rhs² compared through the squares.
    Squared { lhs: Q, rhs: Q },
}

#[derive(Debug, Clone)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Present when the comparison was decided in exact arithmetic.
    pub exact: Option<ExactSides>,
    /// Exact equality, when decidable.
    pub equality: Option<bool>,
}

/// Hölder: ∫|f·g| dμ ≤ ‖f‖_p ‖g‖_q for `p ∈ (1, ∞]`.
///
/// `p = 2` is decided exactly by comparing squares; `p = ∞` exactly on
/// values; other exponents in floating point with tolerance 1e-9.
pub fn check_hoelder(f: &StepFunction, g: &StepFunction, mu: &Measure, p: &Exponent) -> Result<InequalityCheck> {
    same_space(f.space(), g.space(), "functions on different spaces")?;
    if let Exponent::Finite(pq) = p {
        if *pq <= Q::from_integer(1.into()) {
            return Err(Error::InvalidExponent(format!("Hölder needs p > 1, got {pq}")));
        }
    }
    let q = p.conjugate();
    let lhs_exact = integral(&f.mul(g)?.abs(), mu)?;
    let nf = lp_norm(f, mu, p)?;
    let ng = lp_norm(g, mu, &q)?;
    let lhs = to_f64(&lhs_exact);
    let rhs = nf.approx * ng.approx;
    if p.is_two() {
        let l2 = &lhs_exact * &lhs_exact;
        let r2 = nf.exact_squared().expect("p = 2 is exact") * ng.exact_squared().expect("q = 2 is exact");
        return Ok(InequalityCheck {
            lhs,
            rhs,
            holds: l2 <= r2,
            equality: Some(l2 == r2),
            exact: Some(ExactSides::Squared { lhs: l2, rhs: r2 }),
        });
    }
    if let (Some(a), Some(b)) = (nf.exact_value(), ng.exact_value()) {
        let r = a * b;
        return Ok(InequalityCheck {
            lhs,
            rhs,
            holds: lhs_exact <= r,
            equality: Some(lhs_exact == r),
            exact: Some(ExactSides::Direct { lhs: lhs_exact, rhs: r }),
        });
    }
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + FLOAT_TOLERANCE,
        exact: None,
        equality: None,
    })
}

/// Minkowski: ‖f+g‖_p ≤ ‖f‖_p + ‖g‖_p for `p ∈ [1, ∞]`.
///
/// Exact for `p ∈ {1, ∞}` and, via `S − A − B ≤ 2√(AB)`, for `p = 2`.
pub fn check_minkowski(f: &StepFunction, g: &StepFunction, mu: &Measure, p: &Exponent) -> Result<InequalityCheck> {
    let sum = f.add(g)?;
    let ns = lp_norm(&sum, mu, p)?;
    let nf = lp_norm(f, mu, p)?;
    let ng = lp_norm(g, mu, p)?;
    let lhs = ns.approx;
    let rhs = nf.approx + ng.approx;
    if let (Some(s), Some(a), Some(b)) = (ns.exact_value(), nf.exact_value(), ng.exact_value()) {
        let r = a + b;
        return Ok(InequalityCheck {
            lhs,
            rhs,
            holds: *s <= r,
            equality: Some(*s == r),
            exact: Some(ExactSides::Direct { lhs: s.clone(), rhs: r }),
        });
    }
    if p.is_two() {
        let s = ns.exact_squared().expect("exact");
        let a = nf.exact_squared().expect("exact");
        let b = ng.exact_squared().expect("exact");
        let gap = &s - &a - &b;
        let four_ab = Q::from_integer(4.into()) * &a * &b;
        let (holds, equality) = if gap.is_negative() {
            (true, false)
        } else {
            let g2 = &gap * &gap;
            (g2 <= four_ab, g2 == four_ab)
        };
        return Ok(InequalityCheck {
            lhs,
            rhs,
            holds,
            equality: Some(equality),
            exact: None,
        });
    }
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + FLOAT_TOLERANCE,
        exact: None,
        equality: None,
    })
}

/// ∫ f dμ for `f ≥ 0` as the area under the graph: Σⱼ (rⱼ − rⱼ₋₁)·μ({f ≥ rⱼ})
/// over the sorted distinct positive values of f.
pub fn layered_integral(f: &StepFunction, mu: &Measure) -> Result<Q> {
    same_space(f.space(), mu.space(), "function and measure on different spaces")?;
    if let Some(i) = f.values.iter().position(|v| v.is_negative()) {
        return Err(Error::NegativeFunction {
            atom: i,
            label: f.space.atom_label(i).to_string(),
        });
    }
    let mut levels: Vec<&Q> = f.values.iter().filter(|v| !v.is_zero()).collect();
    levels.sort();
    levels.dedup();
    let mut prev = Q::zero();
    let mut total = Q::zero();
    for r in levels {
        total += (r - &prev) * mu.eval(&f.level_set(r))?;
        prev = r.clone();
    }
    Ok(total)
}

/// δ(f, g) = inf{ε > 0 : μ(|f − g| > ε) ≤ ε}, computed exactly.
///
/// On `[vₖ, vₖ₊₁)` between consecutive values of |f − g| the tail measure is
/// a constant `cₖ`, so the least feasible ε there is `max(vₖ, cₖ)` when that
/// falls inside the piece. The feasible set is upward closed, so the first
/// piece that admits a solution gives the infimum.
pub fn conv_in_measure_distance(f: &StepFunction, g: &StepFunction, mu: &Measure) -> Result<Q> {
    same_space(f.space(), mu.space(), "function and measure on different spaces")?;
    let diff = f.sub(g)?.abs();
    let mut levels: Vec<Q> = diff.values.clone();
    levels.push(Q::zero());
    levels.sort();
    levels.dedup();
    let tail = |eps: &Q| -> Q {
        diff.values
            .iter()
            .zip(mu.weights())
            .filter(|(v, _)| *v > eps)
            .map(|(_, w)| w)
            .sum()
    };
    for (k, v) in levels.iter().enumerate() {
        let c = tail(v);
        let candidate = v.max(&c).clone();
        match levels.get(k + 1) {
            Some(next) if candidate >= *next => continue,
            _ => return Ok(candidate),
        }
    }
    unreachable!("the last piece always admits a solution")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qi, ExactNorm};
    use crate::spaces::FiniteMeasurableSpace;

    fn space(n: usize) -> SpaceRef {
        FiniteMeasurableSpace::discrete_labels(&["a", "b", "c", "d"][..n]).unwrap()
    }

    fn sf(s: &SpaceRef, v: &[i64]) -> StepFunction {
        StepFunction::new(s, v.iter().map(|&x| qi(x)).collect()).unwrap()
    }

    fn m(s: &SpaceRef, w: &[(i64, i64)]) -> Measure {
        Measure::new(s, w.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    #[test]
    fn integral_examples() {
        let s = space(2);
        assert_eq!(
            integral(&sf(&s, &[2, -1]), &m(&s, &[(1, 4), (3, 4)])).unwrap(),
            q(-1, 4)
        );
        let a = MeasurableSet::from_labels(&s, &["b"]).unwrap();
        let mu = m(&s, &[(1, 3), (1, 6)]);
        assert_eq!(integral(&StepFunction::indicator(&a), &mu).unwrap(), q(1, 6));
        assert_eq!(integral(&StepFunction::constant(&s, qi(3)), &mu).unwrap(), q(3, 2));
    }

    #[test]
    fn lp_norm_examples() {
        let s = space(2);
        let half = m(&s, &[(1, 2), (1, 2)]);
        let n = lp_norm(&sf(&s, &[1, 1]), &half, &Exponent::two()).unwrap();
        assert_eq!(n.exact, Some(ExactNorm::Squared(qi(1))));
        assert_eq!(n.approx, 1.0);
        let n = lp_norm(&sf(&s, &[3, -5]), &half, &Exponent::Infinity).unwrap();
        assert_eq!(n.exact_value(), Some(&qi(5)));
        let n = lp_norm(&sf(&s, &[1, 2]), &half, &Exponent::one()).unwrap();
        assert_eq!(n.exact_value(), Some(&q(3, 2)));
        let n = lp_norm(&sf(&s, &[3, -5]), &m(&s, &[(1, 1), (0, 1)]), &Exponent::Infinity).unwrap();
        assert_eq!(n.exact_value(), Some(&qi(3)));
        assert!(lp_norm(&sf(&s, &[1, 1]), &half, &Exponent::Finite(q(1, 2))).is_err());
    }

    #[test]
    fn hoelder_examples() {
        let s = space(2);
        let half = m(&s, &[(1, 2), (1, 2)]);
        let r = check_hoelder(&sf(&s, &[1, 2]), &sf(&s, &[3, 1]), &half, &Exponent::two()).unwrap();
        assert!(r.holds);
        assert_eq!(
            r.exact,
            Some(ExactSides::Squared {
                lhs: q(25, 4),
                rhs: q(25, 2)
            })
        );
        let f = sf(&s, &[1, -3]);
        let r = check_hoelder(&f, &f, &half, &Exponent::two()).unwrap();
        assert_eq!(r.equality, Some(true));
        let r = check_hoelder(&f, &StepFunction::constant(&s, qi(1)), &half, &Exponent::two()).unwrap();
        assert!(r.holds);
        assert!((r.rhs - 5f64.sqrt() * 1.0).abs() < 1e-12);
        assert!(check_hoelder(&f, &f, &half, &Exponent::one()).is_err());
        let r = check_hoelder(&f, &sf(&s, &[2, 5]), &half, &Exponent::Finite(qi(3))).unwrap();
        assert!(r.holds && r.exact.is_none());
    }

    #[test]
    fn minkowski_examples() {
        let s = space(2);
        let half = m(&s, &[(1, 2), (1, 2)]);
        let f = sf(&s, &[2, -7]);
        let r = check_minkowski(&f, &f.scale(&qi(-1)), &half, &Exponent::Finite(qi(3))).unwrap();
        assert!(r.holds && r.lhs == 0.0);
        let r = check_minkowski(&sf(&s, &[1, 4]), &sf(&s, &[2, 0]), &half, &Exponent::one()).unwrap();
        assert_eq!(r.equality, Some(true));
        let r = check_minkowski(&sf(&s, &[1, 0]), &sf(&s, &[0, 1]), &half, &Exponent::two()).unwrap();
        assert!(r.holds);
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.equality, Some(false));
        let g = sf(&s, &[2, 6]);
        let r = check_minkowski(&sf(&s, &[1, 3]), &g, &half, &Exponent::two()).unwrap();
        assert_eq!(r.equality, Some(true));
    }

    #[test]
    fn layered_examples() {
        let s = space(3);
        let third = m(&s, &[(1, 3), (1, 3), (1, 3)]);
        let f = sf(&s, &[2, 0, 1]);
        assert_eq!(layered_integral(&f, &third).unwrap(), qi(1));
        assert_eq!(integral(&f, &third).unwrap(), qi(1));
        assert_eq!(layered_integral(&sf(&s, &[0, 0, 0]), &third).unwrap(), qi(0));
        let a = MeasurableSet::from_labels(&s, &["a", "c"]).unwrap();
        let f = StepFunction::indicator(&a).scale(&q(7, 2));
        assert_eq!(layered_integral(&f, &third).unwrap(), q(7, 3));
        assert!(matches!(
            layered_integral(&sf(&s, &[1, -1, 0]), &third),
            Err(Error::NegativeFunction { atom: 1, .. })
        ));
    }

    #[test]
    fn delta_examples() {
        let s = space(2);
        let mu = m(&s, &[(1, 4), (3, 4)]);
        let f = sf(&s, &[4, 1]);
        assert_eq!(conv_in_measure_distance(&f, &f, &mu).unwrap(), qi(0));
        assert_eq!(
            conv_in_measure_distance(&sf(&s, &[0, 0]), &sf(&s, &[1, 0]), &mu).unwrap(),
            q(1, 4)
        );
        let one = space(1);
        assert_eq!(
            conv_in_measure_distance(&sf(&one, &[0]), &sf(&one, &[5]), &m(&one, &[(1, 1)])).unwrap(),
            qi(1)
        );
        // the tail mass 1/2 exceeds the gap 1/10, so the infimum sits at the value 1/10
        let g = StepFunction::new(&s, vec![q(1, 10), qi(0)]).unwrap();
        assert_eq!(
            conv_in_measure_distance(&g, &sf(&s, &[0, 0]), &m(&s, &[(1, 2), (1, 2)])).unwrap(),
            q(1, 10)
        );
    }
}
