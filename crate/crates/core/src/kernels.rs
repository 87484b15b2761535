//! Transition kernels and the constructions built from them: convolution,
//! Kleisli lift, products with measures, Fubini, pushforward, finite-horizon
//! path measures and disintegration.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::arith::Q;
use crate::error::{Error, Result};
use crate::integrate::{integral, StepFunction};
use crate::measures::Measure;
use crate::spaces::{atom_cap, product_space, same_space, MeasurableSet, SpaceRef};

/// Mass constraint on the rows of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelKind {
    Finite,
    SubMarkov,
    Markov,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Finite => "finite",
            KernelKind::SubMarkov => "subMarkov",
            KernelKind::Markov => "Markov",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "finite" => Some(KernelKind::Finite),
            "submarkov" | "subprobability" => Some(KernelKind::SubMarkov),
            "markov" | "probability" | "stochastic" => Some(KernelKind::Markov),
            _ => None,
        }
    }

    /// Strongest kind the given rows satisfy.
    pub fn of_rows(rows: &[Measure]) -> Self {
        if rows.iter().all(Measure::is_probability) {
            KernelKind::Markov
        } else if rows.iter().all(Measure::is_subprobability) {
            KernelKind::SubMarkov
        } else {
            KernelKind::Finite
        }
    }

    fn admits(self, mass: &Q) -> bool {
        match self {
            KernelKind::Finite => true,
            KernelKind::SubMarkov => *mass <= Q::one(),
            KernelKind::Markov => mass.is_one(),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// K: (X, 𝒜) ⇝ (Y, ℬ), one measure on Y per atom of X.
#[derive(Clone, PartialEq, Eq)]
pub struct Kernel {
    domain: SpaceRef,
    codomain: SpaceRef,
    rows: Vec<Measure>,
    kind: KernelKind,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("kind", &self.kind)
            .field("rows", &self.rows)
            .finish()
    }
}

impl Kernel {
    pub fn new(domain: &SpaceRef, codomain: &SpaceRef, rows: Vec<Vec<Q>>, kind: KernelKind) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|r| Measure::new(codomain, r))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(domain, codomain, rows, kind)
    }

    pub fn from_rows(domain: &SpaceRef, codomain: &SpaceRef, rows: Vec<Measure>, kind: KernelKind) -> Result<Self> {
        if rows.len() != domain.atom_count() {
            return Err(Error::LengthMismatch {
                expected: domain.atom_count(),
                found: rows.len(),
            });
        }
        for (i, r) in rows.iter().enumerate() {
            same_space(r.space(), codomain, "kernel row is not on the codomain")?;
            let mass = r.total();
            if !kind.admits(&mass) {
                return Err(Error::KernelKindViolated {
                    row: i,
                    mass: mass.to_string(),
                    kind: kind.name(),
                });
            }
        }
        Ok(Kernel {
            domain: domain.clone(),
            codomain: codomain.clone(),
            rows,
            kind,
        })
    }

    /// Kernel whose kind is the strongest one its rows satisfy.
    pub fn inferred(domain: &SpaceRef, codomain: &SpaceRef, rows: Vec<Measure>) -> Result<Self> {
        let kind = KernelKind::of_rows(&rows);
        Self::from_rows(domain, codomain, rows, kind)
    }

    /// e_X: every atom goes to its own point mass.
    pub fn identity(space: &SpaceRef) -> Self {
        Kernel {
            domain: space.clone(),
            codomain: space.clone(),
            rows: (0..space.atom_count()).map(|a| Measure::dirac(space, a)).collect(),
            kind: KernelKind::Markov,
        }
    }

    /// x ↦ ν for every x.
    pub fn constant(domain: &SpaceRef, nu: &Measure) -> Self {
        let rows = vec![nu.clone(); domain.atom_count()];
        Kernel {
            domain: domain.clone(),
            codomain: nu.space().clone(),
            kind: KernelKind::of_rows(&rows),
            rows,
        }
    }

    pub fn domain(&self) -> &SpaceRef {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceRef {
        &self.codomain
    }

    pub fn rows(&self) -> &[Measure] {
        &self.rows
    }

    pub fn row(&self, atom: usize) -> &Measure {
        &self.rows[atom]
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn is_endo(&self) -> bool {
        Arc::ptr_eq(&self.domain, &self.codomain) || *self.domain == *self.codomain
    }

    /// K(x)(B) for the atom x.
    pub fn eval(&self, atom: usize, set: &MeasurableSet) -> Result<Q> {
        self.rows[atom].eval(set)
    }
}

/// L * K: first K, then L; `(L*K)(x) = Σ_y K(x)(y)·L(y)`.
pub fn convolve(l: &Kernel, k: &Kernel) -> Result<Kernel> {
    same_space(&k.codomain, &l.domain, "K's codomain is not L's domain")?;
    let n = l.codomain.atom_count();
    let rows = k
        .rows
        .iter()
        .map(|kx| {
            let mut w = vec![Q::zero(); n];
            for (y, kxy) in kx.weights().iter().enumerate() {
                if kxy.is_zero() {
                    continue;
                }
                for (z, lyz) in l.rows[y].weights().iter().enumerate() {
                    w[z] += kxy * lyz;
                }
            }
            Measure::from_parts(l.codomain.clone(), w)
        })
        .collect();
    Ok(Kernel {
        domain: k.domain.clone(),
        codomain: l.codomain.clone(),
        rows,
        kind: k.kind.min(l.kind),
    })
}

/// K̄(μ) = ∫ K(x) dμ(x), the mixture of the rows.
pub fn kleisli_lift(k: &Kernel, mu: &Measure) -> Result<Measure> {
    same_space(mu.space(), &k.domain, "measure is not on the kernel's domain")?;
    let mut w = vec![Q::zero(); k.codomain.atom_count()];
    for (x, mx) in mu.weights().iter().enumerate() {
        if mx.is_zero() {
            continue;
        }
        for (y, kxy) in k.rows[x].weights().iter().enumerate() {
            w[y] += mx * kxy;
        }
    }
    Ok(Measure::from_parts(k.codomain.clone(), w))
}

/// μ ⊗ K on X × Y with weight μ(x)·K(x)(y) on the atom (x, y).
pub fn measure_kernel_product(mu: &Measure, k: &Kernel) -> Result<Measure> {
    same_space(mu.space(), &k.domain, "measure is not on the kernel's domain")?;
    let space = product_space(&k.domain, &k.codomain);
    let w = mu
        .weights()
        .iter()
        .zip(&k.rows)
        .flat_map(|(mx, row)| row.weights().iter().map(move |kxy| mx * kxy))
        .collect();
    Ok(Measure::from_parts(space, w))
}

/// μ ⊗ ν with weight μ(A)·ν(B) on the rectangle atom A × B.
pub fn product_measure(mu: &Measure, nu: &Measure) -> Measure {
    let space = product_space(mu.space(), nu.space());
    let w = mu
        .weights()
        .iter()
        .flat_map(|a| nu.weights().iter().map(move |b| a * b))
        .collect();
    Measure::from_parts(space, w)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FubiniReport {
    /// ∫ f d(μ⊗ν).
    pub direct: Q,
    /// ∫ (∫ f_x dν) dμ.
    pub iterated_xy: Q,
    /// ∫ (∫ f^y dμ) dν.
    pub iterated_yx: Q,
}

impl FubiniReport {
    pub fn consistent(&self) -> bool {
        self.direct == self.iterated_xy && self.direct == self.iterated_yx
    }
}

/// The double integral of `f` three ways: against the product measure and
/// through both families of cuts.
pub fn fubini(f: &StepFunction, mu: &Measure, nu: &Measure) -> Result<FubiniReport> {
    let prod = product_measure(mu, nu);
    same_space(f.space(), prod.space(), "function is not on the product space")?;
    let space = prod.space().clone();
    let direct = integral(f, &prod)?;
    let cell = |i: usize, j: usize| f.value(space.pair_atom(i, j));
    let (nx, ny) = (mu.weights().len(), nu.weights().len());
    let iterated_xy = (0..nx)
        .map(|i| {
            let cut: Q = (0..ny).map(|j| cell(i, j) * nu.weight(j)).sum();
            cut * mu.weight(i)
        })
        .sum();
    let iterated_yx = (0..ny)
        .map(|j| {
            let cut: Q = (0..nx).map(|i| cell(i, j) * mu.weight(i)).sum();
            cut * nu.weight(j)
        })
        .sum();
    Ok(FubiniReport {
        direct,
        iterated_xy,
        iterated_yx,
    })
}

/// A measurable map between finite spaces, recorded atom to atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomMap {
    domain: SpaceRef,
    codomain: SpaceRef,
    image: Vec<usize>,
}

impl AtomMap {
    /// From a point map; every domain atom must land inside one codomain atom.
    pub fn from_points(domain: &SpaceRef, codomain: &SpaceRef, point_image: &[usize]) -> Result<Self> {
        if point_image.len() != domain.points().len() {
            return Err(Error::LengthMismatch {
                expected: domain.points().len(),
                found: point_image.len(),
            });
        }
        if let Some(&bad) = point_image.iter().find(|&&p| p >= codomain.points().len()) {
            return Err(Error::UnknownPoint(format!("#{bad}")));
        }
        let image = domain
            .atoms()
            .iter()
            .map(|atom| {
                let target = codomain.atom_of(point_image[atom[0]]);
                match atom.iter().find(|&&p| codomain.atom_of(point_image[p]) != target) {
                    Some(_) => Err(Error::NotAtomMap(domain.points()[atom[0]].clone())),
                    None => Ok(target),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AtomMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            image,
        })
    }

    pub fn from_labels<S: AsRef<str>>(domain: &SpaceRef, codomain: &SpaceRef, targets: &[S]) -> Result<Self> {
        let idx = targets
            .iter()
            .map(|t| codomain.point_index(t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(domain, codomain, &idx)
    }

    pub fn from_atom_images(domain: &SpaceRef, codomain: &SpaceRef, image: Vec<usize>) -> Result<Self> {
        if image.len() != domain.atom_count() {
            return Err(Error::LengthMismatch {
                expected: domain.atom_count(),
                found: image.len(),
            });
        }
        if let Some(&bad) = image.iter().find(|&&a| a >= codomain.atom_count()) {
            return Err(Error::Internal(format!("codomain atom #{bad} out of range")));
        }
        Ok(AtomMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            image,
        })
    }

    pub fn domain(&self) -> &SpaceRef {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceRef {
        &self.codomain
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// h ∘ f.
    pub fn pull_back(&self, h: &StepFunction) -> Result<StepFunction> {
        same_space(h.space(), &self.codomain, "function is not on the codomain")?;
        StepFunction::new(&self.domain, self.image.iter().map(|&a| h.value(a).clone()).collect())
    }

    /// f⁻¹(B).
    pub fn preimage(&self, set: &MeasurableSet) -> Result<MeasurableSet> {
        same_space(set.space(), &self.codomain, "set is not on the codomain")?;
        MeasurableSet::from_atoms(
            &self.domain,
            (0..self.image.len()).filter(|&a| set.contains_atom(self.image[a])),
        )
    }
}

/// The image measure B ↦ μ(f⁻¹(B)).
pub fn pushforward(f: &AtomMap, mu: &Measure) -> Result<Measure> {
    same_space(mu.space(), &f.domain, "measure is not on the map's domain")?;
    let mut w = vec![Q::zero(); f.codomain.atom_count()];
    for (a, m) in mu.weights().iter().enumerate() {
        w[f.image[a]] += m;
    }
    Ok(Measure::from_parts(f.codomain.clone(), w))
}

/// The n-fold left-nested product `((S × S) × S) × …`.
pub fn power_space(step: &SpaceRef, n: usize) -> SpaceRef {
    assert!(n >= 1, "power of at least one factor");
    let mut space = step.clone();
    for _ in 1..n {
        space = product_space(&space, step);
    }
    space
}

/// Finite-horizon path measure of a kernel `M: S ⇝ T × S`.
#[derive(Debug, Clone)]
pub struct PathMeasure {
    step: SpaceRef,
    horizon: usize,
    measure: Measure,
}

impl PathMeasure {
    /// The one-step space T × S.
    pub fn step(&self) -> &SpaceRef {
        &self.step
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// M_n(s₀) on (T × S)^n; atom index is the base-|T×S| numeral of the path.
    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// Image under the projection onto the first `k` steps.
    pub fn truncate(&self, k: usize) -> Result<Measure> {
        if k == 0 || k > self.horizon {
            return Err(Error::Internal(format!(
                "cannot truncate horizon {} to {k}",
                self.horizon
            )));
        }
        let m = self.step.atom_count();
        let space = power_space(&self.step, k);
        let drop = m.pow((self.horizon - k) as u32);
        let mut w = vec![Q::zero(); space.atom_count()];
        for (idx, p) in self.measure.weights().iter().enumerate() {
            w[idx / drop] += p;
        }
        Ok(Measure::from_parts(space, w))
    }
}

/// Path measures M_n(s₀) built by the recursion
/// `M_{n+1}(s₀)(path, c) = M_n(s₀)(path) · M(s_n)(c)` where `s_n` is the
/// state component of the last step of `path`.
pub fn path_measure(
    m: &Kernel,
    time: &SpaceRef,
    state: &SpaceRef,
    start_atom: usize,
    horizon: usize,
) -> Result<PathMeasure> {
    same_space(&m.domain, state, "kernel domain is not the state space")?;
    let step = product_space(time, state);
    same_space(&m.codomain, &step, "kernel codomain is not time × state")?;
    if start_atom >= state.atom_count() {
        return Err(Error::Internal(format!("start atom #{start_atom} out of range")));
    }
    if horizon == 0 {
        return Err(Error::Internal("horizon must be at least 1".into()));
    }
    let per_step = step.atom_count();
    let cap = atom_cap();
    let atoms = (per_step as u128).checked_pow(horizon as u32).unwrap_or(u128::MAX);
    if atoms > cap as u128 {
        return Err(Error::HorizonTooLarge {
            atoms: usize::try_from(atoms).unwrap_or(usize::MAX),
            cap,
        });
    }
    let state_of = |c: usize| step.split_atom(c).1;
    let mut weights = m.rows[start_atom].weights().to_vec();
    for _ in 1..horizon {
        let mut next = Vec::with_capacity(weights.len() * per_step);
        for (idx, p) in weights.iter().enumerate() {
            let row = m.rows[state_of(idx % per_step)].weights();
            next.extend(row.iter().map(|r| p * r));
        }
        weights = next;
    }
    let space = power_space(&step, horizon);
    Ok(PathMeasure {
        step,
        horizon,
        measure: Measure::from_parts(space, weights),
    })
}

#[derive(Debug, Clone)]
pub struct Disintegration {
    pub marginal: Measure,
    pub conditional: Kernel,
    /// Atoms of Y with zero marginal; their rows are the zero measure.
    pub null_fibers: Vec<usize>,
}

/// Splits a joint measure on Y × Z into its Y-marginal and the regular
/// conditional kernel Y ⇝ Z.
pub fn disintegrate(joint: &Measure) -> Result<Disintegration> {
    let space = joint.space();
    let (y, z) = space.factors().ok_or(Error::NotProductSpace)?;
    let (y, z) = (y.clone(), z.clone());
    let nz = z.atom_count();
    let mut marginal = Vec::with_capacity(y.atom_count());
    let mut rows = Vec::with_capacity(y.atom_count());
    let mut null_fibers = Vec::new();
    for i in 0..y.atom_count() {
        let fiber: Vec<Q> = (0..nz).map(|j| joint.weight(space.pair_atom(i, j)).clone()).collect();
        let mass: Q = fiber.iter().sum();
        if mass.is_zero() {
            null_fibers.push(i);
            rows.push(Measure::zero(&z));
        } else {
            rows.push(Measure::from_parts(
                z.clone(),
                fiber.iter().map(|w| w / &mass).collect(),
            ));
        }
        marginal.push(mass);
    }
    let kind = if null_fibers.is_empty() {
        KernelKind::Markov
    } else {
        KernelKind::SubMarkov
    };
    Ok(Disintegration {
        marginal: Measure::from_parts(y.clone(), marginal),
        conditional: Kernel::from_rows(&y, &z, rows, kind)?,
        null_fibers,
    })
}
