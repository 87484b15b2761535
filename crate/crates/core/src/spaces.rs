//! Finite measurable spaces stored as atom partitions.
//!
//! A σ-algebra on a finite carrier is determined by its atoms, so a space
//! keeps only the point labels and the atom blocks. Measurable sets are
//! unions of atoms and are stored as an atom mask.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::Measure;

pub type SpaceRef = Arc<FiniteMeasurableSpace>;

/// Default cap on atoms for operations that enumerate all measurable sets.
pub const DEFAULT_ATOM_CAP: usize = 16;

/// Environment variable overriding [`DEFAULT_ATOM_CAP`].
pub const ATOM_CAP_ENV: &str = "FINMEAS_ATOM_CAP";

/// Current enumeration cap. Raising it only costs time, never correctness.
pub fn atom_cap() -> usize {
    std::env::var(ATOM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ATOM_CAP)
}

pub(crate) fn check_cap(what: &'static str, needed: usize) -> Result<()> {
    let cap = atom_cap();
    if needed > cap {
        return Err(Error::CapacityExceeded { what, needed, cap });
    }
    Ok(())
}

/// A finite carrier with a σ-algebra given by its atoms.
///
/// Atoms are sorted by their least point index and each atom lists its
/// points in increasing order, so two spaces are equal iff they have the
/// same labels and the same σ-algebra.
#[derive(Clone)]
pub struct FiniteMeasurableSpace {
    points: Vec<String>,
    atoms: Vec<Vec<usize>>,
    atom_of: Vec<usize>,
    factors: Option<(SpaceRef, SpaceRef)>,
}

impl PartialEq for FiniteMeasurableSpace {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.atoms == other.atoms
    }
}

impl Eq for FiniteMeasurableSpace {}

impl fmt::Debug for FiniteMeasurableSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<Vec<&str>> = self
            .atoms
            .iter()
            .map(|a| a.iter().map(|&p| self.points[p].as_str()).collect())
            .collect();
        f.debug_struct("FiniteMeasurableSpace")
            .field("atoms", &atoms)
            .field("product", &self.factors.is_some())
            .finish()
    }
}

fn check_labels(points: &[String]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyCarrier);
    }
    let mut seen = HashSet::new();
    for p in points {
        if !seen.insert(p.as_str()) {
            return Err(Error::DuplicatePoint(p.clone()));
        }
    }
    Ok(())
}

fn index_of_labels(points: &[String]) -> HashMap<&str, usize> {
    points.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect()
}

/// Escapes `|` by doubling, so pair labels `left|right` stay readable.
pub fn pair_label(left: &str, right: &str) -> String {
    format!("{}|{}", left.replace('|', "||"), right.replace('|', "||"))
}

impl FiniteMeasurableSpace {
    fn from_canonical_blocks(points: Vec<String>, mut atoms: Vec<Vec<usize>>) -> Self {
        for a in atoms.iter_mut() {
            a.sort_unstable();
        }
        atoms.sort_by_key(|a| a[0]);
        let mut atom_of = vec![0; points.len()];
        for (i, a) in atoms.iter().enumerate() {
            for &p in a {
                atom_of[p] = i;
            }
        }
        FiniteMeasurableSpace {
            points,
            atoms,
            atom_of,
            factors: None,
        }
    }

    /// The σ-algebra generated by `generator` (point-index subsets).
    ///
    /// Atoms are the nonempty sets `⋂ₙ Aₙ^{ρₙ}` over sign vectors `ρ`,
    /// obtained by splitting the carrier along each generator set in turn.
    pub fn sigma_from_generator(points: Vec<String>, generator: &[Vec<usize>]) -> Result<Self> {
        check_labels(&points)?;
        let n = points.len();
        for g in generator {
            if let Some(&bad) = g.iter().find(|&&p| p >= n) {
                return Err(Error::UnknownPoint(format!("#{bad}")));
            }
        }
        let mut blocks: Vec<Vec<usize>> = vec![(0..n).collect()];
        for g in generator {
            let mut member = vec![false; n];
            for &p in g {
                member[p] = true;
            }
            blocks = blocks
                .into_iter()
                .flat_map(|b| {
                    let (inside, outside): (Vec<usize>, Vec<usize>) = b.into_iter().partition(|&p| member[p]);
                    [inside, outside].into_iter().filter(|x| !x.is_empty())
                })
                .collect();
        }
        Ok(Self::from_canonical_blocks(points, blocks))
    }

    /// Same as [`Self::sigma_from_generator`], with generator sets given by label.
    pub fn sigma_from_labels<S: AsRef<str>>(points: Vec<String>, generator: &[Vec<S>]) -> Result<Self> {
        check_labels(&points)?;
        let gen = labels_to_indices(&points, generator)?;
        Self::sigma_from_generator(points, &gen)
    }

    /// A space with explicitly given atoms (point-index blocks).
    pub fn from_atoms(points: Vec<String>, atoms: Vec<Vec<usize>>) -> Result<Self> {
        check_labels(&points)?;
        check_partition(points.len(), &atoms)?;
        Ok(Self::from_canonical_blocks(points, atoms))
    }

    /// The discrete σ-algebra (every point is an atom).
    pub fn discrete(points: Vec<String>) -> Result<Self> {
        let n = points.len();
        Self::from_atoms(points, (0..n).map(|p| vec![p]).collect())
    }

    /// Convenience for tests and examples: discrete space on `&str` labels.
    pub fn discrete_labels(labels: &[&str]) -> Result<SpaceRef> {
        Ok(Arc::new(Self::discrete(
            labels.iter().map(|s| s.to_string()).collect(),
        )?))
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_of(&self, point: usize) -> usize {
        self.atom_of[point]
    }

    pub fn point_index(&self, label: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::UnknownPoint(label.to_string()))
    }

    /// Label of the least point of an atom; used to name atoms in reports.
    pub fn atom_label(&self, atom: usize) -> &str {
        &self.points[self.atoms[atom][0]]
    }

    pub fn atom_labels(&self, atom: usize) -> Vec<&str> {
        self.atoms[atom].iter().map(|&p| self.points[p].as_str()).collect()
    }

    pub fn is_discrete(&self) -> bool {
        self.atoms.len() == self.points.len()
    }

    /// The two factors when this space was built by [`product_space`].
    pub fn factors(&self) -> Option<(&SpaceRef, &SpaceRef)> {
        self.factors.as_ref().map(|(l, r)| (l, r))
    }

    /// Atom index of the rectangle `left_atom × right_atom` in a product space.
    pub fn pair_atom(&self, left_atom: usize, right_atom: usize) -> usize {
        let (_, r) = self.factors.as_ref().expect("product space");
        left_atom * r.atom_count() + right_atom
    }

    /// Inverse of [`Self::pair_atom`].
    pub fn split_atom(&self, atom: usize) -> (usize, usize) {
        let (_, r) = self.factors.as_ref().expect("product space");
        (atom / r.atom_count(), atom % r.atom_count())
    }

    pub fn full_set(self: &SpaceRef) -> MeasurableSet {
        MeasurableSet::from_mask(self.clone(), vec![true; self.atom_count()])
    }

    pub fn empty_set(self: &SpaceRef) -> MeasurableSet {
        MeasurableSet::from_mask(self.clone(), vec![false; self.atom_count()])
    }

    /// The trace on a union of atoms, keeping point order and atom structure.
    pub fn restrict(&self, atoms: &[usize]) -> Result<Self> {
        let mut keep: Vec<usize> = atoms.iter().flat_map(|&a| self.atoms[a].iter().copied()).collect();
        keep.sort_unstable();
        keep.dedup();
        let new_index: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let points = keep.iter().map(|&p| self.points[p].clone()).collect();
        let mut chosen: Vec<usize> = atoms.to_vec();
        chosen.sort_unstable();
        chosen.dedup();
        let blocks = chosen
            .iter()
            .map(|&a| self.atoms[a].iter().map(|p| new_index[p]).collect())
            .collect();
        Self::from_atoms(points, blocks)
    }

    /// Every measurable set, in the order of the binary atom mask.
    pub fn all_sets(self: &SpaceRef, what: &'static str) -> Result<impl Iterator<Item = MeasurableSet>> {
        let n = self.atom_count();
        check_cap(what, n)?;
        let space = self.clone();
        Ok((0u64..(1u64 << n))
            .map(move |bits| MeasurableSet::from_mask(space.clone(), (0..n).map(|i| bits >> i & 1 == 1).collect())))
    }
}

fn labels_to_indices<S: AsRef<str>>(points: &[String], sets: &[Vec<S>]) -> Result<Vec<Vec<usize>>> {
    let index = index_of_labels(points);
    sets.iter()
        .map(|s| {
            s.iter()
                .map(|l| {
                    index
                        .get(l.as_ref())
                        .copied()
                        .ok_or_else(|| Error::UnknownPoint(l.as_ref().to_string()))
                })
                .collect()
        })
        .collect()
}

fn check_partition(n: usize, blocks: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n];
    for b in blocks {
        if b.is_empty() {
            return Err(Error::NotAPartition("empty block".into()));
        }
        for &p in b {
            if p >= n {
                return Err(Error::NotAPartition(format!("point #{p} out of range")));
            }
            if seen[p] {
                return Err(Error::NotAPartition(format!("point #{p} in two blocks")));
            }
            seen[p] = true;
        }
    }
    if let Some(p) = seen.iter().position(|s| !s) {
        return Err(Error::NotAPartition(format!("point #{p} uncovered")));
    }
    Ok(())
}

/// Product σ-algebra; its atoms are exactly the rectangles of atoms.
///
/// Points are ordered pairs in row-major order with labels `left|right`;
/// the atom `(i, j)` has index `i·|atoms(right)| + j`.
pub fn product_space(left: &SpaceRef, right: &SpaceRef) -> SpaceRef {
    let nr = right.points.len();
    let points = left
        .points
        .iter()
        .flat_map(|l| right.points.iter().map(move |r| pair_label(l, r)))
        .collect();
    let atoms = left
        .atoms
        .iter()
        .flat_map(|a| {
            right.atoms.iter().map(move |b| {
                let mut cell: Vec<usize> = a.iter().flat_map(|&x| b.iter().map(move |&y| x * nr + y)).collect();
                cell.sort_unstable();
                cell
            })
        })
        .collect();
    let mut space = FiniteMeasurableSpace::from_canonical_blocks(points, atoms);
    space.factors = Some((left.clone(), right.clone()));
    debug_assert!((0..space.atom_count()).all(|k| {
        let (i, j) = space.split_atom(k);
        space.atoms[k][0] == left.atoms[i][0] * nr + right.atoms[j][0]
    }));
    Arc::new(space)
}

pub(crate) fn same_space(a: &SpaceRef, b: &SpaceRef, what: &str) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(what.to_string()))
    }
}

/// A union of atoms of a space.
#[derive(Clone, PartialEq, Eq)]
pub struct MeasurableSet {
    space: SpaceRef,
    mask: Vec<bool>,
}

impl fmt::Debug for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.point_labels().join(","))
    }
}

impl MeasurableSet {
    pub(crate) fn from_mask(space: SpaceRef, mask: Vec<bool>) -> Self {
        debug_assert_eq!(mask.len(), space.atom_count());
        MeasurableSet { space, mask }
    }

    pub fn from_atoms(space: &SpaceRef, atoms: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; space.atom_count()];
        for a in atoms {
            if a >= mask.len() {
                return Err(Error::Internal(format!("atom #{a} out of range")));
            }
            mask[a] = true;
        }
        Ok(Self::from_mask(space.clone(), mask))
    }

    /// Builds a set from point indices; fails unless they form a union of atoms.
    pub fn from_points(space: &SpaceRef, points: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut member = vec![false; space.points.len()];
        for p in points {
            if p >= member.len() {
                return Err(Error::UnknownPoint(format!("#{p}")));
            }
            member[p] = true;
        }
        let mut mask = vec![false; space.atom_count()];
        for (i, atom) in space.atoms.iter().enumerate() {
            let inside = member[atom[0]];
            if let Some(&p) = atom.iter().find(|&&p| member[p] != inside) {
                return Err(Error::NotMeasurable(space.points[p].clone()));
            }
            mask[i] = inside;
        }
        Ok(Self::from_mask(space.clone(), mask))
    }

    pub fn from_labels<S: AsRef<str>>(space: &SpaceRef, labels: &[S]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| space.point_index(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(space, idx)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains_atom(&self, atom: usize) -> bool {
        self.mask[atom]
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn points(&self) -> Vec<usize> {
        let mut pts: Vec<usize> = self.atoms().flat_map(|a| self.space.atoms[a].iter().copied()).collect();
        pts.sort_unstable();
        pts
    }

    pub fn point_labels(&self) -> Vec<&str> {
        self.points()
            .into_iter()
            .map(|p| self.space.points[p].as_str())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    pub fn len_atoms(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(self.space.clone(), self.mask.iter().map(|m| !m).collect())
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        same_space(&self.space, &other.space, "intersection of sets on different spaces")?;
        Ok(Self::from_mask(
            self.space.clone(),
            self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect(),
        ))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        same_space(&self.space, &other.space, "union of sets on different spaces")?;
        Ok(Self::from_mask(
            self.space.clone(),
            self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect(),
        ))
    }
}

/// A partition of the carrier points, e.g. an equivalence relation.
#[derive(Clone, PartialEq, Eq)]
pub struct Partition {
    space: SpaceRef,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.block_labels()).finish()
    }
}

impl Partition {
    /// A partition from point-index blocks; blocks are canonically ordered.
    pub fn new(space: &SpaceRef, blocks: Vec<Vec<usize>>) -> Result<Self> {
        check_partition(space.points.len(), &blocks)?;
        let mut blocks = blocks;
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![0; space.points.len()];
        for (i, b) in blocks.iter().enumerate() {
            for &p in b {
                block_of[p] = i;
            }
        }
        Ok(Partition {
            space: space.clone(),
            blocks,
            block_of,
        })
    }

    pub fn from_labels<S: AsRef<str>>(space: &SpaceRef, blocks: &[Vec<S>]) -> Result<Self> {
        let idx = labels_to_indices(&space.points, blocks)?;
        Self::new(space, idx)
    }

    /// A partition whose blocks are unions of the given atom groups.
    pub fn from_atom_groups(space: &SpaceRef, groups: &[Vec<usize>]) -> Result<Self> {
        let blocks = groups
            .iter()
            .map(|g| g.iter().flat_map(|&a| space.atoms[a].iter().copied()).collect())
            .collect();
        Self::new(space, blocks)
    }

    /// The partition into atoms.
    pub fn atoms_of(space: &SpaceRef) -> Self {
        Self::new(space, space.atoms.clone()).expect("atoms partition the carrier")
    }

    /// The one-block partition.
    pub fn indiscrete(space: &SpaceRef) -> Self {
        Self::new(space, vec![(0..space.points.len()).collect()]).expect("one block")
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of_point(&self, point: usize) -> usize {
        self.block_of[point]
    }

    pub fn block_labels(&self) -> Vec<Vec<&str>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&p| self.space.points[p].as_str()).collect())
            .collect()
    }

    /// True when every block is a union of atoms of the underlying space.
    pub fn refines_sigma(&self) -> bool {
        self.space
            .atoms
            .iter()
            .all(|a| a.iter().all(|&p| self.block_of[p] == self.block_of[a[0]]))
    }

    /// Block index of each atom; fails if some atom straddles two blocks.
    pub fn atom_blocks(&self) -> Result<Vec<usize>> {
        self.space
            .atoms
            .iter()
            .map(|a| {
                let b = self.block_of[a[0]];
                match a.iter().find(|&&p| self.block_of[p] != b) {
                    Some(&p) => Err(Error::NotMeasurable(self.space.points[p].clone())),
                    None => Ok(b),
                }
            })
            .collect()
    }

    /// The block as a measurable set (requires [`Self::refines_sigma`]).
    pub fn block_set(&self, block: usize) -> Result<MeasurableSet> {
        MeasurableSet::from_points(&self.space, self.blocks[block].iter().copied())
    }

    /// Space whose points are the blocks, labelled `[p,q,...]`, discrete σ-algebra.
    pub fn block_space(&self) -> SpaceRef {
        let labels = self
            .block_labels()
            .into_iter()
            .map(|b| format!("[{}]", b.join(",")))
            .collect();
        Arc::new(FiniteMeasurableSpace::discrete(labels).expect("blocks are nonempty and distinct"))
    }
}

/// The equivalence relation generated by `family`: two points are related
/// iff every set of the family contains both or neither.
pub fn generated_equivalence(points: Vec<String>, family: &[Vec<usize>]) -> Result<Partition> {
    check_labels(&points)?;
    let n = points.len();
    let mut signature = vec![Vec::with_capacity(family.len()); n];
    for c in family {
        let mut member = vec![false; n];
        for &p in c {
            if p >= n {
                return Err(Error::UnknownPoint(format!("#{p}")));
            }
            member[p] = true;
        }
        for (p, sig) in signature.iter_mut().enumerate() {
            sig.push(member[p]);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut first_with: HashMap<Vec<bool>, usize> = HashMap::new();
    for (p, sig) in signature.into_iter().enumerate() {
        let rep = *first_with.entry(sig).or_insert(p);
        groups.entry(rep).or_default().push(p);
    }
    let space = Arc::new(FiniteMeasurableSpace::discrete(points)?);
    Partition::new(&space, groups.into_values().collect())
}

/// Outcome of [`check_pi_system_uniqueness`].
#[derive(Debug, Clone)]
pub struct PiSystemCheck {
    /// μ and ν agree on every measurable set.
    pub agree: bool,
    /// μ and ν agree on every generator set.
    pub agree_on_generator: bool,
    /// σ(generator) is the whole σ-algebra of the space.
    pub generates: bool,
    /// An atom on which μ and ν differ, when they do.
    pub witness: Option<MeasurableSet>,
}

/// Compares two measures everywhere after validating that `generator` is an
/// ∩-closed family containing the carrier.
///
/// When the generator also generates the σ-algebra, agreement on it forces
/// agreement everywhere; `generates` and `agree_on_generator` expose both
/// hypotheses so callers can check the implication.
pub fn check_pi_system_uniqueness(
    space: &SpaceRef,
    mu: &Measure,
    nu: &Measure,
    generator: &[MeasurableSet],
) -> Result<PiSystemCheck> {
    same_space(space, mu.space(), "first measure lives on another space")?;
    same_space(space, nu.space(), "second measure lives on another space")?;
    for g in generator {
        same_space(space, g.space(), "generator set lives on another space")?;
    }
    if !generator.iter().any(|g| g.is_full()) {
        return Err(Error::GeneratorNotPiSystem("the carrier is missing".into()));
    }
    let members: HashSet<&[bool]> = generator.iter().map(|g| g.mask()).collect();
    for a in generator {
        for b in generator {
            let meet = a.intersection(b)?;
            if !members.contains(meet.mask()) {
                return Err(Error::GeneratorNotPiSystem(format!(
                    "{a:?} ∩ {b:?} = {meet:?} is not in the family"
                )));
            }
        }
    }
    let agree_on_generator = generator.iter().all(|g| mu.eval(g).ok() == nu.eval(g).ok());
    let witness = (0..space.atom_count())
        .find(|&i| mu.weights()[i] != nu.weights()[i])
        .map(|i| MeasurableSet::from_atoms(space, [i]).expect("atom in range"));
    let sigma = FiniteMeasurableSpace::sigma_from_generator(
        space.points().to_vec(),
        &generator.iter().map(|g| g.points()).collect::<Vec<_>>(),
    )?;
    Ok(PiSystemCheck {
        agree: witness.is_none(),
        agree_on_generator,
        generates: sigma.atoms == space.atoms,
        witness,
    })
}
