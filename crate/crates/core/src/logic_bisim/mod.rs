//! Probabilistic modal logic over endokernels, logical equivalence,
//! quotients by congruences, and bisimulation mediators built from couplings.

mod coupling;
mod formula;
mod mediate;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_traits::{One, Zero};

pub use coupling::{solve_coupling, CouplingOutcome, CouplingProblem, HallViolation};
pub use formula::Formula;
pub use mediate::{mediate, mediate_endo, BlockIso, Congruence, Mediation};

use crate::arith::Q;
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::spaces::{check_cap, FiniteMeasurableSpace, MeasurableSet, Partition, SpaceRef};

fn require_endo(m: &Kernel) -> Result<()> {
    if m.is_endo() {
        Ok(())
    } else {
        Err(Error::SpaceMismatch("expected an endokernel".into()))
    }
}

fn mass_on(m: &Kernel, atom: usize, mask: &[bool]) -> Q {
    m.row(atom)
        .weights()
        .iter()
        .zip(mask)
        .filter(|(_, &inside)| inside)
        .map(|(w, _)| w)
        .sum()
}

fn validity_mask(m: &Kernel, phi: &Formula) -> Vec<bool> {
    let n = m.domain().atom_count();
    match phi {
        Formula::Top => vec![true; n],
        Formula::And(a, b) => {
            let (a, b) = (validity_mask(m, a), validity_mask(m, b));
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        Formula::Dia(q, inner) => {
            let inner = validity_mask(m, inner);
            (0..n).map(|x| mass_on(m, x, &inner) >= *q).collect()
        }
    }
}

/// ⟦φ⟧ = {x : x ⊨ φ} for an endokernel.
pub fn validity_set(m: &Kernel, phi: &Formula) -> Result<MeasurableSet> {
    require_endo(m)?;
    let mask = validity_mask(m, phi);
    MeasurableSet::from_atoms(m.domain(), mask.iter().enumerate().filter(|(_, &b)| b).map(|(a, _)| a))
}

/// Coarsest stable refinement of `initial` (block id per atom): two atoms
/// stay together iff they send equal mass to every current block.
pub(crate) fn refine(rows: &[Vec<Q>], initial: Vec<usize>) -> Vec<usize> {
    let mut block = initial;
    let mut count = block.iter().collect::<HashSet<_>>().len();
    loop {
        let mut ids: HashMap<(usize, Vec<Q>), usize> = HashMap::new();
        let next: Vec<usize> = rows
            .iter()
            .enumerate()
            .map(|(x, row)| {
                let mut masses = vec![Q::zero(); count];
                for (y, w) in row.iter().enumerate() {
                    masses[block[y]] += w;
                }
                let fresh = ids.len();
                *ids.entry((block[x], masses)).or_insert(fresh)
            })
            .collect();
        let next_count = ids.len();
        block = next;
        if next_count == count {
            return block;
        }
        count = next_count;
    }
}

fn renumber(blocks: &[usize]) -> Vec<usize> {
    let mut ids = HashMap::new();
    blocks
        .iter()
        .map(|b| {
            let fresh = ids.len();
            *ids.entry(*b).or_insert(fresh)
        })
        .collect()
}

fn groups_of(blocks: &[usize]) -> Vec<Vec<usize>> {
    let blocks = renumber(blocks);
    let count = blocks.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); count];
    for (a, &b) in blocks.iter().enumerate() {
        groups[b].push(a);
    }
    groups
}

fn weight_rows(m: &Kernel) -> Vec<Vec<Q>> {
    m.rows().iter().map(|r| r.weights().to_vec()).collect()
}

/// x ≡ y iff x and y satisfy the same formulas.
///
/// Computed by mass-signature refinement, which agrees with the formula
/// semantics for sub-Markov kernels. For kernels with rows heavier than one
/// the refinement may separate atoms that no threshold in [0, 1] can.
pub fn logical_equivalence(m: &Kernel) -> Result<Partition> {
    require_endo(m)?;
    let blocks = refine(&weight_rows(m), vec![0; m.domain().atom_count()]);
    Partition::from_atom_groups(m.domain(), &groups_of(&blocks))
}

/// Like [`logical_equivalence`] but starting from `seed`, e.g. atomic labels.
pub fn logical_equivalence_seeded(m: &Kernel, seed: &Partition) -> Result<Partition> {
    require_endo(m)?;
    crate::spaces::same_space(seed.space(), m.domain(), "seed partition is on another space")?;
    let initial = seed.atom_blocks()?;
    let blocks = refine(&weight_rows(m), initial);
    Partition::from_atom_groups(m.domain(), &groups_of(&blocks))
}

/// σ-algebra generated by the validity sets of formulas of modal depth at
/// most `max_depth`, stopping early once the family is stable.
///
/// Each level applies ◇_q to the previous ∩-closed family, with q running
/// over the row masses in [0, 1] and 1 itself; other thresholds only
/// reproduce these sets or ∅.
pub fn invariant_sigma_algebra(m: &Kernel, max_depth: usize) -> Result<SpaceRef> {
    require_endo(m)?;
    let n = m.domain().atom_count();
    check_cap("invariant σ-algebra", n)?;
    let full = vec![true; n];
    let mut family: Vec<Vec<bool>> = vec![full.clone()];
    for _ in 0..max_depth {
        let mut next: HashSet<Vec<bool>> = HashSet::new();
        next.insert(full.clone());
        for s in &family {
            let masses: Vec<Q> = (0..n).map(|x| mass_on(m, x, s)).collect();
            let mut thresholds: Vec<Q> = masses.iter().filter(|q| **q <= Q::one()).cloned().collect();
            thresholds.push(Q::one());
            for t in thresholds {
                next.insert(masses.iter().map(|w| *w >= t).collect());
            }
        }
        let closed = intersection_closure(next);
        let stable = closed.len() == family.len();
        family = closed;
        if stable {
            break;
        }
    }
    let space = m.domain();
    let generator: Vec<Vec<usize>> = family
        .iter()
        .map(|mask| {
            mask.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .flat_map(|(a, _)| space.atoms()[a].iter().copied())
                .collect()
        })
        .collect();
    Ok(Arc::new(FiniteMeasurableSpace::sigma_from_generator(
        space.points().to_vec(),
        &generator,
    )?))
}

fn intersection_closure(sets: HashSet<Vec<bool>>) -> Vec<Vec<bool>> {
    let mut all = sets;
    let mut frontier: Vec<Vec<bool>> = all.iter().cloned().collect();
    while !frontier.is_empty() {
        let base: Vec<Vec<bool>> = all.iter().cloned().collect();
        let mut fresh = Vec::new();
        for a in &frontier {
            for b in &base {
                let c: Vec<bool> = a.iter().zip(b).map(|(x, y)| *x && *y).collect();
                if !all.contains(&c) {
                    all.insert(c.clone());
                    fresh.push(c);
                }
            }
        }
        frontier = fresh;
    }
    let mut out: Vec<Vec<bool>> = all.into_iter().collect();
    out.sort();
    out
}

/// K_F on the block spaces: K_F(b)(c) = K(x)(c) for any atom x in b.
pub(crate) fn quotient_between(k: &Kernel, domain: &Partition, codomain: &Partition) -> Result<Kernel> {
    crate::spaces::same_space(domain.space(), k.domain(), "domain partition is on another space")?;
    crate::spaces::same_space(codomain.space(), k.codomain(), "codomain partition is on another space")?;
    let dom_blocks = domain.atom_blocks()?;
    let cod_blocks = codomain.atom_blocks()?;
    let mut rows: Vec<Option<(usize, Vec<Q>)>> = vec![None; domain.len()];
    for (x, &b) in dom_blocks.iter().enumerate() {
        let mut masses = vec![Q::zero(); codomain.len()];
        for (y, w) in k.row(x).weights().iter().enumerate() {
            masses[cod_blocks[y]] += w;
        }
        match &rows[b] {
            None => rows[b] = Some((x, masses)),
            Some((rep, expected)) => {
                if let Some(c) = (0..masses.len()).find(|&c| masses[c] != expected[c]) {
                    return Err(Error::NotACongruence {
                        left: k.domain().atom_label(*rep).to_string(),
                        right: k.domain().atom_label(x).to_string(),
                        block: c,
                    });
                }
            }
        }
    }
    let dom_space = domain.block_space();
    let cod_space = if Arc::ptr_eq(domain.space(), codomain.space()) && domain == codomain {
        dom_space.clone()
    } else {
        codomain.block_space()
    };
    let rows = rows
        .into_iter()
        .map(|r| r.expect("every block holds an atom").1)
        .collect();
    Kernel::new(&dom_space, &cod_space, rows, k.kind())
}

/// Quotient of an endokernel by a congruence partition.
pub fn quotient_kernel(m: &Kernel, partition: &Partition) -> Result<Kernel> {
    require_endo(m)?;
    quotient_between(m, partition, partition)
}
