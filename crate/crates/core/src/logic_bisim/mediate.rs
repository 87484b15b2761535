use std::sync::Arc;

use num_traits::Zero;

use super::coupling::{solve_coupling, CouplingOutcome, CouplingProblem};
use super::{quotient_between, refine};
use crate::arith::Q;
use crate::error::{Error, Result};
use crate::kernels::{pushforward, AtomMap, Kernel};
use crate::spaces::{product_space, MeasurableSet, Partition, SpaceRef};

/// A pair of partitions (on domain and codomain) that a kernel respects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    pub domain: Partition,
    pub codomain: Partition,
}

/// Matches block i on the left with block `domain[i]` (resp. `codomain[i]`) on the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockIso {
    pub domain: Vec<usize>,
    pub codomain: Vec<usize>,
}

/// The mediating kernel M: A ⇝ B with A ⊆ X₁ × X₂ and B ⊆ Y₁ × Y₂ the
/// graphs of the block matchings, together with the four projections.
#[derive(Debug, Clone)]
pub struct Mediation {
    pub source: SpaceRef,
    pub target: SpaceRef,
    pub kernel: Kernel,
    /// (X₁ atom, X₂ atom) behind each atom of A.
    pub source_pairs: Vec<(usize, usize)>,
    /// (Y₁ atom, Y₂ atom) behind each atom of B.
    pub target_pairs: Vec<(usize, usize)>,
    pub source_left: AtomMap,
    pub source_right: AtomMap,
    pub target_left: AtomMap,
    pub target_right: AtomMap,
    /// A pair of nontrivial events U₁, U₂ with ζ₁⁻¹U₁ = ζ₂⁻¹U₂ on B, when
    /// the codomain quotient has at least two blocks.
    pub common_event: Option<(MeasurableSet, MeasurableSet)>,
}

fn check_iso(map: &[usize], left: usize, right: usize, what: &str) -> Result<()> {
    if left != right || map.len() != left {
        return Err(Error::NotBisimilar(format!(
            "{what} quotients have {left} and {right} blocks"
        )));
    }
    let mut seen = vec![false; right];
    for &k in map {
        if k >= right || std::mem::replace(&mut seen[k], true) {
            return Err(Error::NotBisimilar(format!("{what} block matching is not a bijection")));
        }
    }
    Ok(())
}

/// Pairs (a₁, a₂) of atoms whose blocks correspond under `iso`.
fn matched_pairs(p1: &Partition, p2: &Partition, iso: &[usize]) -> Result<Vec<(usize, usize)>> {
    let (b1, b2) = (p1.atom_blocks()?, p2.atom_blocks()?);
    let mut pairs = Vec::new();
    for (a1, &k1) in b1.iter().enumerate() {
        for (a2, &k2) in b2.iter().enumerate() {
            if iso[k1] == k2 {
                pairs.push((a1, a2));
            }
        }
    }
    Ok(pairs)
}

fn graph_space(left: &SpaceRef, right: &SpaceRef, pairs: &[(usize, usize)]) -> Result<SpaceRef> {
    let prod = product_space(left, right);
    let atoms: Vec<usize> = pairs.iter().map(|&(i, j)| prod.pair_atom(i, j)).collect();
    Ok(Arc::new(prod.restrict(&atoms)?))
}

/// Builds the mediator for kernels K₁, K₂ whose quotients by the given
/// congruences agree under the block matching.
pub fn mediate(k1: &Kernel, k2: &Kernel, q1: &Congruence, q2: &Congruence, iso: &BlockIso) -> Result<Mediation> {
    let f1 = quotient_between(k1, &q1.domain, &q1.codomain)?;
    let f2 = quotient_between(k2, &q2.domain, &q2.codomain)?;
    check_iso(&iso.domain, q1.domain.len(), q2.domain.len(), "domain")?;
    check_iso(&iso.codomain, q1.codomain.len(), q2.codomain.len(), "codomain")?;
    for b in 0..q1.domain.len() {
        for c in 0..q1.codomain.len() {
            let (l, r) = (f1.row(b).weight(c), f2.row(iso.domain[b]).weight(iso.codomain[c]));
            if l != r {
                return Err(Error::NotBisimilar(format!(
                    "block {b} sends {l} to block {c} on the left but {r} on the right"
                )));
            }
        }
    }

    let source_pairs = matched_pairs(&q1.domain, &q2.domain, &iso.domain)?;
    let target_pairs = matched_pairs(&q1.codomain, &q2.codomain, &iso.codomain)?;
    let source = graph_space(k1.domain(), k2.domain(), &source_pairs)?;
    let target = graph_space(k1.codomain(), k2.codomain(), &target_pairs)?;
    let prod = product_space(k1.codomain(), k2.codomain());

    let mut rows = Vec::with_capacity(source_pairs.len());
    for &(a1, a2) in &source_pairs {
        let problem = CouplingProblem {
            left: k1.row(a1).clone(),
            right: k2.row(a2).clone(),
            support: target_pairs.clone(),
        };
        match solve_coupling(&problem)? {
            CouplingOutcome::Feasible(w) => rows.push(
                target_pairs
                    .iter()
                    .map(|&(i, j)| w.weight(prod.pair_atom(i, j)).clone())
                    .collect::<Vec<Q>>(),
            ),
            CouplingOutcome::Infeasible(h) => {
                return Err(Error::CouplingFailed(format!(
                    "({}, {}): {:?} outweighs its neighbours {:?} by {}",
                    k1.domain().atom_label(a1),
                    k2.domain().atom_label(a2),
                    h.rows,
                    h.neighbours,
                    h.excess
                )))
            }
        }
    }
    let kind = k1.kind().min(k2.kind());
    let kernel = Kernel::new(&source, &target, rows, kind)?;

    let proj = |space: &SpaceRef, onto: &SpaceRef, pairs: &[(usize, usize)], left: bool| {
        let image = pairs.iter().map(|&(i, j)| if left { i } else { j }).collect();
        AtomMap::from_atom_images(space, onto, image)
    };
    let source_left = proj(&source, k1.domain(), &source_pairs, true)?;
    let source_right = proj(&source, k2.domain(), &source_pairs, false)?;
    let target_left = proj(&target, k1.codomain(), &target_pairs, true)?;
    let target_right = proj(&target, k2.codomain(), &target_pairs, false)?;

    for (a, &(a1, a2)) in source_pairs.iter().enumerate() {
        let row = kernel.row(a);
        if pushforward(&target_left, row)? != *k1.row(a1) || pushforward(&target_right, row)? != *k2.row(a2) {
            return Err(Error::Internal(format!("mediator row {a} has the wrong marginals")));
        }
    }

    let common_event = if q1.codomain.len() >= 2 {
        let u1 = q1.codomain.block_set(0)?;
        let u2 = q2.codomain.block_set(iso.codomain[0])?;
        if target_left.preimage(&u1)? == target_right.preimage(&u2)? {
            Some((u1, u2))
        } else {
            return Err(Error::Internal("matched blocks have different preimages".into()));
        }
    } else {
        None
    };

    Ok(Mediation {
        source,
        target,
        kernel,
        source_pairs,
        target_pairs,
        source_left,
        source_right,
        target_left,
        target_right,
        common_event,
    })
}

/// Mediator for two endokernels, matching atoms by logical equivalence on
/// their disjoint union. Fails when some atom has no equivalent partner.
pub fn mediate_endo(k1: &Kernel, k2: &Kernel) -> Result<Mediation> {
    for k in [k1, k2] {
        if !k.is_endo() {
            return Err(Error::SpaceMismatch("expected an endokernel".into()));
        }
    }
    let (n1, n2) = (k1.domain().atom_count(), k2.domain().atom_count());
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(n1 + n2);
    for r in k1.rows() {
        let mut w = r.weights().to_vec();
        w.extend(std::iter::repeat_n(Q::zero(), n2));
        rows.push(w);
    }
    for r in k2.rows() {
        let mut w = vec![Q::zero(); n1];
        w.extend(r.weights().iter().cloned());
        rows.push(w);
    }
    let joint = refine(&rows, vec![0; n1 + n2]);
    let (j1, j2) = (&joint[..n1], &joint[n1..]);
    if let Some(a) = (0..n1).find(|a| !j2.contains(&j1[*a])) {
        return Err(Error::NotBisimilar(format!(
            "left atom `{}` has no equivalent on the right",
            k1.domain().atom_label(a)
        )));
    }
    if let Some(a) = (0..n2).find(|a| !j1.contains(&j2[*a])) {
        return Err(Error::NotBisimilar(format!(
            "right atom `{}` has no equivalent on the left",
            k2.domain().atom_label(a)
        )));
    }
    let partition = |space: &SpaceRef, ids: &[usize]| {
        let mut keys: Vec<usize> = ids.to_vec();
        keys.sort_unstable();
        keys.dedup();
        let groups: Vec<Vec<usize>> = keys
            .iter()
            .map(|k| (0..ids.len()).filter(|&a| ids[a] == *k).collect())
            .collect();
        Partition::from_atom_groups(space, &groups)
    };
    let p1 = partition(k1.domain(), j1)?;
    let p2 = partition(k2.domain(), j2)?;
    let b1 = p1.atom_blocks()?;
    let b2 = p2.atom_blocks()?;
    let map: Vec<usize> = (0..p1.len())
        .map(|blk| {
            let a1 = (0..n1).find(|&a| b1[a] == blk).expect("blocks are nonempty");
            let a2 = (0..n2).find(|&a| j2[a] == j1[a1]).expect("checked above");
            b2[a2]
        })
        .collect();
    let q1 = Congruence {
        domain: p1.clone(),
        codomain: p1,
    };
    let q2 = Congruence {
        domain: p2.clone(),
        codomain: p2,
    };
    let iso = BlockIso {
        domain: map.clone(),
        codomain: map,
    };
    mediate(k1, k2, &q1, &q2, &iso)
}
