//! Galois types over a member `M` as components of the pointed class `K_{M,I}`,
//! restriction along strong substructures, the λ-topology and the maps
//! between type spaces induced by arrows and reducts.

mod induced;
mod topology;

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use crate::construct::{pointed_class, PointedClass, Triple};
use crate::elemset::ElemSet;
use crate::error::{Error, Result};
use crate::fragment::AecFragment;
use crate::structure::{Embedding, FinStructure};
use crate::theory::{connection_partition, TheoryPartition};
use crate::unionfind::UnionFind;

pub use induced::{induced_type_maps, InducedSquare, TypeMap};
pub use topology::{canonical_map, type_space, BasisOpen, CanonicalMapReport, TypeSpace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GType {
    /// Component id in the pointed fragment: the least triple index of the class.
    pub component: usize,
    pub representative: Triple,
    pub members: Vec<usize>,
}

/// `g-T(M, I)` together with the pointed class it was computed from.
#[derive(Debug, Clone)]
pub struct GTypes {
    pub class: PointedClass,
    pub partition: TheoryPartition,
    pub types: Vec<GType>,
    /// Type index of each triple.
    pub type_of: Vec<usize>,
}

impl GTypes {
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn point(&self) -> &FinStructure {
        &self.class.point
    }

    pub fn base(&self) -> &Arc<AecFragment> {
        &self.class.base
    }

    /// Type of an arbitrary triple, if it is one of the enumerated ones.
    pub fn type_of_triple(&self, t: &Triple) -> Option<usize> {
        self.class.find(t).map(|i| self.type_of[i])
    }
}

/// Joins two triples when some arrow `g: N0 -> N1` of `cat(K)` makes both
/// triangles commute: `g∘f0 = f1` and `g∘ā0 = ā1`.
pub fn zigzag_partition(class: &PointedClass) -> TheoryPartition {
    let base = &class.base;
    let n = base.len();
    let arrows: Vec<Vec<Vec<Embedding>>> =
        crate::par::map_range(0..n, |a| (0..n).map(|b| base.k_arrows(a, b).into_iter().map(|k| k.map).collect()).collect());
    let mut uf = UnionFind::new(class.len());
    for (i, t) in class.triples.iter().enumerate() {
        for (target, maps) in arrows[t.target].iter().enumerate() {
            for g in maps {
                let pushed = push(t, target, g);
                if let Some(j) = class.find(&pushed) {
                    uf.union(i, j);
                }
            }
        }
    }
    TheoryPartition::from_labels(uf.min_labels())
}

fn push(t: &Triple, target: usize, g: &Embedding) -> Triple {
    Triple { target, embedding: g.after(&t.embedding), assignment: t.assignment.iter().map(|&a| g.apply(a)).collect() }
}

/// All triples reachable from `t` along one arrow. Two triples have a common
/// extension exactly when these sets meet.
pub fn one_step_extensions(class: &PointedClass, t: usize) -> HashSet<Triple> {
    let base = &class.base;
    let t = &class.triples[t];
    (0..base.len())
        .flat_map(|p| base.k_arrows(t.target, p).into_iter().map(move |g| push(t, p, &g.map)))
        .collect()
}

/// The types of `point` with index set `index_set`, computed as the
/// maximal theories of `K_{M,I}` and checked against direct zigzags of triples.
pub fn g_types(base: &Arc<AecFragment>, point: &FinStructure, index_set: &[String]) -> Result<GTypes> {
    let class = pointed_class(base, point, index_set)?;
    let partition = connection_partition(&class.fragment);
    let zigzags = zigzag_partition(&class);
    if partition != zigzags {
        return Err(Error::Internal(
            "maximal theories of the pointed class disagree with zigzag classes of triples".into(),
        ));
    }
    let mut type_of = vec![0; class.len()];
    let types = partition
        .components
        .iter()
        .enumerate()
        .map(|(k, members)| {
            for &m in members {
                type_of[m] = k;
            }
            GType { component: members[0], representative: class.triples[members[0]].clone(), members: members.clone() }
        })
        .collect();
    Ok(GTypes { class, partition, types, type_of })
}

/// `q ↦ q↾N` from the types over `M` to the types over `N = M|X`.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub subset: ElemSet,
    pub map: Vec<usize>,
}

impl Restriction {
    pub fn apply(&self, q: usize) -> usize {
        self.map[q]
    }
}

/// Restriction into already computed types over `M|X`. Every triple is
/// restricted, so a class that splits is reported instead of hidden.
pub fn restriction_into(from: &GTypes, subset: ElemSet, to: &GTypes) -> Result<Restriction> {
    let m = from.point();
    if !from.base().is_strong_in(m, subset) {
        return Err(Error::NotStrongSubstructure(format!("{subset:?} is not strong in the base point")));
    }
    let (sub, renaming) = m.induced(subset)?;
    if &sub != to.point() {
        return Err(Error::Internal("target types are over a different substructure".into()));
    }
    let mut map = vec![usize::MAX; from.len()];
    for (i, t) in from.class.triples.iter().enumerate() {
        let restricted = Triple {
            target: t.target,
            embedding: Embedding::new(renaming.iter().map(|&y| t.embedding.apply(y)).collect()),
            assignment: t.assignment.clone(),
        };
        let r = to
            .type_of_triple(&restricted)
            .ok_or_else(|| Error::Internal("restricted triple is missing from the smaller pointed class".into()))?;
        let q = from.type_of[i];
        if map[q] == usize::MAX {
            map[q] = r;
        } else if map[q] != r {
            return Err(Error::Internal("restriction is not constant on a type".into()));
        }
    }
    Ok(Restriction { subset, map })
}

/// Types over `M|X` and the restriction map onto them.
pub fn restriction(from: &GTypes, subset: ElemSet) -> Result<(GTypes, Restriction)> {
    if !from.base().is_strong_in(from.point(), subset) {
        return Err(Error::NotStrongSubstructure(format!("{subset:?} is not strong in the base point")));
    }
    let (sub, _) = from.point().induced(subset)?;
    let to = g_types(from.base(), &sub, &from.class.index_set)?;
    let r = restriction_into(from, subset, &to)?;
    Ok((to, r))
}
