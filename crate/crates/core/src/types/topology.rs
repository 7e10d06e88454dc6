use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{g_types, restriction_into, GTypes, Restriction};
use crate::elemset::ElemSet;
use crate::error::{Error, Result};
use crate::par;
use crate::structure::FinStructure;

pub type PointSet = BTreeSet<usize>;

/// Explicit opens are only listed while there are at most this many.
const OPEN_LISTING_CAP: usize = 4096;

/// `U_{p,N} = {q : q↾N = p}` for `N = M|subset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisOpen {
    pub subset: ElemSet,
    pub small_type: usize,
    pub points: PointSet,
}

/// A small strong substructure `M|X` with its types and the restriction onto them.
#[derive(Debug, Clone)]
pub struct SmallPiece {
    pub subset: ElemSet,
    pub types: GTypes,
    pub restriction: Restriction,
}

/// `g-T(M, I)` with the λ-topology. A finite topology is determined by the
/// least open set around each point, which is what is stored; explicit opens
/// are listed when there are few enough.
#[derive(Debug, Clone)]
pub struct TypeSpace {
    pub lambda: usize,
    pub types: GTypes,
    pub pieces: Vec<SmallPiece>,
    pub basis: Vec<BasisOpen>,
    pub neighbourhoods: Vec<PointSet>,
    pub opens: Option<Vec<PointSet>>,
}

/// Strong subsets of the point of size at most λ, found through explicit
/// base-pair witnesses, each with its types and restriction map.
fn small_pieces(types: &GTypes, lambda: usize) -> Result<Vec<SmallPiece>> {
    let m = types.point();
    let base = types.base();
    let subsets: Vec<ElemSet> = ElemSet::all_subsets(m.size())
        .filter(|x| !x.is_empty() && x.len() <= lambda && m.closure_violation(*x).is_none())
        .filter(|x| base.closed_below(m, *x).is_some())
        .collect();
    // distinct subsets often induce the same structure; compute its types once
    let induced: Vec<FinStructure> = subsets.iter().map(|&x| m.induced(x).map(|(s, _)| s)).collect::<Result<_>>()?;
    let distinct: Vec<FinStructure> = induced.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let computed = par::map(&distinct, |sub| g_types(base, sub, &types.class.index_set));
    let mut by_structure = BTreeMap::new();
    for (sub, t) in distinct.into_iter().zip(computed) {
        by_structure.insert(sub, t?);
    }
    subsets
        .iter()
        .zip(&induced)
        .map(|(&x, sub)| {
            let small = by_structure[sub].clone();
            let restriction = restriction_into(types, x, &small)?;
            Ok(SmallPiece { subset: x, types: small, restriction })
        })
        .collect()
}

pub fn type_space(types: GTypes, lambda: usize) -> Result<TypeSpace> {
    let pieces = small_pieces(&types, lambda)?;
    let n = types.len();
    let mut basis = Vec::new();
    for piece in &pieces {
        for p in 0..piece.types.len() {
            let points: PointSet = (0..n).filter(|&q| piece.restriction.apply(q) == p).collect();
            basis.push(BasisOpen { subset: piece.subset, small_type: p, points });
        }
    }
    let neighbourhoods: Vec<PointSet> = (0..n)
        .map(|p| {
            basis
                .iter()
                .filter(|u| u.points.contains(&p))
                .fold((0..n).collect::<PointSet>(), |acc, u| acc.intersection(&u.points).copied().collect())
        })
        .collect();
    let opens = list_opens(&neighbourhoods);
    Ok(TypeSpace { lambda, types, pieces, basis, neighbourhoods, opens })
}

/// All unions of least neighbourhoods, or `None` past the listing cap.
fn list_opens(neighbourhoods: &[PointSet]) -> Option<Vec<PointSet>> {
    let mut opens: BTreeSet<PointSet> = BTreeSet::from([PointSet::new()]);
    let mut frontier: Vec<PointSet> = vec![PointSet::new()];
    while let Some(u) = frontier.pop() {
        for nb in neighbourhoods {
            if nb.is_subset(&u) {
                continue;
            }
            let v: PointSet = u.union(nb).copied().collect();
            if opens.insert(v.clone()) {
                if opens.len() > OPEN_LISTING_CAP {
                    return None;
                }
                frontier.push(v);
            }
        }
    }
    Some(opens.into_iter().collect())
}

impl TypeSpace {
    pub fn len(&self) -> usize {
        self.neighbourhoods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbourhoods.is_empty()
    }

    pub fn is_open(&self, set: &PointSet) -> bool {
        set.iter().all(|&p| self.neighbourhoods[p].is_subset(set))
    }

    pub fn is_discrete(&self) -> bool {
        self.neighbourhoods.iter().enumerate().all(|(p, nb)| nb.len() == 1 && nb.contains(&p))
    }

    pub fn is_indiscrete(&self) -> bool {
        self.neighbourhoods.iter().all(|nb| nb.len() == self.len())
    }

    /// Every open set of `coarser` is open here.
    pub fn refines(&self, coarser: &TypeSpace) -> bool {
        coarser.neighbourhoods.iter().all(|nb| self.is_open(nb))
    }

    /// Number of open sets, when they were listed.
    pub fn open_count(&self) -> Option<usize> {
        self.opens.as_ref().map(Vec::len)
    }

    /// Least neighbourhoods of the coarsest topology making every restriction
    /// map to a (discrete) small type space continuous: points are
    /// indistinguishable iff all their restrictions agree.
    pub fn initial_neighbourhoods(&self) -> Vec<PointSet> {
        let signature = |q: usize| -> Vec<usize> { self.pieces.iter().map(|p| p.restriction.apply(q)).collect() };
        (0..self.len()).map(|p| (0..self.len()).filter(|&q| signature(q) == signature(p)).collect()).collect()
    }

    /// Whether a map into another finite space sends each least neighbourhood
    /// into the least neighbourhood of the image.
    pub fn is_continuous_into(&self, other: &TypeSpace, map: &[usize]) -> bool {
        (0..self.len()).all(|p| self.neighbourhoods[p].iter().all(|&q| other.neighbourhoods[map[p]].contains(&map[q])))
    }
}

/// Injectivity and surjectivity of `can: X^λ(M,I) -> lim X^λ(N,I)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalMapReport {
    pub lambda: usize,
    pub points: usize,
    /// The small substructures indexing the limit.
    pub index: Vec<ElemSet>,
    pub limit_size: usize,
    pub injective: bool,
    pub surjective: bool,
    pub continuous: bool,
    /// Pairs of distinct types with the same image.
    pub fibers: Vec<(usize, usize)>,
    /// Compatible families outside the image, as small type indices per index entry.
    pub misses: Vec<Vec<usize>>,
    pub images: Vec<Vec<usize>>,
}

/// Compatible families `(p_N)` over the small substructures, by backtracking.
/// Compatibility is demanded along every proper inclusion `N' ⊂ N` inside the index.
fn compatible_families(space: &TypeSpace, budget: usize) -> Result<Vec<Vec<usize>>> {
    let pieces = &space.pieces;
    let k = pieces.len();
    let mut links: BTreeMap<(usize, usize), Restriction> = BTreeMap::new();
    for a in 0..k {
        for b in 0..k {
            let (xa, xb) = (pieces[a].subset, pieces[b].subset);
            if a != b && xb.is_subset(xa) {
                let r = restriction_into(&pieces[a].types, xb.relative_to(xa), &pieces[b].types)?;
                links.insert((a, b), r);
            }
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut visited = 0usize;
    fn go(
        pieces: &[SmallPiece],
        links: &BTreeMap<(usize, usize), Restriction>,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        visited: &mut usize,
        budget: usize,
    ) -> Result<()> {
        let i = current.len();
        if i == pieces.len() {
            out.push(current.clone());
            return Ok(());
        }
        for p in 0..pieces[i].types.len() {
            *visited += 1;
            if *visited > budget {
                return Err(Error::SizeBoundExceeded { budget, what: "compatible families of small types".into() });
            }
            let ok = (0..i).all(|j| {
                let down = links.get(&(i, j)).is_none_or(|r| r.apply(p) == current[j]);
                let up = links.get(&(j, i)).is_none_or(|r| r.apply(current[j]) == p);
                down && up
            });
            if ok {
                current.push(p);
                go(pieces, links, current, out, visited, budget)?;
                current.pop();
            }
        }
        Ok(())
    }
    go(pieces, &links, &mut current, &mut out, &mut visited, budget)?;
    Ok(out)
}

pub fn canonical_map(space: &TypeSpace, budget: usize) -> Result<CanonicalMapReport> {
    let limit = compatible_families(space, budget)?;
    let images: Vec<Vec<usize>> =
        (0..space.len()).map(|q| space.pieces.iter().map(|p| p.restriction.apply(q)).collect()).collect();
    let mut fibers = Vec::new();
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            if images[a] == images[b] {
                fibers.push((a, b));
            }
        }
    }
    let hit: BTreeSet<&Vec<usize>> = images.iter().collect();
    if let Some(bad) = images.iter().find(|v| !limit.contains(v)) {
        return Err(Error::Internal(format!("image {bad:?} of a type is not a compatible family")));
    }
    let misses: Vec<Vec<usize>> = limit.iter().filter(|f| !hit.contains(f)).cloned().collect();
    // preimages of the sub-basic opens {family : family_N = p} are the basis opens
    let continuous = space.pieces.iter().enumerate().all(|(i, piece)| {
        (0..piece.types.len()).all(|p| space.is_open(&(0..space.len()).filter(|&q| images[q][i] == p).collect()))
    });
    Ok(CanonicalMapReport {
        lambda: space.lambda,
        points: space.len(),
        index: space.pieces.iter().map(|p| p.subset).collect(),
        limit_size: limit.len(),
        injective: fibers.is_empty(),
        surjective: misses.is_empty(),
        continuous,
        fibers,
        misses,
        images,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::construct::{terminal_fragment, DEFAULT_BUDGET};
    use crate::fragment::{AecFragment, StrongPair};
    use crate::lang::Language;
    use crate::structure::{Embedding, FinStructure};

    fn space(k: &Arc<AecFragment>, m: usize, idx: &[&str], lambda: usize) -> TypeSpace {
        let i: Vec<String> = idx.iter().map(|s| s.to_string()).collect();
        type_space(g_types(k, &FinStructure::bare(m), &i).unwrap(), lambda).unwrap()
    }

    #[test]
    fn small_point_is_discrete_and_lambda_zero_is_indiscrete() {
        let k = Arc::new(terminal_fragment(4));
        let d = space(&k, 2, &["i"], 2);
        assert!(d.is_discrete());
        let z = space(&k, 2, &["i"], 0);
        assert!(z.basis.is_empty() && z.is_indiscrete());
        assert_eq!(z.opens.as_ref().unwrap(), &vec![PointSet::new(), (0..z.len()).collect()]);
        let c = canonical_map(&z, DEFAULT_BUDGET).unwrap();
        assert_eq!(c.limit_size, 1);
        assert_eq!(c.injective, z.len() <= 1);
        assert!(d.refines(&z));
    }

    #[test]
    fn three_points_at_lambda_one() {
        // types of i over a 3-set inside sets of size ≤ 4: i = 0, 1, 2 or new
        let k = Arc::new(terminal_fragment(4));
        let s = space(&k, 3, &["i"], 1);
        assert_eq!(s.len(), 4);
        assert_eq!(s.pieces.len(), 3);
        // over each singleton {x}: "i = x" or "i ≠ x"
        assert_eq!(s.basis.len(), 6);
        // "i = x" is a singleton open; the new-element type is only cut out by
        // intersecting the three "i ≠ x" sets
        assert!(s.is_discrete());
        assert_eq!(s.open_count(), Some(16));
        assert_eq!(s.neighbourhoods, s.initial_neighbourhoods());
        let c = canonical_map(&s, DEFAULT_BUDGET).unwrap();
        assert!(c.injective && c.continuous);
        // the three singletons are pairwise incomparable, so nothing forces the
        // families to agree: "i = 0" and "i = 1" at once is a compatible family
        assert_eq!(c.limit_size, 8);
        assert!(!c.surjective);
        assert_eq!(c.misses.len(), 4);
        // at λ = 2 the pairs tie the singletons together
        let c2 = canonical_map(&space(&k, 3, &["i"], 2), DEFAULT_BUDGET).unwrap();
        assert_eq!(c2.limit_size, 4);
        assert!(c2.injective && c2.surjective);
    }

    #[test]
    fn lambda_refines() {
        let k = Arc::new(terminal_fragment(4));
        let spaces: Vec<TypeSpace> = (0..=2).map(|l| space(&k, 2, &["i", "j"], l)).collect();
        for w in spaces.windows(2) {
            assert!(w[1].refines(&w[0]));
        }
        assert!(spaces[2].is_discrete() && spaces[0].is_indiscrete());
        for s in &spaces {
            assert_eq!(s.neighbourhoods, s.initial_neighbourhoods());
            let c = canonical_map(s, DEFAULT_BUDGET).unwrap();
            assert!(c.continuous);
        }
    }

    #[test]
    fn whole_point_indexes_the_limit() {
        let k = Arc::new(terminal_fragment(3));
        let s = space(&k, 2, &["i"], 2);
        let c = canonical_map(&s, DEFAULT_BUDGET).unwrap();
        assert!(c.injective && c.surjective);
    }

    #[test]
    fn tameness_fails_when_small_pieces_cannot_see_types() {
        // Only the 2-set point and the 3-set are related; no singleton is strong
        // in the 2-set, so at λ = 1 the index is empty and the distinct types
        // of i collapse.
        let s = vec![FinStructure::bare(2), FinStructure::bare(3)];
        let pairs = vec![
            StrongPair { lower: 0, upper: 0, inclusion: Embedding::identity(2) },
            StrongPair { lower: 1, upper: 1, inclusion: Embedding::identity(3) },
            StrongPair { lower: 0, upper: 1, inclusion: Embedding::identity(2) },
        ];
        let k = Arc::new(AecFragment::unnamed(Language::empty(), s, pairs).unwrap());
        let sp = space(&k, 2, &["i"], 1);
        assert!(sp.pieces.is_empty());
        let c = canonical_map(&sp, DEFAULT_BUDGET).unwrap();
        assert!(!c.injective);
        assert_eq!(c.fibers[0], (0, 1));
    }
}
