//! The connection relation `≡_K`, closed theories, and morphisms of AECs
//! given by reducts along language morphisms.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::elemset::ElemSet;
use crate::fragment::AecFragment;
use crate::lang::LanguageMorphism;
use crate::par;
use crate::structure::Embedding;
use crate::unionfind::UnionFind;

/// `K/≡_K`. Component ids are the least structure index in the component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoryPartition {
    pub component_of: Vec<usize>,
    pub components: Vec<Vec<usize>>,
}

impl TheoryPartition {
    pub fn from_labels(component_of: Vec<usize>) -> Self {
        let mut ids: Vec<usize> = component_of.clone();
        ids.sort_unstable();
        ids.dedup();
        let components = ids
            .iter()
            .map(|&c| (0..component_of.len()).filter(|&i| component_of[i] == c).collect())
            .collect();
        Self { component_of, components }
    }

    pub fn equivalent(&self, a: usize, b: usize) -> bool {
        self.component_of[a] == self.component_of[b]
    }

    pub fn component_ids(&self) -> Vec<usize> {
        self.components.iter().map(|c| c[0]).collect()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Union-find over the edges `{a, b}` such that `cat(K)` has an arrow in
/// either direction. Pairs already joined are not searched again.
pub fn connection_partition(f: &AecFragment) -> TheoryPartition {
    let n = f.len();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        let root = uf.find(a);
        let open: Vec<usize> = (a + 1..n).filter(|&b| uf.find(b) != root).collect();
        let linked = par::map(&open, |&b| f.has_k_arrow(a, b) || f.has_k_arrow(b, a));
        for (&b, l) in open.iter().zip(linked) {
            if l {
                uf.union(a, b);
            }
        }
    }
    TheoryPartition::from_labels(uf.min_labels())
}

/// A union of `≡_K`-classes, given by component ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ClosedTheory {
    pub components: BTreeSet<usize>,
}

impl ClosedTheory {
    pub fn empty() -> Self {
        Self { components: BTreeSet::new() }
    }

    pub fn everything(p: &TheoryPartition) -> Self {
        Self { components: p.component_ids().into_iter().collect() }
    }

    /// The least closed theory containing the given structures.
    pub fn generated_by(p: &TheoryPartition, members: impl IntoIterator<Item = usize>) -> Self {
        Self { components: members.into_iter().map(|i| p.component_of[i]).collect() }
    }

    pub fn members(&self, p: &TheoryPartition) -> BTreeSet<usize> {
        (0..p.component_of.len()).filter(|&i| self.contains(p, i)).collect()
    }

    pub fn contains(&self, p: &TheoryPartition, structure: usize) -> bool {
        self.components.contains(&p.component_of[structure])
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// A nonempty subset of one `≡_K`-class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompleteTheory {
    pub component: usize,
    pub members: BTreeSet<usize>,
}

/// `Max(K)`: one theory per class.
pub fn max_theories(p: &TheoryPartition) -> Vec<ClosedTheory> {
    p.component_ids()
        .into_iter()
        .map(|c| ClosedTheory { components: [c].into() })
        .collect()
}

pub fn is_closed_theory(p: &TheoryPartition, subset: &BTreeSet<usize>) -> bool {
    subset.iter().all(|&i| p.components.iter().find(|c| c.contains(&i)).unwrap().iter().all(|j| subset.contains(j)))
}

/// Every closed theory, i.e. every union of components, ordered by bitmask of component positions.
pub fn all_closed_theories(p: &TheoryPartition) -> Vec<ClosedTheory> {
    let ids = p.component_ids();
    ElemSet::all_subsets(ids.len())
        .map(|s| ClosedTheory { components: s.iter().map(|i| ids[i]).collect() })
        .collect()
}

/// `α*↾ : K' → K` for `α: L → L'`, with `K'` over `L'` and `K` over `L`.
/// Each `K'` structure's reduct is recorded as a listed `K` index with an
/// isomorphism from that listed structure onto the reduct.
#[derive(Debug, Clone)]
pub struct AecMorphism {
    pub alpha: LanguageMorphism,
    pub source: Arc<AecFragment>,
    pub target: Arc<AecFragment>,
    pub images: Vec<(usize, Embedding)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorphismFailure {
    LanguageMismatch { detail: String },
    ReductNotMember { structure: usize },
    StrongPairNotPreserved { structure: usize, subset: ElemSet },
}

/// Verifies that reducts along `alpha` send members of `source` to members of
/// `target` and strong pairs to strong pairs.
pub fn check_morphism(
    alpha: &LanguageMorphism,
    source: &Arc<AecFragment>,
    target: &Arc<AecFragment>,
) -> Result<AecMorphism, MorphismFailure> {
    if alpha.target() != source.lang() || alpha.source() != target.lang() {
        return Err(MorphismFailure::LanguageMismatch {
            detail: "the source fragment must be over the morphism's target language and vice versa".into(),
        });
    }
    let per = par::map_range(0..source.len(), |i| -> Result<(usize, Embedding), MorphismFailure> {
        let s = source.structure(i);
        let reduct = s.reduct(alpha).expect("languages checked above");
        let (k, iso) = target
            .member_up_to_iso(&reduct)
            .ok_or(MorphismFailure::ReductNotMember { structure: i })?;
        let reduct_strong: BTreeSet<ElemSet> =
            target.strong_subsets(k).iter().map(|x| x.map(&iso.map)).collect();
        if let Some(&x) = source.strong_subsets(i).iter().find(|x| !reduct_strong.contains(x)) {
            return Err(MorphismFailure::StrongPairNotPreserved { structure: i, subset: x });
        }
        Ok((k, iso))
    });
    let images = per.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(AecMorphism { alpha: alpha.clone(), source: source.clone(), target: target.clone(), images })
}

impl AecMorphism {
    /// Listed target index of the reduct of source structure `i`.
    pub fn image_index(&self, i: usize) -> usize {
        self.images[i].0
    }

    /// Least closed theory of the target containing the reducts of `theory`'s members.
    pub fn induced_theory(
        &self,
        theory: &ClosedTheory,
        source_partition: &TheoryPartition,
        target_partition: &TheoryPartition,
    ) -> ClosedTheory {
        ClosedTheory::generated_by(
            target_partition,
            theory.members(source_partition).into_iter().map(|i| self.image_index(i)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductEquivalence {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(usize, usize)>,
}

/// Checks that `M' ≡ N'` in the source implies `M'^α ≡ N'^α` in the target,
/// against the given partitions.
pub fn check_reduct_equivalence(
    m: &AecMorphism,
    source_partition: &TheoryPartition,
    target_partition: &TheoryPartition,
) -> ReductEquivalence {
    for comp in &source_partition.components {
        for &a in comp {
            for &b in comp {
                if a < b && !target_partition.equivalent(m.image_index(a), m.image_index(b)) {
                    return ReductEquivalence { holds: false, witness: Some((a, b)) };
                }
            }
        }
    }
    ReductEquivalence { holds: true, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragment::StrongPair;
    use crate::lang::Language;
    use crate::structure::FinStructure;

    fn bare_fragment(sizes: &[usize], pairs: &[(usize, usize, &[usize])]) -> AecFragment {
        let s: Vec<FinStructure> = sizes.iter().map(|&n| FinStructure::bare(n)).collect();
        let mut ps: Vec<StrongPair> = s
            .iter()
            .enumerate()
            .map(|(i, x)| StrongPair { lower: i, upper: i, inclusion: Embedding::identity(x.size()) })
            .collect();
        ps.extend(pairs.iter().map(|(l, u, m)| StrongPair { lower: *l, upper: *u, inclusion: Embedding::new(m.to_vec()) }));
        AecFragment::unnamed(Language::empty(), s, ps).unwrap()
    }

    #[test]
    fn single_and_disconnected() {
        assert_eq!(connection_partition(&bare_fragment(&[1], &[])).len(), 1);
        let p = connection_partition(&bare_fragment(&[1, 2], &[]));
        assert_eq!(p.components, vec![vec![0], vec![1]]);
    }

    #[test]
    fn span_connects_its_legs() {
        // A = 2-set, B = 3-set, C = 1-set with arrows C -> A and C -> B only; D = 4-set apart
        let f = bare_fragment(&[2, 3, 1, 4], &[(2, 0, &[0]), (2, 1, &[1])]);
        let p = connection_partition(&f);
        assert!(!f.has_k_arrow(0, 1) && !f.has_k_arrow(1, 0));
        assert_eq!(p.components, vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(max_theories(&p).len(), 2);
        assert!(is_closed_theory(&p, &(0..4).collect()));
        assert!(!is_closed_theory(&p, &[0, 1].into()));
        assert!(is_closed_theory(&p, &[3].into()));
    }

    #[test]
    fn identity_morphism_and_induced_theories() {
        let f = Arc::new(bare_fragment(&[2, 3, 1, 4], &[(2, 0, &[0]), (2, 1, &[1])]));
        let id = LanguageMorphism::identity(f.lang());
        let m = check_morphism(&id, &f, &f).unwrap();
        let p = connection_partition(&f);
        assert!(check_reduct_equivalence(&m, &p, &p).holds);
        assert_eq!(m.induced_theory(&ClosedTheory::empty(), &p, &p), ClosedTheory::empty());
        let all = ClosedTheory::everything(&p);
        assert_eq!(m.induced_theory(&all, &p, &p), all);

        let broken = TheoryPartition::from_labels(vec![0, 1, 0, 3]);
        let r = check_reduct_equivalence(&m, &p, &broken);
        assert!(!r.holds);
        assert_eq!(r.witness, Some((0, 1)));
    }

    #[test]
    fn missing_reduct_is_reported() {
        let big = Arc::new(bare_fragment(&[1, 2], &[]));
        let small = Arc::new(bare_fragment(&[1], &[]));
        let id = LanguageMorphism::identity(&Language::empty());
        assert_eq!(
            check_morphism(&id, &big, &small).unwrap_err(),
            MorphismFailure::ReductNotMember { structure: 1 }
        );
    }
}
