use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fragment::AecFragment;
use crate::lang::{expand_with_constants, Language};
use crate::structure::{tuples_over, Embedding, FinStructure};

/// Constant naming element `m` of the base point.
pub fn base_constant(m: usize) -> String {
    format!("m#{m}")
}

/// Constant naming index `i` of the pointing sequence.
pub fn index_constant(i: &str) -> String {
    format!("i#{i}")
}

/// `(N, f, ā)`: a listed structure, a K-embedding of the base point into it
/// and an assignment of the index set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Triple {
    pub target: usize,
    pub embedding: Embedding,
    pub assignment: Vec<usize>,
}

/// `K_{M,I}` over `L(M ∪ I)`. Structure `t` of `fragment` is the expansion
/// of `triples[t]`.
#[derive(Debug, Clone)]
pub struct PointedClass {
    pub base: Arc<AecFragment>,
    pub point: FinStructure,
    pub index_set: Vec<String>,
    pub expanded: Arc<Language>,
    pub triples: Vec<Triple>,
    pub fragment: Arc<AecFragment>,
    lookup: HashMap<Triple, usize>,
}

impl PointedClass {
    pub fn find(&self, t: &Triple) -> Option<usize> {
        self.lookup.get(t).copied()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Reads a triple back off an arbitrary `L(M ∪ I)`-structure over a listed universe.
    pub fn decode(&self, target: usize, s: &FinStructure) -> Triple {
        Triple {
            target,
            embedding: Embedding::new((0..self.point.size()).map(|m| s.constant(&base_constant(m))).collect()),
            assignment: self.index_set.iter().map(|i| s.constant(&index_constant(i))).collect(),
        }
    }
}

/// Enumerates every triple over `point`, which must be a member of `base`
/// up to isomorphism. Strong subsets of a triple are those of its listed structure.
pub fn pointed_class(base: &Arc<AecFragment>, point: &FinStructure, index_set: &[String]) -> Result<PointedClass> {
    if base.member_up_to_iso(point).is_none() {
        return Err(Error::NotAMember("the base point is not a member of the fragment".into()));
    }
    let mut names: Vec<String> = (0..point.size()).map(base_constant).collect();
    names.extend(index_set.iter().map(|i| index_constant(i)));
    let (expanded, _) = expand_with_constants(base.lang(), names.iter().map(String::as_str))?;
    let expanded = Arc::new(expanded);

    let mut triples = Vec::new();
    let mut structures = Vec::new();
    let mut labels = Vec::new();
    for n in 0..base.len() {
        let size = base.structure(n).size();
        let elems: Vec<usize> = (0..size).collect();
        for f in base.k_embeddings_from(point, n, None) {
            for a in tuples_over(&elems, index_set.len()) {
                let values: BTreeMap<String, usize> =
                    names.iter().cloned().zip(f.map.iter().chain(&a).copied()).collect();
                structures.push(base.structure(n).expand(&expanded, &values)?);
                labels.push(format!("t{}", triples.len()));
                triples.push(Triple { target: n, embedding: f.clone(), assignment: a });
            }
        }
    }
    let fragment = AecFragment::from_strong_predicate(expanded.clone(), structures, labels, |t, x| {
        base.is_strong_subset(triples[t].target, x)
    })?;
    let lookup = triples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    Ok(PointedClass {
        base: base.clone(),
        point: point.clone(),
        index_set: index_set.to_vec(),
        expanded,
        triples,
        fragment: Arc::new(fragment),
        lookup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::terminal_fragment;

    #[test]
    fn empty_index_set_counts_arrows() {
        let k = Arc::new(terminal_fragment(3));
        let m = FinStructure::bare(2);
        let p = pointed_class(&k, &m, &[]).unwrap();
        let expected: usize = (0..3).map(|n| k.k_embeddings_from(&m, n, None).len()).sum();
        assert_eq!(p.len(), expected);
        assert_eq!(p.len(), 2 + 6);
        assert!(p.fragment.validate().all_pass);
    }

    #[test]
    fn one_point_with_one_index() {
        let k = Arc::new(terminal_fragment(2));
        let p = pointed_class(&k, &FinStructure::bare(1), &["i".to_string()]).unwrap();
        // N = {0}: f = 0, ā = 0. N = {0,1}: f ∈ {0,1}, ā ∈ {0,1}.
        assert_eq!(p.len(), 1 + 2 * 2);
        let r = p.fragment.validate();
        assert!(r.all_pass);
        assert!(r.ls_number.unwrap() <= k.validate().ls_number.unwrap() + 1 + 1);
        let t = &p.triples[3];
        assert_eq!(p.find(t), Some(3));
        assert_eq!(&p.decode(t.target, p.fragment.structure(3)), t);
    }

    #[test]
    fn point_must_be_a_member() {
        let k = Arc::new(terminal_fragment(2));
        assert!(matches!(pointed_class(&k, &FinStructure::bare(3), &[]), Err(Error::NotAMember(_))));
    }
}
