use serde::Serialize;

use super::{g_types, type_space, GTypes, TypeSpace};
use crate::construct::Triple;
use crate::error::{Error, Result};
use crate::fragment::KEmbedding;
use crate::structure::Embedding;
use crate::theory::AecMorphism;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeMap {
    pub map: Vec<usize>,
    pub surjective: bool,
    pub continuous: bool,
}

/// The square of Fact-style induced maps for `h': M'0 -> M'1` in `K'` and the
/// reduct `α: K' -> K`:
///
/// ```text
///   T'(M'1) --h̃'--> T'(M'0)
///     | α̃1            | α̃0
///   T(M1)   --h̃-->  T(M0)
/// ```
#[derive(Debug, Clone, Serialize)]
pub struct InducedSquare {
    pub lambda: usize,
    pub upper: TypeMap,
    pub lower: TypeMap,
    pub left: TypeMap,
    pub right: TypeMap,
    pub commutes: bool,
    /// A type over `M'1` on which the two paths differ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<usize>,
    pub source_ap: bool,
    pub target_ap: bool,
    /// Surjectivity that amalgamation guarantees but that did not hold.
    pub violations: Vec<String>,
}

/// Pushes every triple of `from` through `f` and reads off the type in `to`,
/// failing if some class is not sent to a single class.
fn map_types(from: &GTypes, to: &GTypes, f: impl Fn(&Triple) -> Result<Triple>) -> Result<Vec<usize>> {
    let mut map = vec![usize::MAX; from.len()];
    for (i, t) in from.class.triples.iter().enumerate() {
        let image = f(t)?;
        let r = to
            .type_of_triple(&image)
            .ok_or_else(|| Error::Internal(format!("image triple {image:?} is not over the expected point")))?;
        let q = from.type_of[i];
        if map[q] == usize::MAX {
            map[q] = r;
        } else if map[q] != r {
            return Err(Error::Internal("induced map is not constant on a type".into()));
        }
    }
    Ok(map)
}

fn type_map(from: &TypeSpace, to: &TypeSpace, map: Vec<usize>) -> TypeMap {
    let mut hit = vec![false; to.len()];
    for &q in &map {
        hit[q] = true;
    }
    TypeMap { surjective: hit.iter().all(|&h| h), continuous: from.is_continuous_into(to, &map), map }
}

pub fn induced_type_maps(m: &AecMorphism, h: &KEmbedding, constants: &[String], lambda: usize) -> Result<InducedSquare> {
    let (big, small) = (&m.source, &m.target);
    if h.source >= big.len() || h.target >= big.len() || !big.k_arrows(h.source, h.target).iter().any(|a| a == h) {
        return Err(Error::InvalidMorphism("the arrow is not in the source fragment's category".into()));
    }
    let upper0 = big.structure(h.source);
    let upper1 = big.structure(h.target);
    let lower0 = upper0.reduct(&m.alpha)?;
    let lower1 = upper1.reduct(&m.alpha)?;

    let s_upper1 = type_space(g_types(big, upper1, constants)?, lambda)?;
    let s_upper0 = type_space(g_types(big, upper0, constants)?, lambda)?;
    let s_lower1 = type_space(g_types(small, &lower1, constants)?, lambda)?;
    let s_lower0 = type_space(g_types(small, &lower0, constants)?, lambda)?;

    let precompose = |t: &Triple| Ok(Triple { embedding: t.embedding.after(&h.map), ..t.clone() });
    let transport = |t: &Triple| {
        let (k, iso) = &m.images[t.target];
        let back: Embedding = iso.inverse();
        Ok(Triple {
            target: *k,
            embedding: back.after(&t.embedding),
            assignment: t.assignment.iter().map(|&a| back.apply(a)).collect(),
        })
    };
    let upper = map_types(&s_upper1.types, &s_upper0.types, precompose)?;
    let lower = map_types(&s_lower1.types, &s_lower0.types, precompose)?;
    let left = map_types(&s_upper1.types, &s_lower1.types, transport)?;
    let right = map_types(&s_upper0.types, &s_lower0.types, transport)?;

    let witness = (0..upper.len()).find(|&q| right[upper[q]] != lower[left[q]]);
    let upper = type_map(&s_upper1, &s_upper0, upper);
    let lower = type_map(&s_lower1, &s_lower0, lower);
    let left = type_map(&s_upper1, &s_lower1, left);
    let right = type_map(&s_upper0, &s_lower0, right);

    let source_ap = crate::axioms::check_ap(big).holds;
    let target_ap = crate::axioms::check_ap(small).holds;
    let mut violations = Vec::new();
    if source_ap && !upper.surjective {
        violations.push("the source fragment amalgamates but restriction along h' is not onto".to_string());
    }
    if target_ap && !lower.surjective {
        violations.push("the target fragment amalgamates but restriction along h is not onto".to_string());
    }
    Ok(InducedSquare {
        lambda,
        upper,
        lower,
        left,
        right,
        commutes: witness.is_none(),
        witness,
        source_ap,
        target_ap,
        violations,
    })
}
