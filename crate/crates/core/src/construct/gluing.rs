use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fragment::AecFragment;
use crate::lang::LanguageMorphism;
use crate::structure::{find_embeddings, is_embedding, Embedding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GluedObject {
    pub fragment: usize,
    pub structure: usize,
}

/// `(h, φ): (M, K) -> (M', K')` with `φ: L -> L'` and `h: M -> M'^φ` in `cat(K)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GluedArrow {
    pub source: GluedObject,
    pub target: GluedObject,
    #[serde(skip)]
    pub phi: LanguageMorphism,
    pub map: Embedding,
}

/// The gluing category restricted to the objects of finitely many fragments.
/// Arrows are never enumerated up front; each one is checked when built.
#[derive(Debug, Clone)]
pub struct Gluing {
    pub fragments: Vec<Arc<AecFragment>>,
}

impl Gluing {
    pub fn new(fragments: Vec<Arc<AecFragment>>) -> Self {
        Self { fragments }
    }

    fn get(&self, o: GluedObject) -> Result<(&Arc<AecFragment>, usize)> {
        let f = self
            .fragments
            .get(o.fragment)
            .ok_or_else(|| Error::ObjectMismatch(format!("no fragment {}", o.fragment)))?;
        if o.structure >= f.len() {
            return Err(Error::ObjectMismatch(format!("fragment {} has no structure {}", o.fragment, o.structure)));
        }
        Ok((f, o.structure))
    }

    pub fn identity(&self, o: GluedObject) -> Result<GluedArrow> {
        let (f, s) = self.get(o)?;
        Ok(GluedArrow {
            source: o,
            target: o,
            phi: LanguageMorphism::identity(f.lang()),
            map: Embedding::identity(f.structure(s).size()),
        })
    }

    /// Why `(map, phi)` fails to be an arrow `source -> target`, if it does.
    pub fn arrow_defect(&self, source: GluedObject, target: GluedObject, phi: &LanguageMorphism, map: &Embedding) -> Option<String> {
        let ((fs, s), (ft, t)) = match (self.get(source), self.get(target)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Some(e.to_string()),
        };
        if phi.source() != fs.lang() || phi.target() != ft.lang() {
            return Some("the language morphism does not run between the two fragments' languages".into());
        }
        let reduct = ft.structure(t).reduct(phi).expect("languages checked");
        let Some(down) = fs.strong_subsets_of(&reduct) else {
            return Some("the reduct of the target is not a member of the source fragment".into());
        };
        if !is_embedding(fs.structure(s), &reduct, &map.map) {
            return Some("the map is not an embedding into the reduct".into());
        }
        if !down.contains(&map.image()) {
            return Some("the image is not strong in the reduct".into());
        }
        None
    }

    pub fn arrow(&self, source: GluedObject, target: GluedObject, phi: LanguageMorphism, map: Embedding) -> Result<GluedArrow> {
        match self.arrow_defect(source, target, &phi, &map) {
            Some(why) => Err(Error::InvalidMorphism(why)),
            None => Ok(GluedArrow { source, target, phi, map }),
        }
    }

    pub fn is_arrow(&self, a: &GluedArrow) -> bool {
        self.arrow_defect(a.source, a.target, &a.phi, &a.map).is_none()
    }

    /// Every arrow `source -> target` over the given `phi`, in lexicographic order of the map.
    pub fn arrows_over(&self, source: GluedObject, target: GluedObject, phi: &LanguageMorphism) -> Result<Vec<GluedArrow>> {
        let (fs, s) = self.get(source)?;
        let (ft, t) = self.get(target)?;
        if phi.source() != fs.lang() || phi.target() != ft.lang() {
            return Err(Error::LanguageMismatch("morphism does not run between the fragments' languages".into()));
        }
        let reduct = ft.structure(t).reduct(phi)?;
        let Some(down) = fs.strong_subsets_of(&reduct) else {
            return Ok(Vec::new());
        };
        Ok(find_embeddings(fs.structure(s), &reduct, None)
            .into_iter()
            .filter(|e| down.contains(&e.image()))
            .map(|map| GluedArrow { source, target, phi: phi.clone(), map })
            .collect())
    }

    /// `(h', φ') ∘ (h, φ) = (Φ(h') ∘ h, φ' ∘ φ)`; the reduct does not move
    /// elements, so `Φ(h')` has the same underlying map as `h'`.
    pub fn compose(&self, second: &GluedArrow, first: &GluedArrow) -> Result<GluedArrow> {
        if first.target != second.source {
            return Err(Error::ObjectMismatch(format!(
                "arrow into {:?} composed with arrow out of {:?}",
                first.target, second.source
            )));
        }
        Ok(GluedArrow {
            source: first.source,
            target: second.target,
            phi: second.phi.compose(&first.phi)?,
            map: second.map.after(&first.map),
        })
    }
}

/// Outcome of checking the category laws on a set of arrows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GlueLawReport {
    pub arrows: usize,
    pub composable_pairs: usize,
    pub composable_triples: usize,
    pub failures: Vec<String>,
}

impl GlueLawReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

impl Gluing {
    /// Identity laws on every arrow, closure of composition on every
    /// composable pair and associativity on composable triples, stopping
    /// after `triple_cap` triples.
    pub fn check_laws(&self, arrows: &[GluedArrow], triple_cap: usize) -> Result<GlueLawReport> {
        let mut r = GlueLawReport { arrows: arrows.len(), ..Default::default() };
        for a in arrows {
            let left = self.compose(&self.identity(a.target)?, a)?;
            let right = self.compose(a, &self.identity(a.source)?)?;
            if &left != a || &right != a || !self.is_arrow(a) {
                r.failures.push(format!("identity law fails at {:?} -> {:?}", a.source, a.target));
            }
        }
        let mut by_source: BTreeMap<GluedObject, Vec<&GluedArrow>> = BTreeMap::new();
        for a in arrows {
            by_source.entry(a.source).or_default().push(a);
        }
        for a in arrows {
            for b in by_source.get(&a.target).into_iter().flatten() {
                r.composable_pairs += 1;
                let ba = self.compose(b, a)?;
                if !self.is_arrow(&ba) {
                    r.failures.push(format!("composite {:?} -> {:?} is not an arrow", ba.source, ba.target));
                }
                for c in by_source.get(&b.target).into_iter().flatten() {
                    if r.composable_triples == triple_cap {
                        return Ok(r);
                    }
                    r.composable_triples += 1;
                    if self.compose(c, &ba)? != self.compose(&self.compose(c, b)?, a)? {
                        r.failures.push(format!("associativity fails at {:?} -> {:?}", a.source, c.target));
                    }
                }
            }
        }
        Ok(r)
    }
}
