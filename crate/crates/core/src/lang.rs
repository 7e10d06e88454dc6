//! Finitary languages and injective, kind- and arity-preserving morphisms
//! between them.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Relation(usize),
    Function(usize),
    Constant,
}

/// A finite signature. Symbol names are unique across the three kinds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Language {
    relations: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
    constants: BTreeSet<String>,
}

impl Language {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(
        relations: impl IntoIterator<Item = (String, usize)>,
        functions: impl IntoIterator<Item = (String, usize)>,
        constants: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let mut lang = Language::empty();
        for (name, arity) in relations {
            lang.add(name, SymbolKind::Relation(arity))?;
        }
        for (name, arity) in functions {
            lang.add(name, SymbolKind::Function(arity))?;
        }
        for name in constants {
            lang.add(name, SymbolKind::Constant)?;
        }
        Ok(lang)
    }

    /// Shorthand for tests and examples: `Language::from_spec(&["R/2", "f/1!", "c"])`
    /// where a trailing `!` marks a function symbol and a bare name a constant.
    pub fn from_spec(symbols: &[&str]) -> Result<Self> {
        let mut lang = Language::empty();
        for s in symbols {
            match s.split_once('/') {
                Some((name, rest)) => {
                    let (digits, fun) = match rest.strip_suffix('!') {
                        Some(d) => (d, true),
                        None => (rest, false),
                    };
                    let arity: usize = digits
                        .parse()
                        .map_err(|_| Error::InvalidLanguage(format!("bad arity in `{s}`")))?;
                    let kind = if fun { SymbolKind::Function(arity) } else { SymbolKind::Relation(arity) };
                    lang.add(name.to_string(), kind)?;
                }
                None => lang.add(s.to_string(), SymbolKind::Constant)?,
            }
        }
        Ok(lang)
    }

    pub fn add(&mut self, name: String, kind: SymbolKind) -> Result<()> {
        if self.kind(&name).is_some() {
            return Err(Error::NameCollision(name));
        }
        match kind {
            SymbolKind::Relation(0) | SymbolKind::Function(0) => {
                return Err(Error::InvalidLanguage(format!("symbol `{name}` has arity 0")))
            }
            SymbolKind::Relation(a) => {
                self.relations.insert(name, a);
            }
            SymbolKind::Function(a) => {
                self.functions.insert(name, a);
            }
            SymbolKind::Constant => {
                self.constants.insert(name);
            }
        }
        Ok(())
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        if let Some(&a) = self.relations.get(name) {
            Some(SymbolKind::Relation(a))
        } else if let Some(&a) = self.functions.get(name) {
            Some(SymbolKind::Function(a))
        } else if self.constants.contains(name) {
            Some(SymbolKind::Constant)
        } else {
            None
        }
    }

    pub fn relations(&self) -> &BTreeMap<String, usize> {
        &self.relations
    }

    pub fn functions(&self) -> &BTreeMap<String, usize> {
        &self.functions
    }

    pub fn constants(&self) -> &BTreeSet<String> {
        &self.constants
    }

    /// All symbols with their kinds, relations first, then functions, then constants.
    pub fn symbols(&self) -> impl Iterator<Item = (&str, SymbolKind)> {
        self.relations
            .iter()
            .map(|(n, &a)| (n.as_str(), SymbolKind::Relation(a)))
            .chain(self.functions.iter().map(|(n, &a)| (n.as_str(), SymbolKind::Function(a))))
            .chain(self.constants.iter().map(|n| (n.as_str(), SymbolKind::Constant)))
    }

    pub fn len(&self) -> usize {
        self.relations.len() + self.functions.len() + self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty() && self.constants.is_empty()
    }
}

/// A symbol map `source -> target`, injective and preserving kinds and arities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LanguageMorphism {
    source: Language,
    target: Language,
    map: BTreeMap<String, String>,
}

impl LanguageMorphism {
    pub fn new(source: Language, target: Language, map: BTreeMap<String, String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (name, kind) in source.symbols() {
            let image = map
                .get(name)
                .ok_or_else(|| Error::InvalidMorphism(format!("symbol `{name}` is not mapped")))?;
            match target.kind(image) {
                Some(k) if k == kind => {}
                Some(_) => return Err(Error::KindClash(format!("{name} -> {image}"))),
                None => {
                    return Err(Error::InvalidMorphism(format!(
                        "image `{image}` of `{name}` is not in the target language"
                    )))
                }
            }
            if !seen.insert(image.as_str()) {
                return Err(Error::InvalidMorphism(format!("not injective at `{image}`")));
            }
        }
        if map.len() != source.len() {
            let extra = map.keys().find(|k| source.kind(k).is_none()).cloned().unwrap_or_default();
            return Err(Error::InvalidMorphism(format!("`{extra}` is not a source symbol")));
        }
        Ok(Self { source, target, map })
    }

    pub fn identity(lang: &Language) -> Self {
        let map = lang.symbols().map(|(n, _)| (n.to_string(), n.to_string())).collect();
        Self { source: lang.clone(), target: lang.clone(), map }
    }

    /// The name-preserving inclusion of `source` into `target`.
    pub fn inclusion(source: &Language, target: &Language) -> Result<Self> {
        let map = source.symbols().map(|(n, _)| (n.to_string(), n.to_string())).collect();
        Self::new(source.clone(), target.clone(), map)
    }

    pub fn source(&self) -> &Language {
        &self.source
    }

    pub fn target(&self) -> &Language {
        &self.target
    }

    pub fn map(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    pub fn apply(&self, symbol: &str) -> Option<&str> {
        self.map.get(symbol).map(String::as_str)
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.map.iter().all(|(a, b)| a == b)
    }

    /// `g ∘ f`, with `self = g`.
    pub fn compose(&self, f: &LanguageMorphism) -> Result<LanguageMorphism> {
        if f.target != self.source {
            return Err(Error::SourceTargetMismatch(
                "target of the first morphism is not the source of the second".into(),
            ));
        }
        let map = f
            .map
            .iter()
            .map(|(s, mid)| (s.clone(), self.map[mid].clone()))
            .collect();
        LanguageMorphism::new(f.source.clone(), self.target.clone(), map)
    }

    /// Inverse symbol map restricted to the image.
    pub fn preimage(&self, symbol: &str) -> Option<&str> {
        self.map.iter().find(|(_, v)| v.as_str() == symbol).map(|(k, _)| k.as_str())
    }
}

/// The quotient `(L0 ⊔ L1)/~` of a span `L0 <- L -> L1` together with its cocone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguagePushout {
    pub left: LanguageMorphism,
    pub right: LanguageMorphism,
    pub apex: Language,
    pub inj_left: LanguageMorphism,
    pub inj_right: LanguageMorphism,
    pub diagonal: LanguageMorphism,
}

/// Pushout of `left: L -> L0` and `right: L -> L1`. Exactly the pairs
/// `left(s) ~ right(s)` are identified. Apex names follow `L0`; symbols only
/// in `L1` keep their name unless it is taken, in which case primes are appended.
pub fn pushout(left: &LanguageMorphism, right: &LanguageMorphism) -> Result<LanguagePushout> {
    if left.source != right.source {
        return Err(Error::SourceTargetMismatch("span legs have different sources".into()));
    }
    let l0: Vec<(&str, SymbolKind)> = left.target.symbols().collect();
    let l1: Vec<(&str, SymbolKind)> = right.target.symbols().collect();
    let pos0: BTreeMap<&str, usize> = l0.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();
    let pos1: BTreeMap<&str, usize> =
        l1.iter().enumerate().map(|(i, (n, _))| (*n, l0.len() + i)).collect();

    let mut uf = UnionFind::new(l0.len() + l1.len());
    for (s, _) in left.source.symbols() {
        let a = pos0[left.map[s].as_str()];
        let b = pos1[right.map[s].as_str()];
        if l0[a].1 != l1[b - l0.len()].1 {
            return Err(Error::KindClash(s.to_string()));
        }
        uf.union(a, b);
    }
    let labels = uf.min_labels();

    let mut apex = Language::empty();
    let mut class_name: BTreeMap<usize, String> = BTreeMap::new();
    let mut inj_left = BTreeMap::new();
    for (i, (name, kind)) in l0.iter().enumerate() {
        // Every class containing an L0 symbol has that symbol as its minimum.
        apex.add(name.to_string(), *kind)?;
        class_name.insert(labels[i], name.to_string());
        inj_left.insert(name.to_string(), name.to_string());
    }
    let mut inj_right = BTreeMap::new();
    for (j, (name, kind)) in l1.iter().enumerate() {
        let label = labels[l0.len() + j];
        let apex_name = match class_name.get(&label) {
            Some(n) => n.clone(),
            None => {
                let mut fresh = name.to_string();
                while apex.kind(&fresh).is_some() {
                    fresh.push('\'');
                }
                apex.add(fresh.clone(), *kind)?;
                class_name.insert(label, fresh.clone());
                fresh
            }
        };
        inj_right.insert(name.to_string(), apex_name);
    }
    let inj_left = LanguageMorphism::new(left.target.clone(), apex.clone(), inj_left)?;
    let inj_right = LanguageMorphism::new(right.target.clone(), apex.clone(), inj_right)?;
    let diagonal = inj_left.compose(left)?;
    if diagonal != inj_right.compose(right)? {
        return Err(Error::Internal("pushout square does not commute".into()));
    }
    Ok(LanguagePushout {
        left: left.clone(),
        right: right.clone(),
        apex,
        inj_left,
        inj_right,
        diagonal,
    })
}

/// Adds one fresh constant per name and returns the extended language with its inclusion.
pub fn expand_with_constants<'a>(
    lang: &Language,
    names: impl IntoIterator<Item = &'a str>,
) -> Result<(Language, LanguageMorphism)> {
    let mut expanded = lang.clone();
    for n in names {
        expanded.add(n.to_string(), SymbolKind::Constant)?;
    }
    let incl = LanguageMorphism::inclusion(lang, &expanded)?;
    Ok((expanded, incl))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang(s: &[&str]) -> Language {
        Language::from_spec(s).unwrap()
    }

    #[test]
    fn kinds_must_be_disjoint_and_arities_positive() {
        assert!(matches!(Language::from_spec(&["R/1", "R"]), Err(Error::NameCollision(_))));
        assert!(Language::from_spec(&["f/0!"]).is_err());
        assert!(Language::from_spec(&["R/0"]).is_err());
    }

    #[test]
    fn identity_laws() {
        let l = lang(&["R/1"]);
        let l2 = lang(&["R/1", "S/1"]);
        let f = LanguageMorphism::inclusion(&l, &l2).unwrap();
        assert_eq!(LanguageMorphism::identity(&l2).compose(&f).unwrap(), f);
        assert_eq!(f.compose(&LanguageMorphism::identity(&l)).unwrap(), f);
    }

    #[test]
    fn composing_inclusions() {
        let l = lang(&["R/1"]);
        let l1 = lang(&["R/1", "S/1"]);
        let l2 = lang(&["R/1", "S/1", "T/2"]);
        let f = LanguageMorphism::inclusion(&l, &l1).unwrap();
        let g = LanguageMorphism::inclusion(&l1, &l2).unwrap();
        assert_eq!(g.compose(&f).unwrap(), LanguageMorphism::inclusion(&l, &l2).unwrap());
        assert!(matches!(f.compose(&g), Err(Error::SourceTargetMismatch(_))));
    }

    #[test]
    fn morphisms_must_preserve_kind_and_be_injective() {
        let l = lang(&["R/1", "S/1"]);
        let t = lang(&["R/2", "S/1"]);
        let same: BTreeMap<_, _> = [("R", "R"), ("S", "S")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert!(matches!(LanguageMorphism::new(l.clone(), t, same), Err(Error::KindClash(_))));
        let collapse: BTreeMap<_, _> = [("R", "S"), ("S", "S")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert!(LanguageMorphism::new(l.clone(), l, collapse).is_err());
    }

    #[test]
    fn pushout_of_disjoint_extensions() {
        let e = Language::empty();
        let l0 = lang(&["R/1"]);
        let l1 = lang(&["S/1"]);
        let p = pushout(
            &LanguageMorphism::inclusion(&e, &l0).unwrap(),
            &LanguageMorphism::inclusion(&e, &l1).unwrap(),
        )
        .unwrap();
        assert_eq!(p.apex, lang(&["R/1", "S/1"]));
    }

    #[test]
    fn pushout_of_identities_is_the_language() {
        let l = lang(&["R/2", "f/1!", "c"]);
        let id = LanguageMorphism::identity(&l);
        let p = pushout(&id, &id).unwrap();
        assert_eq!(p.apex, l);
        assert!(p.inj_left.is_identity() && p.inj_right.is_identity());
    }

    #[test]
    fn pushout_over_shared_relation() {
        let l = lang(&["R/1"]);
        let l0 = lang(&["R/1", "f/1!"]);
        let l1 = lang(&["R/1", "c"]);
        let p = pushout(
            &LanguageMorphism::inclusion(&l, &l0).unwrap(),
            &LanguageMorphism::inclusion(&l, &l1).unwrap(),
        )
        .unwrap();
        assert_eq!(p.apex, lang(&["R/1", "f/1!", "c"]));
        assert_eq!(p.diagonal.apply("R"), Some("R"));
    }

    #[test]
    fn unidentified_name_clash_is_renamed() {
        let e = Language::empty();
        let l0 = lang(&["R/1"]);
        let p = pushout(
            &LanguageMorphism::inclusion(&e, &l0).unwrap(),
            &LanguageMorphism::inclusion(&e, &l0).unwrap(),
        )
        .unwrap();
        assert_eq!(p.apex, lang(&["R/1", "R'/1"]));
        assert_eq!(p.inj_right.apply("R"), Some("R'"));
    }

    #[test]
    fn constant_expansion() {
        let (l, j) = expand_with_constants(&Language::empty(), ["a"]).unwrap();
        assert_eq!(l, lang(&["a"]));
        assert_eq!(j.source(), &Language::empty());
        let r = lang(&["R/2"]);
        let (same, id) = expand_with_constants(&r, []).unwrap();
        assert_eq!(same, r);
        assert!(id.is_identity());
        let (l2, _) = expand_with_constants(&r, ["m0", "m1"]).unwrap();
        assert_eq!(l2, lang(&["R/2", "m0", "m1"]));
        assert!(matches!(expand_with_constants(&r, ["R"]), Err(Error::NameCollision(_))));
    }
}
