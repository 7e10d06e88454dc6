//! Seeded random languages, fragments and spans.
//!
//! A fragment is grown from a few random "top" structures: its members are
//! the isomorphism types of their substructures, and its strong subsets start
//! from a random seed set that is then closed under the AEC axioms by adding
//! whatever is missing. Closure only ever adds pairs, so it terminates, and the
//! result validates by construction.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::construct::PullbackConfig;
use crate::elemset::ElemSet;
use crate::error::Result;
use crate::fragment::AecFragment;
use crate::lang::{Language, LanguageMorphism, SymbolKind};
use crate::structure::{find_isomorphisms, first_isomorphism, tuples_over, Embedding, FinStructure};
use crate::theory::check_morphism;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub max_structures: usize,
    pub max_size: usize,
    pub max_symbols: usize,
    pub arity_cap: usize,
}

impl Default for Profile {
    fn default() -> Self {
        Self { max_structures: 5, max_size: 3, max_symbols: 2, arity_cap: 2 }
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Up to `count` symbols named `{prefix}R0`, `{prefix}f1`, `{prefix}c2`, ...
pub fn random_symbols(rng: &mut impl Rng, count: usize, prefix: &str, arity_cap: usize) -> Vec<(String, SymbolKind)> {
    (0..count)
        .map(|i| {
            let roll = rng.gen_range(0..10);
            let arity = rng.gen_range(1..=arity_cap.max(1));
            if roll < 6 {
                (format!("{prefix}R{i}"), SymbolKind::Relation(arity))
            } else if roll < 8 {
                // unary functions keep closures small
                (format!("{prefix}f{i}"), SymbolKind::Function(1))
            } else {
                (format!("{prefix}c{i}"), SymbolKind::Constant)
            }
        })
        .collect()
}

pub fn random_language(rng: &mut impl Rng, profile: &Profile, prefix: &str) -> Language {
    let count = rng.gen_range(0..=profile.max_symbols);
    let mut lang = Language::empty();
    for (name, kind) in random_symbols(rng, count, prefix, profile.arity_cap) {
        lang.add(name, kind).expect("fresh names");
    }
    lang
}

pub fn random_structure(rng: &mut impl Rng, lang: &Arc<Language>, size: usize) -> FinStructure {
    let elems: Vec<usize> = (0..size).collect();
    let mut b = FinStructure::builder(lang.clone(), size);
    for (r, &a) in lang.relations() {
        let tuples: Vec<Vec<usize>> = tuples_over(&elems, a).into_iter().filter(|_| rng.gen_bool(0.4)).collect();
        b = b.relation(r.as_str(), tuples);
    }
    for (f, &a) in lang.functions() {
        let table = (0..size.pow(a as u32)).map(|_| rng.gen_range(0..size)).collect();
        b = b.function(f.as_str(), table);
    }
    for c in lang.constants() {
        b = b.constant(c.as_str(), rng.gen_range(0..size));
    }
    b.build().expect("random structure is well formed")
}

/// Isomorphism types of all nonempty closed substructures, by size then canonical form.
pub fn substructure_types<'a>(structures: impl IntoIterator<Item = &'a FinStructure>) -> Vec<FinStructure> {
    let mut out = BTreeSet::new();
    for s in structures {
        for x in ElemSet::all_subsets(s.size()) {
            if !x.is_empty() && s.closure_violation(x).is_none() {
                out.insert(s.induced(x).expect("closed").0.canonical_form());
            }
        }
    }
    let mut out: Vec<FinStructure> = out.into_iter().collect();
    out.sort_by_key(|s| s.size());
    out
}

/// Listed members with a lookup of arbitrary structures up to isomorphism.
struct Members {
    structures: Vec<FinStructure>,
    by_canon: HashMap<FinStructure, usize>,
    automorphisms: Vec<Vec<Embedding>>,
}

impl Members {
    fn new(structures: Vec<FinStructure>) -> Self {
        let by_canon = structures.iter().enumerate().map(|(i, s)| (s.canonical_form(), i)).collect();
        let automorphisms = structures.iter().map(|s| find_isomorphisms(s, s)).collect();
        Self { structures, by_canon, automorphisms }
    }

    /// Listed index and an isomorphism from it onto `s`.
    fn locate(&self, s: &FinStructure) -> Option<(usize, Embedding)> {
        let j = *self.by_canon.get(&s.canonical_form())?;
        Some((j, first_isomorphism(&self.structures[j], s).expect("same canonical form")))
    }
}

/// Smallest extension of `down` satisfying reflexivity, invariance under
/// automorphisms, transitivity and coherence. Subsets whose induced structure
/// is not listed are dropped first.
fn close_down_sets(members: &Members, mut down: Vec<BTreeSet<ElemSet>>) -> Vec<BTreeSet<ElemSet>> {
    let s = &members.structures;
    for (k, d) in down.iter_mut().enumerate() {
        d.retain(|&x| {
            !x.is_empty()
                && s[k].closure_violation(x).is_none()
                && members.locate(&s[k].induced(x).expect("closed").0).is_some()
        });
        d.insert(s[k].universe());
    }
    loop {
        let mut added: Vec<(usize, ElemSet)> = Vec::new();
        for k in 0..s.len() {
            for &x in &down[k] {
                for a in &members.automorphisms[k] {
                    added.push((k, x.map(&a.map)));
                }
                let (sub, renaming) = s[k].induced(x).expect("closed");
                let (j, h) = members.locate(&sub).expect("listed");
                let into_k: Vec<usize> = h.map.iter().map(|&y| renaming[y]).collect();
                // Y ≼ S_j ≅ S_k|X ≼ S_k
                for &y in &down[j] {
                    added.push((k, y.map(&into_k)));
                }
                // Y ≼ S_k and Y ⊆ X give Y ≼ S_k|X
                for &y in &down[k] {
                    if y.is_subset(x) {
                        let back: ElemSet = y.iter().map(|e| into_k.iter().position(|&v| v == e).unwrap()).collect();
                        added.push((j, back));
                    }
                }
            }
        }
        let mut changed = false;
        for (k, x) in added {
            changed |= down[k].insert(x);
        }
        if !changed {
            return down;
        }
    }
}

fn random_down_sets(rng: &mut impl Rng, structures: &[FinStructure], density: f64) -> Vec<BTreeSet<ElemSet>> {
    structures
        .iter()
        .map(|s| {
            ElemSet::all_subsets(s.size())
                .filter(|x| !x.is_empty() && s.closure_violation(*x).is_none())
                .filter(|_| rng.gen_bool(density))
                .collect()
        })
        .collect()
}

fn assemble(lang: Arc<Language>, members: &Members, down: &[BTreeSet<ElemSet>]) -> Result<AecFragment> {
    let names = (0..members.structures.len()).map(|i| format!("S{i}")).collect();
    AecFragment::from_strong_predicate(lang, members.structures.clone(), names, |k, x| down[k].contains(&x))
}

/// A valid fragment over `lang` with at most `profile.max_structures` members.
pub fn random_fragment(rng: &mut impl Rng, lang: &Arc<Language>, profile: &Profile) -> Result<AecFragment> {
    let tops: Vec<FinStructure> = (0..rng.gen_range(1..=2))
        .map(|_| {
            let n = rng.gen_range(1..=profile.max_size.max(1));
            random_structure(rng, lang, n)
        })
        .collect();
    let mut structures = substructure_types(&tops);
    // sorted by size, so every kept structure keeps its substructures
    structures.truncate(profile.max_structures.max(1));
    let members = Members::new(structures);
    let density = rng.gen_range(0.0..0.6);
    let seeds = random_down_sets(rng, &members.structures, density);
    let down = close_down_sets(&members, seeds);
    assemble(lang.clone(), &members, &down)
}

/// The fragment over `lang` listing every closed substructure type of the
/// reducts of `legs`' members, with their strong subsets carried over and a
/// few random extra ones, closed up.
fn random_base(rng: &mut impl Rng, lang: &Arc<Language>, legs: &[(&AecFragment, &LanguageMorphism)]) -> Result<AecFragment> {
    let reducts: Vec<(FinStructure, BTreeSet<ElemSet>)> = legs
        .iter()
        .flat_map(|(f, alpha)| {
            (0..f.len()).map(move |i| (f.structure(i).reduct(alpha).expect("leg language"), f.strong_subsets(i).clone()))
        })
        .collect();
    let members = Members::new(substructure_types(reducts.iter().map(|(s, _)| s)));
    let density = rng.gen_range(0.0..0.3);
    let mut down = random_down_sets(rng, &members.structures, density);
    for (r, strong) in &reducts {
        let (j, h) = members.locate(r).expect("reduct is listed");
        let back = h.inverse();
        down[j].extend(strong.iter().map(|x| x.map(&back.map)));
    }
    let down = close_down_sets(&members, down);
    assemble(lang.clone(), &members, &down)
}

/// Extends `base` by up to one fresh symbol per side.
fn extension(rng: &mut impl Rng, base: &Language, prefix: &str, profile: &Profile) -> (Language, LanguageMorphism) {
    let mut lang = base.clone();
    let count = rng.gen_range(0..=1);
    for (name, kind) in random_symbols(rng, count, prefix, profile.arity_cap) {
        lang.add(name, kind).expect("prefixed names are fresh");
    }
    let incl = LanguageMorphism::inclusion(base, &lang).expect("inclusion");
    (lang, incl)
}

/// A span `K0 -> K <- K1` of reducts along inclusions `L ⊆ L0`, `L ⊆ L1`.
pub fn random_config(seed: u64, profile: &Profile) -> Result<PullbackConfig> {
    let mut rng = rng_for(seed);
    let base_lang = random_language(&mut rng, profile, "");
    let (l0, a0) = extension(&mut rng, &base_lang, "u", profile);
    let (l1, a1) = extension(&mut rng, &base_lang, "v", profile);
    let k0 = random_fragment(&mut rng, &Arc::new(l0), profile)?;
    let k1 = random_fragment(&mut rng, &Arc::new(l1), profile)?;
    let k = random_base(&mut rng, &Arc::new(base_lang), &[(&k0, &a0), (&k1, &a1)])?;
    let k = Arc::new(k);
    let leg = |alpha: &LanguageMorphism, f: AecFragment| {
        check_morphism(alpha, &Arc::new(f), &k)
            .map_err(|e| crate::error::Error::Internal(format!("generated leg is not a morphism: {e:?}")))
    };
    let left = leg(&a0, k0)?;
    let right = leg(&a1, k1)?;
    PullbackConfig::new(left, right)
}

/// A single random fragment from its own seed.
pub fn fragment_for_seed(seed: u64, profile: &Profile) -> Result<AecFragment> {
    let mut rng = rng_for(seed);
    let lang = Arc::new(random_language(&mut rng, profile, ""));
    random_fragment(&mut rng, &lang, profile)
}

/// A random structure together with every map into a random target, used by
/// embedding oracles.
pub fn random_pair(seed: u64, profile: &Profile) -> (FinStructure, FinStructure) {
    let mut rng = rng_for(seed);
    let lang = Arc::new(random_language(&mut rng, profile, ""));
    let n = rng.gen_range(1..=profile.max_size.max(1));
    let m = rng.gen_range(n..=profile.max_size.max(n));
    let b = random_structure(&mut rng, &lang, m);
    // half the time take a substructure of b so that embeddings exist
    let a = if rng.gen_bool(0.5) {
        let subs: Vec<ElemSet> =
            ElemSet::all_subsets(m).filter(|x| x.len() == n && b.closure_violation(*x).is_none()).collect();
        match subs.get(rng.gen_range(0..subs.len().max(1))) {
            Some(&x) => b.induced(x).expect("closed").0,
            None => random_structure(&mut rng, &lang, n),
        }
    } else {
        random_structure(&mut rng, &lang, n)
    };
    (a, b)
}
