//! Constructions of new fragments from old ones.

mod gluing;
mod pointed;
mod pullback;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fragment::{AecFragment, StrongPair};
use crate::lang::{expand_with_constants, Language, LanguageMorphism};
use crate::structure::{tuples_over, Embedding, FinStructure};

pub use gluing::{GlueLawReport, GluedArrow, GluedObject, Gluing};
pub use pointed::{base_constant, index_constant, pointed_class, PointedClass, Triple};
pub use pullback::{pullback_fragment, Pullback, PullbackConfig};

/// Default cap on the number of candidate structures an enumeration may visit.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Bare sets of sizes `1..=n` with `≼` the subset relation.
pub fn terminal_fragment(n: usize) -> AecFragment {
    assert!(n >= 1, "the terminal fragment needs at least one structure");
    let structures: Vec<FinStructure> = (1..=n).map(FinStructure::bare).collect();
    let names = (1..=n).map(|k| format!("B{k}")).collect();
    let pairs = (0..n)
        .flat_map(|i| (i..n).map(move |j| StrongPair { lower: i, upper: j, inclusion: Embedding::identity(i + 1) }))
        .collect();
    AecFragment::new(Language::empty(), structures, names, pairs).expect("terminal fragment is well formed")
}

/// Every `lang`-structure on `{0, .., n-1}` (not reduced up to isomorphism).
pub fn all_structures(lang: &Arc<Language>, n: usize, budget: usize) -> Result<Vec<FinStructure>> {
    enum Slot {
        Tuple(String, Vec<usize>),
        Entry(String, usize),
        Constant(String),
    }
    let elems: Vec<usize> = (0..n).collect();
    let mut slots = Vec::new();
    let mut radix = Vec::new();
    for (r, &a) in lang.relations() {
        for t in tuples_over(&elems, a) {
            slots.push(Slot::Tuple(r.clone(), t));
            radix.push(2usize);
        }
    }
    for (f, &a) in lang.functions() {
        for i in 0..n.pow(a as u32) {
            slots.push(Slot::Entry(f.clone(), i));
            radix.push(n);
        }
    }
    for c in lang.constants() {
        slots.push(Slot::Constant(c.clone()));
        radix.push(n);
    }
    let total = radix.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r).filter(|&t| t <= budget));
    let Some(total) = total else {
        return Err(Error::SizeBoundExceeded { budget, what: format!("all structures of size {n}") });
    };
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; slots.len()];
    for _ in 0..total {
        let mut relations: BTreeMap<String, BTreeSet<Vec<usize>>> =
            lang.relations().keys().map(|r| (r.clone(), BTreeSet::new())).collect();
        let mut functions: BTreeMap<String, Vec<usize>> =
            lang.functions().iter().map(|(f, &a)| (f.clone(), vec![0; n.pow(a as u32)])).collect();
        let mut constants = BTreeMap::new();
        for (slot, &d) in slots.iter().zip(&digits) {
            match slot {
                Slot::Tuple(r, t) if d == 1 => {
                    relations.get_mut(r).unwrap().insert(t.clone());
                }
                Slot::Tuple(..) => {}
                Slot::Entry(f, i) => functions.get_mut(f).unwrap()[*i] = d,
                Slot::Constant(c) => {
                    constants.insert(c.clone(), d);
                }
            }
        }
        out.push(FinStructure::new(lang.clone(), n, relations, functions, constants)?);
        for (d, &r) in digits.iter_mut().zip(&radix) {
            *d += 1;
            if *d < r {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// All `lang`-structures of sizes `1..=max_size` up to isomorphism, with `≼`
/// the substructure relation. Structures are listed by size, then by canonical form.
pub fn full_fragment(lang: &Language, max_size: usize, budget: usize) -> Result<AecFragment> {
    let lang = Arc::new(lang.clone());
    let mut structures = Vec::new();
    let mut visited = 0usize;
    for n in 1..=max_size {
        let all = all_structures(&lang, n, budget.saturating_sub(visited))?;
        visited += all.len();
        let canon: BTreeSet<FinStructure> = all.iter().map(FinStructure::canonical_form).collect();
        structures.extend(canon);
    }
    let names = (0..structures.len()).map(|i| format!("F{i}")).collect();
    AecFragment::from_strong_predicate(lang, structures, names, |_, _| true)
}

/// `K(I)`: pairs `(M, ā)` with `ā` an `I`-sequence in `M`, where
/// `(M, ā) ≼ (N, b̄)` iff `M ≼ N` and `ā = b̄`.
#[derive(Debug, Clone)]
pub struct DiagramExpansion {
    pub fragment: Arc<AecFragment>,
    /// For each listed structure: the underlying index in the base fragment and `ā`.
    pub entries: Vec<(usize, Vec<usize>)>,
    pub inclusion: LanguageMorphism,
}

pub fn diagram_expansion(f: &AecFragment, names: &[String]) -> Result<DiagramExpansion> {
    let (expanded, inclusion) = expand_with_constants(f.lang(), names.iter().map(String::as_str))?;
    let expanded = Arc::new(expanded);
    let mut entries = Vec::new();
    let mut structures = Vec::new();
    let mut labels = Vec::new();
    for (k, s) in f.structures().iter().enumerate() {
        let elems: Vec<usize> = (0..s.size()).collect();
        for a in tuples_over(&elems, names.len()) {
            let values = names.iter().cloned().zip(a.iter().copied()).collect();
            structures.push(s.expand(&expanded, &values)?);
            labels.push(format!("{}_{}", f.name(k), a.iter().map(usize::to_string).collect::<Vec<_>>().join("_")));
            entries.push((k, a));
        }
    }
    let fragment = AecFragment::from_strong_predicate(expanded, structures, labels, |j, x| {
        f.is_strong_subset(entries[j].0, x)
    })?;
    Ok(DiagramExpansion { fragment: Arc::new(fragment), entries, inclusion })
}
