//! Finite first-order structures on universes `{0, .., n-1}`, reducts,
//! induced substructures and the search for strong embeddings.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::elemset::{ElemSet, MAX_UNIVERSE};
use crate::error::{Error, Result};
use crate::lang::{Language, LanguageMorphism};

/// A finite structure. Function tables are stored flat, indexed by the
/// argument tuple read as a base-`size` numeral (first argument most significant).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinStructure {
    lang: Arc<Language>,
    size: usize,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    functions: BTreeMap<String, Vec<usize>>,
    constants: BTreeMap<String, usize>,
}

pub fn tuple_index(args: &[usize], size: usize) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a)
}

/// All tuples of the given arity over `elems`, in lexicographic order.
pub fn tuples_over(elems: &[usize], arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(arity)];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                elems.iter().map(move |&e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

pub struct StructureBuilder {
    lang: Arc<Language>,
    size: usize,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
    functions: BTreeMap<String, Vec<usize>>,
    constants: BTreeMap<String, usize>,
}

impl StructureBuilder {
    pub fn relation<I, T>(mut self, name: &str, tuples: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[usize]>,
    {
        self.relations
            .entry(name.to_string())
            .or_default()
            .extend(tuples.into_iter().map(|t| t.as_ref().to_vec()));
        self
    }

    /// A function given by its full table in [`tuple_index`] order.
    pub fn function(mut self, name: &str, table: Vec<usize>) -> Self {
        self.functions.insert(name.to_string(), table);
        self
    }

    pub fn constant(mut self, name: &str, value: usize) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn build(self) -> Result<FinStructure> {
        FinStructure::new(self.lang, self.size, self.relations, self.functions, self.constants)
    }
}

impl FinStructure {
    pub fn new(
        lang: Arc<Language>,
        size: usize,
        mut relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
        functions: BTreeMap<String, Vec<usize>>,
        constants: BTreeMap<String, usize>,
    ) -> Result<Self> {
        if size > MAX_UNIVERSE {
            return Err(Error::InvalidStructure(format!("universe of size {size} exceeds {MAX_UNIVERSE}")));
        }
        for (name, &arity) in lang.relations() {
            let tuples = relations.entry(name.clone()).or_default();
            if let Some(t) = tuples.iter().find(|t| t.len() != arity || t.iter().any(|&x| x >= size)) {
                return Err(Error::InvalidStructure(format!("tuple {t:?} of `{name}` is out of range")));
            }
        }
        if let Some(extra) = relations.keys().find(|k| !lang.relations().contains_key(*k)) {
            return Err(Error::InvalidStructure(format!("`{extra}` is not a relation symbol")));
        }
        for (name, &arity) in lang.functions() {
            let table = functions
                .get(name)
                .ok_or_else(|| Error::InvalidStructure(format!("function `{name}` has no table")))?;
            if table.len() != size.pow(arity as u32) || table.iter().any(|&v| v >= size) {
                return Err(Error::InvalidStructure(format!("table of `{name}` is not total on the universe")));
            }
        }
        if let Some(extra) = functions.keys().find(|k| !lang.functions().contains_key(*k)) {
            return Err(Error::InvalidStructure(format!("`{extra}` is not a function symbol")));
        }
        for name in lang.constants() {
            match constants.get(name) {
                Some(&v) if v < size => {}
                Some(_) => return Err(Error::InvalidStructure(format!("constant `{name}` is out of range"))),
                None => return Err(Error::InvalidStructure(format!("constant `{name}` has no value"))),
            }
        }
        if let Some(extra) = constants.keys().find(|k| !lang.constants().contains(*k)) {
            return Err(Error::InvalidStructure(format!("`{extra}` is not a constant symbol")));
        }
        Ok(Self { lang, size, relations, functions, constants })
    }

    pub fn builder(lang: impl Into<Arc<Language>>, size: usize) -> StructureBuilder {
        StructureBuilder {
            lang: lang.into(),
            size,
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
            constants: BTreeMap::new(),
        }
    }

    /// A bare set over the empty language.
    pub fn bare(size: usize) -> Self {
        Self::builder(Language::empty(), size).build().expect("bare sets are well formed")
    }

    pub fn lang(&self) -> &Language {
        &self.lang
    }

    pub fn lang_arc(&self) -> &Arc<Language> {
        &self.lang
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn universe(&self) -> ElemSet {
        ElemSet::full(self.size)
    }

    pub fn relation(&self, name: &str) -> &BTreeSet<Vec<usize>> {
        &self.relations[name]
    }

    pub fn relations(&self) -> &BTreeMap<String, BTreeSet<Vec<usize>>> {
        &self.relations
    }

    pub fn function_table(&self, name: &str) -> &[usize] {
        &self.functions[name]
    }

    pub fn functions(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.functions
    }

    pub fn apply(&self, name: &str, args: &[usize]) -> usize {
        self.functions[name][tuple_index(args, self.size)]
    }

    pub fn constant(&self, name: &str) -> usize {
        self.constants[name]
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.constants
    }

    /// The set of constant values.
    pub fn constant_values(&self) -> ElemSet {
        self.constants.values().copied().collect()
    }

    /// Transports the structure along a bijection `perm: old -> new`.
    pub fn relabel(&self, perm: &[usize]) -> FinStructure {
        let n = self.size;
        debug_assert_eq!(perm.len(), n);
        let mut inv = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            inv[new] = old;
        }
        let relations = self
            .relations
            .iter()
            .map(|(k, ts)| (k.clone(), ts.iter().map(|t| t.iter().map(|&x| perm[x]).collect()).collect()))
            .collect();
        let functions = self
            .functions
            .iter()
            .map(|(k, table)| {
                let arity = self.lang.functions()[k];
                let all: Vec<usize> = (0..n).collect();
                let new_table = tuples_over(&all, arity)
                    .into_iter()
                    .map(|new_args| {
                        let old_args: Vec<usize> = new_args.iter().map(|&x| inv[x]).collect();
                        perm[table[tuple_index(&old_args, n)]]
                    })
                    .collect();
                (k.clone(), new_table)
            })
            .collect();
        let constants = self.constants.iter().map(|(k, &v)| (k.clone(), perm[v])).collect();
        FinStructure { lang: self.lang.clone(), size: n, relations, functions, constants }
    }

    /// Least representative of the isomorphism class under the derived order,
    /// by brute force over all relabelings. Intended for small universes.
    pub fn canonical_form(&self) -> FinStructure {
        permutations(self.size)
            .into_iter()
            .map(|p| self.relabel(&p))
            .min()
            .unwrap_or_else(|| self.clone())
    }

    /// Checks closure of `subset` under functions and constants; on failure
    /// returns a description of the violating application.
    pub fn closure_violation(&self, subset: ElemSet) -> Option<String> {
        for (name, &v) in &self.constants {
            if !subset.contains(v) {
                return Some(format!("constant {name} = {v} is outside the subset"));
            }
        }
        let elems = subset.to_vec();
        for (name, &arity) in self.lang.functions() {
            for args in tuples_over(&elems, arity) {
                let v = self.apply(name, &args);
                if !subset.contains(v) {
                    return Some(format!("{name}{args:?} = {v} is outside the subset"));
                }
            }
        }
        None
    }

    /// The substructure induced on `subset`, re-indexed in increasing order.
    /// Returns it together with the renaming `new -> old`.
    pub fn induced(&self, subset: ElemSet) -> Result<(FinStructure, Vec<usize>)> {
        if !subset.is_subset(self.universe()) {
            return Err(Error::NotClosed("subset is not contained in the universe".into()));
        }
        if let Some(v) = self.closure_violation(subset) {
            return Err(Error::NotClosed(v));
        }
        let renaming = subset.to_vec();
        let mut position = vec![usize::MAX; self.size];
        for (new, &old) in renaming.iter().enumerate() {
            position[old] = new;
        }
        let m = renaming.len();
        let relations = self
            .relations
            .iter()
            .map(|(k, ts)| {
                let kept = ts
                    .iter()
                    .filter(|t| t.iter().all(|&x| subset.contains(x)))
                    .map(|t| t.iter().map(|&x| position[x]).collect())
                    .collect();
                (k.clone(), kept)
            })
            .collect();
        let all: Vec<usize> = (0..m).collect();
        let functions = self
            .lang
            .functions()
            .iter()
            .map(|(k, &arity)| {
                let table = tuples_over(&all, arity)
                    .into_iter()
                    .map(|args| {
                        let old: Vec<usize> = args.iter().map(|&x| renaming[x]).collect();
                        position[self.apply(k, &old)]
                    })
                    .collect();
                (k.clone(), table)
            })
            .collect();
        let constants = self.constants.iter().map(|(k, &v)| (k.clone(), position[v])).collect();
        let sub = FinStructure { lang: self.lang.clone(), size: m, relations, functions, constants };
        Ok((sub, renaming))
    }

    /// The reduct along `alpha: L -> L'` of this `L'`-structure.
    pub fn reduct(&self, alpha: &LanguageMorphism) -> Result<FinStructure> {
        if alpha.target() != self.lang() {
            return Err(Error::LanguageMismatch("structure is not over the morphism's target".into()));
        }
        let src = alpha.source();
        let map = |s: &str| alpha.apply(s).expect("total symbol map").to_string();
        let relations = src.relations().keys().map(|r| (r.clone(), self.relations[&map(r)].clone())).collect();
        let functions = src.functions().keys().map(|f| (f.clone(), self.functions[&map(f)].clone())).collect();
        let constants = src.constants().iter().map(|c| (c.clone(), self.constants[&map(c)])).collect();
        Ok(FinStructure { lang: Arc::new(src.clone()), size: self.size, relations, functions, constants })
    }

    /// The expansion of this structure to `expanded ⊇ lang` with the given
    /// values for the new constant symbols.
    pub fn expand(&self, expanded: &Arc<Language>, values: &BTreeMap<String, usize>) -> Result<FinStructure> {
        let mut constants = self.constants.clone();
        constants.extend(values.iter().map(|(k, &v)| (k.clone(), v)));
        FinStructure::new(expanded.clone(), self.size, self.relations.clone(), self.functions.clone(), constants)
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                go(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// An injective map between universes. Which structures it relates is
/// tracked by the caller.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn new(map: Vec<usize>) -> Self {
        Self { map }
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &Embedding) -> Embedding {
        Embedding { map: f.map.iter().map(|&x| self.map[x]).collect() }
    }

    pub fn image(&self) -> ElemSet {
        self.map.iter().copied().collect()
    }

    pub fn is_injective(&self) -> bool {
        self.image().len() == self.map.len()
    }

    /// Inverse of a bijection onto `{0, .., len-1}`.
    pub fn inverse(&self) -> Embedding {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Embedding { map: inv }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Direct check that `map` is an injective, relation-reflecting map
/// commuting with functions and constants.
pub fn is_embedding(a: &FinStructure, b: &FinStructure, map: &[usize]) -> bool {
    if a.lang() != b.lang() || map.len() != a.size() || map.iter().any(|&x| x >= b.size()) {
        return false;
    }
    let img: ElemSet = map.iter().copied().collect();
    if img.len() != map.len() {
        return false;
    }
    let all: Vec<usize> = (0..a.size()).collect();
    for (name, &arity) in a.lang().relations() {
        for t in tuples_over(&all, arity) {
            let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
            if a.relation(name).contains(&t) != b.relation(name).contains(&image) {
                return false;
            }
        }
    }
    for (name, &arity) in a.lang().functions() {
        for t in tuples_over(&all, arity) {
            let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
            if map[a.apply(name, &t)] != b.apply(name, &image) {
                return false;
            }
        }
    }
    a.constants().iter().all(|(c, &v)| map[v] == b.constant(c))
}

pub fn is_isomorphism(a: &FinStructure, b: &FinStructure, map: &[usize]) -> bool {
    a.size() == b.size() && is_embedding(a, b, map)
}

/// Per element, per (relation, position): number of tuples through it.
fn degree_profile(s: &FinStructure) -> Vec<Vec<usize>> {
    let mut cols = Vec::new();
    for (name, &arity) in s.lang().relations() {
        for p in 0..arity {
            let mut col = vec![0; s.size()];
            for t in s.relation(name) {
                col[t[p]] += 1;
            }
            cols.push(col);
        }
    }
    (0..s.size()).map(|x| cols.iter().map(|c| c[x]).collect()).collect()
}

struct Search<'s> {
    a: &'s FinStructure,
    b: &'s FinStructure,
    deg_a: Vec<Vec<usize>>,
    deg_b: Vec<Vec<usize>>,
    pinned: Vec<Option<usize>>,
    limit: usize,
    same_size_only: bool,
    map: Vec<usize>,
    used: Vec<bool>,
    accept: &'s dyn Fn(&[usize]) -> bool,
    out: Vec<Embedding>,
}

impl Search<'_> {
    fn consistent(&self, x: usize) -> bool {
        let assigned: Vec<usize> = (0..=x).collect();
        let (a, b, map) = (self.a, self.b, &self.map);
        for (name, &arity) in a.lang().relations() {
            let (ra, rb) = (a.relation(name), b.relation(name));
            for t in tuples_over(&assigned, arity) {
                if !t.contains(&x) {
                    continue;
                }
                let image: Vec<usize> = t.iter().map(|&e| map[e]).collect();
                if ra.contains(&t) != rb.contains(&image) {
                    return false;
                }
            }
        }
        for (name, &arity) in a.lang().functions() {
            for t in tuples_over(&assigned, arity) {
                let v = a.apply(name, &t);
                if v > x || (!t.contains(&x) && v != x) {
                    continue;
                }
                let image: Vec<usize> = t.iter().map(|&e| map[e]).collect();
                if map[v] != b.apply(name, &image) {
                    return false;
                }
            }
        }
        true
    }

    fn run(&mut self, x: usize) {
        if self.out.len() >= self.limit {
            return;
        }
        if x == self.a.size() {
            if (self.accept)(&self.map) {
                self.out.push(Embedding { map: self.map.clone() });
            }
            return;
        }
        let candidates: Vec<usize> = match self.pinned[x] {
            Some(y) => vec![y],
            None => (0..self.b.size()).collect(),
        };
        for y in candidates {
            if self.used[y] {
                continue;
            }
            let deg_ok = self.deg_a[x].iter().zip(&self.deg_b[y]).all(|(da, db)| {
                if self.same_size_only { da == db } else { da <= db }
            });
            if !deg_ok {
                continue;
            }
            self.map[x] = y;
            self.used[y] = true;
            if self.consistent(x) {
                self.run(x + 1);
            }
            self.used[y] = false;
            if self.out.len() >= self.limit {
                return;
            }
        }
    }
}

fn search(
    a: &FinStructure,
    b: &FinStructure,
    limit: Option<usize>,
    isos_only: bool,
    accept: &dyn Fn(&[usize]) -> bool,
) -> Vec<Embedding> {
    if a.lang() != b.lang() || a.size() > b.size() || (isos_only && a.size() != b.size()) {
        return Vec::new();
    }
    let mut pinned = vec![None; a.size()];
    for (c, &v) in a.constants() {
        let target = b.constant(c);
        match pinned[v] {
            Some(t) if t != target => return Vec::new(),
            _ => pinned[v] = Some(target),
        }
    }
    let mut s = Search {
        a,
        b,
        deg_a: degree_profile(a),
        deg_b: degree_profile(b),
        pinned,
        limit: limit.unwrap_or(usize::MAX),
        same_size_only: isos_only,
        map: vec![0; a.size()],
        used: vec![false; b.size()],
        accept,
        out: Vec::new(),
    };
    if s.limit > 0 {
        s.run(0);
    }
    s.out
}

/// All strong embeddings `a -> b` in lexicographic order of the map, truncated at `limit`.
pub fn find_embeddings(a: &FinStructure, b: &FinStructure, limit: Option<usize>) -> Vec<Embedding> {
    search(a, b, limit, false, &|_| true)
}

/// Like [`find_embeddings`], keeping only maps accepted by `accept`; the
/// limit counts accepted maps, so the search stops as soon as it is reached.
pub fn find_embeddings_where(
    a: &FinStructure,
    b: &FinStructure,
    limit: Option<usize>,
    accept: &dyn Fn(&[usize]) -> bool,
) -> Vec<Embedding> {
    search(a, b, limit, false, accept)
}

pub fn find_isomorphisms(a: &FinStructure, b: &FinStructure) -> Vec<Embedding> {
    search(a, b, None, true, &|_| true)
}

pub fn first_isomorphism(a: &FinStructure, b: &FinStructure) -> Option<Embedding> {
    search(a, b, Some(1), true, &|_| true).pop()
}

pub fn are_isomorphic(a: &FinStructure, b: &FinStructure) -> bool {
    first_isomorphism(a, b).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digraph(n: usize, edges: &[[usize; 2]]) -> FinStructure {
        FinStructure::builder(Language::from_spec(&["R/2"]).unwrap(), n)
            .relation("R", edges)
            .build()
            .unwrap()
    }

    #[test]
    fn well_formedness_is_checked() {
        let l = Language::from_spec(&["R/2", "f/1!", "c"]).unwrap();
        assert!(FinStructure::builder(l.clone(), 2).relation("R", [[0, 2]]).function("f", vec![0, 1]).constant("c", 0).build().is_err());
        assert!(FinStructure::builder(l.clone(), 2).function("f", vec![0]).constant("c", 0).build().is_err());
        assert!(FinStructure::builder(l.clone(), 2).function("f", vec![0, 1]).build().is_err());
        assert!(FinStructure::builder(l, 2).function("f", vec![1, 0]).constant("c", 1).build().is_ok());
    }

    #[test]
    fn reduct_along_identity_and_to_empty_language() {
        let l = Arc::new(Language::from_spec(&["R/1", "S/1"]).unwrap());
        let m = FinStructure::builder(l.clone(), 2).relation("R", [[0]]).relation("S", [[1]]).build().unwrap();
        assert_eq!(m.reduct(&LanguageMorphism::identity(&l)).unwrap(), m);
        let e = LanguageMorphism::inclusion(&Language::empty(), &l).unwrap();
        assert_eq!(m.reduct(&e).unwrap(), FinStructure::bare(2));
        let r = Language::from_spec(&["R/1"]).unwrap();
        let red = m.reduct(&LanguageMorphism::inclusion(&r, &l).unwrap()).unwrap();
        assert_eq!(red, FinStructure::builder(r, 2).relation("R", [[0]]).build().unwrap());
        assert!(matches!(red.reduct(&e), Err(Error::LanguageMismatch(_))));
    }

    #[test]
    fn induced_substructures() {
        let n = digraph(3, &[[0, 1], [1, 2]]);
        let (full, ren) = n.induced(n.universe()).unwrap();
        assert_eq!(full, n);
        assert_eq!(ren, vec![0, 1, 2]);
        let (sub, ren) = n.induced([1, 2].into_iter().collect()).unwrap();
        assert_eq!(sub, digraph(2, &[[0, 1]]));
        assert_eq!(ren, vec![1, 2]);

        let succ = FinStructure::builder(Language::from_spec(&["s/1!"]).unwrap(), 4)
            .function("s", vec![1, 2, 3, 0])
            .build()
            .unwrap();
        match succ.induced([0, 2].into_iter().collect()) {
            Err(Error::NotClosed(msg)) => assert!(msg.contains("s[0] = 1"), "{msg}"),
            other => panic!("expected NotClosed, got {other:?}"),
        }
    }

    #[test]
    fn embedding_counts() {
        let one = FinStructure::bare(1);
        assert_eq!(find_embeddings(&one, &one, None), vec![Embedding::identity(1)]);
        assert_eq!(find_embeddings(&FinStructure::bare(2), &FinStructure::bare(3), None).len(), 6);
        let a = digraph(2, &[[0, 1]]);
        let b = digraph(2, &[[0, 1], [1, 0]]);
        // strong maps must reflect the missing edge (1,0)
        assert_eq!(find_embeddings(&a, &b, None).len(), 0);
        let b2 = digraph(2, &[[0, 1], [1, 0]]);
        assert_eq!(find_embeddings(&b2, &b, None).len(), 2);
    }

    #[test]
    fn embeddings_are_lexicographic_and_limited() {
        let all = find_embeddings(&FinStructure::bare(2), &FinStructure::bare(3), None);
        let maps: Vec<Vec<usize>> = all.iter().map(|e| e.map.clone()).collect();
        assert_eq!(maps, vec![vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 2], vec![2, 0], vec![2, 1]]);
        assert_eq!(find_embeddings(&FinStructure::bare(2), &FinStructure::bare(3), Some(2)).len(), 2);
    }

    #[test]
    fn three_cycle_isomorphisms() {
        let c = digraph(3, &[[0, 1], [1, 2], [2, 0]]);
        let d = digraph(3, &[[0, 2], [2, 1], [1, 0]]);
        assert_eq!(find_isomorphisms(&c, &d).len(), 3);
        assert!(find_isomorphisms(&c, &digraph(2, &[])).is_empty());
        assert!(is_isomorphism(&c, &c, &[0, 1, 2]));
    }

    #[test]
    fn constants_pin_the_map() {
        let l = Language::from_spec(&["c"]).unwrap();
        let a = FinStructure::builder(l.clone(), 1).constant("c", 0).build().unwrap();
        let b = FinStructure::builder(l, 3).constant("c", 2).build().unwrap();
        let es = find_embeddings(&a, &b, None);
        assert_eq!(es, vec![Embedding::new(vec![2])]);
    }

    #[test]
    fn canonical_forms_identify_isomorphic_structures() {
        let c = digraph(3, &[[0, 1], [1, 2], [2, 0]]);
        let d = digraph(3, &[[0, 2], [2, 1], [1, 0]]);
        assert_eq!(c.canonical_form(), d.canonical_form());
        assert_ne!(c.canonical_form(), digraph(3, &[[0, 1], [1, 2]]).canonical_form());
    }
}
