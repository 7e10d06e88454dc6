use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::elemset::ElemSet;
use crate::error::{Error, Result};
use crate::fragment::AecFragment;
use crate::lang::{pushout, Language, LanguagePushout, SymbolKind};
use crate::par;
use crate::structure::{permutations, FinStructure};
use crate::theory::{check_morphism, AecMorphism};

/// A span `K0 -> K <- K1` of reduct morphisms over `L0 <- L -> L1`.
#[derive(Debug, Clone)]
pub struct PullbackConfig {
    pub base: Arc<AecFragment>,
    pub left: AecMorphism,
    pub right: AecMorphism,
    pub pushout: LanguagePushout,
}

impl PullbackConfig {
    pub fn new(left: AecMorphism, right: AecMorphism) -> Result<Self> {
        if left.target != right.target {
            return Err(Error::SourceTargetMismatch("the two legs reduce to different base fragments".into()));
        }
        let pushout = pushout(&left.alpha, &right.alpha)?;
        Ok(Self { base: left.target.clone(), left, right, pushout })
    }

    pub fn left_fragment(&self) -> &Arc<AecFragment> {
        &self.left.source
    }

    pub fn right_fragment(&self) -> &Arc<AecFragment> {
        &self.right.source
    }
}

/// `K'` over the pushout apex with its two projections `π0: K' -> K0`, `π1: K' -> K1`.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub fragment: Arc<AecFragment>,
    pub proj_left: AecMorphism,
    pub proj_right: AecMorphism,
}

fn relabelings(s: &FinStructure) -> BTreeSet<FinStructure> {
    permutations(s.size()).iter().map(|p| s.relabel(p)).collect()
}

/// Glues an `L0`-structure and an `L1`-structure on the same universe into an apex structure.
fn combine(cfg: &PullbackConfig, apex: &Arc<Language>, a0: &FinStructure, a1: &FinStructure) -> Result<FinStructure> {
    let po = &cfg.pushout;
    let mut relations = BTreeMap::new();
    let mut functions = BTreeMap::new();
    let mut constants = BTreeMap::new();
    for (s, kind) in apex.symbols() {
        let (from, name) = match po.inj_left.preimage(s) {
            Some(n) => (a0, n),
            None => (a1, po.inj_right.preimage(s).ok_or_else(|| Error::Internal(format!("apex symbol {s} has no preimage")))?),
        };
        match kind {
            SymbolKind::Relation(_) => {
                relations.insert(s.to_string(), from.relation(name).clone());
            }
            SymbolKind::Function(_) => {
                functions.insert(s.to_string(), from.function_table(name).to_vec());
            }
            SymbolKind::Constant => {
                constants.insert(s.to_string(), from.constant(name));
            }
        }
    }
    FinStructure::new(apex.clone(), a0.size(), relations, functions, constants)
}

/// Every apex structure whose two reducts are literally relabelings of members
/// of `K0` and `K1` that agree on `L`, up to isomorphism. A set `X` is strong
/// when it is strong in both reducts.
pub fn pullback_fragment(cfg: &PullbackConfig, budget: usize) -> Result<Pullback> {
    let apex = Arc::new(cfg.pushout.apex.clone());
    let (k0, k1) = (cfg.left_fragment(), cfg.right_fragment());
    let mut spent = 0usize;
    let mut charge = |n: usize, what: &str| {
        spent = spent.saturating_add(n);
        if spent > budget {
            Err(Error::SizeBoundExceeded { budget, what: what.to_string() })
        } else {
            Ok(())
        }
    };

    let mut right_index: HashMap<FinStructure, Vec<FinStructure>> = HashMap::new();
    for s in k1.structures() {
        charge((1..=s.size()).product(), "relabelings of the right fragment")?;
        for r in relabelings(s) {
            right_index.entry(r.reduct(&cfg.right.alpha)?).or_default().push(r);
        }
    }
    let mut left: Vec<FinStructure> = Vec::new();
    for s in k0.structures() {
        charge((1..=s.size()).product(), "relabelings of the left fragment")?;
        left.extend(relabelings(s));
    }
    let combos: usize = left
        .iter()
        .map(|a0| a0.reduct(&cfg.left.alpha).map(|r| right_index.get(&r).map_or(0, Vec::len)))
        .sum::<Result<usize>>()?;
    charge(combos, "apex structures")?;

    let per_left = par::map(&left, |a0| -> Result<Vec<FinStructure>> {
        let r = a0.reduct(&cfg.left.alpha)?;
        right_index
            .get(&r)
            .into_iter()
            .flatten()
            .map(|a1| combine(cfg, &apex, a0, a1).map(|m| m.canonical_form()))
            .collect()
    });
    let mut canon = BTreeSet::new();
    for r in per_left {
        canon.extend(r?);
    }
    let structures: Vec<FinStructure> = canon.into_iter().collect();

    let pi0 = &cfg.pushout.inj_left;
    let pi1 = &cfg.pushout.inj_right;
    let down: Vec<BTreeSet<ElemSet>> = par::map(&structures, |m| {
        let d0 = k0.strong_subsets_of(&m.reduct(pi0).expect("apex structure")).unwrap_or_default();
        let d1 = k1.strong_subsets_of(&m.reduct(pi1).expect("apex structure")).unwrap_or_default();
        d0.intersection(&d1).copied().collect()
    });
    let names = (0..structures.len()).map(|i| format!("P{i}")).collect();
    let fragment = Arc::new(AecFragment::from_strong_predicate(apex, structures, names, |j, x| down[j].contains(&x))?);
    let project = |alpha, target: &Arc<AecFragment>| {
        check_morphism(alpha, &fragment, target)
            .map_err(|e| Error::Internal(format!("pullback projection is not a morphism: {e:?}")))
    };
    let proj_left = project(pi0, k0)?;
    let proj_right = project(pi1, k1)?;
    Ok(Pullback { fragment, proj_left, proj_right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{diagram_expansion, full_fragment, terminal_fragment, DEFAULT_BUDGET};
    use crate::lang::LanguageMorphism;
    use crate::elemset::ElemSet;
    use crate::lang::Language;
    use crate::structure::{are_isomorphic, FinStructure};

    fn leg(alpha: LanguageMorphism, source: AecFragment, target: &Arc<AecFragment>) -> AecMorphism {
        check_morphism(&alpha, &Arc::new(source), target).unwrap()
    }

    fn same_up_to_iso(a: &AecFragment, b: &AecFragment) -> bool {
        a.structures().iter().all(|s| b.member_up_to_iso(s).is_some())
            && b.structures().iter().all(|s| a.member_up_to_iso(s).is_some())
    }

    #[test]
    fn identities_over_the_terminal_fragment() {
        let k = Arc::new(terminal_fragment(3));
        let id = LanguageMorphism::identity(k.lang());
        let cfg = PullbackConfig::new(leg(id.clone(), terminal_fragment(3), &k), leg(id, terminal_fragment(3), &k)).unwrap();
        let p = pullback_fragment(&cfg, DEFAULT_BUDGET).unwrap();
        assert!(same_up_to_iso(&p.fragment, &k));
        let r = p.fragment.validate();
        assert!(r.all_pass);
        assert_eq!(r.ls_number, Some(0));
    }

    #[test]
    fn two_unary_predicates_over_sets() {
        let l0 = Language::from_spec(&["R/1"]).unwrap();
        let l1 = Language::from_spec(&["S/1"]).unwrap();
        let k = Arc::new(terminal_fragment(2));
        let a0 = LanguageMorphism::inclusion(&Language::empty(), &l0).unwrap();
        let a1 = LanguageMorphism::inclusion(&Language::empty(), &l1).unwrap();
        let cfg = PullbackConfig::new(
            leg(a0, full_fragment(&l0, 2, DEFAULT_BUDGET).unwrap(), &k),
            leg(a1, full_fragment(&l1, 2, DEFAULT_BUDGET).unwrap(), &k),
        )
        .unwrap();
        let p = pullback_fragment(&cfg, DEFAULT_BUDGET).unwrap();
        // size 1: 4 element types; size 2: multisets of two types out of 4 = 10
        assert_eq!(p.fragment.len(), 14);
        let full = full_fragment(&cfg.pushout.apex, 2, DEFAULT_BUDGET).unwrap();
        assert!(same_up_to_iso(&p.fragment, &full));
        assert!(p.fragment.validate().all_pass);
        assert!(matches!(pullback_fragment(&cfg, 20), Err(Error::SizeBoundExceeded { .. })));
    }

    #[test]
    fn diagram_expansion_is_a_pullback() {
        let k = Arc::new(terminal_fragment(2));
        let d = diagram_expansion(&k, &["c".to_string()]).unwrap();
        let id = LanguageMorphism::identity(k.lang());
        let incl = d.inclusion.clone();
        let cfg = PullbackConfig::new(
            leg(incl.clone(), (*d.fragment).clone(), &k),
            leg(id, terminal_fragment(2), &k),
        )
        .unwrap();
        let p = pullback_fragment(&cfg, DEFAULT_BUDGET).unwrap();
        assert!(same_up_to_iso(&p.fragment, &d.fragment));
        for (i, s) in p.fragment.structures().iter().enumerate() {
            let (j, iso) = d.fragment.member_up_to_iso(s).unwrap();
            assert!(are_isomorphic(s, d.fragment.structure(j)));
            let moved: BTreeSet<ElemSet> = d.fragment.strong_subsets(j).iter().map(|x| x.map(&iso.map)).collect();
            assert_eq!(&moved, p.fragment.strong_subsets(i));
        }
    }

    /// A marked point in a 3-set whose strong subsets are the whole set and
    /// the two pairs through the marked point (for `R`) or through one
    /// chosen point (for `S`), plus the pairs these induce.
    fn marked(symbol: &str, marked: usize, pairs: [[usize; 2]; 2]) -> AecFragment {
        let lang = Arc::new(Language::from_spec(&[&format!("{symbol}/1")]).unwrap());
        let three = FinStructure::builder(lang.clone(), 3).relation(symbol, [vec![marked]]).build().unwrap();
        let two = FinStructure::builder(lang.clone(), 2).relation(symbol, [vec![0]]).build().unwrap();
        let strong: Vec<ElemSet> = pairs.iter().map(|p| p.iter().copied().collect()).collect();
        AecFragment::from_strong_predicate(lang, vec![two, three], vec!["P".into(), "T".into()], move |k, x| {
            x.len() == [2, 3][k] || (k == 1 && strong.contains(&x))
        })
        .unwrap()
    }

    #[test]
    fn ls_number_can_grow_by_addition() {
        // Each side needs one extra element to cover a point, but the points
        // they can cover cheaply differ, and a pullback subset must be strong
        // on both sides at once.
        let k = Arc::new(terminal_fragment(3));
        let e = Language::empty();
        let k0 = marked("R", 1, [[0, 1], [1, 2]]);
        let k1 = marked("S", 0, [[0, 1], [0, 2]]);
        assert!(k0.validate().all_pass && k1.validate().all_pass);
        let a0 = LanguageMorphism::inclusion(&e, k0.lang()).unwrap();
        let a1 = LanguageMorphism::inclusion(&e, k1.lang()).unwrap();
        let inputs = [k.validate().ls_number, k0.validate().ls_number, k1.validate().ls_number];
        assert_eq!(inputs, [Some(0), Some(1), Some(1)]);
        let cfg = PullbackConfig::new(leg(a0, k0, &k), leg(a1, k1, &k)).unwrap();
        let p = pullback_fragment(&cfg, DEFAULT_BUDGET).unwrap();
        let report = p.fragment.validate();
        assert!(report.all_pass);
        assert_eq!(report.ls_number, Some(2));
    }
}
