use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{AxiomVerdict, Scope, Witness};
use crate::construct::{pullback_fragment, GluedArrow, Gluing, Pullback, PullbackConfig};
use crate::error::{Error, Result};
use crate::fragment::{AecFragment, KEmbedding};
use crate::lang::LanguageMorphism;
use crate::par;
use crate::theory::{all_closed_theories, connection_partition, ClosedTheory, TheoryPartition};

/// A span of reduct morphisms together with its pullback and the three
/// connection partitions the global axioms quantify over.
#[derive(Debug, Clone)]
pub struct GlobalConfig {
    pub span: PullbackConfig,
    pub pullback: Pullback,
    pub base_partition: TheoryPartition,
    pub left_partition: TheoryPartition,
    pub right_partition: TheoryPartition,
}

impl GlobalConfig {
    pub fn new(span: PullbackConfig, budget: usize) -> Result<Self> {
        let pullback = pullback_fragment(&span, budget)?;
        Ok(Self {
            base_partition: connection_partition(&span.base),
            left_partition: connection_partition(span.left_fragment()),
            right_partition: connection_partition(span.right_fragment()),
            span,
            pullback,
        })
    }

    fn base(&self) -> &AecFragment {
        &self.span.base
    }

    /// Pairs `(M0, M1)` of representatives whose reducts are `≡_K`.
    fn equivalent_pairs(&self) -> Vec<(usize, usize)> {
        let (k0, k1) = (self.span.left_fragment(), self.span.right_fragment());
        let mut out = Vec::new();
        for m0 in (0..k0.len()).filter(|&i| k0.iso_class(i) == i) {
            for m1 in (0..k1.len()).filter(|&i| k1.iso_class(i) == i) {
                let (r0, r1) = (self.span.left.image_index(m0), self.span.right.image_index(m1));
                if self.base_partition.equivalent(r0, r1) {
                    out.push((m0, m1));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Extend the left structure, embed the right one's reduct.
    LeftExtends,
    /// Extend the right structure, embed the left one's reduct.
    RightExtends,
}

/// One orientation of the transversal property: for equivalent reducts there
/// is an extension `M0 ≼ N0` in the extending fragment and an arrow from the
/// other structure's reduct into `N0`'s reduct.
pub fn check_trp_oriented(g: &GlobalConfig, o: Orientation) -> AxiomVerdict {
    let (ext, ext_leg, other_leg) = match o {
        Orientation::LeftExtends => (g.span.left_fragment(), &g.span.left, &g.span.right),
        Orientation::RightExtends => (g.span.right_fragment(), &g.span.right, &g.span.left),
    };
    let pairs = g.equivalent_pairs();
    let failure = par::find_first(&pairs, |&(m0, m1)| {
        let (me, mo) = match o {
            Orientation::LeftExtends => (m0, m1),
            Orientation::RightExtends => (m1, m0),
        };
        let source = other_leg.image_index(mo);
        let ok = (0..ext.len())
            .any(|n| ext.has_k_arrow(me, n) && g.base().has_k_arrow(source, ext_leg.image_index(n)));
        (!ok).then_some(Witness::Transversal { left: m0, right: m1 })
    });
    let name = match o {
        Orientation::LeftExtends => "trp_left",
        Orientation::RightExtends => "trp_right",
    };
    AxiomVerdict::new(name, pairs.len(), failure)
}

/// Both orientations; the property holds only when each does.
pub fn check_trp(g: &GlobalConfig) -> AxiomVerdict {
    let parts = vec![
        check_trp_oriented(g, Orientation::LeftExtends),
        check_trp_oriented(g, Orientation::RightExtends),
    ];
    let failure = parts.iter().find_map(|p| p.witness.clone());
    AxiomVerdict { parts, ..AxiomVerdict::new("trp", g.equivalent_pairs().len(), failure) }
}

/// For equivalent reducts some pullback structure `P'` receives `M0` in `K0`
/// and `M1` in `K1` through its two projections.
pub fn check_grp(g: &GlobalConfig) -> AxiomVerdict {
    let (k0, k1) = (g.span.left_fragment(), g.span.right_fragment());
    let p = &g.pullback;
    let pairs = g.equivalent_pairs();
    let failure = par::find_first(&pairs, |&(m0, m1)| {
        let ok = (0..p.fragment.len()).any(|q| {
            k0.has_k_arrow(m0, p.proj_left.image_index(q)) && k1.has_k_arrow(m1, p.proj_right.image_index(q))
        });
        (!ok).then_some(Witness::Transversal { left: m0, right: m1 })
    });
    AxiomVerdict::new("grp", pairs.len(), failure)
}

/// If no pullback structure has its reducts in `t0` and `t1`, the induced
/// theories over the base are disjoint.
pub fn check_cip(g: &GlobalConfig, t0: &ClosedTheory, t1: &ClosedTheory) -> AxiomVerdict {
    let (p0, p1) = (&g.left_partition, &g.right_partition);
    let p = &g.pullback;
    let joint = (0..p.fragment.len())
        .any(|q| t0.contains(p0, p.proj_left.image_index(q)) && t1.contains(p1, p.proj_right.image_index(q)));
    let i0 = g.span.left.induced_theory(t0, p0, &g.base_partition);
    let i1 = g.span.right.induced_theory(t1, p1, &g.base_partition);
    let shared = (0..g.base().len()).find(|&k| i0.contains(&g.base_partition, k) && i1.contains(&g.base_partition, k));
    let failure = match (joint, shared) {
        (false, Some(k)) => Some(Witness::Theories { left: t0.clone(), right: t1.clone(), shared: k }),
        _ => None,
    };
    AxiomVerdict::new("cip", 1, failure)
}

const THEORY_PAIR_CAP: usize = 16;

/// Every pair of closed theories, or a seeded sample of [`THEORY_PAIR_CAP`] of them.
pub fn all_theory_pairs(g: &GlobalConfig, seed: u64) -> (Vec<(ClosedTheory, ClosedTheory)>, bool) {
    let left = all_closed_theories(&g.left_partition);
    let right = all_closed_theories(&g.right_partition);
    let mut pairs: Vec<(ClosedTheory, ClosedTheory)> =
        left.iter().flat_map(|a| right.iter().map(move |b| (a.clone(), b.clone()))).collect();
    if pairs.len() <= THEORY_PAIR_CAP {
        return (pairs, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    pairs.truncate(THEORY_PAIR_CAP);
    (pairs, true)
}

pub fn check_cip_all(g: &GlobalConfig, seed: u64) -> AxiomVerdict {
    let (pairs, sampled) = all_theory_pairs(g, seed);
    let verdicts = par::map(&pairs, |(a, b)| check_cip(g, a, b));
    let failure = verdicts.into_iter().find_map(|v| v.witness);
    let v = AxiomVerdict::new("cip", pairs.len(), failure);
    if sampled {
        v.with_note(format!("seeded sample of {} theory pairs (seed {seed})", pairs.len()))
    } else {
        v.with_note("all theory pairs")
    }
}

/// A span `(N0, K0) <- (M, K) -> (N1, K1)` in the gluing category.
#[derive(Debug, Clone)]
pub struct GapInstance {
    pub gluing: Gluing,
    pub left: GluedArrow,
    pub right: GluedArrow,
}

/// A fragment of the gluing with the language morphisms into its language.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub fragment: usize,
    pub beta_left: LanguageMorphism,
    pub beta_right: LanguageMorphism,
}

/// Searches the pool for `P''` and arrows `(j0, β0)`, `(j1, β1)` closing the
/// span. A negative answer only means no candidate in the pool works.
pub fn check_gap(inst: &GapInstance, pool: &[Candidate]) -> Result<AxiomVerdict> {
    if pool.is_empty() {
        return Err(Error::EmptyCandidatePool);
    }
    let (l, r) = (&inst.left, &inst.right);
    if l.source != r.source {
        return Err(Error::ObjectMismatch("the two legs start at different objects".into()));
    }
    let g = &inst.gluing;
    let mut checked = 0;
    for (c, cand) in pool.iter().enumerate() {
        if cand.beta_left.compose(&l.phi)? != cand.beta_right.compose(&r.phi)? {
            continue;
        }
        let frag: &Arc<AecFragment> = g
            .fragments
            .get(cand.fragment)
            .ok_or_else(|| Error::ObjectMismatch(format!("no fragment {}", cand.fragment)))?;
        for s in 0..frag.len() {
            checked += 1;
            let apex = crate::construct::GluedObject { fragment: cand.fragment, structure: s };
            let lefts = g.arrows_over(l.target, apex, &cand.beta_left)?;
            let by_composite: HashMap<Vec<usize>, &GluedArrow> =
                lefts.iter().map(|j| (j.map.after(&l.map).map, j)).collect();
            for j1 in g.arrows_over(r.target, apex, &cand.beta_right)? {
                if let Some(j0) = by_composite.get(&j1.map.after(&r.map).map) {
                    let mut v = AxiomVerdict::new("gap", checked, None);
                    v.scope = Scope::RelativeToPool;
                    v.witness =
                        Some(Witness::Glue { candidate: c, structure: s, left: j0.map.clone(), right: j1.map.clone() });
                    return Ok(v);
                }
            }
        }
    }
    let mut v = AxiomVerdict::new("gap", checked, Some(Witness::Pair { left: l.target.structure, right: r.target.structure }))
        .with_note("no candidate in the pool closes the span");
    v.scope = Scope::RelativeToPool;
    Ok(v)
}

/// The gluing over `[K, K0, K1, K']`, in that order.
pub fn config_gluing(g: &GlobalConfig) -> Gluing {
    Gluing::new(vec![
        g.span.base.clone(),
        g.span.left_fragment().clone(),
        g.span.right_fragment().clone(),
        g.pullback.fragment.clone(),
    ])
}

/// Arrows of the config's gluing along identities, the two legs, the
/// pushout injections and the diagonal, at most `cap` of them.
pub fn config_arrows(g: &GlobalConfig, cap: usize) -> Result<Vec<GluedArrow>> {
    let gl = config_gluing(g);
    let po = &g.span.pushout;
    let id = |i: usize| LanguageMorphism::identity(gl.fragments[i].lang());
    let edges = [
        (0, 0, id(0)),
        (1, 1, id(1)),
        (2, 2, id(2)),
        (3, 3, id(3)),
        (0, 1, g.span.left.alpha.clone()),
        (0, 2, g.span.right.alpha.clone()),
        (1, 3, po.inj_left.clone()),
        (2, 3, po.inj_right.clone()),
        (0, 3, po.diagonal.clone()),
    ];
    let mut arrows = Vec::new();
    for (s, t, phi) in &edges {
        for a in 0..gl.fragments[*s].len() {
            for b in 0..gl.fragments[*t].len() {
                let src = crate::construct::GluedObject { fragment: *s, structure: a };
                let tgt = crate::construct::GluedObject { fragment: *t, structure: b };
                for arrow in gl.arrows_over(src, tgt, phi)? {
                    if arrows.len() == cap {
                        return Ok(arrows);
                    }
                    arrows.push(arrow);
                }
            }
        }
    }
    Ok(arrows)
}

/// GAP for the spans `(N0, K0) <- (M, K) -> (N1, K1)` along the config's legs,
/// with the pullback and its two injections as the only candidate. At most
/// `cap` spans are examined, in the order of their objects and maps.
pub fn check_gap_config(g: &GlobalConfig, cap: usize) -> Result<AxiomVerdict> {
    let gl = config_gluing(g);
    let pool = [Candidate {
        fragment: 3,
        beta_left: g.span.pushout.inj_left.clone(),
        beta_right: g.span.pushout.inj_right.clone(),
    }];
    let (a0, a1) = (&g.span.left.alpha, &g.span.right.alpha);
    let obj = |fragment, structure| crate::construct::GluedObject { fragment, structure };
    let mut spans = Vec::new();
    'outer: for m in (0..g.base().len()).filter(|&m| g.base().iso_class(m) == m) {
        for n0 in 0..gl.fragments[1].len() {
            let lefts = gl.arrows_over(obj(0, m), obj(1, n0), a0)?;
            if lefts.is_empty() {
                continue;
            }
            for n1 in 0..gl.fragments[2].len() {
                for r in gl.arrows_over(obj(0, m), obj(2, n1), a1)? {
                    for l in &lefts {
                        if spans.len() == cap {
                            break 'outer;
                        }
                        spans.push((l.clone(), r.clone()));
                    }
                }
            }
        }
    }
    let truncated = spans.len() == cap;
    let verdicts = par::map(&spans, |(l, r)| {
        check_gap(&GapInstance { gluing: gl.clone(), left: l.clone(), right: r.clone() }, &pool)
    });
    let mut failure = None;
    for (v, (l, r)) in verdicts.into_iter().zip(&spans) {
        if !v?.holds && failure.is_none() {
            failure = Some(Witness::Span {
                left: KEmbedding { source: l.source.structure, target: l.target.structure, map: l.map.clone() },
                right: KEmbedding { source: r.source.structure, target: r.target.structure, map: r.map.clone() },
            });
        }
    }
    let mut v = AxiomVerdict::new("gap", spans.len(), failure);
    v.scope = Scope::RelativeToPool;
    let note = if truncated { format!("first {cap} spans; candidate pool = the pullback") } else { "candidate pool = the pullback".into() };
    Ok(v.with_note(note))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{full_fragment, terminal_fragment, GluedObject, DEFAULT_BUDGET};
    use crate::fragment::StrongPair;
    use crate::lang::Language;
    use crate::structure::{Embedding, FinStructure};
    use crate::theory::check_morphism;

    fn identity_config(k: AecFragment) -> GlobalConfig {
        let k = Arc::new(k);
        let id = LanguageMorphism::identity(k.lang());
        let leg = check_morphism(&id, &k, &k).unwrap();
        GlobalConfig::new(PullbackConfig::new(leg.clone(), leg).unwrap(), DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn identity_span_over_sets() {
        let g = identity_config(terminal_fragment(3));
        let trp = check_trp(&g);
        assert!(trp.holds && trp.parts.len() == 2);
        assert!(check_grp(&g).holds);
        let cip = check_cip_all(&g, 0);
        assert!(cip.holds);
        assert!(check_cip(&g, &ClosedTheory::empty(), &ClosedTheory::empty()).holds);
    }

    #[test]
    fn maximal_left_structure_breaks_trp() {
        // K = sets of size 1, 2. K0 lists only the 1-set with no proper extension;
        // K1 lists the 2-set. Their reducts are equivalent in K, but nothing
        // above the 1-set in K0 receives the 2-set.
        let k = Arc::new(terminal_fragment(2));
        let id = LanguageMorphism::identity(k.lang());
        let only = |n: usize| {
            let s = vec![FinStructure::bare(n)];
            let p = vec![StrongPair { lower: 0, upper: 0, inclusion: Embedding::identity(n) }];
            Arc::new(AecFragment::unnamed(Language::empty(), s, p).unwrap())
        };
        let left = check_morphism(&id, &only(1), &k).unwrap();
        let right = check_morphism(&id, &only(2), &k).unwrap();
        let g = GlobalConfig::new(PullbackConfig::new(left, right).unwrap(), DEFAULT_BUDGET).unwrap();
        let trp = check_trp(&g);
        assert!(!trp.holds);
        assert!(!trp.parts[0].holds && trp.parts[1].holds);
        assert_eq!(trp.witness, Some(Witness::Transversal { left: 0, right: 0 }));
        // the pullback is empty, so GRP fails too
        assert!(g.pullback.fragment.is_empty());
        assert!(!check_grp(&g).holds);
        let cip = check_cip_all(&g, 0);
        assert!(!cip.holds);
    }

    #[test]
    fn gap_over_identities() {
        let k = Arc::new(terminal_fragment(3));
        let gl = Gluing::new(vec![k.clone()]);
        let id = LanguageMorphism::identity(k.lang());
        let o = |s| GluedObject { fragment: 0, structure: s };
        let left = gl.arrows_over(o(0), o(1), &id).unwrap()[0].clone();
        let right = gl.arrows_over(o(0), o(1), &id).unwrap()[1].clone();
        let inst = GapInstance { gluing: gl, left, right };
        let pool = vec![Candidate { fragment: 0, beta_left: id.clone(), beta_right: id.clone() }];
        let v = check_gap(&inst, &pool).unwrap();
        assert!(v.holds && v.scope == Scope::RelativeToPool);
        assert!(matches!(check_gap(&inst, &[]), Err(Error::EmptyCandidatePool)));
    }

    #[test]
    fn gap_matches_grp_on_the_pullback() {
        let l0 = Language::from_spec(&["R/1"]).unwrap();
        let l1 = Language::from_spec(&["S/1"]).unwrap();
        let k = Arc::new(terminal_fragment(2));
        let a0 = LanguageMorphism::inclusion(&Language::empty(), &l0).unwrap();
        let a1 = LanguageMorphism::inclusion(&Language::empty(), &l1).unwrap();
        let k0 = Arc::new(full_fragment(&l0, 2, DEFAULT_BUDGET).unwrap());
        let k1 = Arc::new(full_fragment(&l1, 2, DEFAULT_BUDGET).unwrap());
        let span = PullbackConfig::new(check_morphism(&a0, &k0, &k).unwrap(), check_morphism(&a1, &k1, &k).unwrap())
            .unwrap();
        let g = GlobalConfig::new(span, DEFAULT_BUDGET).unwrap();
        assert!(check_grp(&g).holds);
        let whole = check_gap_config(&g, 10_000).unwrap();
        assert!(whole.holds && whole.checked > 0, "{whole:?}");
        let gl = Gluing::new(vec![k.clone(), k0.clone(), k1.clone(), g.pullback.fragment.clone()]);
        let pool = vec![Candidate {
            fragment: 3,
            beta_left: g.span.pushout.inj_left.clone(),
            beta_right: g.span.pushout.inj_right.clone(),
        }];
        let m = GluedObject { fragment: 0, structure: 0 };
        for n0 in 0..k0.len() {
            for n1 in 0..k1.len() {
                let t0 = GluedObject { fragment: 1, structure: n0 };
                let t1 = GluedObject { fragment: 2, structure: n1 };
                let (Some(h0), Some(h1)) =
                    (gl.arrows_over(m, t0, &a0).unwrap().first().cloned(), gl.arrows_over(m, t1, &a1).unwrap().first().cloned())
                else {
                    continue;
                };
                let inst = GapInstance { gluing: gl.clone(), left: h0, right: h1 };
                assert!(check_gap(&inst, &pool).unwrap().holds, "{n0} {n1}");
            }
        }
    }
}
