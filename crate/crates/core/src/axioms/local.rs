use std::collections::HashSet;

use super::{ArrowTable, AxiomVerdict, Witness};
use crate::fragment::{AecFragment, KEmbedding};
use crate::par;
use crate::structure::{find_embeddings, Embedding};
use crate::theory::connection_partition;

fn arrow(source: usize, target: usize, map: &Embedding) -> KEmbedding {
    KEmbedding { source, target, map: map.clone() }
}

/// Smallest apex closing `f0`, `f1` (both out of the same structure), if any.
fn amalgam(t: &ArrowTable, n0: usize, f0: &Embedding, n1: usize, f1: &Embedding) -> Option<(usize, Embedding, Embedding)> {
    t.reps.iter().find_map(|&p| {
        let via0: Vec<(Vec<usize>, &Embedding)> = t.get(n0, p).iter().map(|g| (g.after(f0).map, g)).collect();
        let keys: HashSet<&Vec<usize>> = via0.iter().map(|(k, _)| k).collect();
        t.get(n1, p).iter().find_map(|g1| {
            let key = g1.after(f1).map;
            if !keys.contains(&key) {
                return None;
            }
            let g0 = via0.iter().find(|(k, _)| *k == key).unwrap().1;
            Some((p, g0.clone(), g1.clone()))
        })
    })
}

/// Every span `N0 <- M -> N1` of representatives has an amalgam among the representatives.
pub fn check_ap(f: &AecFragment) -> AxiomVerdict {
    let t = ArrowTable::new(f);
    let reps = &t.reps;
    let spans: Vec<(usize, usize, usize)> = reps
        .iter()
        .flat_map(|&m| reps.iter().flat_map(move |&a| reps.iter().map(move |&b| (m, a, b))))
        .filter(|&(m, a, b)| a <= b && t.has(m, a) && t.has(m, b))
        .collect();
    let per = par::map(&spans, |&(m, a, b)| {
        let mut needed = 0;
        let mut checked = 0;
        for (i, f0) in t.get(m, a).iter().enumerate() {
            let start = if a == b { i } else { 0 };
            for f1 in &t.get(m, b)[start..] {
                checked += 1;
                match amalgam(&t, a, f0, b, f1) {
                    Some((p, ..)) => needed = needed.max(f.structure(p).size()),
                    None => return (checked, needed, Some(Witness::Span { left: arrow(m, a, f0), right: arrow(m, b, f1) })),
                }
            }
        }
        (checked, needed, None)
    });
    let checked = per.iter().map(|p| p.0).sum();
    let needed = per.iter().map(|p| p.1).max().unwrap_or(0);
    let failure = per.into_iter().find_map(|p| p.2);
    let v = AxiomVerdict::new("ap", checked, failure);
    if v.holds {
        v.with_note(format!("every amalgam found among structures of size at most {needed}"))
    } else {
        v
    }
}

/// Any two representatives embed into a common one.
pub fn check_jep(f: &AecFragment) -> AxiomVerdict {
    let t = ArrowTable::new(f);
    let pairs: Vec<(usize, usize)> =
        t.reps.iter().flat_map(|&a| t.reps.iter().filter(move |&&b| a <= b).map(move |&b| (a, b))).collect();
    let failure = par::find_first(&pairs, |&(a, b)| {
        let joint = t.reps.iter().any(|&p| t.has(a, p) && t.has(b, p));
        (!joint).then_some(Witness::Pair { left: a, right: b })
    });
    AxiomVerdict::new("jep", pairs.len(), failure)
}

fn cocone(t: &ArrowTable, a: usize, b: usize) -> Option<usize> {
    t.reps.iter().copied().find(|&p| t.has(a, p) && t.has(b, p))
}

/// Equivalent representatives have a common extension. The converse holds
/// outright and is checked along the way.
pub fn check_lrp(f: &AecFragment) -> AxiomVerdict {
    let t = ArrowTable::new(f);
    let part = connection_partition(f);
    let pairs: Vec<(usize, usize)> =
        t.reps.iter().flat_map(|&a| t.reps.iter().filter(move |&&b| a < b).map(move |&b| (a, b))).collect();
    let results = par::map(&pairs, |&(a, b)| (part.equivalent(a, b), cocone(&t, a, b).is_some()));
    let converse = pairs.iter().zip(&results).all(|(_, &(eq, co))| !co || eq);
    let failure = pairs
        .iter()
        .zip(&results)
        .find(|(_, &(eq, co))| eq && !co)
        .map(|(&(a, b), _)| Witness::Pair { left: a, right: b });
    let checked = results.iter().filter(|r| r.0).count();
    let v = AxiomVerdict::new("lrp", checked, failure);
    if converse {
        v
    } else {
        AxiomVerdict { holds: false, ..v }.with_note("a cocone joins two inequivalent structures; the partition is wrong")
    }
}

/// Arrows found without the cached strong subsets: every embedding whose
/// image has an explicit base-pair witness.
fn direct_arrows(f: &AecFragment, a: usize, b: usize) -> Vec<Embedding> {
    find_embeddings(f.structure(a), f.structure(b), None)
        .into_iter()
        .filter(|e| f.closed_below(f.structure(b), e.image()).is_some())
        .collect()
}

/// Re-checks a failure witness of AP, JEP or LRP by brute force over every listed structure.
pub fn reverify_local(f: &AecFragment, v: &AxiomVerdict) -> bool {
    let all = 0..f.len();
    match (&v.axiom[..], &v.witness) {
        ("ap", Some(Witness::Span { left, right })) => {
            let (n0, n1) = (left.target, right.target);
            direct_arrows(f, left.source, n0).contains(&left.map)
                && direct_arrows(f, right.source, n1).contains(&right.map)
                && !all.clone().any(|p| {
                    let g1s = direct_arrows(f, n1, p);
                    direct_arrows(f, n0, p)
                        .iter()
                        .any(|g0| g1s.iter().any(|g1| g0.after(&left.map) == g1.after(&right.map)))
                })
        }
        ("jep", Some(Witness::Pair { left, right })) => {
            !all.clone().any(|p| !direct_arrows(f, *left, p).is_empty() && !direct_arrows(f, *right, p).is_empty())
        }
        ("lrp", Some(Witness::Pair { left, right })) => {
            // brute-force reachability along arrows in either direction
            let n = f.len();
            let linked = |a: usize, b: usize| !direct_arrows(f, a, b).is_empty() || !direct_arrows(f, b, a).is_empty();
            let mut seen = vec![false; n];
            let mut stack = vec![*left];
            seen[*left] = true;
            while let Some(x) = stack.pop() {
                let next: Vec<usize> = (0..n).filter(|&y| !seen[y] && linked(x, y)).collect();
                for y in next {
                    seen[y] = true;
                    stack.push(y);
                }
            }
            seen[*right]
                && !all.clone().any(|p| !direct_arrows(f, *left, p).is_empty() && !direct_arrows(f, *right, p).is_empty())
        }
        _ => false,
    }
}
