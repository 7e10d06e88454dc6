use serde::Serialize;

use super::{check_lrp, ArrowTable};
use crate::construct::diagram_expansion;
use crate::error::{Error, Result};
use crate::fragment::{AecFragment, KEmbedding};
use crate::structure::Embedding;
use crate::theory::connection_partition;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RobinsonResult {
    /// The reconstructed arrow `M -> N`, if some `b̄` works.
    pub arrow: Option<KEmbedding>,
    /// The sequence `b̄` in `N` with `(M, ā) ≡ (N, b̄)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<usize>>,
    /// Whether `cat(K)` has an arrow `M -> N`, found directly.
    pub direct: bool,
}

/// Decides `∃ j: M -> N` through the diagram expansion `K(M)`: name every
/// element of `M` by a constant, look for `b̄` with `(M, ā) ≡ (N, b̄)`, take a
/// common extension `t0: (M, ā) -> P`, `t1: (N, b̄) -> P` and set `j = t1⁻¹ ∘ t0`.
pub fn robinson_diagram(f: &AecFragment, m: usize, n: usize) -> Result<RobinsonResult> {
    if !check_lrp(f).holds {
        return Err(Error::LrpNotSatisfied("the fragment has equivalent structures without a common extension".into()));
    }
    let size = f.structure(m).size();
    let names: Vec<String> = (0..size).map(|x| format!("e#{x}")).collect();
    let d = diagram_expansion(f, &names)?;
    let expanded = &d.fragment;
    let part = connection_partition(expanded);
    let table = ArrowTable::new(expanded);
    let identity: Vec<usize> = (0..size).collect();
    let start = d
        .entries
        .iter()
        .position(|(k, a)| *k == m && *a == identity)
        .ok_or_else(|| Error::Internal("the identity enumeration is missing from the expansion".into()))?;

    let mut found = None;
    for (i, (k, b)) in d.entries.iter().enumerate() {
        if *k != n || !part.equivalent(start, i) {
            continue;
        }
        let (rs, ri) = (expanded.iso_class(start), expanded.iso_class(i));
        let iso_s = relabel_to_rep(expanded, start, rs);
        let iso_i = relabel_to_rep(expanded, i, ri);
        let apex = table.reps.iter().copied().find(|&p| table.has(rs, p) && table.has(ri, p));
        if let Some(p) = apex {
            let t0 = table.get(rs, p)[0].after(&iso_s);
            let t1 = table.get(ri, p)[0].after(&iso_i);
            // both legs fix the constants, so t1⁻¹ ∘ t0 sends x to b̄(x)
            let j: Vec<usize> = (0..size)
                .map(|x| t1.map.iter().position(|&y| y == t0.apply(x)).expect("constants are preserved"))
                .collect();
            if j != *b {
                return Err(Error::Internal("reconstructed arrow disagrees with the named sequence".into()));
            }
            found = Some((Embedding::new(j), b.clone()));
            break;
        }
    }
    let direct = f.has_k_arrow(m, n);
    let arrow = match found.clone() {
        Some((map, _)) if !f.k_arrows(m, n).iter().any(|a| a.map == map) => {
            return Err(Error::Internal("reconstructed map is not an arrow of cat(K)".into()));
        }
        Some((map, _)) => Some(KEmbedding { source: m, target: n, map }),
        None => None,
    };
    if arrow.is_some() != direct {
        return Err(Error::Internal("diagram method disagrees with the direct arrow search".into()));
    }
    Ok(RobinsonResult { sequence: found.map(|(_, b)| b), arrow, direct })
}

/// An isomorphism from listed structure `k` onto its representative `rep`.
fn relabel_to_rep(f: &AecFragment, k: usize, rep: usize) -> Embedding {
    crate::structure::first_isomorphism(f.structure(k), f.structure(rep)).expect("same iso class")
}
