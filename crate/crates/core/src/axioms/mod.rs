//! Deciders for amalgamation-style axioms on a fragment and on spans of fragments.
//!
//! Every quantifier ranges over listed structures up to isomorphism, so a
//! verdict is exact for the fragment and says nothing about larger structures.

mod global;
mod local;
mod robinson;

use serde::Serialize;

use crate::fragment::{AecFragment, KEmbedding};
use crate::par;
use crate::structure::Embedding;
use crate::theory::ClosedTheory;

pub use global::{
    all_theory_pairs, check_cip, check_cip_all, check_gap, check_gap_config, check_grp, config_arrows, config_gluing, check_trp, check_trp_oriented, Candidate,
    GapInstance, GlobalConfig, Orientation,
};
pub use local::{check_ap, check_jep, check_lrp, reverify_local};
pub use robinson::{robinson_diagram, RobinsonResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Exact over the listed structures.
    Fragment,
    /// Only candidates from a user-supplied pool were searched.
    RelativeToPool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A span `N0 <- M -> N1` with no amalgam.
    Span { left: KEmbedding, right: KEmbedding },
    /// Two structures with no common extension.
    Pair { left: usize, right: usize },
    /// A common extension of two structures.
    Cocone { apex: usize, left: KEmbedding, right: KEmbedding },
    /// `M0 ∈ K0`, `M1 ∈ K1` whose reducts are equivalent but which admit no witness.
    Transversal { left: usize, right: usize },
    /// Closed theories whose induced theories share `shared` although no
    /// pullback structure lies in both.
    Theories { left: ClosedTheory, right: ClosedTheory, shared: usize },
    /// A closing square found in the pool.
    Glue { candidate: usize, structure: usize, left: Embedding, right: Embedding },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomVerdict {
    pub axiom: String,
    pub holds: bool,
    pub scope: Scope,
    /// How many instances of the outer quantifier were examined.
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<AxiomVerdict>,
}

impl AxiomVerdict {
    fn new(axiom: &str, checked: usize, failure: Option<Witness>) -> Self {
        Self {
            axiom: axiom.to_string(),
            holds: failure.is_none(),
            scope: Scope::Fragment,
            checked,
            note: None,
            witness: failure,
            parts: Vec::new(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Arrows of `cat(K)` between iso-class representatives, computed once.
#[derive(Debug, Clone)]
pub struct ArrowTable {
    pub reps: Vec<usize>,
    arrows: Vec<Vec<Vec<Embedding>>>,
}

impl ArrowTable {
    pub fn new(f: &AecFragment) -> Self {
        let reps: Vec<usize> = (0..f.len()).filter(|&k| f.iso_class(k) == k).collect();
        let n = f.len();
        let arrows = par::map_range(0..n, |a| {
            (0..n)
                .map(|b| {
                    if f.iso_class(a) == a && f.iso_class(b) == b {
                        f.k_arrows(a, b).into_iter().map(|k| k.map).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect()
        });
        Self { reps, arrows }
    }

    /// Arrows between two representatives.
    pub fn get(&self, a: usize, b: usize) -> &[Embedding] {
        &self.arrows[a][b]
    }

    pub fn has(&self, a: usize, b: usize) -> bool {
        !self.arrows[a][b].is_empty()
    }
}
