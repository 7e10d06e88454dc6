//! Empirical checks of the implication laws on generated spans.
//!
//! Each seed yields one span; seeds run in parallel and results are reported
//! in seed order so that reports are reproducible.

use serde::Serialize;

use crate::axioms::{check_cip_all, check_grp, check_trp, GlobalConfig};
use crate::error::{Error, Result};
use crate::generate::{random_config, Profile};
use crate::par;
use crate::theory::{check_reduct_equivalence, connection_partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// TRP implies GRP.
    TrpGrp,
    /// TRP implies CIP for every pair of closed theories.
    TrpCip,
    /// The pullback is valid and its LS number is bounded by the inputs'.
    Pullback,
    /// Reducts of equivalent structures are equivalent.
    Reduct,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::TrpGrp => "trp-grp",
            Law::TrpCip => "trp-cip",
            Law::Pullback => "pullback",
            Law::Reduct => "reduct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawViolation {
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarnessReport {
    pub law: Law,
    pub first_seed: u64,
    pub seeds: usize,
    /// Seeds on which the law's hypothesis held, so the conclusion was tested.
    pub premise_held: usize,
    /// Seeds abandoned because the pullback exceeded the budget.
    pub over_budget: Vec<u64>,
    pub violations: Vec<LawViolation>,
}

enum Outcome {
    Vacuous,
    Tested,
    Violated(String),
    OverBudget,
}

fn run_one(law: Law, seed: u64, profile: &Profile, budget: usize) -> Result<Outcome> {
    let span = random_config(seed, profile)?;
    if law == Law::Reduct {
        for leg in [&span.left, &span.right] {
            let r = check_reduct_equivalence(leg, &connection_partition(&leg.source), &connection_partition(&leg.target));
            if let Some((a, b)) = r.witness {
                return Ok(Outcome::Violated(format!("structures {a} and {b} are equivalent but their reducts are not")));
            }
        }
        return Ok(Outcome::Tested);
    }
    let g = match GlobalConfig::new(span, budget) {
        Ok(g) => g,
        Err(Error::SizeBoundExceeded { .. }) => return Ok(Outcome::OverBudget),
        Err(e) => return Err(e),
    };
    Ok(match law {
        Law::Pullback => {
            let report = g.pullback.fragment.validate();
            let ls = |f: &crate::fragment::AecFragment| f.validate().ls_number.unwrap_or(0);
            let bound = ls(&g.span.base).max(ls(g.span.left_fragment())).max(ls(g.span.right_fragment()));
            match report.ls_number {
                _ if !report.all_pass => Outcome::Violated(format!("pullback fails {:?}", report.failed_axioms())),
                Some(n) if n > bound => Outcome::Violated(format!("pullback LS number {n} exceeds input bound {bound}")),
                _ => Outcome::Tested,
            }
        }
        _ if !check_trp(&g).holds => Outcome::Vacuous,
        Law::TrpGrp => {
            let grp = check_grp(&g);
            match grp.witness {
                Some(w) => Outcome::Violated(format!("TRP holds but GRP fails at {w:?}")),
                None => Outcome::Tested,
            }
        }
        Law::TrpCip => {
            let cip = check_cip_all(&g, seed);
            match cip.witness {
                Some(w) => Outcome::Violated(format!("TRP holds but CIP fails at {w:?}")),
                None => Outcome::Tested,
            }
        }
        Law::Reduct => unreachable!(),
    })
}

/// Runs `law` on seeds `first_seed .. first_seed + seeds`.
pub fn run_law(law: Law, first_seed: u64, seeds: usize, profile: &Profile, budget: usize) -> Result<HarnessReport> {
    let outcomes = par::map_range(0..seeds, |i| run_one(law, first_seed + i as u64, profile, budget));
    let mut report =
        HarnessReport { law, first_seed, seeds, premise_held: 0, over_budget: Vec::new(), violations: Vec::new() };
    for (i, o) in outcomes.into_iter().enumerate() {
        let seed = first_seed + i as u64;
        match o? {
            Outcome::Vacuous => {}
            Outcome::Tested => report.premise_held += 1,
            Outcome::Violated(detail) => {
                report.premise_held += 1;
                report.violations.push(LawViolation { seed, detail });
            }
            Outcome::OverBudget => report.over_budget.push(seed),
        }
    }
    Ok(report)
}
