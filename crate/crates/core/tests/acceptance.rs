//! The acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --release --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use aec::axioms::{
    check_cip_all, check_grp, check_lrp, check_trp, config_arrows, config_gluing, robinson_diagram, GlobalConfig,
};
use aec::construct::{pointed_class, terminal_fragment, DEFAULT_BUDGET};
use aec::dsl;
use aec::generate::{fragment_for_seed, random_config, Profile};
use aec::structure::find_embeddings;
use aec::theory::{check_reduct_equivalence, connection_partition, TheoryPartition};
use aec::types::{canonical_map, g_types, type_space, zigzag_partition};
use aec::{AecFragment, KEmbedding};

use common::*;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn validation() -> Verdict {
    let start = Instant::now();
    for n in 1..=5 {
        let r = terminal_fragment(n).validate();
        ensure(r.all_pass && r.ls_number == Some(0), || format!("terminal fragment {n}: {r:?}"))?;
    }
    let mut corpus = 0;
    for entry in std::fs::read_dir(data_dir().join("invalid")).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let expected: BTreeSet<&str> = text
            .lines()
            .find_map(|l| l.strip_prefix("# fails:"))
            .ok_or_else(|| format!("{} has no `# fails:` header", path.display()))?
            .split(',')
            .map(str::trim)
            .collect();
        let ws = dsl::load(&text, true).map_err(|e| e.to_string())?;
        let f = ws.fragment("K").map_err(|e| e.to_string())?;
        let r = f.validate();
        let failed: BTreeSet<&str> = r.failed_axioms().into_iter().collect();
        ensure(failed == expected, || format!("{}: failed {failed:?}, expected {expected:?}", path.display()))?;
        for w in [&r.order, &r.coherence, &r.lowenheim_skolem].into_iter().filter_map(|a| a.witness.as_ref()) {
            ensure(f.reverify(w), || format!("{}: witness {w:?} does not re-verify", path.display()))?;
        }
        corpus += 1;
    }
    ensure(corpus >= 5, || format!("only {corpus} invalid fragments"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("terminal 1..5 pass with lsNumber 0; {corpus} invalid fragments fail as intended"))
}

fn oracles() -> Verdict {
    let start = Instant::now();
    let p = oracle_profile();
    let suite = fragment_suite(200, &p);
    let (mut pairs, mut arrows) = (0, 0);
    for (seed, f) in suite.iter().enumerate() {
        ensure(f.len() <= 6 && f.max_size() <= 4, || format!("seed {seed} is outside the profile"))?;
        let labels = reachability_labels(f);
        let part = connection_partition(f);
        ensure(part == TheoryPartition::from_labels(labels.clone()), || {
            format!("seed {seed}: partition {:?} vs reachability {labels:?}", part.component_of)
        })?;
        for a in f.structures() {
            for b in f.structures() {
                pairs += 1;
                let fast: BTreeSet<Vec<usize>> = find_embeddings(a, b, None).into_iter().map(|e| e.map).collect();
                ensure(fast == naive_embeddings(a, b), || format!("seed {seed}: embeddings disagree"))?;
                arrows += fast.len();
            }
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("200 fragments, {pairs} structure pairs, {arrows} embeddings, zero mismatches"))
}

fn pullbacks() -> Verdict {
    let p = Profile::default();
    let mut nonempty = 0;
    for seed in 0..100 {
        let g = GlobalConfig::new(random_config(seed, &p).map_err(|e| e.to_string())?, DEFAULT_BUDGET)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let r = g.pullback.fragment.validate();
        ensure(r.all_pass, || format!("seed {seed}: pullback fails {:?}", r.failed_axioms()))?;
        let ls = |f: &AecFragment| f.validate().ls_number.unwrap_or(0);
        let bound = ls(&g.span.base).max(ls(g.span.left_fragment())).max(ls(g.span.right_fragment()));
        let got = r.ls_number.unwrap_or(0);
        ensure(got <= bound, || format!("seed {seed}: pullback lsNumber {got} > {bound}"))?;
        nonempty += usize::from(!g.pullback.fragment.is_empty());
    }
    Ok(format!("100 configs ({nonempty} with a nonempty pullback) validate within the LS bound"))
}

fn gtypes() -> Verdict {
    let suite = type_suite(100);
    let mut types = 0;
    for inst in &suite {
        let class = pointed_class(&inst.fragment, &inst.point, &inst.index).map_err(|e| e.to_string())?;
        let zig = zigzag_partition(&class);
        let maximal = connection_partition(&class.fragment);
        ensure(zig == maximal, || format!("seed {}: the two computations disagree", inst.seed))?;
        types += zig.len();
    }
    Ok(format!("{} instances, {types} types, both computations agree", suite.len()))
}

fn topology() -> Verdict {
    let suite = type_suite(100);
    let (mut discrete, mut checked) = (0, 0);
    for inst in &suite {
        for lambda in 1..=2 {
            let types = g_types(&inst.fragment, &inst.point, &inst.index).map_err(|e| e.to_string())?;
            let space = type_space(types, lambda).map_err(|e| e.to_string())?;
            if inst.point.size() <= lambda {
                ensure(space.is_discrete(), || format!("seed {} λ={lambda}: not discrete", inst.seed))?;
                discrete += 1;
            }
            ensure(space.initial_neighbourhoods() == space.neighbourhoods, || {
                format!("seed {} λ={lambda}: not the initial topology", inst.seed)
            })?;
            let can = canonical_map(&space, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            ensure(can.continuous, || format!("seed {} λ={lambda}: canonical map not continuous", inst.seed))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} spaces: {discrete} discrete as required, all initial, all canonical maps continuous"))
}

fn implications() -> Verdict {
    let start = Instant::now();
    let p = Profile::default();
    let (mut trp, mut pairs) = (0, 0);
    for seed in 0..200 {
        let g = GlobalConfig::new(random_config(seed, &p).map_err(|e| e.to_string())?, DEFAULT_BUDGET)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        if !check_trp(&g).holds {
            continue;
        }
        trp += 1;
        ensure(check_grp(&g).holds, || format!("seed {seed}: TRP holds, GRP fails"))?;
        let cip = check_cip_all(&g, seed);
        ensure(cip.checked <= 16, || format!("seed {seed}: {} theory pairs", cip.checked))?;
        ensure(cip.holds, || format!("seed {seed}: TRP holds, CIP fails with {:?}", cip.witness))?;
        pairs += cip.checked;
    }
    within(Duration::from_secs(600), start)?;
    Ok(format!("200 configs, {trp} with TRP; GRP held on all of them, CIP on all {pairs} theory pairs"))
}

fn reducts() -> Verdict {
    let p = Profile::default();
    let (mut morphisms, mut equivalent) = (0, 0);
    for seed in 0..50 {
        let cfg = random_config(seed, &p).map_err(|e| e.to_string())?;
        for leg in [&cfg.left, &cfg.right] {
            let src = connection_partition(&leg.source);
            let r = check_reduct_equivalence(leg, &src, &connection_partition(&leg.target));
            ensure(r.holds, || format!("seed {seed}: {:?}", r.witness))?;
            morphisms += 1;
            equivalent += src.components.iter().map(|c| c.len() * (c.len() - 1) / 2).sum::<usize>();
        }
    }
    Ok(format!("{morphisms} morphisms, {equivalent} equivalent pairs, all reducts equivalent"))
}

fn category_laws() -> Verdict {
    let p = Profile { max_structures: 5, max_size: 4, ..Profile::default() };
    let mut triples = 0usize;
    for seed in 0..100 {
        let f = fragment_for_seed(seed, &p).map_err(|e| e.to_string())?;
        let n = f.len();
        let arrows: Vec<Vec<Vec<KEmbedding>>> =
            (0..n).map(|a| (0..n).map(|b| f.k_arrows(a, b)).collect()).collect();
        for a in 0..n {
            for b in 0..n {
                for x in &arrows[a][b] {
                    let left = f.compose_k(&f.identity_arrow(b), x).map_err(|e| e.to_string())?;
                    let right = f.compose_k(x, &f.identity_arrow(a)).map_err(|e| e.to_string())?;
                    ensure(&left == x && &right == x, || format!("seed {seed}: identity law"))?;
                    for y in arrows[b].iter().flatten() {
                        let yx = f.compose_k(y, x).map_err(|e| format!("seed {seed}: {e}"))?;
                        for z in arrows[y.target].iter().flatten() {
                            triples += 1;
                            let l = f.compose_k(z, &yx).map_err(|e| e.to_string())?;
                            let r = f.compose_k(&f.compose_k(z, y).map_err(|e| e.to_string())?, x)
                                .map_err(|e| e.to_string())?;
                            ensure(l == r, || format!("seed {seed}: associativity"))?;
                        }
                    }
                }
            }
        }
    }
    let mut glued = 0;
    for seed in 0..100 {
        let g = GlobalConfig::new(random_config(seed, &Profile::default()).map_err(|e| e.to_string())?, DEFAULT_BUDGET)
            .map_err(|e| e.to_string())?;
        let arrows = config_arrows(&g, usize::MAX).map_err(|e| e.to_string())?;
        let r = config_gluing(&g).check_laws(&arrows, usize::MAX).map_err(|e| e.to_string())?;
        ensure(r.holds(), || format!("seed {seed}: {:?}", r.failures))?;
        glued += r.composable_triples;
    }
    let mut robinson = 0;
    for seed in 0..100 {
        let f = fragment_for_seed(seed, &Profile::default()).map_err(|e| e.to_string())?;
        if !check_lrp(&f).holds {
            continue;
        }
        for m in 0..f.len() {
            for n in 0..f.len() {
                let r = robinson_diagram(&f, m, n).map_err(|e| format!("seed {seed}: {e}"))?;
                let direct = !naive_arrows(&f, m, n).is_empty();
                ensure(r.arrow.is_some() == direct, || format!("seed {seed}: {m} -> {n} disagrees"))?;
                robinson += 1;
            }
        }
    }
    Ok(format!("{triples} cat(K) triples, {glued} gluing triples, {robinson} Robinson pairs agree"))
}

fn determinism() -> Verdict {
    let exe = env!("CARGO_BIN_EXE_aecw");
    let data = data_dir();
    let file = |name: &str| data.join(name).display().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["validate".into(), "--input".into(), file("terminal.aec")],
        vec!["pullback".into(), "--input".into(), file("pullback.aec")],
        vec!["topology".into(), "--input".into(), file("types.aec"), "--point".into(), "Point".into(), "--index".into(), "i".into()],
        vec!["check".into(), "--axiom".into(), "cip".into(), "--config".into(), "stuck".into(), "--input".into(), file("trp_cip.aec")],
        vec!["harness".into(), "--law".into(), "trp-cip".into(), "--seeds".into(), "20".into(), "--seed".into(), "11".into()],
        vec!["generate".into(), "--seed".into(), "42".into()],
    ];
    for args in &runs {
        let once = || Command::new(exe).args(args).output().map_err(|e| e.to_string());
        let (a, b) = (once()?, once()?);
        ensure(a.stdout == b.stdout && !a.stdout.is_empty(), || format!("`{}` differs between runs", args.join(" ")))?;
        ensure(a.status.code() == b.status.code(), || format!("`{}` exit codes differ", args.join(" ")))?;
    }
    Ok(format!("{} commands produce byte-identical reports twice", runs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("AEC validation", validation),
        ("oracle equivalence", oracles),
        ("pullback is an AEC", pullbacks),
        ("g-types two ways", gtypes),
        ("type topology", topology),
        ("TRP implies GRP and CIP", implications),
        ("reducts preserve equivalence", reducts),
        ("category laws and Robinson diagrams", category_laws),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
