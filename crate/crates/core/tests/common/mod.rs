//! Brute-force oracles and instance suites shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use aec::generate::{fragment_for_seed, Profile};
use aec::structure::{is_embedding, Embedding, FinStructure};
use aec::AecFragment;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Every injective map `a -> b` that is an embedding, by listing all of them.
pub fn naive_embeddings(a: &FinStructure, b: &FinStructure) -> BTreeSet<Vec<usize>> {
    let (n, m) = (a.size(), b.size());
    let mut out = BTreeSet::new();
    let mut map = vec![0; n];
    fn go(i: usize, n: usize, m: usize, map: &mut Vec<usize>, a: &FinStructure, b: &FinStructure, out: &mut BTreeSet<Vec<usize>>) {
        if i == n {
            if is_embedding(a, b, map) {
                out.insert(map.clone());
            }
            return;
        }
        for y in 0..m {
            if !map[..i].contains(&y) {
                map[i] = y;
                go(i + 1, n, m, map, a, b, out);
            }
        }
    }
    go(0, n, m, &mut map, a, b, &mut out);
    out
}

/// Arrows `a -> b` of `cat(K)` found without the cached strong subsets.
pub fn naive_arrows(f: &AecFragment, a: usize, b: usize) -> BTreeSet<Vec<usize>> {
    let target = f.structure(b);
    naive_embeddings(f.structure(a), target)
        .into_iter()
        .filter(|m| f.closed_below(target, Embedding::new(m.clone()).image()).is_some())
        .collect()
}

/// Component labels from reachability along arrows in either direction,
/// relabelled so that each component is named by its least member.
pub fn reachability_labels(f: &AecFragment) -> Vec<usize> {
    let n = f.len();
    let linked: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| !naive_arrows(f, a, b).is_empty() || !naive_arrows(f, b, a).is_empty()).collect())
        .collect();
    let mut label = vec![usize::MAX; n];
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = start;
        while let Some(x) = stack.pop() {
            for y in 0..n {
                if linked[x][y] && label[y] == usize::MAX {
                    label[y] = start;
                    stack.push(y);
                }
            }
        }
    }
    label
}

pub fn oracle_profile() -> Profile {
    Profile { max_structures: 6, max_size: 4, max_symbols: 2, arity_cap: 2 }
}

/// The fragments of seeds `0..count` at the given profile.
pub fn fragment_suite(count: u64, profile: &Profile) -> Vec<AecFragment> {
    (0..count).map(|s| fragment_for_seed(s, profile).expect("generation never fails")).collect()
}

/// A g-type instance: fragment, point and index set.
pub struct TypeInstance {
    pub seed: u64,
    pub fragment: std::sync::Arc<AecFragment>,
    pub point: FinStructure,
    pub index: Vec<String>,
}

/// One instance per seed: a member of size at most 2 as the point and
/// between zero and two new constants.
pub fn type_suite(count: u64) -> Vec<TypeInstance> {
    let p = Profile::default();
    (0..count)
        .filter_map(|seed| {
            let f = fragment_for_seed(seed, &p).unwrap();
            let small: Vec<usize> = (0..f.len()).filter(|&i| f.structure(i).size() <= 2).collect();
            let point = f.structure(*small.get(seed as usize % small.len().max(1))?).clone();
            let index = ["i", "j"][..(seed % 3) as usize].iter().map(|s| s.to_string()).collect();
            Some(TypeInstance { seed, fragment: std::sync::Arc::new(f), point, index })
        })
        .collect()
}
