mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use aec::construct::pointed_class;
use aec::dsl;
use aec::generate::{fragment_for_seed, Profile};
use aec::structure::find_embeddings;
use aec::theory::{connection_partition, TheoryPartition};
use aec::types::zigzag_partition;

use common::*;

fn small() -> Profile {
    Profile { max_structures: 4, max_size: 3, ..Profile::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_fragments_validate(seed in any::<u64>()) {
        let f = fragment_for_seed(seed, &oracle_profile()).unwrap();
        let r = f.validate();
        prop_assert!(r.all_pass, "seed {}: {:?}", seed, r.failed_axioms());
    }

    #[test]
    fn cached_arrows_match_the_naive_search(seed in any::<u64>()) {
        let f = fragment_for_seed(seed, &small()).unwrap();
        for a in 0..f.len() {
            for b in 0..f.len() {
                let fast: BTreeSet<Vec<usize>> = f.k_arrows(a, b).into_iter().map(|k| k.map.map).collect();
                prop_assert_eq!(fast, naive_arrows(&f, a, b));
            }
        }
    }

    #[test]
    fn embedding_search_matches_enumeration(seed in any::<u64>()) {
        let f = fragment_for_seed(seed, &oracle_profile()).unwrap();
        for a in f.structures() {
            for b in f.structures() {
                let fast: BTreeSet<Vec<usize>> = find_embeddings(a, b, None).into_iter().map(|e| e.map).collect();
                prop_assert_eq!(fast, naive_embeddings(a, b));
            }
        }
    }

    #[test]
    fn components_match_reachability(seed in any::<u64>()) {
        let f = fragment_for_seed(seed, &oracle_profile()).unwrap();
        prop_assert_eq!(connection_partition(&f), TheoryPartition::from_labels(reachability_labels(&f)));
    }

    #[test]
    fn composition_is_associative_and_unital(seed in any::<u64>()) {
        let f = fragment_for_seed(seed, &small()).unwrap();
        let n = f.len();
        for a in 0..n {
            for b in 0..n {
                for x in f.k_arrows(a, b) {
                    prop_assert_eq!(&f.compose_k(&f.identity_arrow(b), &x).unwrap(), &x);
                    prop_assert_eq!(&f.compose_k(&x, &f.identity_arrow(a)).unwrap(), &x);
                    for c in 0..n {
                        for y in f.k_arrows(b, c) {
                            let yx = f.compose_k(&y, &x).unwrap();
                            prop_assert!(f.k_arrows(a, c).contains(&yx));
                            for d in 0..n {
                                for z in f.k_arrows(c, d) {
                                    let left = f.compose_k(&z, &yx).unwrap();
                                    let right = f.compose_k(&f.compose_k(&z, &y).unwrap(), &x).unwrap();
                                    prop_assert_eq!(left, right);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>()) {
        let ws = dsl::generate(seed, &Profile::default()).unwrap();
        let text = dsl::print(&ws);
        let back = dsl::parse(&text).unwrap();
        prop_assert_eq!(dsl::print(&back), text);
        prop_assert_eq!(back, ws);
    }
}

#[test]
fn type_partitions_agree_on_the_suite() {
    for inst in type_suite(60) {
        let class = pointed_class(&inst.fragment, &inst.point, &inst.index).unwrap();
        assert_eq!(zigzag_partition(&class), connection_partition(&class.fragment), "seed {}", inst.seed);
    }
}

#[test]
fn type_suite_covers_every_index_size() {
    let sizes: BTreeSet<usize> = type_suite(30).iter().map(|i| i.index.len()).collect();
    assert_eq!(sizes, BTreeSet::from([0, 1, 2]));
}
