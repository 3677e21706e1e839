mod common;

use std::collections::BTreeSet;

use graph_views::constraints::{schema_k_hop_paths, schema_path_total};
use proptest::prelude::*;

fn as_triples(paths: &BTreeSet<graph_views::constraints::SchemaPath>) -> BTreeSet<Vec<common::Triple>> {
    paths
        .iter()
        .map(|p| {
            p.edges
                .iter()
                .map(|e| (e.src.clone(), e.dst.clone(), e.label.clone()))
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_procedural_miner(seed in 1000u64..100_000, k in 1usize..=5) {
        let s = common::random_schema(seed);
        let ours = schema_k_hop_paths(&s, k);
        prop_assert_eq!(as_triples(&ours), common::k_hop_schema_paths(&common::triples(&s), k));
        prop_assert_eq!(ours.len() as u64, schema_path_total(&s, k));
    }

    #[test]
    fn chains_are_connected_and_extend_shorter_ones(seed in any::<u64>(), k in 2usize..=5) {
        let s = common::random_schema(seed);
        let shorter = schema_k_hop_paths(&s, k - 1);
        for p in schema_k_hop_paths(&s, k) {
            prop_assert!(p.edges.windows(2).all(|w| w[0].dst == w[1].src));
            prop_assert_eq!(&p.src_type, &p.edges[0].src);
            let prefix: Vec<_> = p.edges[..k - 1].to_vec();
            prop_assert!(shorter.iter().any(|q| q.edges == prefix));
        }
    }

    #[test]
    fn bipartite_schemas_have_no_odd_cycles(seed in any::<u64>(), k in (0usize..4).prop_map(|i| 2 * i + 1)) {
        let s = common::bipartite_schema(seed);
        prop_assert!(schema_k_hop_paths(&s, k).iter().all(|p| p.src_type != p.dst_type));
    }
}
