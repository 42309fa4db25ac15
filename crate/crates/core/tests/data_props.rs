use std::collections::BTreeSet;
use std::path::Path;

use popgo::data::{
    apply_k_core, build_popularity_table, kl_to_uniform, parse_interactions, split_id_ood, split_temporal,
    InputFormat, Interaction, InteractionDataset, SplitName,
};
use proptest::prelude::*;

/// Bipartite graph with at most 20 nodes in total.
fn small_graph() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize)>)> {
    (2usize..=10, 2usize..=10).prop_flat_map(|(nu, ni)| {
        let pairs = proptest::collection::btree_set((0..nu, 0..ni), 1..=(nu * ni));
        (Just(nu), Just(ni), pairs.prop_map(|s| s.into_iter().collect::<Vec<_>>()))
    })
}

fn dataset_from_tokens(edges: &[(usize, usize)]) -> InteractionDataset {
    let text: String = edges.iter().map(|(u, i)| format!("u{u}\ti{i}\n")).collect();
    parse_interactions(&text, InputFormat::Tsv, Path::new("mem")).unwrap()
}

fn token_edges(ds: &InteractionDataset) -> BTreeSet<(String, String)> {
    ds.interactions
        .iter()
        .map(|it| {
            (
                ds.user_ids.token(it.user).unwrap().to_owned(),
                ds.item_ids.token(it.item).unwrap().to_owned(),
            )
        })
        .collect()
}

/// The k-core is the union of every node subset whose induced subgraph has
/// minimum degree `k`; enumerate all subsets directly.
fn brute_force_core(nu: usize, ni: usize, edges: &[(usize, usize)], k: usize) -> BTreeSet<(String, String)> {
    let n = nu + ni;
    let mut union = 0u32;
    let mut deg = vec![0usize; n];
    for mask in 1u32..(1 << n) {
        deg.iter_mut().for_each(|d| *d = 0);
        for &(u, i) in edges {
            if mask >> u & 1 == 1 && mask >> (nu + i) & 1 == 1 {
                deg[u] += 1;
                deg[nu + i] += 1;
            }
        }
        if (0..n).filter(|&v| mask >> v & 1 == 1).all(|v| deg[v] >= k) {
            union |= mask;
        }
    }
    edges
        .iter()
        .filter(|&&(u, i)| union >> u & 1 == 1 && union >> (nu + i) & 1 == 1)
        .map(|&(u, i)| (format!("u{u}"), format!("i{i}")))
        .collect()
}

fn random_log(n_users: usize, n_items: usize, edges: &[(usize, usize)]) -> InteractionDataset {
    let its = edges.iter().map(|&(u, i)| Interaction::new(u, i)).collect();
    InteractionDataset::from_interactions(n_users, n_items, its).unwrap()
}

/// Random log where every user and item is observed.
fn medium_log() -> impl Strategy<Value = InteractionDataset> {
    (5usize..40, 5usize..30).prop_flat_map(|(nu, ni)| {
        proptest::collection::btree_set((0..nu, 0..ni), 20..200)
            .prop_map(move |s| apply_k_core(&random_log(nu, ni, &s.into_iter().collect::<Vec<_>>()), 1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn k_core_matches_subset_enumeration((nu, ni, edges) in small_graph(), k in 1usize..=4) {
        let ds = dataset_from_tokens(&edges);
        let core = apply_k_core(&ds, k);
        prop_assert_eq!(token_edges(&core), brute_force_core(nu, ni, &edges, k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_core_is_idempotent_and_dense((_, _, edges) in small_graph(), k in 0usize..=4) {
        let ds = dataset_from_tokens(&edges);
        let once = apply_k_core(&ds, k);
        let twice = apply_k_core(&once, k);
        prop_assert_eq!(&once, &twice);
        for d in once.user_degrees().into_iter().chain(once.item_degrees()) {
            prop_assert!(d >= k.max(1));
        }
    }

    #[test]
    fn id_ood_split_partitions_and_repeats(ds in medium_log(), seed in any::<u64>()) {
        let s = split_id_ood(&ds, seed).unwrap();
        let mut all: Vec<Interaction> = SplitName::ALL.iter().flat_map(|&n| s.get(n).to_vec()).collect();
        all.sort_unstable();
        let mut orig = ds.interactions.clone();
        orig.sort_unstable();
        prop_assert_eq!(all, orig);
        let n = ds.len() as f64;
        prop_assert_eq!(s.ood_test.len(), (0.2 * n).round() as usize);
        prop_assert_eq!(s.train.len(), (0.5 * n).round() as usize);
        prop_assert_eq!(s.id_valid.len(), (0.1 * n).round() as usize);
        prop_assert_eq!(&s, &split_id_ood(&ds, seed).unwrap());
    }

    #[test]
    fn ood_quotas_differ_by_at_most_one_where_capacity_allows(ds in medium_log(), seed in any::<u64>()) {
        let s = split_id_ood(&ds, seed).unwrap();
        let degrees = ds.item_degrees();
        let mut counts = vec![0usize; ds.n_items];
        for it in &s.ood_test {
            counts[it.item] += 1;
        }
        // items below their full degree were not capacity-limited
        let free: Vec<usize> = (0..ds.n_items).filter(|&i| counts[i] < degrees[i]).map(|i| counts[i]).collect();
        if let (Some(lo), Some(hi)) = (free.iter().min(), counts.iter().max()) {
            prop_assert!(hi - lo <= 1, "quota spread {} vs {}", lo, hi);
        }
    }

    #[test]
    fn temporal_split_respects_time(ds in medium_log(), salt in any::<u64>()) {
        let its: Vec<Interaction> = ds
            .interactions
            .iter()
            .map(|it| Interaction::with_timestamp(it.user, it.item, ((it.user * 31 + it.item * 17) as u64 ^ salt) as i64 % 1000))
            .collect();
        let ds = InteractionDataset::from_interactions(ds.n_users, ds.n_items, its).unwrap();
        let s = split_temporal(&ds, (0.7, 0.1, 0.2)).unwrap();
        let ts = |v: &[Interaction]| v.iter().map(|i| i.timestamp.unwrap()).collect::<Vec<_>>();
        let (a, b, c) = (ts(&s.train), ts(&s.id_valid), ts(&s.id_test));
        if let (Some(x), Some(y)) = (a.iter().max(), b.iter().min()) { prop_assert!(x <= y); }
        if let (Some(x), Some(y)) = (b.iter().max(), c.iter().min()) { prop_assert!(x <= y); }
        if let (Some(x), Some(y)) = (a.iter().max(), c.iter().min()) { prop_assert!(x <= y); }
        prop_assert_eq!(s.total(), ds.len());
        prop_assert!(s.ood_test.is_empty());
    }

    #[test]
    fn kl_is_nonnegative_and_zero_only_when_uniform(items in proptest::collection::vec(0usize..12, 1..300)) {
        let its: Vec<Interaction> = items.iter().enumerate().map(|(u, &i)| Interaction::new(u, i)).collect();
        let kl = kl_to_uniform(&its, 12).unwrap();
        prop_assert!(kl >= 0.0);
        let mut counts = [0usize; 12];
        for &i in &items { counts[i] += 1; }
        let uniform = counts.iter().all(|&c| c == counts[0]);
        prop_assert_eq!(uniform, kl < 1e-12, "kl {} counts {:?}", kl, counts);
    }

    #[test]
    fn popularity_counts_sum_to_train_size(ds in medium_log(), seed in any::<u64>()) {
        let s = split_id_ood(&ds, seed).unwrap();
        let t = build_popularity_table(&s.train, s.n_users, s.n_items).unwrap();
        prop_assert_eq!(t.user_pop.iter().sum::<usize>(), s.train.len());
        prop_assert_eq!(t.item_pop.iter().sum::<usize>(), s.train.len());
        for a in 0..s.n_items {
            for b in 0..s.n_items {
                prop_assert_eq!(t.item_pop[a] == t.item_pop[b], t.item_category(a) == t.item_category(b));
            }
        }
        for u in 0..s.n_users {
            prop_assert_eq!(t.user_freq_vocab.values()[t.user_category(u)], t.user_pop[u]);
        }
    }
}

#[test]
fn temporal_split_needs_timestamps() {
    let ds = random_log(2, 2, &[(0, 0), (1, 1)]);
    assert!(split_temporal(&ds, (0.7, 0.1, 0.2)).is_err());
}
