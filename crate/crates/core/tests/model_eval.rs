use std::sync::Arc;

use popgo::backbone::{Arch, EmbeddingTable, Model, NormalizedAdjacency, RowLookup, ScoreKind};
use popgo::data::{build_popularity_table, DatasetSplits, Interaction, SplitKind, SplitName};
use popgo::eval::{evaluate, itempop_baseline, metrics_at_k, rank_scores, RandomRanker, Ranker};
use popgo::shortcut::build_shortcut_model;
use popgo::synth::{generate, SynthConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fixed per-user score rows.
struct Table(Vec<Vec<f64>>);

impl Ranker for Table {
    fn n_items(&self) -> usize {
        self.0[0].len()
    }

    fn score_items(&self, user: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.0[user]);
    }
}

/// Random bipartite graph where every node has at least one edge.
fn covered_edges(nu: usize, ni: usize, extra: usize, r: &mut ChaCha8Rng) -> Vec<Interaction> {
    let mut pairs: Vec<(usize, usize)> = (0..nu.max(ni)).map(|k| (k % nu, k % ni)).collect();
    for _ in 0..extra {
        pairs.push((r.random_range(0..nu), r.random_range(0..ni)));
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs.into_iter().map(|(u, i)| Interaction::new(u, i)).collect()
}

fn random_table(rows: usize, dim: usize, r: &mut ChaCha8Rng) -> EmbeddingTable {
    EmbeddingTable::from_fn(rows, dim, |_, _| r.random_range(-1.0..1.0))
}

/// Random four-way split with disjoint parts covering ~60% of all pairs.
fn random_splits(nu: usize, ni: usize, r: &mut ChaCha8Rng) -> DatasetSplits {
    let mut parts: [Vec<Interaction>; 4] = Default::default();
    for u in 0..nu {
        for i in 0..ni {
            let roll: f64 = r.random();
            let slot = if roll < 0.3 {
                0
            } else if roll < 0.4 {
                1
            } else if roll < 0.5 {
                2
            } else if roll < 0.6 {
                3
            } else {
                continue;
            };
            parts[slot].push(Interaction::new(u, i));
        }
    }
    let [train, id_valid, id_test, ood_test] = parts;
    DatasetSplits {
        n_users: nu,
        n_items: ni,
        train,
        id_valid,
        id_test,
        ood_test,
        kind: SplitKind::IdOod,
        seed: 0,
        fractions: [0.5, 0.1, 0.2, 0.2],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lightgcn_propagation_is_linear(seed in any::<u64>(), layers in 0usize..4, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (nu, ni, d) = (r.random_range(2..12), r.random_range(2..12), r.random_range(1..6));
        let g = Arc::new(NormalizedAdjacency::build(&covered_edges(nu, ni, 20, &mut r), nu, ni).unwrap());
        let (xu, xi, yu, yi) = (random_table(nu, d, &mut r), random_table(ni, d, &mut r), random_table(nu, d, &mut r), random_table(ni, d, &mut r));
        let combo = |p: &EmbeddingTable, q: &EmbeddingTable| {
            EmbeddingTable::from_values(p.rows(), d, p.as_slice().iter().zip(q.as_slice()).map(|(x, y)| a * x + b * y).collect()).unwrap()
        };
        let arch = Arch::LightGcn { layers };
        let model = |u: EmbeddingTable, i: EmbeddingTable| {
            Model::from_parts(u, i, arch, ScoreKind::Cosine, Some(g.clone()), RowLookup::Identity).unwrap().propagate()
        };
        let px = model(xu.clone(), xi.clone());
        let py = model(yu.clone(), yi.clone());
        let pc = model(combo(&xu, &yu), combo(&xi, &yi));
        for (c, (x, y)) in [(&pc.users, (&px.users, &py.users)), (&pc.items, (&px.items, &py.items))] {
            for k in 0..c.as_slice().len() {
                let want = a * x.as_slice()[k] + b * y.as_slice()[k];
                prop_assert!((c.as_slice()[k] - want).abs() < 1e-12, "{} vs {}", c.as_slice()[k], want);
            }
        }
    }

    #[test]
    fn cosine_scores_ignore_table_scale(seed in any::<u64>(), c in 0.01f64..100.0, lightgcn in any::<bool>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (nu, ni) = (6, 9);
        let g = Arc::new(NormalizedAdjacency::build(&covered_edges(nu, ni, 15, &mut r), nu, ni).unwrap());
        let (arch, g) = if lightgcn { (Arch::LightGcn { layers: 2 }, Some(g)) } else { (Arch::Mf, None) };
        let m = Model::init(nu, ni, 5, arch, ScoreKind::Cosine, g, seed).unwrap();
        let mut scaled = m.clone();
        scaled.scale_tables(c);
        for u in 0..nu {
            for i in 0..ni {
                prop_assert!((m.score_pair(u, i).unwrap() - scaled.score_pair(u, i).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shortcut_degree_ignores_identity_of_equal_degree_users(seed in any::<u64>(), lightgcn in any::<bool>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (nu, ni) = (8, 10);
        let train = covered_edges(nu, ni, 25, &mut r);
        let mut perm: Vec<usize> = (0..nu).collect();
        perm.shuffle(&mut r);
        let relabeled: Vec<Interaction> = train.iter().map(|it| Interaction::new(perm[it.user], it.item)).collect();
        let build = |t: &[Interaction]| {
            let pop = build_popularity_table(t, nu, ni).unwrap();
            let (arch, g) = if lightgcn {
                (Arch::LightGcn { layers: 2 }, Some(Arc::new(NormalizedAdjacency::build(t, nu, ni).unwrap())))
            } else {
                (Arch::Mf, None)
            };
            build_shortcut_model(arch, pop, 4, 17, g).unwrap().degrees()
        };
        let (a, b) = (build(&train), build(&relabeled));
        for (u, &pu) in perm.iter().enumerate() {
            for i in 0..ni {
                prop_assert!((a.beta(u, i) - b.beta(pu, i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn metrics_are_bounded_and_monotone_in_k(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (nu, ni) = (r.random_range(3..25), r.random_range(5..40));
        let splits = random_splits(nu, ni, &mut r);
        prop_assume!(!splits.id_test.is_empty());
        let ranker = Table((0..nu).map(|_| (0..ni).map(|_| r.random()).collect()).collect());
        let mut prev: Option<(f64, f64)> = None;
        for k in 1..=ni {
            let rep = evaluate(&ranker, &splits, SplitName::IdTest, k).unwrap();
            for m in [rep.hr, rep.recall, rep.ndcg] {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
            }
            if let Some((hr, rec)) = prev {
                prop_assert!(rep.hr >= hr && rep.recall >= rec - 1e-15);
            }
            prev = Some((rep.hr, rep.recall));
        }
        // every candidate is ranked at K = n_items, so recall reaches 1
        let full = evaluate(&ranker, &splits, SplitName::IdTest, ni).unwrap();
        prop_assert!((full.recall - 1.0).abs() < 1e-12 && full.hr == 1.0);
    }

    #[test]
    fn excluded_items_are_never_ranked(scores in proptest::collection::vec(-5.0f64..5.0, 1..60), mask in any::<u64>(), k in 1usize..70) {
        let exclude: Vec<usize> = (0..scores.len()).filter(|i| mask >> (i % 64) & 1 == 1).collect();
        let top = rank_scores(&scores, &exclude, k);
        prop_assert_eq!(top.len(), k.min(scores.len() - exclude.len()));
        for i in &top {
            prop_assert!(exclude.binary_search(i).is_err());
        }
        for w in top.windows(2) {
            prop_assert!(scores[w[0]] > scores[w[1]] || (scores[w[0]] == scores[w[1]] && w[0] < w[1]));
        }
    }

    #[test]
    fn evaluation_ignores_split_order(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let splits = random_splits(12, 20, &mut r);
        prop_assume!(!splits.ood_test.is_empty());
        let ranker = Table((0..12).map(|_| (0..20).map(|_| r.random()).collect()).collect());
        let mut shuffled = splits.clone();
        for v in [&mut shuffled.train, &mut shuffled.id_valid, &mut shuffled.id_test, &mut shuffled.ood_test] {
            v.shuffle(&mut r);
        }
        for which in [SplitName::IdValid, SplitName::IdTest, SplitName::OodTest] {
            if splits.get(which).is_empty() { continue; }
            prop_assert_eq!(evaluate(&ranker, &splits, which, 5).unwrap(), evaluate(&ranker, &shuffled, which, 5).unwrap());
        }
    }
}

#[test]
fn zeroed_shortcut_is_indifferent() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let train = covered_edges(7, 9, 20, &mut r);
    let pop = build_popularity_table(&train, 7, 9).unwrap();
    let mut sm = build_shortcut_model(Arch::Mf, pop, 6, 1, None).unwrap();
    sm.inner.scale_tables(0.0);
    let d = sm.degrees();
    for u in 0..7 {
        for i in 0..9 {
            assert_eq!(d.beta(u, i), 0.5);
        }
    }
}

#[test]
fn perfect_ranker_scores_one() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let splits = random_splits(10, 30, &mut r);
    let mut rows = vec![vec![0.0; 30]; 10];
    for it in &splits.id_test {
        rows[it.user][it.item] = 1.0;
    }
    let rep = evaluate(&Table(rows), &splits, SplitName::IdTest, 30).unwrap();
    assert_eq!((rep.hr, rep.recall, rep.ndcg), (1.0, 1.0, 1.0));
}

#[test]
fn metrics_match_hand_computation() {
    // relevant {2, 5}; ranked 5 first and 2 third
    let m = metrics_at_k(&[5, 1, 2, 0], &[2, 5], 3);
    let ideal = 1.0 + 1.0 / 3f64.log2();
    assert!(m.hit);
    assert_eq!(m.recall, 1.0);
    assert!((m.ndcg - (1.0 + 0.5) / ideal).abs() < 1e-15);
}

#[test]
fn itempop_beats_random_on_skewed_id_test() {
    let data = generate(&SynthConfig {
        n_users: 200,
        n_items: 120,
        interactions_per_user: 20,
        seed: 3,
        ..SynthConfig::default()
    })
    .unwrap();
    let splits = data.benchmark_splits(3);
    let pop = build_popularity_table(&splits.train, splits.n_users, splits.n_items).unwrap();
    let ip = evaluate(&itempop_baseline(&pop), &splits, SplitName::IdTest, 20).unwrap();
    let rnd = evaluate(&RandomRanker::new(splits.n_items, 3), &splits, SplitName::IdTest, 20).unwrap();
    assert!(ip.recall > 2.0 * rnd.recall, "ItemPop {} vs random {}", ip.recall, rnd.recall);
}

/// On a test set whose relevant items are uniform over each user's
/// candidates, any fixed ordering has the same expected recall as a random
/// one; compare the two over 20 independent instances.
#[test]
fn itempop_matches_random_on_uniform_test_items() {
    let (nu, ni, k) = (60, 50, 10);
    let mut diffs = Vec::new();
    for seed in 0..20u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        // Zipf-like train skew
        let mut train = Vec::new();
        for u in 0..nu {
            for i in 0..ni {
                if r.random::<f64>() < 0.6 / (1.0 + i as f64 / 4.0) {
                    train.push(Interaction::new(u, i));
                }
            }
        }
        let mut ood = Vec::new();
        for u in 0..nu {
            let mut cands: Vec<usize> = (0..ni).filter(|&i| !train.contains(&Interaction::new(u, i))).collect();
            cands.shuffle(&mut r);
            ood.extend(cands.into_iter().take(3).map(|i| Interaction::new(u, i)));
        }
        ood.sort_unstable();
        let splits = DatasetSplits {
            n_users: nu,
            n_items: ni,
            train,
            id_valid: Vec::new(),
            id_test: Vec::new(),
            ood_test: ood,
            kind: SplitKind::IdOod,
            seed,
            fractions: [0.5, 0.1, 0.2, 0.2],
        };
        let pop = build_popularity_table(&splits.train, nu, ni).unwrap();
        let ip = evaluate(&itempop_baseline(&pop), &splits, SplitName::OodTest, k).unwrap();
        let rnd = evaluate(&RandomRanker::new(ni, seed), &splits, SplitName::OodTest, k).unwrap();
        diffs.push(ip.recall - rnd.recall);
    }
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 3.0 * sd / n.sqrt() + 1e-3, "mean diff {mean}, sd {sd}");
}
