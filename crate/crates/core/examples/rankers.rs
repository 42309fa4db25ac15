//! All-ranking metrics for the non-learned rankers (ItemPop, seeded random)
//! at several cutoffs, on the ID and OOD test sets. ItemPop wins in
//! distribution and collapses toward random under uniform exposure.
//!
//! ```bash
//! cargo run --release -p popgo --example rankers
//! ```

use popgo::data::{build_popularity_table, SplitName};
use popgo::eval::{evaluate, itempop_baseline, RandomRanker, Ranker};
use popgo::synth::{generate, SynthConfig};

fn main() -> popgo::Result<()> {
    let data = generate(&SynthConfig::default())?;
    let splits = data.benchmark_splits(0);
    let pop = build_popularity_table(&splits.train, splits.n_users, splits.n_items)?;
    let itempop = itempop_baseline(&pop);
    let random = RandomRanker::new(splits.n_items, 7);
    let rankers: [(&str, &dyn Ranker); 2] = [("itempop", &itempop), ("random", &random)];

    println!("{:<8} {:<9} {:>3} {:>7} {:>7} {:>7}", "ranker", "split", "k", "hr", "recall", "ndcg");
    for (name, r) in rankers {
        for split in [SplitName::IdTest, SplitName::OodTest] {
            for k in [10, 20, 50] {
                let rep = evaluate(r, &splits, split, k)?;
                println!(
                    "{name:<8} {:<9} {k:>3} {:>7.4} {:>7.4} {:>7.4}",
                    split.as_str(),
                    rep.hr,
                    rep.recall,
                    rep.ndcg
                );
            }
        }
    }
    Ok(())
}
