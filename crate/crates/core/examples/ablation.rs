//! PopGo against PopGo-S (shortcut disabled) under identical seeds.
//!
//! ```bash
//! cargo run --release -p popgo --example ablation -- 0 1 2
//! ```

use popgo::backbone::Arch;
use popgo::eval::run_ablation_popgo_s;
use popgo::synth::{generate, SynthConfig};
use popgo::training::TrainingConfig;

fn main() -> popgo::Result<()> {
    let seeds: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let seeds = if seeds.is_empty() { vec![0, 1, 2] } else { seeds };
    for seed in seeds {
        let data = generate(&SynthConfig { seed, ..Default::default() })?;
        let splits = data.benchmark_splits(seed);
        let report = run_ablation_popgo_s(Arch::Mf, &splits, &TrainingConfig { seed, ..Default::default() })?;
        for (model, split, r) in report.rows() {
            println!(
                "seed {seed} {model:<8} {split:<4} hr {:.4} recall {:.4} ndcg {:.4}",
                r.hr, r.recall, r.ndcg
            );
        }
    }
    Ok(())
}
