//! How strongly the target model's loss tracks the shortcut loss, with and
//! without the mask, after PopGo training on the synthetic benchmark.
//!
//! ```bash
//! cargo run --release -p popgo --example correlation -- 0 1 2
//! ```

use popgo::backbone::Arch;
use popgo::eval::correlation_analysis;
use popgo::synth::{generate, SynthConfig};
use popgo::training::{fit_popgo, Negatives, TrainingConfig, DEFAULT_NEGATIVES};

fn main() -> popgo::Result<()> {
    let seeds: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let seeds = if seeds.is_empty() { vec![0, 1, 2] } else { seeds };
    for seed in seeds {
        let data = generate(&SynthConfig { seed, ..Default::default() })?;
        let splits = data.benchmark_splits(seed);
        let cfg = TrainingConfig { seed, ..Default::default() };
        let fit = fit_popgo(Arch::Mf, &splits, &cfg)?;
        let n_neg = match cfg.negatives {
            Negatives::Sampled(n) => n,
            Negatives::InBatch => DEFAULT_NEGATIVES,
        };
        let c = correlation_analysis(&fit.target.model, &fit.shortcut, &splits, cfg.tau, n_neg, seed)?;
        println!(
            "seed {seed}: r_alpha {:.4}  r_masked {:.4}  over {} interactions",
            c.r_alpha, c.r_masked, c.n
        );
    }
    Ok(())
}
