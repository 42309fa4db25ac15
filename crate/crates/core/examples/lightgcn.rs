//! LightGCN with and without PopGo. Uses in-batch negatives, the usual choice
//! for graph backbones.
//!
//! ```bash
//! cargo run --release -p popgo --example lightgcn -- 0 2
//! ```

use popgo::backbone::Arch;
use popgo::eval::{evaluate_id_ood, DEFAULT_K};
use popgo::synth::{generate, SynthConfig};
use popgo::training::{fit_plain, fit_popgo, Negatives, TrainingConfig};

fn main() -> popgo::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().ok());
    let seed = args.next().flatten().unwrap_or(0);
    let layers = args.next().flatten().unwrap_or(2) as usize;
    let data = generate(&SynthConfig { seed, ..Default::default() })?;
    let splits = data.benchmark_splits(seed);
    let arch = Arch::LightGcn { layers };
    let cfg = TrainingConfig {
        seed,
        negatives: Negatives::InBatch,
        ..Default::default()
    };

    let plain = fit_plain(arch, &splits, &cfg)?;
    let popgo = fit_popgo(arch, &splits, &cfg)?;
    for (name, model, epoch) in [
        ("lightgcn", &plain.model, plain.best_epoch),
        ("+popgo", &popgo.target.model, popgo.target.best_epoch),
    ] {
        let r = evaluate_id_ood(model, &splits, DEFAULT_K)?;
        println!(
            "{name:<9} L={layers} id recall {:.4} ndcg {:.4} | ood recall {:.4} ndcg {:.4} (epoch {epoch})",
            r.id.recall,
            r.id.ndcg,
            r.ood.as_ref().map_or(f64::NAN, |o| o.recall),
            r.ood.as_ref().map_or(f64::NAN, |o| o.ndcg),
        );
    }
    Ok(())
}
