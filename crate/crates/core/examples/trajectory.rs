//! Per-epoch ID-validation and OOD Recall@20 for plain MF and MF+PopGo,
//! showing where early stopping lands relative to OOD performance.
//!
//! ```bash
//! cargo run --release -p popgo --example trajectory -- 0 60
//! ```

use popgo::backbone::Arch;
use popgo::data::SplitName;
use popgo::eval::{evaluate, ModelScorer, DEFAULT_K};
use popgo::synth::{generate, SynthConfig};
use popgo::training::{fit_shortcut, init_target, train_target_with, Mask, TrainingConfig};

fn main() -> popgo::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().ok());
    let seed = args.next().flatten().unwrap_or(0);
    let epochs = args.next().flatten().unwrap_or(60) as usize;
    let data = generate(&SynthConfig { seed, ..Default::default() })?;
    let splits = data.benchmark_splits(seed);
    // run the full budget so the whole curve is visible
    let cfg = TrainingConfig {
        seed,
        max_epochs: epochs,
        patience: epochs,
        ..Default::default()
    };

    let (shortcut, _) = fit_shortcut(Arch::Mf, &splits, &cfg)?;
    let degrees = shortcut.degrees();
    for (name, mask) in [("mf", Mask::Identity), ("popgo", Mask::Shortcut(&degrees))] {
        let model = init_target(Arch::Mf, &splits, &cfg)?;
        let out = train_target_with(model, mask, &splits, &cfg, &mut |rec, m| {
            let ood = evaluate(&ModelScorer::new(m), &splits, SplitName::OodTest, DEFAULT_K).map_or(f64::NAN, |r| r.recall);
            println!(
                "{name:>6} epoch {:>3} loss {:.4} valid {:.4} ood {ood:.4}",
                rec.epoch,
                rec.train_loss,
                rec.valid_recall.unwrap_or(f64::NAN)
            );
        })?;
        println!("{name:>6} best epoch {}", out.best_epoch);
    }
    Ok(())
}
