//! Pretrain the popularity shortcut model, freeze it, and look at the
//! shortcut degrees it assigns: users and items with equal train frequency
//! share one representation, and beta rises with item popularity.
//!
//! ```bash
//! cargo run --release -p popgo --example shortcut_degrees
//! ```

use popgo::backbone::Arch;
use popgo::synth::{generate, SynthConfig};
use popgo::training::{fit_shortcut, TrainingConfig};

fn main() -> popgo::Result<()> {
    let data = generate(&SynthConfig::default())?;
    let splits = data.benchmark_splits(0);
    let cfg = TrainingConfig { seed: 0, ..Default::default() };
    let (shortcut, log) = fit_shortcut(Arch::Mf, &splits, &cfg)?;
    for e in &log.epochs {
        println!("shortcut epoch {} loss {:.4}", e.epoch, e.train_loss);
    }
    let pop = &shortcut.pop_table;
    println!(
        "{} users share {} rows, {} items share {} rows; frozen = {}, hash {}",
        pop.n_users(),
        pop.user_freq_vocab.len(),
        pop.n_items(),
        pop.item_freq_vocab.len(),
        shortcut.is_frozen(),
        &shortcut.parameter_hash()[..16]
    );

    // mean beta per item popularity quintile, averaged over users
    let degrees = shortcut.degrees();
    let mut items: Vec<usize> = (0..pop.n_items()).collect();
    items.sort_by_key(|&i| pop.item_pop[i]);
    for (q, chunk) in items.chunks(items.len().div_ceil(5)).enumerate() {
        let mut sum = 0.0;
        for &i in chunk {
            sum += (0..pop.n_users()).map(|u| degrees.beta(u, i)).sum::<f64>();
        }
        let lo = pop.item_pop[chunk[0]];
        let hi = pop.item_pop[*chunk.last().unwrap()];
        println!(
            "item quintile {q} (d_i {lo}..={hi}): mean beta {:.4}",
            sum / (chunk.len() * pop.n_users()) as f64
        );
    }
    Ok(())
}
