//! Temperature sensitivity of MF+PopGo.
//!
//! ```bash
//! cargo run --release -p popgo --example tau_sweep -- 0
//! ```

use popgo::backbone::Arch;
use popgo::eval::{tau_sweep, DEFAULT_TAUS};
use popgo::synth::{generate, SynthConfig};
use popgo::training::TrainingConfig;

fn main() -> popgo::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let data = generate(&SynthConfig { seed, ..Default::default() })?;
    let splits = data.benchmark_splits(seed);
    let rows = tau_sweep(Arch::Mf, &splits, &TrainingConfig { seed, ..Default::default() }, &DEFAULT_TAUS)?;
    println!("{:>5} {:>9} {:>9}", "tau", "id@20", "ood@20");
    for r in rows {
        println!("{:>5} {:>9.4} {:>9.4}", r.tau, r.id_recall, r.ood_recall.unwrap_or(f64::NAN));
    }
    Ok(())
}
