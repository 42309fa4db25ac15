//! Plain MF vs MF+PopGo vs ItemPop on the planted-shortcut benchmark, with
//! the generator's own preference matrix as an upper reference.
//!
//! ```bash
//! cargo run --release -p popgo --example synth_benchmark -- 0 1 2
//! ```

use popgo::backbone::Arch;
use popgo::data::{build_popularity_table, kl_to_uniform, SplitName};
use popgo::eval::{evaluate, evaluate_id_ood, itempop_baseline, Ranker, DEFAULT_K};
use popgo::synth::{generate, PreferenceMatrix, SynthConfig};
use popgo::training::{fit_plain, fit_popgo, TrainingConfig};

/// Ranks by true preference.
struct Oracle<'a>(&'a PreferenceMatrix);

impl Ranker for Oracle<'_> {
    fn n_items(&self) -> usize {
        self.0.n_items
    }

    fn score_items(&self, user: usize, out: &mut [f64]) {
        out.copy_from_slice(self.0.row(user));
    }
}

fn main() -> popgo::Result<()> {
    let seeds: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let seeds = if seeds.is_empty() { vec![0, 1, 2] } else { seeds };
    let (mut mf_ood, mut pg_ood) = (0.0, 0.0);

    for &seed in &seeds {
        let data = generate(&SynthConfig { seed, ..Default::default() })?;
        let splits = data.benchmark_splits(seed);
        let cfg = TrainingConfig { seed, ..Default::default() };
        println!(
            "seed {seed}: {} train / {} ood, KL train {:.3} ood {:.3}",
            splits.train.len(),
            splits.ood_test.len(),
            kl_to_uniform(&splits.train, splits.n_items)?,
            kl_to_uniform(&splits.ood_test, splits.n_items)?
        );

        let pop = build_popularity_table(&splits.train, splits.n_users, splits.n_items)?;
        let row = |name: &str, r: &dyn Ranker| -> popgo::Result<()> {
            let id = evaluate(r, &splits, SplitName::IdTest, DEFAULT_K)?.recall;
            let ood = evaluate(r, &splits, SplitName::OodTest, DEFAULT_K)?.recall;
            println!("  {name:<9} id {id:.4}  ood {ood:.4}");
            Ok(())
        };
        row("itempop", &itempop_baseline(&pop))?;
        row("oracle", &Oracle(&data.preference))?;

        let plain = fit_plain(Arch::Mf, &splits, &cfg)?;
        let r = evaluate_id_ood(&plain.model, &splits, DEFAULT_K)?;
        let ood = r.ood.map_or(f64::NAN, |o| o.recall);
        mf_ood += ood;
        println!("  mf        id {:.4}  ood {ood:.4}  (best epoch {})", r.id.recall, plain.best_epoch);

        let fit = fit_popgo(Arch::Mf, &splits, &cfg)?;
        let r = evaluate_id_ood(&fit.target.model, &splits, DEFAULT_K)?;
        let ood = r.ood.map_or(f64::NAN, |o| o.recall);
        pg_ood += ood;
        println!(
            "  mf+popgo  id {:.4}  ood {ood:.4}  (best epoch {})",
            r.id.recall, fit.target.best_epoch
        );
    }
    println!("mean OOD recall ratio popgo / mf: {:.3}", pg_ood / mf_ood);
    Ok(())
}
