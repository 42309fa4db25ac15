//! Load an interaction log, apply k-core filtering and write both split
//! protocols with their KL-to-uniform diagnostics.
//!
//! ```bash
//! cargo run -p popgo --example prepare_splits -- path/to/log.tsv 5
//! ```
//!
//! Without arguments a small timestamped log is generated in a temp dir.

use std::fmt::Write as _;

use popgo::data::{apply_k_core, load_interactions, split_id_ood, split_temporal, InputFormat};
use popgo::io::{split_diagnostics, write_splits};
use rand::{Rng, SeedableRng};

fn demo_log(path: &std::path::Path) -> std::io::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut text = String::from("# user\titem\ttimestamp\n");
    for t in 0..4000 {
        let u = rng.random_range(0..120);
        // squared uniform skews item choice toward low ids
        let x: f64 = rng.random();
        let i = (x * x * 80.0) as usize;
        let _ = writeln!(text, "u{u}\ti{i}\t{t}");
    }
    std::fs::write(path, text)
}

fn main() -> popgo::Result<()> {
    let tmp = tempfile::tempdir()?;
    let mut args = std::env::args().skip(1);
    let path = match args.next() {
        Some(p) => p.into(),
        None => {
            let p = tmp.path().join("log.tsv");
            demo_log(&p)?;
            p
        }
    };
    let k: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);

    let raw = load_interactions(&path, InputFormat::Tsv)?;
    let ds = apply_k_core(&raw, k);
    println!(
        "{} -> {}-core: {} users, {} items, {} interactions",
        path.display(),
        k,
        ds.n_users,
        ds.n_items,
        ds.len()
    );

    let id_ood = split_id_ood(&ds, 2023)?;
    println!("\nID/OOD split\n{}", split_diagnostics(&id_ood));
    let files = write_splits(&tmp.path().join("id_ood"), &id_ood, false)?;
    println!("wrote {} files under {}", files.len(), tmp.path().join("id_ood").display());

    match split_temporal(&ds, (0.7, 0.1, 0.2)) {
        Ok(t) => println!("\ntemporal split\n{}", split_diagnostics(&t)),
        Err(e) => println!("\ntemporal split unavailable: {e}"),
    }
    Ok(())
}
