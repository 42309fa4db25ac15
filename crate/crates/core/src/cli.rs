//! The `popgo` command line: `prepare`, `synth`, `train`, `eval` and
//! `analyze`. Each artifact-producing command writes a run manifest next to
//! its outputs and refuses to overwrite files unless `--force` is given.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backbone::Arch;
use crate::data::{apply_k_core, load_interactions, split_id_ood, split_temporal, InputFormat, SplitName};
use crate::eval::{
    correlation_analysis, evaluate, evaluate_id_ood, tau_sweep, AblationReport, CorrelationReport, ModelScorer,
    RankingReport, TauRow, DEFAULT_K, DEFAULT_TAUS,
};
use crate::io::{self, KeyValues, LoadedModels, ModelArtifacts, Mode, RunManifest};
use crate::synth::{generate, SynthConfig};
use crate::training::{fit_plain, fit_popgo, Negatives, TrainingConfig, DEFAULT_NEGATIVES};
use crate::{Error, Result};

/// Environment variable that overrides the training seed.
pub const SEED_ENV: &str = "POPGO_SEED";

#[derive(Debug, Parser)]
#[command(name = "popgo", version, about = "Popularity-shortcut debiasing for collaborative filtering")]
pub struct Cli {
    /// Cap on worker threads for evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Zero wallclock fields so reruns are byte-identical.
    #[arg(long, global = true)]
    pub strict_determinism: bool,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter an interaction log and write the four splits.
    Prepare(PrepareArgs),
    /// Generate a planted-shortcut dataset with its splits and ground truth.
    Synth(SynthArgs),
    /// Train a target model, optionally with the popularity shortcut mask.
    Train(TrainArgs),
    /// All-ranking evaluation of a trained model.
    Eval(EvalArgs),
    /// Loss correlation, PopGo-S ablation and temperature sweep.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SplitArg {
    IdOod,
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Tsv,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchArg {
    Mf,
    Lightgcn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    Plain,
    Popgo,
    PopgoS,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum WhichArg {
    IdValid,
    IdTest,
    OodTest,
}

#[derive(Debug, Clone, Args)]
pub struct PrepareArgs {
    /// Interaction log: `user item [timestamp]` per line.
    pub interactions: PathBuf,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: FormatArg,
    /// Minimum interactions per user and item; 0 disables filtering.
    #[arg(long, default_value_t = 0)]
    pub k_core: usize,
    #[arg(long, value_enum, default_value = "id_ood")]
    pub split: SplitArg,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 500)]
    pub n_users: usize,
    #[arg(long, default_value_t = 300)]
    pub n_items: usize,
    #[arg(long, default_value_t = 8)]
    pub latent_dim: usize,
    /// γ, weight of popularity exposure.
    #[arg(long, default_value_t = 0.6)]
    pub conformity_weight: f64,
    /// s, Zipf exponent of exposure.
    #[arg(long, default_value_t = 1.2)]
    pub zipf: f64,
    #[arg(long, default_value_t = 40)]
    pub interactions_per_user: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "mf")]
    pub arch: ArchArg,
    /// LightGCN propagation depth.
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, value_enum, default_value = "popgo")]
    pub mode: ModeArg,
    /// Flat `key = value` config; missing keys use defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub splits: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Model directory written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub splits: PathBuf,
    #[arg(long, value_enum, default_value = "id_test")]
    pub which: WhichArg,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Report directory; defaults to the model directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail with a nonzero exit if a report invariant is violated.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Model directories: one `popgo` run, optionally a `popgo_s` or
    /// `plain` run for the ablation (retrained when absent).
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub splits: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Temperatures for the sweep.
    #[arg(long, num_args = 1.., default_values_t = DEFAULT_TAUS)]
    pub taus: Vec<f64>,
    #[arg(long)]
    pub check: bool,
}

/// Global flags plus the seed override, shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub strict_determinism: bool,
    pub force: bool,
    pub seed_override: Option<u64>,
}

/// Runs a parsed command line, reading the seed override from the
/// environment.
pub fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<()> {
    let seed_override = match std::env::var(SEED_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}={v:?} is not a u64")))?,
        ),
        Err(_) => None,
    };
    let globals = Globals {
        strict_determinism: cli.strict_determinism,
        force: cli.force,
        seed_override,
    };
    let run = |out: &mut (dyn Write + Send)| match &cli.command {
        Command::Prepare(a) => cmd_prepare(a, &globals, out),
        Command::Synth(a) => cmd_synth(a, &globals, out),
        Command::Train(a) => cmd_train(a, &globals, out),
        Command::Eval(a) => cmd_eval(a, &globals, out),
        Command::Analyze(a) => cmd_analyze(a, &globals, out),
    };
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| run(out))
        }
        None => run(out),
    }
}

struct Clock {
    start: Instant,
    strict: bool,
}

impl Clock {
    fn start(g: &Globals) -> Self {
        Self {
            start: Instant::now(),
            strict: g.strict_determinism,
        }
    }

    fn elapsed(&self) -> f64 {
        if self.strict {
            0.0
        } else {
            self.start.elapsed().as_secs_f64()
        }
    }
}

fn say(out: &mut dyn Write, text: impl AsRef<str>) -> Result<()> {
    out.write_all(text.as_ref().as_bytes())?;
    Ok(())
}

fn manifest_path(dir: &Path, command: &str) -> PathBuf {
    dir.join(format!("manifest_{command}.txt"))
}

pub fn cmd_prepare(a: &PrepareArgs, g: &Globals, out: &mut dyn Write) -> Result<()> {
    let clock = Clock::start(g);
    let format = match a.format {
        FormatArg::Tsv => InputFormat::Tsv,
        FormatArg::Csv => InputFormat::Csv,
    };
    let raw = std::fs::read(&a.interactions)?;
    let ds = load_interactions(&a.interactions, format)?;
    let ds = if a.k_core > 0 { apply_k_core(&ds, a.k_core) } else { ds };
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let seed = a.seed.or(g.seed_override).unwrap_or(TrainingConfig::default().seed);
    let splits = match a.split {
        SplitArg::IdOod => split_id_ood(&ds, seed)?,
        SplitArg::Temporal => split_temporal(&ds, (0.7, 0.1, 0.2))?,
    };
    let mut outputs = io::write_splits(&a.out, &splits, g.force)?;
    for (name, map) in [("users.tsv", &ds.user_ids), ("items.tsv", &ds.item_ids)] {
        let path = a.out.join(name);
        io::write_file(&path, io::id_map_to_tsv(map).as_bytes(), g.force)?;
        outputs.push(path);
    }
    let config = format!(
        "format={:?}\nk_core={}\nsplit={}\nseed={seed}\n",
        a.format,
        a.k_core,
        splits.kind.as_str()
    );
    RunManifest {
        command: "prepare".into(),
        config_hash: io::sha256_hex(config.as_bytes()),
        data_hash: io::sha256_hex(&raw),
        seed,
        version: io::VERSION.into(),
        wallclock_s: clock.elapsed(),
        outputs,
    }
    .write(&manifest_path(&a.out, "prepare"), g.force)?;
    say(out, io::split_diagnostics(&splits))
}

pub fn cmd_synth(a: &SynthArgs, g: &Globals, out: &mut dyn Write) -> Result<()> {
    let clock = Clock::start(g);
    let seed = a.seed.or(g.seed_override).unwrap_or(0);
    let cfg = SynthConfig {
        n_users: a.n_users,
        n_items: a.n_items,
        latent_dim: a.latent_dim,
        conformity_weight: a.conformity_weight,
        exposure_zipf_exponent: a.zipf,
        interactions_per_user: a.interactions_per_user,
        seed,
    };
    let data = generate(&cfg)?;
    let splits = data.benchmark_splits(seed);

    let log = a.out.join("interactions.tsv");
    io::write_file(&log, io::interactions_to_tsv(&data.dataset.interactions).as_bytes(), g.force)?;
    let truth = a.out.join(io::TRUTH_FILE);
    io::write_file(&truth, &io::truth_to_bytes(&data.preference, &data.exposure), g.force)?;
    let mut outputs = vec![log, truth];
    outputs.extend(io::write_splits(&a.out.join("splits"), &splits, g.force)?);

    let config = format!("{cfg:?}");
    RunManifest {
        command: "synth".into(),
        config_hash: io::sha256_hex(config.as_bytes()),
        data_hash: io::splits_hash(&splits),
        seed,
        version: io::VERSION.into(),
        wallclock_s: clock.elapsed(),
        outputs,
    }
    .write(&manifest_path(&a.out, "synth"), g.force)?;
    say(out, io::split_diagnostics(&splits))
}

/// Reads the config file (or defaults), reporting every defaulted key, and
/// applies architecture defaults and the global overrides.
pub fn resolve_config(
    path: Option<&Path>,
    arch: Arch,
    g: &Globals,
    out: &mut dyn Write,
) -> Result<TrainingConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let (mut cfg, defaulted) = TrainingConfig::parse(&text)?;
    let negatives_set = !defaulted.contains(&"n_negatives") || !defaulted.contains(&"in_batch");
    let defaults = TrainingConfig::default();
    let default_text = defaults.to_text();
    for key in defaulted {
        let value = default_text
            .lines()
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
            .unwrap_or("?");
        say(out, format!("config: {key} not set, using default {value}\n"))?;
    }
    if matches!(arch, Arch::LightGcn { .. }) && !negatives_set {
        cfg.negatives = Negatives::InBatch;
        say(out, "config: LightGCN without a negatives setting uses in-batch negatives\n")?;
    }
    if let Some(seed) = g.seed_override {
        cfg.seed = seed;
        say(out, format!("config: seed overridden by {SEED_ENV}={seed}\n"))?;
    }
    cfg.strict_determinism |= g.strict_determinism;
    Ok(cfg)
}

pub fn cmd_train(a: &TrainArgs, g: &Globals, out: &mut dyn Write) -> Result<()> {
    let clock = Clock::start(g);
    let arch = match a.arch {
        ArchArg::Mf => Arch::Mf,
        ArchArg::Lightgcn => Arch::LightGcn { layers: a.layers },
    };
    let mode = match a.mode {
        ModeArg::Plain => Mode::Plain,
        ModeArg::Popgo => Mode::Popgo,
        ModeArg::PopgoS => Mode::PopgoS,
    };
    let splits = io::read_splits(&a.splits)?;
    let cfg = resolve_config(a.config.as_deref(), arch, g, out)?;

    let mut outputs = match mode {
        Mode::Plain | Mode::PopgoS => {
            let fit = fit_plain(arch, &splits, &cfg)?;
            say(
                out,
                format!(
                    "{}: best epoch {} valid recall@20 {:.4}\n",
                    mode.as_str(),
                    fit.best_epoch,
                    fit.best_valid_recall
                ),
            )?;
            io::write_model_dir(
                &a.out,
                &ModelArtifacts {
                    mode,
                    config: &cfg,
                    target: &fit.model,
                    target_log: &fit.log,
                    best_epoch: fit.best_epoch,
                    best_valid_recall: fit.best_valid_recall,
                    shortcut: None,
                },
                g.force,
            )?
        }
        Mode::Popgo => {
            let fit = fit_popgo(arch, &splits, &cfg)?;
            let first = fit.shortcut_log.epochs.first().map_or(f64::NAN, |e| e.train_loss);
            let last = fit.shortcut_log.epochs.last().map_or(f64::NAN, |e| e.train_loss);
            say(out, format!("shortcut: loss {first:.4} -> {last:.4}, frozen\n"))?;
            say(
                out,
                format!(
                    "popgo: best epoch {} valid recall@20 {:.4}\n",
                    fit.target.best_epoch, fit.target.best_valid_recall
                ),
            )?;
            io::write_model_dir(
                &a.out,
                &ModelArtifacts {
                    mode,
                    config: &cfg,
                    target: &fit.target.model,
                    target_log: &fit.target.log,
                    best_epoch: fit.target.best_epoch,
                    best_valid_recall: fit.target.best_valid_recall,
                    shortcut: Some((&fit.shortcut, &fit.shortcut_log)),
                },
                g.force,
            )?
        }
    };
    outputs.sort();
    let config = format!("arch={}\nmode={}\n{}", arch.name(), mode.as_str(), cfg.to_text());
    RunManifest {
        command: "train".into(),
        config_hash: io::sha256_hex(config.as_bytes()),
        data_hash: io::splits_hash(&splits),
        seed: cfg.seed,
        version: io::VERSION.into(),
        wallclock_s: clock.elapsed(),
        outputs,
    }
    .write(&manifest_path(&a.out, "train"), g.force)
}

/// Invariants every report must satisfy.
pub fn check_report(r: &RankingReport) -> Result<()> {
    let fail = |m: String| Err(Error::CheckFailed(format!("{} report: {m}", r.split.as_str())));
    for (name, v) in [("hr", r.hr), ("recall", r.recall), ("ndcg", r.ndcg)] {
        if !(0.0..=1.0).contains(&v) {
            return fail(format!("{name} = {v} outside [0, 1]"));
        }
    }
    if r.users.is_empty() {
        return fail("no evaluated users".into());
    }
    for u in &r.users {
        let m = &u.metrics;
        if u.n_relevant == 0 {
            return fail(format!("user {} has no positives", u.user));
        }
        if !(0.0..=1.0).contains(&m.recall) || !(0.0..=1.0).contains(&m.ndcg) {
            return fail(format!("user {} metrics outside [0, 1]", u.user));
        }
        if m.hit != (m.recall > 0.0) {
            return fail(format!("user {} hit flag disagrees with recall", u.user));
        }
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs, g: &Globals, out: &mut dyn Write) -> Result<()> {
    let clock = Clock::start(g);
    if a.k == 0 {
        return Err(Error::InvalidArgument("--k must be positive".into()));
    }
    let splits = io::read_splits(&a.splits)?;
    let loaded = io::load_model_dir(&a.model, &splits)?;
    let which = match a.which {
        WhichArg::IdValid => SplitName::IdValid,
        WhichArg::IdTest => SplitName::IdTest,
        WhichArg::OodTest => SplitName::OodTest,
    };
    let report = evaluate(&ModelScorer::new(&loaded.target), &splits, which, a.k)?;
    if a.check {
        check_report(&report)?;
    }
    let dir = a.out.clone().unwrap_or_else(|| a.model.clone());
    let path = dir.join(io::report_file_name(which));
    io::write_file(&path, io::report_to_tsv(&report).as_bytes(), g.force)?;
    RunManifest {
        command: "eval".into(),
        config_hash: io::sha256_hex(format!("which={}\nk={}\n", which.as_str(), a.k).as_bytes()),
        data_hash: io::splits_hash(&splits),
        seed: loaded.config.seed,
        version: io::VERSION.into(),
        wallclock_s: clock.elapsed(),
        outputs: vec![path],
    }
    .write(&manifest_path(&dir, &format!("eval_{}", which.as_str())), g.force)?;
    say(
        out,
        format!(
            "{} k={} users={}  HR {:.4}  Recall {:.4}  NDCG {:.4}\n",
            which.as_str(),
            a.k,
            report.n_evaluated_users(),
            report.hr,
            report.recall,
            report.ndcg
        ),
    )
}

pub fn check_analysis(c: &CorrelationReport, ablation: &AblationReport, taus: &[TauRow]) -> Result<()> {
    for (name, r) in [("r_alpha", c.r_alpha), ("r_masked", c.r_masked)] {
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::CheckFailed(format!("{name} = {r} outside [-1, 1]")));
        }
    }
    for (_, _, r) in ablation.rows() {
        check_report(r)?;
    }
    for t in taus {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        if !ok(t.id_recall) || !t.ood_recall.is_none_or(ok) {
            return Err(Error::CheckFailed(format!("tau {} recall outside [0, 1]", t.tau)));
        }
    }
    Ok(())
}

pub fn cmd_analyze(a: &AnalyzeArgs, g: &Globals, out: &mut dyn Write) -> Result<()> {
    let clock = Clock::start(g);
    let splits = io::read_splits(&a.splits)?;
    let mut popgo: Option<LoadedModels> = None;
    let mut baseline: Option<LoadedModels> = None;
    for dir in &a.models {
        let m = io::load_model_dir(dir, &splits)?;
        let slot = match m.mode {
            Mode::Popgo => &mut popgo,
            Mode::PopgoS | Mode::Plain => &mut baseline,
        };
        if slot.is_some() {
            return Err(Error::InvalidArgument(format!(
                "more than one {} model given",
                m.mode.as_str()
            )));
        }
        *slot = Some(m);
    }
    let popgo = popgo.ok_or_else(|| Error::InvalidArgument("analyze needs a model trained with --mode popgo".into()))?;
    let shortcut = popgo
        .shortcut
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("popgo model directory has no shortcut checkpoint".into()))?;
    let mut cfg = popgo.config.clone();
    if let Some(seed) = g.seed_override {
        cfg.seed = seed;
    }
    cfg.strict_determinism |= g.strict_determinism;
    let n_negatives = match cfg.negatives {
        Negatives::Sampled(n) => n,
        Negatives::InBatch => DEFAULT_NEGATIVES,
    };

    let correlation = correlation_analysis(&popgo.target, shortcut, &splits, cfg.tau, n_negatives, cfg.seed)?;
    let popgo_s = match &baseline {
        Some(b) => {
            let same_config = TrainingConfig {
                strict_determinism: popgo.config.strict_determinism,
                ..b.config.clone()
            } == popgo.config;
            if b.arch() != popgo.arch() || !same_config {
                say(out, "note: ablation baseline was trained with a different arch or config\n")?;
            }
            evaluate_id_ood(&b.target, &splits, DEFAULT_K)?
        }
        None => {
            say(out, "ablation: training popgo_s with the popgo config\n")?;
            let fit = fit_plain(popgo.arch(), &splits, &cfg)?;
            evaluate_id_ood(&fit.model, &splits, DEFAULT_K)?
        }
    };
    let ablation = AblationReport {
        popgo: evaluate_id_ood(&popgo.target, &splits, DEFAULT_K)?,
        popgo_s,
    };
    let taus = tau_sweep(popgo.arch(), &splits, &cfg, &a.taus)?;
    if a.check {
        check_analysis(&correlation, &ablation, &taus)?;
    }

    let mut outputs = Vec::new();
    for (name, text) in [
        ("correlation.tsv", io::correlation_to_tsv(&correlation)),
        ("ablation.tsv", io::ablation_to_tsv(&ablation)),
        ("tau_sweep.tsv", io::tau_sweep_to_tsv(&taus)),
    ] {
        let path = a.out.join(name);
        io::write_file(&path, text.as_bytes(), g.force)?;
        outputs.push(path);
    }
    let mut kv = KeyValues::default();
    for d in &a.models {
        kv.push("model", d.display());
    }
    kv.push("taus", format!("{:?}", a.taus));
    RunManifest {
        command: "analyze".into(),
        config_hash: io::sha256_hex(format!("{}{}", kv.to_text(), cfg.to_text()).as_bytes()),
        data_hash: io::splits_hash(&splits),
        seed: cfg.seed,
        version: io::VERSION.into(),
        wallclock_s: clock.elapsed(),
        outputs,
    }
    .write(&manifest_path(&a.out, "analyze"), g.force)?;

    say(
        out,
        format!(
            "correlation: r_alpha {:.4}  r_masked {:.4}  (n = {})\n",
            correlation.r_alpha, correlation.r_masked, correlation.n
        ),
    )?;
    for (model, split, r) in ablation.rows() {
        say(out, format!("{model:<8} {split:<4} recall@20 {:.4}\n", r.recall))?;
    }
    for t in &taus {
        let ood = t.ood_recall.map_or("NA".into(), |v| format!("{v:.4}"));
        say(out, format!("tau {:<5} id {:.4}  ood {ood}\n", t.tau, t.id_recall))?;
    }
    Ok(())
}
