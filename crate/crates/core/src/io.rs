//! On-disk formats: split directories, checkpoints with their manifests,
//! logs, reports and run manifests. Text outputs are UTF-8 TSV or flat
//! `key=value` files; every writer refuses to replace an existing file unless
//! `force` is set.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::backbone::{Arch, Model, RowLookup, ScoreKind};
use crate::data::{
    build_popularity_table, kl_to_uniform, DatasetSplits, FreqVocab, IdMap, Interaction, PopularityTable, SplitKind,
    SplitName,
};
use crate::eval::{AblationReport, CorrelationReport, RankingReport, TauRow};
use crate::shortcut::ShortcutModel;
use crate::synth::PreferenceMatrix;
use crate::training::{train_graph, TrainingConfig, TrainingLog};
use crate::{Error, Result};

pub const SPLIT_MANIFEST: &str = "split_manifest.txt";
pub const MODEL_MANIFEST: &str = "model_manifest.txt";
pub const TARGET_CHECKPOINT: &str = "target.ckpt";
pub const SHORTCUT_CHECKPOINT: &str = "shortcut.ckpt";
pub const POP_VOCAB: &str = "pop_vocab.txt";
pub const CONFIG_FILE: &str = "config.txt";
pub const TRUTH_FILE: &str = "truth.bin";
const TRUTH_MAGIC: &[u8; 4] = b"PGTR";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `path`, creating parent directories. An existing file
/// is an error unless `force`.
pub fn write_file(path: &Path, bytes: &[u8], force: bool) -> Result<()> {
    if !force && path.exists() {
        return Err(Error::WouldOverwrite(path.to_path_buf()));
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Ordered `key=value` lines; `#` comments and blank lines are skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    pub entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::InvalidArgument(format!("manifest is missing key {key:?}")))
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.require(key)?;
        v.parse()
            .map_err(|e| Error::InvalidArgument(format!("manifest key {key}: cannot parse {v:?}: {e}")))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("manifest line {}: expected key=value", n + 1)))?;
            kv.push(k.trim(), v.trim());
        }
        Ok(kv)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

// ---- interaction lists ----

pub fn split_file_name(name: SplitName) -> String {
    format!("{}.tsv", name.as_str())
}

/// `user<TAB>item[<TAB>timestamp]` with dense indices, in list order.
pub fn interactions_to_tsv(list: &[Interaction]) -> String {
    let mut s = String::with_capacity(list.len() * 12);
    for it in list {
        match it.timestamp {
            Some(ts) => {
                let _ = writeln!(s, "{}\t{}\t{ts}", it.user, it.item);
            }
            None => {
                let _ = writeln!(s, "{}\t{}", it.user, it.item);
            }
        }
    }
    s
}

/// Inverse of [`interactions_to_tsv`]; indices are checked against the
/// entity counts.
pub fn interactions_from_tsv(text: &str, n_users: usize, n_items: usize, origin: &Path) -> Result<Vec<Interaction>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: n + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(format!("expected 2 or 3 fields, found {}", fields.len())));
        }
        let index = |s: &str, bound: usize, what: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|e| err(format!("bad {what} index {s:?}: {e}")))?;
            if v >= bound {
                return Err(err(format!("{what} index {v} out of range ({bound})")));
            }
            Ok(v)
        };
        let user = index(fields[0], n_users, "user")?;
        let item = index(fields[1], n_items, "item")?;
        let timestamp = match fields.get(2) {
            Some(ts) => Some(ts.parse().map_err(|e| err(format!("bad timestamp {ts:?}: {e}")))?),
            None => None,
        };
        out.push(Interaction { user, item, timestamp });
    }
    Ok(out)
}

/// `index<TAB>token` lines for one id map.
pub fn id_map_to_tsv(map: &IdMap) -> String {
    let mut s = String::new();
    for i in 0..map.len() {
        let _ = writeln!(s, "{i}\t{}", map.token(i).unwrap_or_default());
    }
    s
}

// ---- split directories ----

fn kl_or_na(list: &[Interaction], n_items: usize) -> String {
    match kl_to_uniform(list, n_items) {
        Ok(kl) => format!("{kl:.6}"),
        Err(_) => "NA".into(),
    }
}

pub fn split_manifest(splits: &DatasetSplits) -> KeyValues {
    let mut kv = KeyValues::default();
    kv.push("kind", splits.kind.as_str());
    kv.push("seed", splits.seed);
    kv.push("n_users", splits.n_users);
    kv.push("n_items", splits.n_items);
    kv.push(
        "fractions",
        splits.fractions.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(","),
    );
    kv.push(
        "files",
        SplitName::ALL.iter().map(|&n| split_file_name(n)).collect::<Vec<_>>().join(","),
    );
    for name in SplitName::ALL {
        kv.push(format!("count.{}", name.as_str()), splits.get(name).len());
    }
    for name in SplitName::ALL {
        kv.push(format!("kl.{}", name.as_str()), kl_or_na(splits.get(name), splits.n_items));
    }
    kv
}

/// Writes the four split files and `split_manifest.txt`; returns the paths.
pub fn write_splits(dir: &Path, splits: &DatasetSplits, force: bool) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for name in SplitName::ALL {
        let path = dir.join(split_file_name(name));
        write_file(&path, interactions_to_tsv(splits.get(name)).as_bytes(), force)?;
        written.push(path);
    }
    let path = dir.join(SPLIT_MANIFEST);
    write_file(&path, split_manifest(splits).to_text().as_bytes(), force)?;
    written.push(path);
    Ok(written)
}

pub fn read_splits(dir: &Path) -> Result<DatasetSplits> {
    let kv = KeyValues::read(&dir.join(SPLIT_MANIFEST))?;
    let n_users: usize = kv.parse_value("n_users")?;
    let n_items: usize = kv.parse_value("n_items")?;
    let fractions: Vec<f64> = kv
        .require("fractions")?
        .split(',')
        .map(|f| {
            f.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad fraction {f:?}")))
        })
        .collect::<Result<_>>()?;
    let fractions: [f64; 4] = fractions
        .try_into()
        .map_err(|_| Error::InvalidArgument("fractions must have 4 entries".into()))?;
    let mut lists = Vec::with_capacity(4);
    for name in SplitName::ALL {
        let path = dir.join(split_file_name(name));
        let list = interactions_from_tsv(&std::fs::read_to_string(&path)?, n_users, n_items, &path)?;
        let expected: usize = kv.parse_value(&format!("count.{}", name.as_str()))?;
        if list.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{} has {} interactions, manifest says {expected}",
                path.display(),
                list.len()
            )));
        }
        lists.push(list);
    }
    let mut it = lists.into_iter();
    Ok(DatasetSplits {
        n_users,
        n_items,
        train: it.next().unwrap_or_default(),
        id_valid: it.next().unwrap_or_default(),
        id_test: it.next().unwrap_or_default(),
        ood_test: it.next().unwrap_or_default(),
        kind: SplitKind::parse(kv.require("kind")?)?,
        seed: kv.parse_value("seed")?,
        fractions,
    })
}

/// SHA-256 over the four split files as written.
pub fn splits_hash(splits: &DatasetSplits) -> String {
    let mut h = Sha256::new();
    for name in SplitName::ALL {
        h.update(name.as_str().as_bytes());
        h.update(interactions_to_tsv(splits.get(name)).as_bytes());
    }
    hex::encode(h.finalize())
}

/// Counts, sparsity and KL-to-uniform of every split, one line each.
pub fn split_diagnostics(splits: &DatasetSplits) -> String {
    let total = splits.total();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "users {}  items {}  interactions {}  sparsity {:.5}",
        splits.n_users,
        splits.n_items,
        total,
        total as f64 / (splits.n_users as f64 * splits.n_items as f64)
    );
    let _ = writeln!(s, "{:<10} {:>12} {:>14}", "split", "interactions", "kl_to_uniform");
    for name in SplitName::ALL {
        let list = splits.get(name);
        let kl = match kl_to_uniform(list, splits.n_items) {
            Ok(kl) => format!("{kl:.3}"),
            Err(_) => "NA".into(),
        };
        let _ = writeln!(s, "{:<10} {:>12} {:>14}", name.as_str(), list.len(), kl);
    }
    s
}

// ---- popularity vocabularies ----

/// `frequency<TAB>category` per entry, user vocabulary then item vocabulary,
/// each under a `# user` / `# item` heading.
pub fn pop_vocab_to_text(pop: &PopularityTable) -> String {
    let mut s = String::new();
    for (label, vocab) in [("user", &pop.user_freq_vocab), ("item", &pop.item_freq_vocab)] {
        let _ = writeln!(s, "# {label}");
        for (c, f) in vocab.values().iter().enumerate() {
            let _ = writeln!(s, "{f}\t{c}");
        }
    }
    s
}

/// Parses [`pop_vocab_to_text`] output into (user, item) vocabularies.
pub fn pop_vocab_from_text(text: &str) -> Result<(FreqVocab, FreqVocab)> {
    let mut sections: Vec<Vec<usize>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            sections.push(Vec::new());
            continue;
        }
        let (f, c) = line
            .split_once('\t')
            .ok_or_else(|| Error::InvalidArgument(format!("pop_vocab line {line:?}")))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::InvalidArgument("pop_vocab entry before a section heading".into()))?;
        let (f, c): (usize, usize) = match (f.parse(), c.parse()) {
            (Ok(f), Ok(c)) => (f, c),
            _ => return Err(Error::InvalidArgument(format!("pop_vocab line {line:?}"))),
        };
        if c != section.len() {
            return Err(Error::InvalidArgument(format!("pop_vocab categories out of order at {line:?}")));
        }
        section.push(f);
    }
    let [user, item]: [Vec<usize>; 2] = sections
        .try_into()
        .map_err(|_| Error::InvalidArgument("pop_vocab needs a user and an item section".into()))?;
    Ok((FreqVocab::from_values(user)?, FreqVocab::from_values(item)?))
}

// ---- logs and reports ----

pub fn training_log_to_tsv(log: &TrainingLog) -> String {
    let mut s = String::from("epoch\ttrain_loss\tvalid_recall@20\twallclock_s\n");
    for e in &log.epochs {
        let recall = e.valid_recall.map_or("NA".into(), |r| format!("{r:.6}"));
        let _ = writeln!(s, "{}\t{:.6}\t{recall}\t{:.3}", e.epoch, e.train_loss, e.wallclock_s);
    }
    s
}

/// A `mean` row with the aggregates, then one row per evaluated user.
pub fn report_to_tsv(report: &RankingReport) -> String {
    let k = report.k;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# split={} k={k} users={}",
        report.split.as_str(),
        report.n_evaluated_users()
    );
    let _ = writeln!(s, "user\tn_relevant\thr@{k}\trecall@{k}\tndcg@{k}");
    let relevant: usize = report.users.iter().map(|u| u.n_relevant).sum();
    let _ = writeln!(
        s,
        "mean\t{relevant}\t{:.6}\t{:.6}\t{:.6}",
        report.hr, report.recall, report.ndcg
    );
    for u in &report.users {
        let m = &u.metrics;
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{:.6}\t{:.6}",
            u.user,
            u.n_relevant,
            u8::from(m.hit),
            m.recall,
            m.ndcg
        );
    }
    s
}

pub fn report_file_name(split: SplitName) -> String {
    format!("report_{}.tsv", split.as_str())
}

pub fn correlation_to_tsv(c: &CorrelationReport) -> String {
    format!(
        "metric\tvalue\nr_alpha\t{:.6}\nr_masked\t{:.6}\nn\t{}\n",
        c.r_alpha, c.r_masked, c.n
    )
}

pub fn ablation_to_tsv(a: &AblationReport) -> String {
    let mut s = String::from("model\tsplit\thr@20\trecall@20\tndcg@20\n");
    for (model, split, r) in a.rows() {
        let _ = writeln!(s, "{model}\t{split}\t{:.6}\t{:.6}\t{:.6}", r.hr, r.recall, r.ndcg);
    }
    s
}

pub fn tau_sweep_to_tsv(rows: &[TauRow]) -> String {
    let mut s = String::from("tau\tid_recall@20\tood_recall@20\n");
    for r in rows {
        let ood = r.ood_recall.map_or("NA".into(), |v| format!("{v:.6}"));
        let _ = writeln!(s, "{}\t{:.6}\t{ood}", r.tau, r.id_recall);
    }
    s
}

// ---- ground truth ----

/// `"PGTR"`, version u32, n_users u64, n_items u64, then the preference
/// matrix and the exposure vector as little-endian f64.
pub fn truth_to_bytes(pref: &PreferenceMatrix, exposure: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * (pref.as_slice().len() + exposure.len()));
    out.extend_from_slice(TRUTH_MAGIC);
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&(pref.n_users as u64).to_le_bytes());
    out.extend_from_slice(&(pref.n_items as u64).to_le_bytes());
    for v in pref.as_slice().iter().chain(exposure) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn truth_from_bytes(bytes: &[u8]) -> Result<(PreferenceMatrix, Vec<f64>)> {
    let bad = |m: &str| Error::InvalidArgument(format!("truth file: {m}"));
    if bytes.len() < 24 || &bytes[..4] != TRUTH_MAGIC {
        return Err(bad("bad magic or truncated header"));
    }
    if u32::from_le_bytes(bytes[4..8].try_into().unwrap()) != 1 {
        return Err(bad("unsupported version"));
    }
    let nu = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let ni = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let body = &bytes[24..];
    if body.len() != 8 * (nu * ni + ni) {
        return Err(bad("body length does not match dimensions"));
    }
    let vals: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let exposure = vals[nu * ni..].to_vec();
    let mut pref = vals;
    pref.truncate(nu * ni);
    Ok((PreferenceMatrix::from_values(nu, ni, pref)?, exposure))
}

// ---- model directories ----

/// Training mode of a model directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Popgo,
    /// PopGo with the shortcut disabled (mask fixed at 1).
    PopgoS,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Popgo => "popgo",
            Mode::PopgoS => "popgo_s",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Mode::Plain),
            "popgo" => Ok(Mode::Popgo),
            "popgo_s" => Ok(Mode::PopgoS),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

/// What a trained run leaves behind.
pub struct ModelArtifacts<'a> {
    pub mode: Mode,
    pub config: &'a TrainingConfig,
    pub target: &'a Model,
    pub target_log: &'a TrainingLog,
    pub best_epoch: usize,
    pub best_valid_recall: f64,
    pub shortcut: Option<(&'a ShortcutModel, &'a TrainingLog)>,
}

/// Writes checkpoints, logs, vocabularies, the resolved config and
/// `model_manifest.txt`; returns the paths written.
pub fn write_model_dir(dir: &Path, a: &ModelArtifacts<'_>, force: bool) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, bytes, force)?;
        written.push(path);
        Ok(())
    };
    let target_bytes = a.target.to_checkpoint_bytes();
    let config_text = a.config.to_text();
    put(TARGET_CHECKPOINT, &target_bytes)?;
    put("training_log.tsv", training_log_to_tsv(a.target_log).as_bytes())?;
    put(CONFIG_FILE, config_text.as_bytes())?;

    let mut kv = KeyValues::default();
    kv.push("mode", a.mode.as_str());
    kv.push("arch", a.target.arch.name());
    kv.push("score", a.target.score_kind.as_str());
    kv.push("dim", a.target.dim());
    kv.push("n_users", a.target.n_users());
    kv.push("n_items", a.target.n_items());
    kv.push("config", CONFIG_FILE);
    kv.push("config_sha256", sha256_hex(config_text.as_bytes()));
    kv.push("target", TARGET_CHECKPOINT);
    kv.push("target_sha256", sha256_hex(&target_bytes));
    kv.push("best_epoch", a.best_epoch);
    kv.push("best_valid_recall@20", format!("{:.6}", a.best_valid_recall));
    if let Some((sm, log)) = a.shortcut {
        let bytes = sm.inner.to_checkpoint_bytes();
        put(SHORTCUT_CHECKPOINT, &bytes)?;
        put("shortcut_log.tsv", training_log_to_tsv(log).as_bytes())?;
        put(POP_VOCAB, pop_vocab_to_text(&sm.pop_table).as_bytes())?;
        kv.push("shortcut", SHORTCUT_CHECKPOINT);
        kv.push("shortcut_sha256", sha256_hex(&bytes));
        kv.push("shortcut_parameter_hash", sm.parameter_hash());
        kv.push("pop_vocab", POP_VOCAB);
    }
    put(MODEL_MANIFEST, kv.to_text().as_bytes())?;
    Ok(written)
}

/// A model directory restored against the splits it was trained on.
pub struct LoadedModels {
    pub mode: Mode,
    pub config: TrainingConfig,
    pub target: Model,
    pub shortcut: Option<ShortcutModel>,
    pub manifest: KeyValues,
}

impl LoadedModels {
    pub fn arch(&self) -> Arch {
        self.target.arch
    }
}

fn read_checked(dir: &Path, name: &str, sha: &str) -> Result<Vec<u8>> {
    let path = dir.join(name);
    let bytes = std::fs::read(&path)?;
    if sha256_hex(&bytes) != sha {
        return Err(Error::Checkpoint(format!("{} does not match its recorded hash", path.display())));
    }
    Ok(bytes)
}

pub fn load_model_dir(dir: &Path, splits: &DatasetSplits) -> Result<LoadedModels> {
    let manifest_path = dir.join(MODEL_MANIFEST);
    if !manifest_path.is_file() {
        return Err(Error::InvalidArgument(format!("{} is not a model directory", dir.display())));
    }
    let kv = KeyValues::read(&manifest_path)?;
    let mode = Mode::parse(kv.require("mode")?)?;
    let arch = Arch::parse(kv.require("arch")?)?;
    let config_text = std::fs::read_to_string(dir.join(kv.require("config")?))?;
    let (config, _) = TrainingConfig::parse(&config_text)?;
    let n_users: usize = kv.parse_value("n_users")?;
    let n_items: usize = kv.parse_value("n_items")?;
    if (n_users, n_items) != (splits.n_users, splits.n_items) {
        return Err(Error::ShapeMismatch(format!(
            "model is {n_users}x{n_items}, splits are {}x{}",
            splits.n_users, splits.n_items
        )));
    }
    let graph = train_graph(arch, splits)?;

    let bytes = read_checked(dir, kv.require("target")?, kv.require("target_sha256")?)?;
    let target = Model::from_checkpoint_bytes(&bytes, graph.clone(), RowLookup::Identity)?;

    let shortcut = match kv.get("shortcut") {
        None => None,
        Some(name) => {
            let pop = build_popularity_table(&splits.train, n_users, n_items)?;
            let (uv, iv) = pop_vocab_from_text(&std::fs::read_to_string(dir.join(kv.require("pop_vocab")?))?)?;
            if uv != pop.user_freq_vocab || iv != pop.item_freq_vocab {
                return Err(Error::InvalidArgument(
                    "pop_vocab.txt does not match the train split's frequencies".into(),
                ));
            }
            let bytes = read_checked(dir, name, kv.require("shortcut_sha256")?)?;
            let lookup = RowLookup::Shared {
                user_rows: pop.user_categories(),
                item_rows: pop.item_categories(),
            };
            let inner = Model::from_checkpoint_bytes(&bytes, graph, lookup)?;
            if inner.score_kind != ScoreKind::SigmoidInner {
                return Err(Error::Checkpoint("shortcut checkpoint must use sigmoid_inner".into()));
            }
            Some(ShortcutModel::from_trained(inner, pop)?)
        }
    };
    Ok(LoadedModels {
        mode,
        config,
        target,
        shortcut,
        manifest: kv,
    })
}

// ---- run manifests ----

/// Provenance of one command invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub data_hash: String,
    pub seed: u64,
    pub version: String,
    pub wallclock_s: f64,
    pub outputs: Vec<PathBuf>,
}

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

impl RunManifest {
    /// Output paths are listed relative to `root` with their SHA-256.
    pub fn to_text(&self, root: &Path) -> Result<String> {
        let mut kv = KeyValues::default();
        kv.push("command", &self.command);
        kv.push("config_hash", &self.config_hash);
        kv.push("data_hash", &self.data_hash);
        kv.push("seed", self.seed);
        kv.push("version", &self.version);
        kv.push("wallclock_s", format!("{:.3}", self.wallclock_s));
        for p in &self.outputs {
            let rel = p.strip_prefix(root).unwrap_or(p);
            kv.push(format!("output.{}", rel.display()), sha256_hex(&std::fs::read(p)?));
        }
        Ok(kv.to_text())
    }

    pub fn write(&self, path: &Path, force: bool) -> Result<()> {
        let root = path.parent().unwrap_or(Path::new("."));
        let text = self.to_text(root)?;
        write_file(path, text.as_bytes(), force)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_splits() -> DatasetSplits {
        DatasetSplits {
            n_users: 3,
            n_items: 4,
            train: vec![Interaction::new(0, 1), Interaction::new(1, 2), Interaction::new(2, 2)],
            id_valid: vec![Interaction::new(0, 0)],
            id_test: vec![Interaction::with_timestamp(1, 3, 17)],
            ood_test: vec![Interaction::new(2, 0)],
            kind: SplitKind::IdOod,
            seed: 9,
            fractions: [0.5, 0.1, 0.2, 0.2],
        }
    }

    #[test]
    fn splits_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let sp = toy_splits();
        let files = write_splits(dir.path(), &sp, false).unwrap();
        assert_eq!(files.len(), 5);
        assert_eq!(read_splits(dir.path()).unwrap(), sp);
        assert!(matches!(write_splits(dir.path(), &sp, false), Err(Error::WouldOverwrite(_))));
        write_splits(dir.path(), &sp, true).unwrap();
    }

    #[test]
    fn manifest_lists_counts_and_kl() {
        let kv = split_manifest(&toy_splits());
        assert_eq!(kv.get("count.train"), Some("3"));
        assert_eq!(kv.get("files"), Some("train.tsv,id_valid.tsv,id_test.tsv,ood_test.tsv"));
        // one interaction on one of 4 items: ln 4
        assert_eq!(kv.get("kl.ood_test"), Some("1.386294"));
        assert_eq!(KeyValues::parse(&kv.to_text()).unwrap(), kv);
    }

    #[test]
    fn out_of_range_index_is_a_parse_error() {
        let e = interactions_from_tsv("0\t1\n5\t0\n", 3, 4, Path::new("x")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn pop_vocab_round_trip() {
        let sp = toy_splits();
        let pop = build_popularity_table(&sp.train, 3, 4).unwrap();
        let text = pop_vocab_to_text(&pop);
        assert_eq!(text, "# user\n1\t0\n# item\n0\t0\n1\t1\n2\t2\n");
        let (u, i) = pop_vocab_from_text(&text).unwrap();
        assert_eq!((u, i), (pop.user_freq_vocab, pop.item_freq_vocab));
    }

    #[test]
    fn truth_round_trip() {
        let p = PreferenceMatrix::from_values(2, 2, vec![0.25, 0.75, 0.5, 0.5]).unwrap();
        let bytes = truth_to_bytes(&p, &[0.9, 0.1]);
        let (q, e) = truth_from_bytes(&bytes).unwrap();
        assert_eq!(q, p);
        assert_eq!(e, vec![0.9, 0.1]);
        assert!(truth_from_bytes(&bytes[..30]).is_err());
    }
}
