use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Negative candidates per positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Negatives {
    /// Uniform draws from the user's non-interacted items.
    Sampled(usize),
    /// The other positives' items in the batch, minus the user's train items.
    InBatch,
}

/// Sampled negatives per positive unless configured otherwise.
pub const DEFAULT_NEGATIVES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub tau: f64,
    pub lr: f64,
    pub l2: f64,
    pub dim: usize,
    pub batch_size: usize,
    pub negatives: Negatives,
    pub max_epochs: usize,
    pub patience: usize,
    pub shortcut_pretrain_epochs: usize,
    pub seed: u64,
    /// Record zero wallclock so logs are byte-reproducible.
    pub strict_determinism: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            tau: 0.07,
            lr: 1e-3,
            l2: 1e-5,
            dim: 64,
            batch_size: 2048,
            negatives: Negatives::Sampled(DEFAULT_NEGATIVES),
            max_epochs: 400,
            patience: 10,
            shortcut_pretrain_epochs: 5,
            seed: 2023,
            strict_determinism: false,
        }
    }
}

const KEYS: &[&str] = &[
    "tau",
    "lr",
    "l2",
    "dim",
    "batch_size",
    "n_negatives",
    "in_batch",
    "max_epochs",
    "patience",
    "shortcut_pretrain_epochs",
    "seed",
    "strict_determinism",
];

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad(format!("l2 must be non-negative, got {}", self.l2));
        }
        if self.dim == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return bad("dim, batch_size and max_epochs must be positive".into());
        }
        if self.patience == 0 {
            return bad("patience must be >= 1".into());
        }
        if self.negatives == Negatives::Sampled(0) {
            return bad("n_negatives must be positive".into());
        }
        Ok(())
    }

    /// Parses flat `key = value` text. Unknown keys are errors; keys not
    /// present keep their defaults and are returned so callers can log them.
    pub fn parse(text: &str) -> Result<(Self, Vec<&'static str>)> {
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = k.trim();
            let key = KEYS
                .iter()
                .copied()
                .find(|&known| known == key)
                .ok_or_else(|| Error::Config(format!("line {}: unknown key {key:?}", n + 1)))?;
            if seen.insert(key, v.trim().to_owned()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", n + 1)));
            }
        }

        let mut cfg = Self::default();
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            v.parse()
                .map_err(|e| Error::Config(format!("{key}: cannot parse {v:?}: {e}")))
        }
        for (&key, v) in &seen {
            match key {
                "tau" => cfg.tau = num(key, v)?,
                "lr" => cfg.lr = num(key, v)?,
                "l2" => cfg.l2 = num(key, v)?,
                "dim" => cfg.dim = num(key, v)?,
                "batch_size" => cfg.batch_size = num(key, v)?,
                "n_negatives" => {
                    if !matches!(cfg.negatives, Negatives::InBatch) {
                        cfg.negatives = Negatives::Sampled(num(key, v)?)
                    }
                }
                "in_batch" => {
                    if num::<bool>(key, v)? {
                        cfg.negatives = Negatives::InBatch
                    }
                }
                "max_epochs" => cfg.max_epochs = num(key, v)?,
                "patience" => cfg.patience = num(key, v)?,
                "shortcut_pretrain_epochs" => cfg.shortcut_pretrain_epochs = num(key, v)?,
                "seed" => cfg.seed = num(key, v)?,
                "strict_determinism" => cfg.strict_determinism = num(key, v)?,
                _ => unreachable!("key list checked above"),
            }
        }
        cfg.validate()?;
        let defaulted = KEYS.iter().copied().filter(|k| !seen.contains_key(k)).collect();
        Ok((cfg, defaulted))
    }

    /// Every field as `key = value`, parseable by [`TrainingConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "lr = {}", self.lr);
        let _ = writeln!(s, "l2 = {}", self.l2);
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        match self.negatives {
            Negatives::Sampled(n) => {
                let _ = writeln!(s, "n_negatives = {n}");
                let _ = writeln!(s, "in_batch = false");
            }
            Negatives::InBatch => {
                let _ = writeln!(s, "n_negatives = {DEFAULT_NEGATIVES}");
                let _ = writeln!(s, "in_batch = true");
            }
        }
        let _ = writeln!(s, "max_epochs = {}", self.max_epochs);
        let _ = writeln!(s, "patience = {}", self.patience);
        let _ = writeln!(s, "shortcut_pretrain_epochs = {}", self.shortcut_pretrain_epochs);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "strict_determinism = {}", self.strict_determinism);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_protocol() {
        let c = TrainingConfig::default();
        assert_eq!(c.tau, 0.07);
        assert_eq!(c.lr, 1e-3);
        assert_eq!(c.l2, 1e-5);
        assert_eq!(c.dim, 64);
        assert_eq!(c.batch_size, 2048);
        assert_eq!(c.negatives, Negatives::Sampled(64));
        assert_eq!((c.max_epochs, c.patience, c.shortcut_pretrain_epochs), (400, 10, 5));
    }

    #[test]
    fn missing_keys_fall_back_and_are_reported() {
        let (c, defaulted) = TrainingConfig::parse("tau = 0.1\n# comment\nseed=4\n").unwrap();
        assert_eq!(c.tau, 0.1);
        assert_eq!(c.seed, 4);
        assert_eq!(c.lr, 1e-3);
        assert!(defaulted.contains(&"lr"));
        assert!(!defaulted.contains(&"tau"));
    }

    #[test]
    fn unknown_and_invalid_rejected() {
        assert!(TrainingConfig::parse("temperature = 0.1").is_err());
        assert!(TrainingConfig::parse("tau = -1").is_err());
        assert!(TrainingConfig::parse("patience = 0").is_err());
        assert!(TrainingConfig::parse("tau = 0.1\ntau = 0.2").is_err());
        assert!(TrainingConfig::parse("just words").is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = TrainingConfig {
            negatives: Negatives::InBatch,
            tau: 0.05,
            ..Default::default()
        };
        assert_eq!(TrainingConfig::parse(&c.to_text()).unwrap().0, c);
        let d = TrainingConfig::default();
        assert_eq!(TrainingConfig::parse(&d.to_text()).unwrap().0, d);
    }
}
