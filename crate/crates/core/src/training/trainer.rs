use std::time::Instant;

use rand::seq::SliceRandom;

use super::adam::{adam_step, AdamState};
use super::config::{Negatives, TrainingConfig};
use super::loss::softmax_loss_into;
use super::negatives::sample_negatives;
use crate::backbone::{norm, EmbeddingTable, Model, Representations};
use crate::data::{DatasetSplits, Interaction, SplitName};
use crate::eval::{evaluate, ModelScorer};
use crate::rng::{self, stream};
use crate::shortcut::{ShortcutDegrees, ShortcutModel};
use crate::{Error, Result};

/// Cutoff of the early-stopping metric.
pub const VALIDATION_K: usize = 20;

/// Multiplier applied to every target logit before the softmax.
#[derive(Clone, Copy)]
pub enum Mask<'a> {
    /// `beta = 1`: the plain backbone objective.
    Identity,
    /// `beta_uj` from a frozen shortcut model.
    Shortcut(&'a ShortcutDegrees),
}

impl Mask<'_> {
    #[inline]
    fn beta(&self, u: usize, i: usize) -> f64 {
        match self {
            Mask::Identity => 1.0,
            Mask::Shortcut(d) => d.beta(u, i),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean loss per positive over the epoch.
    pub train_loss: f64,
    pub valid_recall: Option<f64>,
    pub wallclock_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Checkpoint with the best validation Recall@20.
    pub model: Model,
    pub log: TrainingLog,
    pub best_epoch: usize,
    pub best_valid_recall: f64,
}

struct Streams {
    shuffle: rng::Rng,
    negatives: rng::Rng,
}

/// Candidate lists for a batch: entry 0 is the positive item.
fn batch_candidates(
    batch: &[Interaction],
    train_items: &[Vec<usize>],
    n_items: usize,
    negatives: Negatives,
    rng: &mut rng::Rng,
) -> Result<Vec<Vec<usize>>> {
    match negatives {
        Negatives::Sampled(n) => batch
            .iter()
            .map(|it| {
                let mut c = Vec::with_capacity(n + 1);
                c.push(it.item);
                c.extend(sample_negatives(&train_items[it.user], n_items, it.user, n, rng)?);
                Ok(c)
            })
            .collect(),
        Negatives::InBatch => Ok(batch
            .iter()
            .enumerate()
            .map(|(k, it)| {
                let own = &train_items[it.user];
                let mut c = Vec::with_capacity(batch.len());
                c.push(it.item);
                c.extend(
                    batch
                        .iter()
                        .enumerate()
                        .filter(|&(j, other)| j != k && own.binary_search(&other.item).is_err())
                        .map(|(_, other)| other.item),
                );
                c
            })
            .collect()),
    }
}

fn row_norms(t: &EmbeddingTable) -> Vec<f64> {
    (0..t.rows()).map(|r| norm(t.row(r))).collect()
}

/// One optimizer step on one batch; returns the summed loss.
fn batch_step(
    model: &mut Model,
    adam: &mut AdamState,
    batch: &[Interaction],
    candidates: &[Vec<usize>],
    mask: Mask<'_>,
    cfg: &TrainingConfig,
) -> Result<f64> {
    let reps = model.propagate();
    let user_norms = row_norms(&reps.users);
    let item_norms = row_norms(&reps.items);
    let mut grad = Representations {
        users: EmbeddingTable::zeros(reps.users.rows(), reps.users.dim()),
        items: EmbeddingTable::zeros(reps.items.rows(), reps.items.dim()),
    };
    let kind = model.score_kind;
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut logits = Vec::new();
    let mut g = Vec::new();

    for (it, cands) in batch.iter().zip(candidates) {
        let u = it.user;
        let uv = reps.users.row(u);
        alpha.clear();
        beta.clear();
        for &c in cands {
            alpha.push(kind.score_cached(uv, reps.items.row(c), user_norms[u], item_norms[c]));
            beta.push(mask.beta(u, c));
        }
        logits.clear();
        logits.extend(alpha.iter().zip(&beta).map(|(a, b)| a * b));
        g.resize(cands.len(), 0.0);
        total += softmax_loss_into(&logits, cfg.tau, &mut g);

        for (k, &c) in cands.iter().enumerate() {
            let w = g[k] * beta[k] * scale;
            if w == 0.0 {
                continue;
            }
            let (gu, gi) = (grad.users.row_mut(u), grad.items.row_mut(c));
            kind.accumulate_grad(uv, reps.items.row(c), user_norms[u], item_norms[c], alpha[k], w, gu, gi);
        }
    }

    let grads = model.backprop(&grad);
    adam_step(
        &mut [&mut model.user_table, &mut model.item_table],
        &[&grads.user, &grads.item],
        adam,
        cfg.lr,
        cfg.l2,
    )?;
    Ok(total)
}

/// One shuffled pass over the train positives; returns mean loss.
fn run_epoch(
    model: &mut Model,
    adam: &mut AdamState,
    order: &mut [Interaction],
    train_items: &[Vec<usize>],
    mask: Mask<'_>,
    cfg: &TrainingConfig,
    streams: &mut Streams,
) -> Result<f64> {
    order.shuffle(&mut streams.shuffle);
    let n_items = model.n_items();
    let mut total = 0.0;
    for batch in order.chunks(cfg.batch_size) {
        let cands = batch_candidates(batch, train_items, n_items, cfg.negatives, &mut streams.negatives)?;
        total += batch_step(model, adam, batch, &cands, mask, cfg)?;
    }
    Ok(total / order.len() as f64)
}

fn new_adam(model: &Model) -> AdamState {
    AdamState::new(&[model.user_table.shape(), model.item_table.shape()])
}

fn check_shapes(model: &Model, splits: &DatasetSplits) -> Result<()> {
    if model.n_users() != splits.n_users || model.n_items() != splits.n_items {
        return Err(Error::ShapeMismatch(format!(
            "model covers {}x{} entities, splits {}x{}",
            model.n_users(),
            model.n_items(),
            splits.n_users,
            splits.n_items
        )));
    }
    if splits.train.is_empty() {
        return Err(Error::EmptyInput("train split"));
    }
    Ok(())
}

/// Trains a target model with the given logit mask, early-stopping on
/// validation Recall@20.
pub fn train_target(model: Model, mask: Mask<'_>, splits: &DatasetSplits, cfg: &TrainingConfig) -> Result<TrainOutcome> {
    train_target_with(model, mask, splits, cfg, &mut |_, _| {})
}

/// [`train_target`] with a hook called after every epoch's record is logged.
pub fn train_target_with(
    model: Model,
    mask: Mask<'_>,
    splits: &DatasetSplits,
    cfg: &TrainingConfig,
    on_epoch: &mut dyn FnMut(&EpochRecord, &Model),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_shapes(&model, splits)?;
    if splits.id_valid.is_empty() {
        return Err(Error::EmptyInput("validation split"));
    }
    let mut model = model;
    let mut adam = new_adam(&model);
    let train_items = splits.train_user_items();
    let mut order = splits.train.clone();
    let mut streams = Streams {
        shuffle: rng::seeded(cfg.seed, stream::SHUFFLE),
        negatives: rng::seeded(cfg.seed, stream::NEGATIVES),
    };
    let start = Instant::now();
    let mut log = TrainingLog::default();
    let mut best = (model.clone(), 0usize, f64::NEG_INFINITY);
    let mut since_best = 0;

    for epoch in 1..=cfg.max_epochs {
        let loss = run_epoch(&mut model, &mut adam, &mut order, &train_items, mask, cfg, &mut streams)?;
        let recall = evaluate(&ModelScorer::new(&model), splits, SplitName::IdValid, VALIDATION_K)?.recall;
        log.epochs.push(EpochRecord {
            epoch,
            train_loss: loss,
            valid_recall: Some(recall),
            wallclock_s: if cfg.strict_determinism { 0.0 } else { start.elapsed().as_secs_f64() },
        });
        on_epoch(log.epochs.last().expect("just pushed"), &model);
        if recall > best.2 {
            best = (model.clone(), epoch, recall);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        model: best.0,
        log,
        best_epoch: best.1,
        best_valid_recall: best.2,
    })
}

/// Plain backbone training (every mask value 1).
pub fn train_plain(model: Model, splits: &DatasetSplits, cfg: &TrainingConfig) -> Result<TrainOutcome> {
    train_target(model, Mask::Identity, splits, cfg)
}

/// Trains the target model on logits masked by a frozen shortcut model.
pub fn train_popgo(model: Model, shortcut: &ShortcutModel, splits: &DatasetSplits, cfg: &TrainingConfig) -> Result<TrainOutcome> {
    if !shortcut.is_frozen() {
        return Err(Error::FrozenState("frozen before target training"));
    }
    let degrees = shortcut.degrees();
    train_target(model, Mask::Shortcut(&degrees), splits, cfg)
}

/// Pretrains the shortcut model for `shortcut_pretrain_epochs` epochs of the
/// softmax loss over `beta / tau`, then freezes it.
pub fn train_shortcut(
    shortcut: ShortcutModel,
    splits: &DatasetSplits,
    cfg: &TrainingConfig,
) -> Result<(ShortcutModel, TrainingLog)> {
    cfg.validate()?;
    if shortcut.is_frozen() {
        return Err(Error::FrozenState("unfrozen before pretraining"));
    }
    let mut sm = shortcut;
    check_shapes(&sm.inner, splits)?;
    let mut adam = new_adam(&sm.inner);
    let train_items = splits.train_user_items();
    let mut order = splits.train.clone();
    let mut streams = Streams {
        shuffle: rng::seeded(cfg.seed, stream::SHORTCUT_SHUFFLE),
        negatives: rng::seeded(cfg.seed, stream::SHORTCUT_NEGATIVES),
    };
    let start = Instant::now();
    let mut log = TrainingLog::default();
    for epoch in 1..=cfg.shortcut_pretrain_epochs {
        let loss = run_epoch(&mut sm.inner, &mut adam, &mut order, &train_items, Mask::Identity, cfg, &mut streams)?;
        log.epochs.push(EpochRecord {
            epoch,
            train_loss: loss,
            valid_recall: None,
            wallclock_s: if cfg.strict_determinism { 0.0 } else { start.elapsed().as_secs_f64() },
        });
    }
    sm.freeze();
    Ok((sm, log))
}

/// Mean loss of `model` over the train split with a fresh seeded negative
/// set and no parameter update.
pub fn mean_train_loss(model: &Model, mask: Mask<'_>, splits: &DatasetSplits, cfg: &TrainingConfig, seed: u64) -> Result<f64> {
    let reps = model.propagate();
    let train_items = splits.train_user_items();
    let mut rng = rng::seeded(seed, stream::CORRELATION);
    let cands = batch_candidates(&splits.train, &train_items, model.n_items(), cfg.negatives, &mut rng)?;
    let mut total = 0.0;
    let mut logits = Vec::new();
    let mut g = Vec::new();
    for (it, c) in splits.train.iter().zip(&cands) {
        logits.clear();
        for &j in c {
            let s = model
                .score_kind
                .score(reps.users.row(it.user), reps.items.row(j))
                .unwrap_or(0.0);
            logits.push(s * mask.beta(it.user, j));
        }
        g.resize(c.len(), 0.0);
        total += softmax_loss_into(&logits, cfg.tau, &mut g);
    }
    Ok(total / splits.train.len() as f64)
}
