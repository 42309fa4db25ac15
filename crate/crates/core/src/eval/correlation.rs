use crate::backbone::Model;
use crate::data::DatasetSplits;
use crate::rng::{self, stream};
use crate::shortcut::ShortcutModel;
use crate::training::{sample_negatives, sampled_softmax_loss};
use crate::{Error, Result};

/// Pearson correlations of the per-interaction shortcut loss with the
/// target-model loss on raw (`r_alpha`) and masked (`r_masked`) logits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub r_alpha: f64,
    pub r_masked: f64,
    pub n: usize,
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch("pearson inputs differ in length".into()));
    }
    if a.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Per-interaction losses over the train split, each interaction scored
/// against one seeded negative set of size `n_negatives` shared by all three
/// losses.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionLosses {
    pub shortcut: Vec<f64>,
    pub alpha: Vec<f64>,
    pub masked: Vec<f64>,
}

pub fn interaction_losses(
    model: &Model,
    shortcut: &ShortcutModel,
    splits: &DatasetSplits,
    tau: f64,
    n_negatives: usize,
    seed: u64,
) -> Result<InteractionLosses> {
    let reps = model.propagate();
    let degrees = shortcut.degrees();
    let train_items = splits.train_user_items();
    let mut rng = rng::seeded(seed, stream::CORRELATION);
    let n = splits.train.len();
    let mut out = InteractionLosses {
        shortcut: Vec::with_capacity(n),
        alpha: Vec::with_capacity(n),
        masked: Vec::with_capacity(n),
    };
    let mut alpha = Vec::with_capacity(n_negatives + 1);
    let mut beta = Vec::with_capacity(n_negatives + 1);
    for it in &splits.train {
        let negs = sample_negatives(&train_items[it.user], splits.n_items, it.user, n_negatives, &mut rng)?;
        alpha.clear();
        beta.clear();
        for c in std::iter::once(it.item).chain(negs) {
            alpha.push(
                model
                    .score_kind
                    .score(reps.users.row(it.user), reps.items.row(c))
                    .unwrap_or(0.0),
            );
            beta.push(degrees.beta(it.user, c));
        }
        let masked: Vec<f64> = alpha.iter().zip(&beta).map(|(a, b)| a * b).collect();
        out.shortcut.push(sampled_softmax_loss(&beta, tau).0);
        out.alpha.push(sampled_softmax_loss(&alpha, tau).0);
        out.masked.push(sampled_softmax_loss(&masked, tau).0);
    }
    Ok(out)
}

pub fn correlation_analysis(
    model: &Model,
    shortcut: &ShortcutModel,
    splits: &DatasetSplits,
    tau: f64,
    n_negatives: usize,
    seed: u64,
) -> Result<CorrelationReport> {
    let losses = interaction_losses(model, shortcut, splits, tau, n_negatives, seed)?;
    Ok(CorrelationReport {
        r_alpha: pearson(&losses.shortcut, &losses.alpha)?,
        r_masked: pearson(&losses.shortcut, &losses.masked)?,
        n: losses.shortcut.len(),
    })
}
