use super::{evaluate, ModelScorer, RankingReport, DEFAULT_K};
use crate::backbone::{Arch, Model};
use crate::data::{DatasetSplits, SplitName};
use crate::training::{fit_plain, fit_popgo, TrainingConfig};
use crate::Result;

/// ID test report plus the OOD report when the split has an OOD set.
#[derive(Debug, Clone)]
pub struct SplitReports {
    pub id: RankingReport,
    pub ood: Option<RankingReport>,
}

pub fn evaluate_id_ood(model: &Model, splits: &DatasetSplits, k: usize) -> Result<SplitReports> {
    let scorer = ModelScorer::new(model);
    Ok(SplitReports {
        id: evaluate(&scorer, splits, SplitName::IdTest, k)?,
        ood: if splits.ood_test.is_empty() {
            None
        } else {
            Some(evaluate(&scorer, splits, SplitName::OodTest, k)?)
        },
    })
}

/// Full PopGo against PopGo-S (shortcut disabled) under the same config.
#[derive(Debug, Clone)]
pub struct AblationReport {
    pub popgo: SplitReports,
    pub popgo_s: SplitReports,
}

impl AblationReport {
    /// (model, split, report) rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, &'static str, &RankingReport)> {
        let mut rows = Vec::new();
        for (name, r) in [("popgo", &self.popgo), ("popgo_s", &self.popgo_s)] {
            rows.push((name, "id", &r.id));
            if let Some(ood) = &r.ood {
                rows.push((name, "ood", ood));
            }
        }
        rows
    }
}

pub fn run_ablation_popgo_s(arch: Arch, splits: &DatasetSplits, cfg: &TrainingConfig) -> Result<AblationReport> {
    let full = fit_popgo(arch, splits, cfg)?;
    let plain = fit_plain(arch, splits, cfg)?;
    Ok(AblationReport {
        popgo: evaluate_id_ood(&full.target.model, splits, DEFAULT_K)?,
        popgo_s: evaluate_id_ood(&plain.model, splits, DEFAULT_K)?,
    })
}

/// Recall@20 of PopGo trained at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauRow {
    pub tau: f64,
    pub id_recall: f64,
    pub ood_recall: Option<f64>,
}

pub const DEFAULT_TAUS: [f64; 5] = [0.05, 0.06, 0.07, 0.08, 0.1];

/// Retrains PopGo (shortcut and target) at each temperature.
pub fn tau_sweep(arch: Arch, splits: &DatasetSplits, cfg: &TrainingConfig, taus: &[f64]) -> Result<Vec<TauRow>> {
    taus.iter()
        .map(|&tau| {
            let cfg = TrainingConfig { tau, ..cfg.clone() };
            let fit = fit_popgo(arch, splits, &cfg)?;
            let r = evaluate_id_ood(&fit.target.model, splits, DEFAULT_K)?;
            Ok(TauRow {
                tau,
                id_recall: r.id.recall,
                ood_recall: r.ood.map(|o| o.recall),
            })
        })
        .collect()
}
