//! Synthetic interactions with a planted popularity shortcut.
//!
//! Users and items get Gaussian latent vectors; true preference is
//! `p(i|u) ∝ exp(x_u . x_i)`. Each item also has a Zipf exposure
//! `q(i) ∝ rank^-s` over a random rank permutation. Each user makes
//! `interactions_per_user` independent draws from the mixture
//! `(1 - γ) p(i|u) + γ q(i)`; repeated draws collapse into one implicit
//! interaction, so heavy users of the head log fewer distinct items. The companion OOD set gives every item
//! the same number of interactions (uniform exposure) and picks which users
//! take each item in proportion to their true preference.

use rand::seq::SliceRandom;
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{DatasetSplits, Interaction, InteractionDataset, SplitKind};
use crate::rng::{self, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub latent_dim: usize,
    /// γ: weight of popularity exposure in the training mixture.
    pub conformity_weight: f64,
    /// s: Zipf exponent of item exposure.
    pub exposure_zipf_exponent: f64,
    pub interactions_per_user: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 500,
            n_items: 300,
            latent_dim: 8,
            conformity_weight: 0.6,
            exposure_zipf_exponent: 1.2,
            interactions_per_user: 40,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_owned()));
        if self.n_users == 0 || self.n_items == 0 || self.latent_dim == 0 {
            return bad("n_users, n_items and latent_dim must be positive");
        }
        if self.interactions_per_user == 0 || self.interactions_per_user > self.n_items {
            return bad("interactions_per_user must be in 1..=n_items");
        }
        if !(0.0..=1.0).contains(&self.conformity_weight) {
            return bad("conformity_weight must be in [0, 1]");
        }
        if !(self.exposure_zipf_exponent >= 0.0 && self.exposure_zipf_exponent.is_finite()) {
            return bad("exposure_zipf_exponent must be finite and >= 0");
        }
        Ok(())
    }
}

/// Row-major `n_users x n_items` matrix of `p(i|u)`; rows sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    pub n_users: usize,
    pub n_items: usize,
    values: Vec<f64>,
}

impl PreferenceMatrix {
    pub fn from_values(n_users: usize, n_items: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_users * n_items {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {n_users}x{n_items} preferences",
                values.len()
            )));
        }
        Ok(Self { n_users, n_items, values })
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.values[u * self.n_items..(u + 1) * self.n_items]
    }

    pub fn get(&self, u: usize, i: usize) -> f64 {
        self.values[u * self.n_items + i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Generator output: the biased log plus the truth it was drawn from.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub config: SynthConfig,
    pub dataset: InteractionDataset,
    pub preference: PreferenceMatrix,
    /// `q(i)`, sums to 1.
    pub exposure: Vec<f64>,
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let (nu, ni, d) = (cfg.n_users, cfg.n_items, cfg.latent_dim);

    let mut rng = rng::seeded(cfg.seed, stream::SYNTH_LATENT);
    let mut latent = |n: usize| -> Vec<f64> { (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let users = latent(nu);
    let items = latent(ni);
    let mut ranks: Vec<usize> = (1..=ni).collect();
    ranks.shuffle(&mut rng);

    let mut pref = Vec::with_capacity(nu * ni);
    for u in 0..nu {
        let xu = &users[u * d..(u + 1) * d];
        let logits: Vec<f64> = (0..ni)
            .map(|i| crate::backbone::dot(xu, &items[i * d..(i + 1) * d]))
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        pref.extend(exp.into_iter().map(|e| e / z));
    }
    let preference = PreferenceMatrix::from_values(nu, ni, pref)?;

    let raw: Vec<f64> = ranks
        .iter()
        .map(|&r| (r as f64).powf(-cfg.exposure_zipf_exponent))
        .collect();
    let z: f64 = raw.iter().sum();
    let exposure: Vec<f64> = raw.into_iter().map(|q| q / z).collect();

    let mut rng = rng::seeded(cfg.seed, stream::SYNTH_INTERACTIONS);
    let g = cfg.conformity_weight;
    let mut interactions = Vec::with_capacity(nu * cfg.interactions_per_user);
    let mut weights = vec![0.0; ni];
    for u in 0..nu {
        for (i, w) in weights.iter_mut().enumerate() {
            *w = (1.0 - g) * preference.get(u, i) + g * exposure[i];
        }
        let mixture = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut picked: Vec<usize> = (0..cfg.interactions_per_user).map(|_| mixture.sample(&mut rng)).collect();
        picked.sort_unstable();
        picked.dedup();
        interactions.extend(picked.into_iter().map(|i| Interaction::new(u, i)));
    }
    let dataset = InteractionDataset::from_interactions(nu, ni, interactions)?;
    Ok(SynthData {
        config: cfg.clone(),
        dataset,
        preference,
        exposure,
    })
}

impl SynthData {
    /// Uniform-exposure test set: every item receives the same number of
    /// interactions (remainder spread over a random item subset; an item with
    /// too few eligible users passes its shortfall on to others), taken by
    /// users sampled without replacement in proportion to `p(i|u)` among
    /// users who have no logged interaction with it.
    pub fn ood_interactions(&self, total: usize, seed: u64) -> Vec<Interaction> {
        let (nu, ni) = (self.preference.n_users, self.preference.n_items);
        let mut rng = rng::seeded(seed, stream::SYNTH_OOD);
        let logged = &self.dataset.user_items;
        let mut capacity = vec![nu; ni];
        for items in logged {
            for &i in items {
                capacity[i] -= 1;
            }
        }
        let quota = crate::data::uniform_quotas(&capacity, total, &mut rng);
        let mut out = Vec::with_capacity(total);
        for (i, &q) in quota.iter().enumerate() {
            // Efraimidis-Spirakis keys: the q largest ln(U)/w are a weighted
            // sample without replacement.
            let mut keyed: Vec<(f64, usize)> = (0..nu)
                .filter(|&u| logged[u].binary_search(&i).is_err())
                .map(|u| {
                    let w = self.preference.get(u, i);
                    let r: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                    (r.ln() / w, u)
                })
                .collect();
            keyed.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            out.extend(keyed.into_iter().take(q).map(|(_, u)| Interaction::new(u, i)));
        }
        out.sort_unstable();
        out
    }

    /// Benchmark splits: the biased log is shuffled into train / ID
    /// validation / ID test at 50:10:20, and a uniform-exposure OOD test set
    /// worth another 20 parts (a quarter of the log's size) is drawn from the
    /// ground truth.
    pub fn benchmark_splits(&self, seed: u64) -> DatasetSplits {
        let ds = &self.dataset;
        let n = ds.len();
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = rng::seeded(seed, stream::SPLIT_REST);
        idx.shuffle(&mut rng);
        let n_train = (n as f64 * 5.0 / 8.0).round() as usize;
        let n_valid = (n as f64 / 8.0).round() as usize;
        let take = |range: &[usize]| -> Vec<Interaction> {
            let mut v: Vec<usize> = range.to_vec();
            v.sort_unstable();
            v.into_iter().map(|e| ds.interactions[e]).collect()
        };
        DatasetSplits {
            n_users: ds.n_users,
            n_items: ds.n_items,
            train: take(&idx[..n_train]),
            id_valid: take(&idx[n_train..n_train + n_valid]),
            id_test: take(&idx[n_train + n_valid..]),
            ood_test: self.ood_interactions((n as f64 / 4.0).round() as usize, seed),
            kind: SplitKind::IdOod,
            seed,
            fractions: [0.5, 0.1, 0.2, 0.2],
        }
    }
}
