use rand::seq::SliceRandom;

use super::{Interaction, InteractionDataset};
use crate::rng::{self, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    IdOod,
    Temporal,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::IdOod => "id_ood",
            SplitKind::Temporal => "temporal",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "id_ood" => Ok(SplitKind::IdOod),
            "temporal" => Ok(SplitKind::Temporal),
            other => Err(Error::InvalidArgument(format!("unknown split kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitName {
    Train,
    IdValid,
    IdTest,
    OodTest,
}

impl SplitName {
    pub const ALL: [SplitName; 4] = [
        SplitName::Train,
        SplitName::IdValid,
        SplitName::IdTest,
        SplitName::OodTest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::IdValid => "id_valid",
            SplitName::IdTest => "id_test",
            SplitName::OodTest => "ood_test",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        SplitName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown split {s:?}")))
    }
}

/// Disjoint partitions of one interaction log.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplits {
    pub n_users: usize,
    pub n_items: usize,
    pub train: Vec<Interaction>,
    pub id_valid: Vec<Interaction>,
    pub id_test: Vec<Interaction>,
    /// Empty for temporal splits.
    pub ood_test: Vec<Interaction>,
    pub kind: SplitKind,
    pub seed: u64,
    /// Fractions (train, valid, id test, ood test) of the source total.
    pub fractions: [f64; 4],
}

impl DatasetSplits {
    pub fn get(&self, name: SplitName) -> &[Interaction] {
        match name {
            SplitName::Train => &self.train,
            SplitName::IdValid => &self.id_valid,
            SplitName::IdTest => &self.id_test,
            SplitName::OodTest => &self.ood_test,
        }
    }

    pub fn total(&self) -> usize {
        SplitName::ALL.iter().map(|&n| self.get(n).len()).sum()
    }

    pub fn train_user_items(&self) -> Vec<Vec<usize>> {
        super::user_item_lists(&self.train, self.n_users)
    }
}

/// Builds the four-way ID/OOD split.
///
/// The OOD test set takes `round(0.2 * n)` interactions with an equal quota
/// per item (remainders go to a random item subset; items that cannot fill
/// their quota pass the shortfall on to items with spare interactions). The
/// rest is shuffled into train / ID validation / ID test holding 50% / 10% /
/// the remaining ~20% of the original total.
pub fn split_id_ood(ds: &InteractionDataset, seed: u64) -> Result<DatasetSplits> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = ds.len();
    let n_items = ds.n_items;
    let mut by_item: Vec<Vec<usize>> = vec![Vec::new(); n_items];
    for (e, it) in ds.interactions.iter().enumerate() {
        by_item[it.item].push(e);
    }
    if let Some(i) = by_item.iter().position(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!(
            "item {i} has no interactions; ID/OOD split needs every item observed"
        )));
    }

    let mut rng = rng::seeded(seed, stream::SPLIT_OOD);
    let target = (0.2 * n as f64).round() as usize;
    let capacity: Vec<usize> = by_item.iter().map(Vec::len).collect();
    let quotas = uniform_quotas(&capacity, target, &mut rng);

    let mut in_ood = vec![false; n];
    for (edges, &q) in by_item.iter_mut().zip(&quotas) {
        edges.shuffle(&mut rng);
        for &e in edges.iter().take(q) {
            in_ood[e] = true;
        }
    }

    let mut rest: Vec<usize> = (0..n).filter(|&e| !in_ood[e]).collect();
    let mut rng = rng::seeded(seed, stream::SPLIT_REST);
    rest.shuffle(&mut rng);
    let n_train = ((0.5 * n as f64).round() as usize).min(rest.len());
    let n_valid = ((0.1 * n as f64).round() as usize).min(rest.len() - n_train);

    let collect = |mut idx: Vec<usize>| -> Vec<Interaction> {
        idx.sort_unstable();
        idx.into_iter().map(|e| ds.interactions[e]).collect()
    };
    let ood = (0..n).filter(|&e| in_ood[e]).collect();
    let id_test = rest.split_off(n_train + n_valid);
    let id_valid = rest.split_off(n_train);

    Ok(DatasetSplits {
        n_users: ds.n_users,
        n_items,
        train: collect(rest),
        id_valid: collect(id_valid),
        id_test: collect(id_test),
        ood_test: collect(ood),
        kind: SplitKind::IdOod,
        seed,
        fractions: [0.5, 0.1, 0.2, 0.2],
    })
}

/// Splits `target` units as evenly as possible over slots with the given
/// capacities. Remainders and shortfalls go to uniformly random slots that
/// still have room. Requires `target <= sum(capacity)`.
pub(crate) fn uniform_quotas(capacity: &[usize], target: usize, rng: &mut rng::Rng) -> Vec<usize> {
    let n_items = capacity.len();
    let base = target / n_items;
    let mut quotas = vec![base; n_items];
    let mut order: Vec<usize> = (0..n_items).collect();
    order.shuffle(rng);
    for &i in order.iter().take(target % n_items) {
        quotas[i] += 1;
    }

    let mut shortfall = 0;
    for (q, &cap) in quotas.iter_mut().zip(capacity) {
        if *q > cap {
            shortfall += *q - cap;
            *q = cap;
        }
    }
    while shortfall > 0 {
        let mut spare: Vec<usize> = (0..n_items)
            .filter(|&i| quotas[i] < capacity[i])
            .collect();
        if spare.is_empty() {
            break;
        }
        if spare.len() > shortfall {
            spare.shuffle(rng);
            spare.truncate(shortfall);
        }
        for i in spare {
            quotas[i] += 1;
            shortfall -= 1;
        }
    }
    quotas
}

/// Chronological split: global sort by (timestamp, user, item), then the
/// leading `fractions.0` goes to train, the next `fractions.1` to validation
/// and the rest to the ID test set.
pub fn split_temporal(ds: &InteractionDataset, fractions: (f64, f64, f64)) -> Result<DatasetSplits> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (ft, fv, fe) = fractions;
    if [ft, fv, fe].iter().any(|f| !(0.0..=1.0).contains(f)) || ((ft + fv + fe) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "temporal fractions must be in [0,1] and sum to 1, got {fractions:?}"
        )));
    }
    let mut keyed = Vec::with_capacity(ds.len());
    for (index, it) in ds.interactions.iter().enumerate() {
        let ts = it.timestamp.ok_or(Error::MissingTimestamp {
            index,
            user: it.user,
            item: it.item,
        })?;
        keyed.push((ts, it.user, it.item, *it));
    }
    keyed.sort_unstable_by_key(|k| (k.0, k.1, k.2));
    let sorted: Vec<Interaction> = keyed.into_iter().map(|k| k.3).collect();

    let n = sorted.len() as f64;
    let cut1 = (ft * n).round() as usize;
    let cut2 = (((ft + fv) * n).round() as usize).max(cut1);
    Ok(DatasetSplits {
        n_users: ds.n_users,
        n_items: ds.n_items,
        train: sorted[..cut1].to_vec(),
        id_valid: sorted[cut1..cut2].to_vec(),
        id_test: sorted[cut2..].to_vec(),
        ood_test: Vec::new(),
        kind: SplitKind::Temporal,
        seed: 0,
        fractions: [ft, fv, fe, 0.0],
    })
}

/// KL divergence (natural log) of the list's item distribution from the
/// uniform distribution over `n_items` items.
pub fn kl_to_uniform(interactions: &[Interaction], n_items: usize) -> Result<f64> {
    if interactions.is_empty() {
        return Err(Error::EmptyInput("interaction list"));
    }
    let mut counts = vec![0usize; n_items];
    for it in interactions {
        super::check_index("item", it.item, n_items)?;
        counts[it.item] += 1;
    }
    let total = interactions.len() as f64;
    let uniform = 1.0 / n_items as f64;
    let kl: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * (p / uniform).ln()
        })
        .sum();
    Ok(kl.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n_items: usize, per_item: usize) -> InteractionDataset {
        let mut inter = Vec::new();
        for i in 0..n_items {
            for u in 0..per_item {
                inter.push(Interaction::new(u, i));
            }
        }
        InteractionDataset::from_interactions(per_item, n_items, inter).unwrap()
    }

    #[test]
    fn exact_uniform_quota() {
        let ds = grid(10, 10);
        let s = split_id_ood(&ds, 7).unwrap();
        assert_eq!(s.ood_test.len(), 20);
        let mut per_item = [0; 10];
        for it in &s.ood_test {
            per_item[it.item] += 1;
        }
        assert!(per_item.iter().all(|&c| c == 2));
        assert_eq!(kl_to_uniform(&s.ood_test, 10).unwrap(), 0.0);
        assert_eq!((s.train.len(), s.id_valid.len(), s.id_test.len()), (50, 10, 20));
    }

    #[test]
    fn quota_shortfall_is_redistributed() {
        // item 0 has 50 interactions, items 1..=9 have one each; T = 12
        let mut inter: Vec<_> = (0..50).map(|u| Interaction::new(u, 0)).collect();
        inter.extend((1..10).map(|i| Interaction::new(i, i)));
        let ds = InteractionDataset::from_interactions(50, 10, inter).unwrap();
        let s = split_id_ood(&ds, 1).unwrap();
        assert_eq!(s.ood_test.len(), 12);
        assert_eq!(s.total(), ds.len());
    }

    #[test]
    fn unobserved_item_rejected() {
        let ds = InteractionDataset::from_interactions(1, 2, vec![Interaction::new(0, 0)]).unwrap();
        assert!(split_id_ood(&ds, 0).is_err());
    }

    #[test]
    fn temporal_slices() {
        let inter: Vec<_> = (1..=10).map(|t| Interaction::with_timestamp(t as usize, 0, t)).collect();
        let ds = InteractionDataset::from_interactions(11, 1, inter).unwrap();
        let s = split_temporal(&ds, (0.7, 0.1, 0.2)).unwrap();
        let ts: Vec<i64> = s.train.iter().map(|i| i.timestamp.unwrap()).collect();
        assert_eq!(ts, (1..=7).collect::<Vec<_>>());
        assert_eq!(s.id_valid.len(), 1);
        assert_eq!(s.id_test.len(), 2);
        assert!(s.ood_test.is_empty());
        assert_eq!(s.kind, SplitKind::Temporal);
    }

    #[test]
    fn temporal_ties_by_user_then_item() {
        let inter = vec![
            Interaction::with_timestamp(2, 0, 5),
            Interaction::with_timestamp(1, 1, 5),
            Interaction::with_timestamp(1, 0, 5),
        ];
        let ds = InteractionDataset::from_interactions(3, 2, inter).unwrap();
        let s = split_temporal(&ds, (1.0, 0.0, 0.0)).unwrap();
        let pairs: Vec<_> = s.train.iter().map(Interaction::pair).collect();
        assert_eq!(pairs, vec![(1, 0), (1, 1), (2, 0)]);
    }

    #[test]
    fn temporal_requires_timestamps() {
        let inter = vec![Interaction::with_timestamp(0, 0, 1), Interaction::new(0, 1)];
        let ds = InteractionDataset::from_interactions(1, 2, inter).unwrap();
        assert!(matches!(
            split_temporal(&ds, (0.7, 0.1, 0.2)),
            Err(Error::MissingTimestamp { index: 1, .. })
        ));
        assert!(split_temporal(&ds, (0.7, 0.1, 0.1)).is_err());
    }

    #[test]
    fn kl_closed_forms() {
        let uniform: Vec<_> = (0..8).map(|i| Interaction::new(0, i)).collect();
        assert_eq!(kl_to_uniform(&uniform, 8).unwrap(), 0.0);

        let point: Vec<_> = (0..5).map(|u| Interaction::new(u, 2)).collect();
        assert!((kl_to_uniform(&point, 4).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert!((kl_to_uniform(&point, 4).unwrap() - 1.386294).abs() < 1e-6);

        let skew = vec![
            Interaction::new(0, 0),
            Interaction::new(1, 0),
            Interaction::new(2, 0),
            Interaction::new(3, 1),
        ];
        let expected = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((kl_to_uniform(&skew, 2).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.130812).abs() < 1e-6);

        assert!(kl_to_uniform(&[], 3).is_err());
    }
}
