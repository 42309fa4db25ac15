//! Implicit-feedback interaction logs: loading, k-core filtering, popularity
//! statistics and the ID/OOD and temporal split protocols.

mod ingest;
mod popularity;
mod split;

use std::collections::HashMap;

pub use ingest::{apply_k_core, load_interactions, parse_interactions, InputFormat};
pub use popularity::{build_popularity_table, FreqVocab, PopularityTable};
pub(crate) use split::uniform_quotas;
pub use split::{kl_to_uniform, split_id_ood, split_temporal, DatasetSplits, SplitKind, SplitName};

/// One observed (user, item) pair, with an optional timestamp in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interaction {
    pub user: usize,
    pub item: usize,
    pub timestamp: Option<i64>,
}

impl Interaction {
    pub fn new(user: usize, item: usize) -> Self {
        Self {
            user,
            item,
            timestamp: None,
        }
    }

    pub fn with_timestamp(user: usize, item: usize, timestamp: i64) -> Self {
        Self {
            user,
            item,
            timestamp: Some(timestamp),
        }
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.user, self.item)
    }
}

/// Token <-> dense index bijection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of a token, assigning the next free index on first sight.
    pub fn intern(&mut self, token: &str) -> usize {
        if let Some(&idx) = self.index.get(token) {
            return idx;
        }
        let idx = self.tokens.len();
        self.tokens.push(token.to_owned());
        self.index.insert(token.to_owned(), idx);
        idx
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: usize) -> Option<&str> {
        self.tokens.get(idx).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Map with tokens `0..n` named by their decimal index.
    pub fn numeric(n: usize) -> Self {
        let mut map = Self::new();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }
}

/// An indexed implicit-feedback log with no duplicate (user, item) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDataset {
    pub n_users: usize,
    pub n_items: usize,
    pub interactions: Vec<Interaction>,
    /// Sorted item indices per user.
    pub user_items: Vec<Vec<usize>>,
    pub user_ids: IdMap,
    pub item_ids: IdMap,
}

impl InteractionDataset {
    /// Builds a dataset from already-indexed interactions.
    ///
    /// Duplicate pairs are collapsed onto their first occurrence, keeping the
    /// earliest timestamp. Id maps are numeric.
    pub fn from_interactions(
        n_users: usize,
        n_items: usize,
        interactions: Vec<Interaction>,
    ) -> crate::Result<Self> {
        Self::with_id_maps(
            IdMap::numeric(n_users),
            IdMap::numeric(n_items),
            interactions,
        )
    }

    pub fn with_id_maps(
        user_ids: IdMap,
        item_ids: IdMap,
        interactions: Vec<Interaction>,
    ) -> crate::Result<Self> {
        let n_users = user_ids.len();
        let n_items = item_ids.len();
        for it in &interactions {
            check_index("user", it.user, n_users)?;
            check_index("item", it.item, n_items)?;
        }
        let interactions = dedup_keep_earliest(interactions);
        let user_items = user_item_lists(&interactions, n_users);
        Ok(Self {
            n_users,
            n_items,
            interactions,
            user_items,
            user_ids,
            item_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn item_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_items];
        for it in &self.interactions {
            deg[it.item] += 1;
        }
        deg
    }

    pub fn user_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_users];
        for it in &self.interactions {
            deg[it.user] += 1;
        }
        deg
    }

    /// Fraction of the user x item matrix that is observed.
    pub fn density(&self) -> f64 {
        if self.n_users == 0 || self.n_items == 0 {
            return 0.0;
        }
        self.len() as f64 / (self.n_users as f64 * self.n_items as f64)
    }
}

pub(crate) fn check_index(kind: &'static str, index: usize, size: usize) -> crate::Result<()> {
    if index >= size {
        return Err(crate::Error::IndexOutOfRange { kind, index, size });
    }
    Ok(())
}

fn dedup_keep_earliest(interactions: Vec<Interaction>) -> Vec<Interaction> {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::with_capacity(interactions.len());
    let mut out: Vec<Interaction> = Vec::with_capacity(interactions.len());
    for it in interactions {
        match seen.get(&it.pair()) {
            Some(&pos) => {
                let kept = &mut out[pos];
                kept.timestamp = match (kept.timestamp, it.timestamp) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
            }
            None => {
                seen.insert(it.pair(), out.len());
                out.push(it);
            }
        }
    }
    out
}

/// Sorted per-user item lists for an interaction list.
pub fn user_item_lists(interactions: &[Interaction], n_users: usize) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); n_users];
    for it in interactions {
        lists[it.user].push(it.item);
    }
    for l in &mut lists {
        l.sort_unstable();
        l.dedup();
    }
    lists
}
