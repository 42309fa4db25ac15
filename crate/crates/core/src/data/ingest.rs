use std::path::Path;

use super::{IdMap, Interaction, InteractionDataset};
use crate::{Error, Result};

/// Field separator of an interaction log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// `user<TAB>item[<TAB>timestamp]`
    #[default]
    Tsv,
    /// `user,item[,timestamp]`
    Csv,
}

impl InputFormat {
    fn separator(self) -> char {
        match self {
            InputFormat::Tsv => '\t',
            InputFormat::Csv => ',',
        }
    }
}

/// Reads an interaction log. Blank lines and lines starting with `#` are skipped.
pub fn load_interactions(path: impl AsRef<Path>, format: InputFormat) -> Result<InteractionDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_interactions(&text, format, path)
}

/// Parses log text; `origin` only labels error messages.
pub fn parse_interactions(text: &str, format: InputFormat, origin: &Path) -> Result<InteractionDataset> {
    let sep = format.separator();
    let mut users = IdMap::new();
    let mut items = IdMap::new();
    let mut interactions = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split(sep).map(str::trim).collect();
        if fields.len() < 2 {
            return Err(err("expected user and item fields".into()));
        }
        if fields.len() > 3 {
            return Err(err(format!("expected at most 3 fields, found {}", fields.len())));
        }
        let (user, item) = (fields[0], fields[1]);
        if user.is_empty() || item.is_empty() {
            return Err(err("empty user or item token".into()));
        }
        let timestamp = match fields.get(2) {
            None => None,
            Some(ts) => Some(
                ts.parse::<i64>()
                    .map_err(|e| err(format!("bad timestamp {ts:?}: {e}")))?,
            ),
        };
        interactions.push(Interaction {
            user: users.intern(user),
            item: items.intern(item),
            timestamp,
        });
    }

    if interactions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    InteractionDataset::with_id_maps(users, items, interactions)
}

/// Iteratively drops users and items with fewer than `k` interactions until
/// every survivor has at least `k`, then re-densifies indices (relative order
/// is preserved). `k = 0` and `k = 1` leave the dataset unchanged apart from
/// dropping entities without any interaction.
pub fn apply_k_core(ds: &InteractionDataset, k: usize) -> InteractionDataset {
    let mut alive_user = vec![true; ds.n_users];
    let mut alive_item = vec![true; ds.n_items];
    let mut user_deg = ds.user_degrees();
    let mut item_deg = ds.item_degrees();
    let mut alive_edge = vec![true; ds.interactions.len()];

    loop {
        let mut changed = false;
        for u in 0..ds.n_users {
            if alive_user[u] && user_deg[u] < k.max(1) {
                alive_user[u] = false;
                changed = true;
            }
        }
        for i in 0..ds.n_items {
            if alive_item[i] && item_deg[i] < k.max(1) {
                alive_item[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (e, it) in ds.interactions.iter().enumerate() {
            if alive_edge[e] && !(alive_user[it.user] && alive_item[it.item]) {
                alive_edge[e] = false;
                user_deg[it.user] -= 1;
                item_deg[it.item] -= 1;
            }
        }
    }

    let remap = |alive: &[bool]| {
        let mut next = 0usize;
        alive
            .iter()
            .map(|&a| {
                a.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect::<Vec<Option<usize>>>()
    };
    let user_map = remap(&alive_user);
    let item_map = remap(&alive_item);

    let mut user_ids = IdMap::new();
    for (u, m) in user_map.iter().enumerate() {
        if m.is_some() {
            user_ids.intern(ds.user_ids.token(u).unwrap_or(&u.to_string()));
        }
    }
    let mut item_ids = IdMap::new();
    for (i, m) in item_map.iter().enumerate() {
        if m.is_some() {
            item_ids.intern(ds.item_ids.token(i).unwrap_or(&i.to_string()));
        }
    }

    let interactions = ds
        .interactions
        .iter()
        .zip(&alive_edge)
        .filter(|(_, &alive)| alive)
        .map(|(it, _)| Interaction {
            user: user_map[it.user].expect("alive edge has alive user"),
            item: item_map[it.item].expect("alive edge has alive item"),
            timestamp: it.timestamp,
        })
        .collect();

    InteractionDataset::with_id_maps(user_ids, item_ids, interactions)
        .expect("k-core output indices are dense")
}
