//! Target CF backbones: embedding tables, MF / LightGCN representations and
//! the interaction score.

mod checkpoint;
mod graph;
mod score;
mod table;

use std::sync::Arc;

use rand_distr::{Distribution, Normal};

pub use checkpoint::{CheckpointHeader, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use graph::NormalizedAdjacency;
pub use score::{sigmoid, ScoreKind};
pub use table::{dot, norm, EmbeddingTable};

use crate::{Error, Result};

/// Representation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    Mf,
    LightGcn { layers: usize },
}

impl Arch {
    pub fn layers(self) -> usize {
        match self {
            Arch::Mf => 0,
            Arch::LightGcn { layers } => layers,
        }
    }

    /// `mf`, `lightgcn` (2 layers) or `lightgcn<L>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mf" => Ok(Arch::Mf),
            "lightgcn" => Ok(Arch::LightGcn { layers: 2 }),
            _ => s
                .strip_prefix("lightgcn")
                .and_then(|l| l.parse().ok())
                .map(|layers| Arch::LightGcn { layers })
                .ok_or_else(|| Error::InvalidArgument(format!("unknown arch {s:?}"))),
        }
    }

    pub fn name(self) -> String {
        match self {
            Arch::Mf => "mf".into(),
            Arch::LightGcn { layers } => format!("lightgcn{layers}"),
        }
    }
}

/// How entities map to table rows. The target model owns one row per
/// entity; the shortcut model shares rows among entities of equal frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowLookup {
    Identity,
    Shared { user_rows: Vec<usize>, item_rows: Vec<usize> },
}

/// Final user and item vectors for every entity.
#[derive(Debug, Clone, PartialEq)]
pub struct Representations {
    pub users: EmbeddingTable,
    pub items: EmbeddingTable,
}

/// Gradient w.r.t. both parameter tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub user: EmbeddingTable,
    pub item: EmbeddingTable,
}

/// An embedding-table pair, its representation function and score.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub user_table: EmbeddingTable,
    pub item_table: EmbeddingTable,
    pub arch: Arch,
    pub score_kind: ScoreKind,
    graph: Option<Arc<NormalizedAdjacency>>,
    lookup: RowLookup,
    n_users: usize,
    n_items: usize,
}

/// Standard deviation of initial embedding entries.
pub fn init_scale(dim: usize) -> f64 {
    0.1 / (dim as f64).sqrt()
}

impl Model {
    /// Identity-row model with i.i.d. `N(0, (0.1/sqrt(dim))^2)` entries.
    /// LightGCN needs the train adjacency.
    pub fn init(
        n_users: usize,
        n_items: usize,
        dim: usize,
        arch: Arch,
        score_kind: ScoreKind,
        graph: Option<Arc<NormalizedAdjacency>>,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = crate::rng::seeded(seed, crate::rng::stream::INIT_TARGET);
        let user_table = random_table(n_users, dim, &mut rng)?;
        let item_table = random_table(n_items, dim, &mut rng)?;
        Self::from_parts(user_table, item_table, arch, score_kind, graph, RowLookup::Identity)
    }

    pub fn from_parts(
        user_table: EmbeddingTable,
        item_table: EmbeddingTable,
        arch: Arch,
        score_kind: ScoreKind,
        graph: Option<Arc<NormalizedAdjacency>>,
        lookup: RowLookup,
    ) -> Result<Self> {
        if user_table.dim() != item_table.dim() {
            return Err(Error::ShapeMismatch("user and item tables differ in dim".into()));
        }
        let (n_users, n_items) = match &lookup {
            RowLookup::Identity => (user_table.rows(), item_table.rows()),
            RowLookup::Shared { user_rows, item_rows } => {
                if let Some(&r) = user_rows.iter().find(|&&r| r >= user_table.rows()) {
                    return Err(Error::IndexOutOfRange { kind: "user row", index: r, size: user_table.rows() });
                }
                if let Some(&r) = item_rows.iter().find(|&&r| r >= item_table.rows()) {
                    return Err(Error::IndexOutOfRange { kind: "item row", index: r, size: item_table.rows() });
                }
                (user_rows.len(), item_rows.len())
            }
        };
        match (arch, &graph) {
            (Arch::LightGcn { .. }, None) => {
                return Err(Error::InvalidArgument("LightGCN requires a train adjacency".into()))
            }
            (Arch::Mf, Some(_)) => {
                return Err(Error::InvalidArgument("MF takes no adjacency".into()))
            }
            (Arch::LightGcn { .. }, Some(g)) if g.n_users() != n_users || g.n_items() != n_items => {
                return Err(Error::ShapeMismatch(format!(
                    "adjacency is {}x{}, model has {n_users}x{n_items} entities",
                    g.n_users(),
                    g.n_items()
                )))
            }
            _ => {}
        }
        Ok(Self {
            user_table,
            item_table,
            arch,
            score_kind,
            graph,
            lookup,
            n_users,
            n_items,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn dim(&self) -> usize {
        self.user_table.dim()
    }

    pub fn graph(&self) -> Option<&Arc<NormalizedAdjacency>> {
        self.graph.as_ref()
    }

    pub fn lookup(&self) -> &RowLookup {
        &self.lookup
    }

    /// Node embeddings before propagation (row gather for shared lookups).
    fn base_embeddings(&self) -> (EmbeddingTable, EmbeddingTable) {
        match &self.lookup {
            RowLookup::Identity => (self.user_table.clone(), self.item_table.clone()),
            RowLookup::Shared { user_rows, item_rows } => {
                (self.user_table.gather(user_rows), self.item_table.gather(item_rows))
            }
        }
    }

    /// Final vectors for every user and item.
    pub fn propagate(&self) -> Representations {
        let (users, items) = self.base_embeddings();
        match (self.arch, &self.graph) {
            (Arch::LightGcn { layers }, Some(g)) => {
                let (users, items) = g.layer_average(&users, &items, layers);
                Representations { users, items }
            }
            _ => Representations { users, items },
        }
    }

    /// Final vectors for the requested entities.
    pub fn representations(&self, users: &[usize], items: &[usize]) -> Result<(EmbeddingTable, EmbeddingTable)> {
        for &u in users {
            crate::data::check_index("user", u, self.n_users)?;
        }
        for &i in items {
            crate::data::check_index("item", i, self.n_items)?;
        }
        match self.arch {
            Arch::Mf => {
                let (ur, ir): (Vec<usize>, Vec<usize>) = match &self.lookup {
                    RowLookup::Identity => (users.to_vec(), items.to_vec()),
                    RowLookup::Shared { user_rows, item_rows } => (
                        users.iter().map(|&u| user_rows[u]).collect(),
                        items.iter().map(|&i| item_rows[i]).collect(),
                    ),
                };
                Ok((self.user_table.gather(&ur), self.item_table.gather(&ir)))
            }
            Arch::LightGcn { .. } => {
                let reps = self.propagate();
                Ok((reps.users.gather(users), reps.items.gather(items)))
            }
        }
    }

    /// Score of one (user, item) pair.
    pub fn score_pair(&self, u: usize, i: usize) -> Result<f64> {
        let (uv, iv) = self.representations(&[u], &[i])?;
        self.score_kind.score(uv.row(0), iv.row(0))
    }

    /// Chains a gradient w.r.t. final representations back onto the tables.
    pub fn backprop(&self, grad: &Representations) -> ModelGrads {
        let (gu, gi) = match (self.arch, &self.graph) {
            (Arch::LightGcn { layers }, Some(g)) => g.layer_average(&grad.users, &grad.items, layers),
            _ => (grad.users.clone(), grad.items.clone()),
        };
        match &self.lookup {
            RowLookup::Identity => ModelGrads { user: gu, item: gi },
            RowLookup::Shared { user_rows, item_rows } => ModelGrads {
                user: gu.scatter_add(user_rows, self.user_table.rows()),
                item: gi.scatter_add(item_rows, self.item_table.rows()),
            },
        }
    }

    /// Scales both tables in place.
    pub fn scale_tables(&mut self, a: f64) {
        self.user_table.scale(a);
        self.item_table.scale(a);
    }

    /// SHA-256 over the raw little-endian parameter bytes.
    pub fn parameter_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for t in [&self.user_table, &self.item_table] {
            h.update((t.rows() as u64).to_le_bytes());
            h.update((t.dim() as u64).to_le_bytes());
            for v in t.as_slice() {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

pub(crate) fn random_table(rows: usize, dim: usize, rng: &mut crate::rng::Rng) -> Result<EmbeddingTable> {
    if dim == 0 {
        return Err(Error::InvalidArgument("embedding dim must be >= 1".into()));
    }
    let normal = Normal::new(0.0, init_scale(dim)).expect("positive std");
    let values = (0..rows * dim).map(|_| normal.sample(rng)).collect();
    EmbeddingTable::from_values(rows, dim, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Interaction;

    #[test]
    fn init_is_deterministic_with_expected_shape() {
        let a = Model::init(450, 30, 64, Arch::Mf, ScoreKind::Cosine, None, 11).unwrap();
        let b = Model::init(450, 30, 64, Arch::Mf, ScoreKind::Cosine, None, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.user_table.shape(), (450, 64));
        let c = Model::init(450, 30, 64, Arch::Mf, ScoreKind::Cosine, None, 12).unwrap();
        assert_ne!(a.parameter_hash(), c.parameter_hash());
    }

    #[test]
    fn init_mean_within_three_sigma() {
        // 1e5 entries of N(0, s^2): the sample mean has std s / sqrt(1e5)
        let m = Model::init(1_000, 1, 100, Arch::Mf, ScoreKind::Cosine, None, 5).unwrap();
        let vals = m.user_table.as_slice();
        assert_eq!(vals.len(), 100_000);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sigma = init_scale(100) / (vals.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean} vs 3 sigma {}", 3.0 * sigma);
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!((var.sqrt() / init_scale(100) - 1.0).abs() < 0.02);
    }

    #[test]
    fn mf_returns_table_rows() {
        let m = Model::init(3, 4, 5, Arch::Mf, ScoreKind::Inner, None, 1).unwrap();
        let (u, i) = m.representations(&[2, 0], &[3]).unwrap();
        assert_eq!(u.row(0), m.user_table.row(2));
        assert_eq!(u.row(1), m.user_table.row(0));
        assert_eq!(i.row(0), m.item_table.row(3));
        assert!(m.representations(&[3], &[]).is_err());
    }

    #[test]
    fn single_edge_one_layer_by_hand() {
        let g = Arc::new(NormalizedAdjacency::build(&[Interaction::new(0, 0)], 1, 1).unwrap());
        let u = EmbeddingTable::from_values(1, 2, vec![0.25, -1.5]).unwrap();
        let i = EmbeddingTable::from_values(1, 2, vec![0.75, 0.5]).unwrap();
        let m = Model::from_parts(u, i, Arch::LightGcn { layers: 1 }, ScoreKind::Cosine, Some(g), RowLookup::Identity)
            .unwrap();
        let (ur, ir) = m.representations(&[0], &[0]).unwrap();
        assert_eq!(ur.row(0), &[0.5, -0.5]);
        assert_eq!(ir.row(0), &[0.5, -0.5]);
    }

    #[test]
    fn lightgcn_requires_graph() {
        assert!(Model::init(2, 2, 4, Arch::LightGcn { layers: 2 }, ScoreKind::Cosine, None, 0).is_err());
    }

    #[test]
    fn arch_parsing() {
        assert_eq!(Arch::parse("mf").unwrap(), Arch::Mf);
        assert_eq!(Arch::parse("lightgcn").unwrap(), Arch::LightGcn { layers: 2 });
        assert_eq!(Arch::parse("lightgcn3").unwrap(), Arch::LightGcn { layers: 3 });
        assert!(Arch::parse("ultragcn").is_err());
    }
}
