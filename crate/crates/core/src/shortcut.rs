//! Popularity-shortcut model: a clone of the target architecture whose
//! inputs are frequency categories instead of identities, producing the
//! interaction-wise shortcut degree `beta_ui = sigmoid(b_u . b_i)`.

use std::sync::Arc;

use crate::backbone::{random_table, Arch, Model, NormalizedAdjacency, Representations, RowLookup, ScoreKind};
use crate::data::PopularityTable;
use crate::rng::{self, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ShortcutModel {
    /// User rows are user-frequency categories, item rows item-frequency categories.
    pub inner: Model,
    pub pop_table: PopularityTable,
    frozen: bool,
}

/// Builds an untrained shortcut model. Table sizes equal the vocabulary
/// sizes; each entity reads the row of its frequency category. LightGCN
/// propagates the gathered per-entity vectors over the same train graph as
/// the target model.
pub fn build_shortcut_model(
    arch: Arch,
    pop_table: PopularityTable,
    dim: usize,
    seed: u64,
    graph: Option<Arc<NormalizedAdjacency>>,
) -> Result<ShortcutModel> {
    let mut rng = rng::seeded(seed, stream::INIT_SHORTCUT);
    let user_table = random_table(pop_table.user_freq_vocab.len(), dim, &mut rng)?;
    let item_table = random_table(pop_table.item_freq_vocab.len(), dim, &mut rng)?;
    let lookup = RowLookup::Shared {
        user_rows: pop_table.user_categories(),
        item_rows: pop_table.item_categories(),
    };
    let inner = Model::from_parts(user_table, item_table, arch, ScoreKind::SigmoidInner, graph, lookup)?;
    Ok(ShortcutModel {
        inner,
        pop_table,
        frozen: false,
    })
}

impl ShortcutModel {
    /// Wraps restored tables (e.g. from a checkpoint) as a frozen model.
    pub fn from_trained(inner: Model, pop_table: PopularityTable) -> Result<Self> {
        let expected = RowLookup::Shared {
            user_rows: pop_table.user_categories(),
            item_rows: pop_table.item_categories(),
        };
        if inner.lookup() != &expected {
            return Err(Error::InvalidArgument(
                "shortcut tables do not match the popularity vocabularies".into(),
            ));
        }
        Ok(Self {
            inner,
            pop_table,
            frozen: true,
        })
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn n_users(&self) -> usize {
        self.inner.n_users()
    }

    pub fn n_items(&self) -> usize {
        self.inner.n_items()
    }

    pub fn parameter_hash(&self) -> String {
        self.inner.parameter_hash()
    }

    pub fn propagate(&self) -> Representations {
        self.inner.propagate()
    }

    /// `beta_ui` for one pair.
    pub fn shortcut_degree(&self, u: usize, i: usize) -> Result<f64> {
        self.inner.score_pair(u, i)
    }

    /// All `beta` values against precomputed representations.
    pub fn degrees(&self) -> ShortcutDegrees {
        ShortcutDegrees { reps: self.propagate() }
    }
}

/// Frozen shortcut representations, queried per pair.
#[derive(Debug, Clone)]
pub struct ShortcutDegrees {
    reps: Representations,
}

impl ShortcutDegrees {
    #[inline]
    pub fn beta(&self, u: usize, i: usize) -> f64 {
        crate::backbone::sigmoid(crate::backbone::dot(self.reps.users.row(u), self.reps.items.row(i)))
    }

    pub fn user_vector(&self, u: usize) -> &[f64] {
        self.reps.users.row(u)
    }

    pub fn item_vector(&self, i: usize) -> &[f64] {
        self.reps.items.row(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_popularity_table, Interaction};

    fn toy_table() -> PopularityTable {
        // users 0,1 have d=2; user 2 has d=1; items 0,1 have d=2, item 2 d=1
        let train = [
            Interaction::new(0, 0),
            Interaction::new(0, 1),
            Interaction::new(1, 0),
            Interaction::new(1, 1),
            Interaction::new(2, 2),
        ];
        build_popularity_table(&train, 3, 3).unwrap()
    }

    #[test]
    fn table_rows_equal_vocabulary_sizes() {
        let sm = build_shortcut_model(Arch::Mf, toy_table(), 64, 0, None).unwrap();
        assert_eq!(sm.inner.user_table.shape(), (2, 64));
        assert_eq!(sm.inner.item_table.shape(), (2, 64));
        assert!(!sm.is_frozen());
    }

    #[test]
    fn equal_frequencies_share_vectors() {
        let sm = build_shortcut_model(Arch::Mf, toy_table(), 8, 3, None).unwrap();
        let (u, i) = sm.inner.representations(&[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(u.row(0), u.row(1));
        assert_ne!(u.row(0), u.row(2));
        assert_eq!(i.row(0), i.row(1));
        assert_eq!(sm.shortcut_degree(0, 2).unwrap(), sm.shortcut_degree(1, 2).unwrap());
    }

    #[test]
    fn zero_tables_give_half() {
        let mut sm = build_shortcut_model(Arch::Mf, toy_table(), 4, 0, None).unwrap();
        sm.inner.scale_tables(0.0);
        let deg = sm.degrees();
        for u in 0..3 {
            for i in 0..3 {
                assert_eq!(sm.shortcut_degree(u, i).unwrap(), 0.5);
                assert_eq!(deg.beta(u, i), 0.5);
            }
        }
    }

    #[test]
    fn beta_in_open_unit_interval() {
        let sm = build_shortcut_model(Arch::Mf, toy_table(), 4, 1, None).unwrap();
        let deg = sm.degrees();
        for u in 0..3 {
            for i in 0..3 {
                let b = deg.beta(u, i);
                assert!(b > 0.0 && b < 1.0);
                assert!((b - sm.shortcut_degree(u, i).unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn restored_model_must_match_vocab() {
        let sm = build_shortcut_model(Arch::Mf, toy_table(), 4, 1, None).unwrap();
        let ok = ShortcutModel::from_trained(sm.inner.clone(), toy_table()).unwrap();
        assert!(ok.is_frozen());
        let other = build_popularity_table(&[Interaction::new(0, 0)], 3, 3).unwrap();
        assert!(ShortcutModel::from_trained(sm.inner, other).is_err());
    }
}
