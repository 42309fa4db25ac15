use crate::data::Interaction;
use crate::{Error, Result};

use super::EmbeddingTable;

/// Symmetric sqrt-degree normalized user-item adjacency, without self loops.
/// Edge (u, i) carries weight `1 / sqrt(d_u * d_i)` with degrees counted on
/// the edges it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    n_users: usize,
    n_items: usize,
    /// Per user: (item, weight), ascending item.
    user_adj: Vec<Vec<(usize, f64)>>,
    /// Per item: (user, weight), ascending user.
    item_adj: Vec<Vec<(usize, f64)>>,
}

impl NormalizedAdjacency {
    pub fn build(train: &[Interaction], n_users: usize, n_items: usize) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyInput("training interactions"));
        }
        let lists = crate::data::user_item_lists(train, n_users);
        let mut item_deg = vec![0usize; n_items];
        for it in train {
            crate::data::check_index("item", it.item, n_items)?;
        }
        for items in &lists {
            for &i in items {
                item_deg[i] += 1;
            }
        }
        let mut user_adj = Vec::with_capacity(n_users);
        let mut item_adj = vec![Vec::new(); n_items];
        for (u, items) in lists.iter().enumerate() {
            let du = items.len() as f64;
            let row: Vec<(usize, f64)> = items
                .iter()
                .map(|&i| (i, 1.0 / (du * item_deg[i] as f64).sqrt()))
                .collect();
            for &(i, w) in &row {
                item_adj[i].push((u, w));
            }
            user_adj.push(row);
        }
        Ok(Self {
            n_users,
            n_items,
            user_adj,
            item_adj,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_edges(&self) -> usize {
        self.user_adj.iter().map(Vec::len).sum()
    }

    pub fn user_neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.user_adj[u]
    }

    pub fn item_neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.item_adj[i]
    }

    pub fn weight(&self, u: usize, i: usize) -> Option<f64> {
        let row = &self.user_adj[u];
        row.binary_search_by_key(&i, |&(j, _)| j).ok().map(|p| row[p].1)
    }

    /// One propagation step: users gather from items and items from users.
    pub fn propagate(&self, users: &EmbeddingTable, items: &EmbeddingTable) -> (EmbeddingTable, EmbeddingTable) {
        let dim = users.dim();
        let mut next_users = EmbeddingTable::zeros(self.n_users, dim);
        for (u, nbrs) in self.user_adj.iter().enumerate() {
            for &(i, w) in nbrs {
                next_users.add_to_row(u, w, items.row(i));
            }
        }
        let mut next_items = EmbeddingTable::zeros(self.n_items, dim);
        for (i, nbrs) in self.item_adj.iter().enumerate() {
            for &(u, w) in nbrs {
                next_items.add_to_row(i, w, users.row(u));
            }
        }
        (next_users, next_items)
    }

    /// Layer average `(1/(L+1)) * sum_{k=0..L} A^k x`. The operator is
    /// symmetric, so this is also its own adjoint for backpropagation.
    pub fn layer_average(
        &self,
        users: &EmbeddingTable,
        items: &EmbeddingTable,
        layers: usize,
    ) -> (EmbeddingTable, EmbeddingTable) {
        let mut acc_u = users.clone();
        let mut acc_i = items.clone();
        let mut cur_u = users.clone();
        let mut cur_i = items.clone();
        for _ in 0..layers {
            let (nu, ni) = self.propagate(&cur_u, &cur_i);
            add_assign(&mut acc_u, &nu);
            add_assign(&mut acc_i, &ni);
            cur_u = nu;
            cur_i = ni;
        }
        let a = 1.0 / (layers + 1) as f64;
        acc_u.scale(a);
        acc_i.scale(a);
        (acc_u, acc_i)
    }
}

fn add_assign(acc: &mut EmbeddingTable, x: &EmbeddingTable) {
    for (a, b) in acc.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *a += b;
    }
}
