use crate::{Error, Result};

/// Dense row-major `rows x dim` matrix of embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self {
            rows,
            dim,
            values: vec![0.0; rows * dim],
        }
    }

    pub fn from_values(rows: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ShapeMismatch("embedding dim must be >= 1".into()));
        }
        if values.len() != rows * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {rows}x{dim} table",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("embedding values must be finite".into()));
        }
        Ok(Self { rows, dim, values })
    }

    pub fn from_fn(rows: usize, dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * dim);
        for r in 0..rows {
            for c in 0..dim {
                values.push(f(r, c));
            }
        }
        Self { rows, dim, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.dim)
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn fill(&mut self, v: f64) {
        self.values.fill(v);
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    /// `self[r] += a * src`
    #[inline]
    pub fn add_to_row(&mut self, r: usize, a: f64, src: &[f64]) {
        for (d, s) in self.row_mut(r).iter_mut().zip(src) {
            *d += a * s;
        }
    }

    /// Table whose row `r` is `self[rows[r]]`.
    pub fn gather(&self, rows: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), self.dim);
        for (dst, &src) in rows.iter().enumerate() {
            out.row_mut(dst).copy_from_slice(self.row(src));
        }
        out
    }

    /// Adds row `r` of `self` into row `rows[r]` of a `n_rows`-row table.
    pub fn scatter_add(&self, rows: &[usize], n_rows: usize) -> Self {
        let mut out = Self::zeros(n_rows, self.dim);
        for (src, &dst) in rows.iter().enumerate() {
            out.add_to_row(dst, 1.0, self.row(src));
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
