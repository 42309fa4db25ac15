//! Binary checkpoint layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "PGCK"
//! 4       4     version (u32) = 1
//! 8       1     arch (0 = MF, 1 = LightGCN)
//! 9       4     layers (u32)
//! 13      1     score kind (0 = cosine, 1 = inner, 2 = sigmoid_inner)
//! 14      8     user table rows (u64)
//! 22      8     item table rows (u64)
//! 30      8     dim (u64)
//! 38      ...   user table then item table, row-major f32
//! ```
//!
//! Parameters are held as f64 in memory and rounded to f32 on save.

use std::sync::Arc;

use super::{Arch, EmbeddingTable, Model, NormalizedAdjacency, RowLookup, ScoreKind};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"PGCK";
pub const CHECKPOINT_VERSION: u32 = 1;
const HEADER_LEN: usize = 38;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointHeader {
    pub version: u32,
    pub arch: Arch,
    pub score_kind: ScoreKind,
    pub user_rows: usize,
    pub item_rows: usize,
    pub dim: usize,
}

impl CheckpointHeader {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        let (arch, layers) = match self.arch {
            Arch::Mf => (0u8, 0u32),
            Arch::LightGcn { layers } => (1u8, layers as u32),
        };
        out.push(arch);
        out.extend_from_slice(&layers.to_le_bytes());
        out.push(self.score_kind.code());
        out.extend_from_slice(&(self.user_rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.item_rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Checkpoint(m.to_owned());
        if bytes.len() < HEADER_LEN {
            return Err(bad("truncated header"));
        }
        if &bytes[0..4] != CHECKPOINT_MAGIC {
            return Err(bad("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap()) as usize;
        let version = u32_at(4);
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let arch = match bytes[8] {
            0 => Arch::Mf,
            1 => Arch::LightGcn { layers: u32_at(9) as usize },
            a => return Err(Error::Checkpoint(format!("unknown arch code {a}"))),
        };
        let score_kind = ScoreKind::from_code(bytes[13]).ok_or_else(|| bad("unknown score kind"))?;
        Ok(Self {
            version,
            arch,
            score_kind,
            user_rows: u64_at(14),
            item_rows: u64_at(22),
            dim: u64_at(30),
        })
    }
}

impl Model {
    pub fn checkpoint_header(&self) -> CheckpointHeader {
        CheckpointHeader {
            version: CHECKPOINT_VERSION,
            arch: self.arch,
            score_kind: self.score_kind,
            user_rows: self.user_table.rows(),
            item_rows: self.item_table.rows(),
            dim: self.dim(),
        }
    }

    pub fn to_checkpoint_bytes(&self) -> Vec<u8> {
        let n = (self.user_table.as_slice().len() + self.item_table.as_slice().len()) * 4;
        let mut out = Vec::with_capacity(HEADER_LEN + n);
        self.checkpoint_header().encode(&mut out);
        for t in [&self.user_table, &self.item_table] {
            for &v in t.as_slice() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out
    }

    /// Restores a model; LightGCN checkpoints need the train adjacency and
    /// shortcut checkpoints their shared row lookup.
    pub fn from_checkpoint_bytes(
        bytes: &[u8],
        graph: Option<Arc<NormalizedAdjacency>>,
        lookup: RowLookup,
    ) -> Result<Self> {
        let h = CheckpointHeader::decode(bytes)?;
        let body = &bytes[HEADER_LEN..];
        let nu = h.user_rows * h.dim;
        let ni = h.item_rows * h.dim;
        if body.len() != (nu + ni) * 4 {
            return Err(Error::Checkpoint(format!(
                "body is {} bytes, header implies {}",
                body.len(),
                (nu + ni) * 4
            )));
        }
        let floats: Vec<f64> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let user = EmbeddingTable::from_values(h.user_rows, h.dim, floats[..nu].to_vec())?;
        let item = EmbeddingTable::from_values(h.item_rows, h.dim, floats[nu..].to_vec())?;
        let graph = match h.arch {
            Arch::Mf => None,
            Arch::LightGcn { .. } => graph,
        };
        Model::from_parts(user, item, h.arch, h.score_kind, graph, lookup)
    }
}
