//! Collaborative filtering under popularity distribution shift.
//!
//! A shortcut model learns how much of each interaction is explained by user
//! and item frequency alone. Its output `beta_ui` masks the target model's
//! logits during training, so the target MF or LightGCN model is pushed to
//! explain interactions the popularity signal cannot. At inference the
//! shortcut model is dropped and the target scores are used as-is.
//!
//! Modules follow the pipeline: [`data`] (loading, k-core, splits),
//! [`synth`] (planted-shortcut generator), [`backbone`] and [`shortcut`]
//! (models), [`training`] (losses, Adam, the two-stage loop), [`eval`]
//! (all-ranking metrics and analyses) and [`io`] / [`cli`] (files on disk).

pub mod backbone;
pub mod cli;
pub mod data;
mod error;
pub mod eval;
pub mod io;
pub mod rng;
pub mod shortcut;
pub mod synth;
pub mod training;

pub use error::{Error, Result};
