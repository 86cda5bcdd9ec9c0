//! Minimal reverse-mode autodiff over `f64` tensors.
//!
//! The denoiser is small (a few hundred thousand parameters at most) but its
//! correctness contracts are strict — analytic gradients are checked against
//! central finite differences at 64-bit precision — so the network runs on a
//! purpose-built tape instead of an external framework. Activations are
//! `(batch, tokens, channels)` tensors; parameters live in a [`ParamStore`]
//! and graphs are rebuilt per step.

mod adam;
mod layers;
mod tape;

pub use adam::{Adam, AdamConfig, clip_global_norm, warmup_inv_sqrt_lr};
pub use layers::{AttentionLayer, EncoderLayer, LayerNorm, Linear};
pub use tape::{Graph, ParamStore, Var};
