//! Diffusion-bridge time-series generation.
//!
//! `timebridge` synthesizes multivariate time series with a diffusion bridge:
//! instead of denoising from a fixed standard Gaussian, the model learns the
//! reverse dynamics of a forward process pinned to a *chosen* endpoint
//! distribution. Picking that prior well — per-cell data statistics, a
//! Gaussian process with temporal correlation, a trend curve, or a spline
//! through observed points — moves the endpoint close to the data and makes
//! both unconditional generation and hard-constrained tasks (trend following,
//! imputation with exactly preserved observations) the same mechanism.
//!
//! The crate is organized to mirror that pipeline:
//!
//! - [`schedule`]: closed-form VP/VE noise schedules, bridge marginals, the
//!   endpoint-pinning `h` function, and score reconstruction.
//! - [`priors`]: endpoint distributions (data Gaussian, Gaussian process,
//!   trend curves, linear-spline interpolants).
//! - [`data`]: CSV ingestion, windowing, normalization, mask generation, and
//!   toy generators.
//! - [`nn`]: a small reverse-mode autodiff engine over `f64` tensors, with
//!   the layers the denoiser is built from.
//! - [`denoiser`]: the trend/seasonal/residual decomposition network
//!   `D(x_t, t, x_T)`.
//! - [`training`]: the bridge training objective and loop.
//! - [`sampler`]: second-order stochastic bridge samplers, including the
//!   point-preserving masked variant.
//! - [`metrics`]: correlational / discriminative / predictive scores,
//!   imputation error, Wasserstein distances, and a feature-based Fréchet
//!   distance.
//! - [`config`] / [`checkpoint`]: the flat key=value run configuration and
//!   the versioned model checkpoint container.
//!
//! A narrative guide with runnable examples lives in the `book/` directory of
//! the repository; its code blocks are compiled as doctests of this crate.

pub mod checkpoint;
pub mod config;
pub mod data;
pub mod denoiser;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod priors;
pub mod sampler;
pub mod schedule;
pub mod training;

mod book;

pub use error::{Error, Result};
pub use schedule::{BridgeCoeffs, BridgeMarginal, NoiseSchedule, ScheduleKind};
