//! Endpoint (prior) distributions for the diffusion bridge.
//!
//! The bridge transports data to an *arbitrary* endpoint distribution, so the
//! endpoint can be chosen to sit close to the data:
//!
//! - [`DataStats`]: independent Gaussian per cell,
//!   `x_T ~ N(μ, diag(σ²))`, with `μ`, `σ²` estimated per timestamp and
//!   feature from the training windows.
//! - [`GpPrior`]: adds temporal correlation to the data Gaussian through an
//!   RBF kernel `η exp(-(i-j)²/(2l²))` down each feature column.
//! - Trend curves (linear, cubic, Butterworth low-pass) used directly as the
//!   endpoint for trend-conditioned generation.
//! - [`SplineEndpoint`]: linear-spline interpolation through observed cells,
//!   the endpoint for imputation.

use ndarray::{s, Array2, Array3};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Per-cell mean and population variance of the training windows,
/// shape `(τ, d)` each.
#[derive(Debug, Clone)]
pub struct DataStats {
    pub mu: Array2<f64>,
    pub sigma2: Array2<f64>,
}

/// Estimate per-cell mean and population variance over the batch axis.
pub fn fit_data_stats(train: &Array3<f64>) -> Result<DataStats> {
    let (n, tau, d) = train.dim();
    if n < 2 {
        return Err(Error::Data(format!(
            "data prior needs >= 2 training samples, got {n}"
        )));
    }
    let mut mu = Array2::zeros((tau, d));
    let mut sigma2 = Array2::zeros((tau, d));
    let inv_n = 1.0 / n as f64;
    for sample in train.outer_iter() {
        mu += &sample;
    }
    mu *= inv_n;
    for sample in train.outer_iter() {
        for k in 0..tau {
            for j in 0..d {
                let diff = sample[[k, j]] - mu[[k, j]];
                sigma2[[k, j]] += diff * diff;
            }
        }
    }
    sigma2 *= inv_n;
    Ok(DataStats { mu, sigma2 })
}

/// Draw `x_T ~ N(μ, diag(σ²))`.
pub fn sample_data_prior(stats: &DataStats, rng: &mut ChaCha12Rng) -> Array2<f64> {
    let mut out = stats.mu.clone();
    for (o, &v) in out.iter_mut().zip(stats.sigma2.iter()) {
        let z: f64 = rng.sample(StandardNormal);
        *o += v.sqrt() * z;
    }
    out
}

/// Gaussian-process prior: per-feature temporal covariance
/// `C[i,i] = σ²[i] + η + jitter`, `C[i,j] = η exp(-(i-j)²/(2l²))` for `i≠j`,
/// stored through its lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct GpPrior {
    pub mu: Array2<f64>,
    /// One `(τ × τ)` lower-triangular factor per feature.
    pub cov_chol: Vec<Array2<f64>>,
    pub eta: f64,
    /// Kernel length scale per feature.
    pub length_scale: Vec<f64>,
}

/// Jitter escalation schedule for Cholesky repair.
const JITTERS: [f64; 3] = [1e-6, 1e-5, 1e-4];

fn cholesky_with_jitter(cov: &Array2<f64>) -> Result<Array2<f64>> {
    let n = cov.nrows();
    let mut last = 0.0;
    for &jitter in &JITTERS {
        last = jitter;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            cov[[i, j]] + if i == j { jitter } else { 0.0 }
        });
        if let Some(chol) = m.cholesky() {
            let l = chol.l();
            return Ok(Array2::from_shape_fn((n, n), |(i, j)| l[(i, j)]));
        }
    }
    Err(Error::Cholesky { last_jitter: last })
}

/// Per-feature covariance matrix of the GP prior (without jitter).
pub fn gp_covariance(
    stats: &DataStats,
    feature: usize,
    eta: f64,
    length_scale: f64,
) -> Array2<f64> {
    let tau = stats.mu.nrows();
    Array2::from_shape_fn((tau, tau), |(i, j)| {
        let lag = i as f64 - j as f64;
        let kernel = eta * (-(lag * lag) / (2.0 * length_scale * length_scale)).exp();
        if i == j {
            stats.sigma2[[i, feature]] + kernel
        } else {
            kernel
        }
    })
}

/// Build the GP prior. `length_scale = None` defaults to the per-feature
/// overall data standard deviation (per-cell variance plus the spread of the
/// per-cell means across timestamps).
pub fn build_gp_prior(stats: &DataStats, eta: f64, length_scale: Option<f64>) -> Result<GpPrior> {
    if !(eta > 0.0) {
        return Err(Error::Config(format!("gp prior needs eta > 0, got {eta}")));
    }
    if let Some(l) = length_scale {
        if !(l > 0.0) {
            return Err(Error::Config(format!(
                "gp prior needs length_scale > 0, got {l}"
            )));
        }
    }
    let (tau, d) = stats.mu.dim();
    let mut chol = Vec::with_capacity(d);
    let mut scales = Vec::with_capacity(d);
    for j in 0..d {
        let l = match length_scale {
            Some(l) => l,
            None => {
                let mean_var = stats.sigma2.column(j).mean().unwrap_or(0.0);
                let mu_col = stats.mu.column(j);
                let mu_bar = mu_col.mean().unwrap_or(0.0);
                let mu_var = mu_col
                    .iter()
                    .map(|&m| (m - mu_bar) * (m - mu_bar))
                    .sum::<f64>()
                    / tau as f64;
                (mean_var + mu_var).sqrt().max(1e-3)
            }
        };
        let cov = gp_covariance(stats, j, eta, l);
        chol.push(cholesky_with_jitter(&cov)?);
        scales.push(l);
    }
    Ok(GpPrior {
        mu: stats.mu.clone(),
        cov_chol: chol,
        eta,
        length_scale: scales,
    })
}

/// Draw `x_T = μ + L z` per feature with caller-supplied `z` columns.
pub fn sample_gp_prior_with_noise(gp: &GpPrior, z: &Array2<f64>) -> Array2<f64> {
    let (tau, d) = gp.mu.dim();
    let mut out = gp.mu.clone();
    for j in 0..d {
        let l = &gp.cov_chol[j];
        for i in 0..tau {
            let mut acc = 0.0;
            for k in 0..=i {
                acc += l[[i, k]] * z[[k, j]];
            }
            out[[i, j]] += acc;
        }
    }
    out
}

/// Draw `x_T = μ + L z`, `z ~ N(0, I_τ)` per feature.
pub fn sample_gp_prior(gp: &GpPrior, rng: &mut ChaCha12Rng) -> Array2<f64> {
    let (tau, d) = gp.mu.dim();
    let z = Array2::from_shape_fn((tau, d), |_| rng.sample(StandardNormal));
    sample_gp_prior_with_noise(gp, &z)
}

/// Imputation endpoint: spline-interpolated values plus the observation mask
/// (1 = observed) it was built from.
#[derive(Debug, Clone)]
pub struct SplineEndpoint {
    pub values: Array2<f64>,
    pub observed: Array2<f64>,
}

/// Linear-spline interpolation through the observed cells of each feature
/// column, with constant extrapolation before the first and after the last
/// observation. Features with no observations are filled with 0 (the
/// normalized minimum). Observed cells pass through exactly.
pub fn spline_interpolate(values: &Array2<f64>, observed: &Array2<f64>) -> Result<SplineEndpoint> {
    if values.shape() != observed.shape() {
        return Err(Error::ShapeMismatch {
            what: "spline_interpolate: mask",
            expected: values.shape().to_vec(),
            got: observed.shape().to_vec(),
        });
    }
    let (tau, d) = values.dim();
    let mut out = Array2::zeros((tau, d));
    for j in 0..d {
        let obs: Vec<usize> = (0..tau).filter(|&k| observed[[k, j]] != 0.0).collect();
        if obs.is_empty() {
            continue; // stays 0
        }
        let (first, last) = (obs[0], obs[obs.len() - 1]);
        for k in 0..tau {
            out[[k, j]] = if observed[[k, j]] != 0.0 {
                values[[k, j]]
            } else if k < first {
                values[[first, j]]
            } else if k > last {
                values[[last, j]]
            } else {
                // strictly between two observations: locate the segment
                let idx = obs.partition_point(|&o| o < k);
                let (k0, k1) = (obs[idx - 1], obs[idx]);
                let (v0, v1) = (values[[k0, j]], values[[k1, j]]);
                v0 + (v1 - v0) / (k1 - k0) as f64 * (k - k0) as f64
            };
        }
    }
    Ok(SplineEndpoint {
        values: out,
        observed: observed.clone(),
    })
}

/// Deterministic endpoint from a trend tensor (identity pass-through).
pub fn trend_endpoint(trend: &Array2<f64>, expected: (usize, usize)) -> Result<Array2<f64>> {
    if trend.dim() != expected {
        return Err(Error::ShapeMismatch {
            what: "trend_endpoint",
            expected: vec![expected.0, expected.1],
            got: trend.shape().to_vec(),
        });
    }
    Ok(trend.clone())
}

/// Trend-extraction method for trend-conditioned tasks.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendKind {
    /// Least-squares line per feature.
    Linear,
    /// Least-squares cubic per feature.
    Poly3,
    /// Zero-phase second-order Butterworth low-pass.
    Butterworth,
}

/// Least-squares polynomial fit per feature, evaluated back on the window's
/// own time grid.
pub fn polynomial_trend(window: &Array2<f64>, degree: usize) -> Array2<f64> {
    let (tau, d) = window.dim();
    let cols = degree + 1;
    // Vandermonde over normalized time
    let design =
        nalgebra::DMatrix::from_fn(tau, cols, |k, p| (k as f64 / tau as f64).powi(p as i32));
    let svd = design.clone().svd(true, true);
    let mut out = Array2::zeros((tau, d));
    for j in 0..d {
        let y = nalgebra::DVector::from_fn(tau, |k, _| window[[k, j]]);
        let coef = svd.solve(&y, 1e-12).expect("svd solve");
        let fit = &design * coef;
        for k in 0..tau {
            out[[k, j]] = fit[k];
        }
    }
    out
}

/// Zero-phase second-order Butterworth low-pass down each feature column.
/// `cutoff` is a fraction of the Nyquist frequency.
pub fn butterworth_trend(window: &Array2<f64>, cutoff: f64) -> Result<Array2<f64>> {
    if !(0.0 < cutoff && cutoff < 1.0) {
        return Err(Error::Config(format!(
            "butterworth cutoff must be in (0, 1) of Nyquist, got {cutoff}"
        )));
    }
    let (tau, d) = window.dim();
    // bilinear-transform biquad
    let omega = (std::f64::consts::PI * cutoff / 2.0).tan();
    let k1 = std::f64::consts::SQRT_2 * omega;
    let k2 = omega * omega;
    let a0 = 1.0 + k1 + k2;
    let b = [k2 / a0, 2.0 * k2 / a0, k2 / a0];
    let a = [2.0 * (k2 - 1.0) / a0, (1.0 - k1 + k2) / a0];

    let filt = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        let (mut x1, mut x2, mut y1, mut y2) = (x[0], x[0], x[0], x[0]);
        for (i, &xi) in x.iter().enumerate() {
            let yi = b[0] * xi + b[1] * x1 + b[2] * x2 - a[0] * y1 - a[1] * y2;
            y[i] = yi;
            x2 = x1;
            x1 = xi;
            y2 = y1;
            y1 = yi;
        }
        y
    };

    let pad = 12.min(tau.saturating_sub(1));
    let mut out = Array2::zeros((tau, d));
    for j in 0..d {
        let col: Vec<f64> = window.column(j).to_vec();
        // odd reflection at both ends to suppress edge transients
        let mut ext = Vec::with_capacity(tau + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * col[0] - col[i]);
        }
        ext.extend_from_slice(&col);
        for i in 1..=pad {
            ext.push(2.0 * col[tau - 1] - col[tau - 1 - i]);
        }
        // forward then backward pass
        let fwd = filt(&ext);
        let rev: Vec<f64> = fwd.into_iter().rev().collect();
        let bwd = filt(&rev);
        let smoothed: Vec<f64> = bwd.into_iter().rev().collect();
        for k in 0..tau {
            out[[k, j]] = smoothed[pad + k];
        }
    }
    Ok(out)
}

/// Extract a trend from a window with the given method.
pub fn extract_trend(window: &Array2<f64>, kind: TrendKind, cutoff: f64) -> Result<Array2<f64>> {
    match kind {
        TrendKind::Linear => Ok(polynomial_trend(window, 1)),
        TrendKind::Poly3 => Ok(polynomial_trend(window, 3)),
        TrendKind::Butterworth => butterworth_trend(window, cutoff),
    }
}

/// A fully-specified endpoint distribution.
#[derive(Debug, Clone)]
pub enum Prior {
    /// `N(0, I)` over the window.
    StandardGaussian { tau: usize, d: usize },
    /// `N(μ, diag(σ²))` from training statistics.
    DataGaussian(DataStats),
    /// Temporally correlated Gaussian process.
    GaussianProcess(GpPrior),
    /// Deterministic trend endpoint (zero variance).
    TrendEndpoint(Array2<f64>),
    /// Deterministic spline-interpolated endpoint (zero variance).
    SplineEndpoint(SplineEndpoint),
}

impl Prior {
    /// Window shape this prior produces.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Prior::StandardGaussian { tau, d } => (*tau, *d),
            Prior::DataGaussian(stats) => stats.mu.dim(),
            Prior::GaussianProcess(gp) => gp.mu.dim(),
            Prior::TrendEndpoint(t) => t.dim(),
            Prior::SplineEndpoint(sp) => sp.values.dim(),
        }
    }

    /// Draw one endpoint; deterministic variants ignore the rng.
    pub fn draw(&self, rng: &mut ChaCha12Rng) -> Array2<f64> {
        match self {
            Prior::StandardGaussian { tau, d } => {
                Array2::from_shape_fn((*tau, *d), |_| rng.sample(StandardNormal))
            }
            Prior::DataGaussian(stats) => sample_data_prior(stats, rng),
            Prior::GaussianProcess(gp) => sample_gp_prior(gp, rng),
            Prior::TrendEndpoint(t) => t.clone(),
            Prior::SplineEndpoint(sp) => sp.values.clone(),
        }
    }

    /// Short label for manifests.
    pub fn label(&self) -> &'static str {
        match self {
            Prior::StandardGaussian { .. } => "standard",
            Prior::DataGaussian(_) => "data",
            Prior::GaussianProcess(_) => "gp",
            Prior::TrendEndpoint(_) => "trend",
            Prior::SplineEndpoint(_) => "spline",
        }
    }
}

/// Stack `n` draws from a prior into an `(n, τ, d)` batch.
pub fn draw_batch(prior: &Prior, n: usize, rng: &mut ChaCha12Rng) -> Array3<f64> {
    let (tau, d) = prior.shape();
    let mut out = Array3::zeros((n, tau, d));
    for i in 0..n {
        out.slice_mut(s![i, .., ..]).assign(&prior.draw(rng));
    }
    out
}
