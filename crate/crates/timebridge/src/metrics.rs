//! Evaluation metrics for synthetic time series.
//!
//! - [`correlational_score`]: mean absolute difference between the real and
//!   synthetic cross-feature correlation matrices, scaled by the literature's
//!   fixed `1/10` normalizer.
//! - [`discriminative_score`]: `|accuracy − 0.5|` of a small attention
//!   classifier trained to separate real from synthetic windows under a
//!   fixed budget.
//! - [`predictive_score`]: train-on-synthetic / test-on-real one-step
//!   forecasting MAE (TSTR).
//! - [`imputation_error`]: MSE/MAE over generated (masked) cells only.
//! - [`prior_data_wasserstein`]: empirical 2-Wasserstein between
//!   flattened-window point clouds — exact optimal assignment up to 256
//!   points, sliced approximation beyond.
//! - [`feature_frechet`]: Fréchet distance between Gaussian fits of
//!   per-window summary features (a self-contained stand-in for
//!   embedding-based distribution distances).

use ndarray::{s, Array1, Array2, Array3, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::nn::{clip_global_norm, warmup_inv_sqrt_lr, Adam, AdamConfig, EncoderLayer, Graph, Linear, ParamStore, Var};

/// Budget and architecture of the metric networks. The defaults are fixed
/// (2000 steps, batch 64, hidden width 32) so scores stay comparable across
/// runs.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct MetricNetConfig {
    pub steps: usize,
    pub batch: usize,
    pub hidden: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for MetricNetConfig {
    fn default() -> Self {
        Self {
            steps: 2000,
            batch: 64,
            hidden: 32,
            n_heads: 2,
            n_layers: 2,
            lr: 1e-3,
            seed: 0,
        }
    }
}

/// All metrics over one (real, synthetic) pair, JSON-serializable.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub correlational: f64,
    pub discriminative: f64,
    pub predictive: f64,
    pub feature_frechet: f64,
    pub n_real: usize,
    pub n_synth: usize,
    pub seed: u64,
    /// Feature pairs whose correlation was undefined (zero variance) and
    /// contributed 0 with a warning.
    pub degenerate_correlation_pairs: usize,
}

impl EvalReport {
    /// Fixed-order human-readable table.
    pub fn table(&self) -> String {
        format!(
            "metric            value\n\
             correlational     {:.6}\n\
             discriminative    {:.6}\n\
             predictive        {:.6}\n\
             feature_frechet   {:.6}\n",
            self.correlational, self.discriminative, self.predictive, self.feature_frechet
        )
    }
}

/// Run every metric with one shared configuration.
pub fn compute_eval_report(
    real: &Array3<f64>,
    synth: &Array3<f64>,
    cfg: &MetricNetConfig,
) -> Result<EvalReport> {
    let (correlational, degenerate) = correlational_score_detailed(real, synth)?;
    let discriminative = discriminative_score(real, synth, cfg)?;
    let predictive = predictive_score(real, synth, cfg)?;
    let feature_frechet = feature_frechet(real, synth)?;
    Ok(EvalReport {
        correlational,
        discriminative,
        predictive,
        feature_frechet,
        n_real: real.shape()[0],
        n_synth: synth.shape()[0],
        seed: cfg.seed,
        degenerate_correlation_pairs: degenerate,
    })
}

// ---------------------------------------------------------------------------
// correlational score
// ---------------------------------------------------------------------------

/// Per-window correlation matrix averaged over the batch. Returns the count
/// of degenerate (zero-variance) pairs, which contribute 0.
fn mean_correlation(batch: &Array3<f64>) -> (Array2<f64>, usize) {
    let (n, tau, d) = batch.dim();
    let mut acc = Array2::zeros((d, d));
    let mut degenerate = 0usize;
    for w in 0..n {
        // time-average covariance: (1/τ)Σ x_i x_j − x̄_i x̄_j
        let window = batch.slice(s![w, .., ..]);
        let means: Vec<f64> = (0..d).map(|j| window.column(j).sum() / tau as f64).collect();
        let mut cov = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                let mut cross = 0.0;
                for k in 0..tau {
                    cross += window[[k, i]] * window[[k, j]];
                }
                cov[[i, j]] = cross / tau as f64 - means[i] * means[j];
            }
        }
        for i in 0..d {
            for j in 0..d {
                let denom = (cov[[i, i]] * cov[[j, j]]).sqrt();
                if denom > 0.0 {
                    acc[[i, j]] += cov[[i, j]] / denom;
                } else {
                    degenerate += 1;
                }
            }
        }
    }
    (acc / n as f64, degenerate)
}

/// Correlational score plus the degenerate-pair count.
pub fn correlational_score_detailed(
    real: &Array3<f64>,
    synth: &Array3<f64>,
) -> Result<(f64, usize)> {
    let d = real.shape()[2];
    if synth.shape()[2] != d {
        return Err(Error::ShapeMismatch {
            what: "correlational_score: feature count",
            expected: vec![d],
            got: vec![synth.shape()[2]],
        });
    }
    if real.shape()[0] < 2 || synth.shape()[0] < 2 {
        return Err(Error::Data("correlational score needs >= 2 windows".into()));
    }
    let (c_real, deg_r) = mean_correlation(real);
    let (c_synth, deg_s) = mean_correlation(synth);
    let score = (&c_real - &c_synth).iter().map(|v| v.abs()).sum::<f64>() / 10.0;
    Ok((score, deg_r + deg_s))
}

/// Scaled sum of absolute correlation differences (the `1/10` normalizer is
/// kept verbatim from the literature). Zero-variance pairs contribute 0 and
/// raise a warning on stderr.
pub fn correlational_score(real: &Array3<f64>, synth: &Array3<f64>) -> Result<f64> {
    let (score, degenerate) = correlational_score_detailed(real, synth)?;
    if degenerate > 0 {
        eprintln!(
            "warning: correlational score skipped {degenerate} zero-variance feature pairs"
        );
    }
    Ok(score)
}

// ---------------------------------------------------------------------------
// metric networks (classifier / regressor)
// ---------------------------------------------------------------------------

/// Small attention network over windows, pooled at the last token.
struct SeqNet {
    store: ParamStore,
    input: Linear,
    positional: usize,
    layers: Vec<EncoderLayer>,
    head: Linear,
}

impl SeqNet {
    fn new(tau: usize, d_in: usize, d_out: usize, cfg: &MetricNetConfig, rng: &mut ChaCha12Rng) -> Self {
        let mut store = ParamStore::new();
        let input = Linear::new(&mut store, "in", d_in, cfg.hidden, true, rng);
        let positional = store.push(
            "pos",
            Array2::from_shape_fn((tau, cfg.hidden), |_| {
                0.02 * rng.sample::<f64, _>(StandardNormal)
            })
            .into_dyn(),
        );
        let layers = (0..cfg.n_layers)
            .map(|i| EncoderLayer::new(&mut store, &format!("l{i}"), cfg.hidden, cfg.n_heads, false, rng))
            .collect();
        let head = Linear::new(&mut store, "head", cfg.hidden, d_out, true, rng);
        Self {
            store,
            input,
            positional,
            layers,
            head,
        }
    }

    /// Pooled readout: (B, τ, d_in) -> (B, 1, d_out).
    fn readout(&self, g: &mut Graph, x: &Array3<f64>) -> Var {
        let xin = g.input(x.clone());
        let mut h = self.input.apply(g, &self.store, xin);
        let pos = g.param(&self.store, self.positional);
        h = g.add_positional(h, pos);
        for layer in &self.layers {
            h = layer.apply(g, &self.store, h, None);
        }
        let pooled = g.mean_tokens(h);
        self.head.apply(g, &self.store, pooled)
    }
}

fn train_steps(
    net: &mut SeqNet,
    cfg: &MetricNetConfig,
    rng: &mut ChaCha12Rng,
    mut step_loss: impl FnMut(&SeqNet, &mut Graph, &mut ChaCha12Rng) -> Var,
) {
    let mut adam = Adam::new(&net.store, AdamConfig::default());
    for step in 1..=cfg.steps as u64 {
        let mut g = Graph::new();
        let loss = step_loss(net, &mut g, rng);
        let grads = g.backward(loss);
        let mut param_grads = grads.into_param_grads();
        clip_global_norm(&mut param_grads, 1.0);
        let lr = warmup_inv_sqrt_lr(cfg.lr, 100, step);
        adam.step(&mut net.store, &param_grads, lr);
    }
}

fn balanced_split(
    n: usize,
    rng: &mut ChaCha12Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let cut = (n as f64 * 0.8).round() as usize;
    let cut = cut.clamp(1, n - 1);
    (idx[..cut].to_vec(), idx[cut..].to_vec())
}

fn gather(batch: &Array3<f64>, idx: &[usize]) -> Array3<f64> {
    let (_, tau, d) = batch.dim();
    let mut out = Array3::zeros((idx.len(), tau, d));
    for (row, &i) in idx.iter().enumerate() {
        out.slice_mut(s![row, .., ..]).assign(&batch.slice(s![i, .., ..]));
    }
    out
}

/// `|test accuracy − 0.5|` of a classifier trained to tell real from
/// synthetic windows (balanced 80/20 split, fixed budget, seeded).
pub fn discriminative_score(
    real: &Array3<f64>,
    synth: &Array3<f64>,
    cfg: &MetricNetConfig,
) -> Result<f64> {
    let (tau, d) = (real.shape()[1], real.shape()[2]);
    if synth.shape()[1] != tau || synth.shape()[2] != d {
        return Err(Error::ShapeMismatch {
            what: "discriminative_score",
            expected: real.shape().to_vec(),
            got: synth.shape().to_vec(),
        });
    }
    if real.shape()[0] < 10 || synth.shape()[0] < 10 {
        return Err(Error::Data(
            "discriminative score needs >= 10 windows per side".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let (train_r, test_r) = balanced_split(real.shape()[0], &mut rng);
    let (train_s, test_s) = balanced_split(synth.shape()[0], &mut rng);
    if test_r.is_empty() || test_s.is_empty() {
        return Err(Error::Data("degenerate single-class test split".into()));
    }
    let train_real = gather(real, &train_r);
    let train_synth = gather(synth, &train_s);

    let mut net = SeqNet::new(tau, d, 1, cfg, &mut rng);
    let half = cfg.batch / 2;
    train_steps(&mut net, cfg, &mut rng, |net, g, rng| {
        let mut x = Array3::zeros((2 * half, tau, d));
        let mut labels = Array1::zeros(2 * half);
        for b in 0..half {
            let i = rng.random_range(0..train_real.shape()[0]);
            x.slice_mut(s![b, .., ..]).assign(&train_real.slice(s![i, .., ..]));
            labels[b] = 1.0;
            let j = rng.random_range(0..train_synth.shape()[0]);
            x.slice_mut(s![half + b, .., ..])
                .assign(&train_synth.slice(s![j, .., ..]));
        }
        let logits = net.readout(g, &x);
        g.bce_with_logits(logits, &labels)
    });

    // accuracy over the held-out windows
    let mut correct = 0usize;
    let mut total = 0usize;
    for (set, label) in [(gather(real, &test_r), 1.0), (gather(synth, &test_s), 0.0)] {
        for start in (0..set.shape()[0]).step_by(256) {
            let stop = (start + 256).min(set.shape()[0]);
            let chunk = set.slice(s![start..stop, .., ..]).to_owned();
            let mut g = Graph::new();
            let logits = net.readout(&mut g, &chunk);
            let lv = g.value3(logits);
            for b in 0..chunk.shape()[0] {
                let predicted = if lv[[b, 0, 0]] > 0.0 { 1.0 } else { 0.0 };
                if predicted == label {
                    correct += 1;
                }
                total += 1;
            }
        }
    }
    let accuracy = correct as f64 / total as f64;
    Ok((accuracy - 0.5).abs())
}

/// TSTR predictive score: train a one-step forecaster on synthetic windows
/// (first τ−1 steps → last step), report its MAE on real windows.
pub fn predictive_score(
    real: &Array3<f64>,
    synth: &Array3<f64>,
    cfg: &MetricNetConfig,
) -> Result<f64> {
    let (tau, d) = (real.shape()[1], real.shape()[2]);
    if synth.shape()[1] != tau || synth.shape()[2] != d {
        return Err(Error::ShapeMismatch {
            what: "predictive_score",
            expected: real.shape().to_vec(),
            got: synth.shape().to_vec(),
        });
    }
    if tau < 2 {
        return Err(Error::Data("predictive score needs windows of length >= 2".into()));
    }
    if real.shape()[0] < 2 || synth.shape()[0] < 2 {
        return Err(Error::Data("predictive score needs >= 2 windows per side".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut net = SeqNet::new(tau - 1, d, d, cfg, &mut rng);
    train_steps(&mut net, cfg, &mut rng, |net, g, rng| {
        let mut x = Array3::zeros((cfg.batch, tau - 1, d));
        let mut target = Array3::zeros((cfg.batch, 1, d));
        for b in 0..cfg.batch {
            let i = rng.random_range(0..synth.shape()[0]);
            x.slice_mut(s![b, .., ..])
                .assign(&synth.slice(s![i, ..tau - 1, ..]));
            target
                .slice_mut(s![b, 0, ..])
                .assign(&synth.slice(s![i, tau - 1, ..]));
        }
        let pred = net.readout(g, &x);
        g.weighted_sq_error(pred, &target, &Array1::ones(cfg.batch))
    });

    // MAE on the real windows
    let mut abs_err = 0.0;
    let mut count = 0usize;
    for start in (0..real.shape()[0]).step_by(256) {
        let stop = (start + 256).min(real.shape()[0]);
        let inputs = real.slice(s![start..stop, ..tau - 1, ..]).to_owned();
        let mut g = Graph::new();
        let pred = net.readout(&mut g, &inputs);
        let pv = g.value3(pred);
        for b in 0..inputs.shape()[0] {
            for j in 0..d {
                abs_err += (pv[[b, 0, j]] - real[[start + b, tau - 1, j]]).abs();
                count += 1;
            }
        }
    }
    Ok(abs_err / count as f64)
}

// ---------------------------------------------------------------------------
// imputation error
// ---------------------------------------------------------------------------

/// MSE and MAE over the generated (mask = 1) cells only.
pub fn imputation_error(
    truth: &Array3<f64>,
    imputed: &Array3<f64>,
    mask: &Array3<f64>,
) -> Result<(f64, f64)> {
    if truth.shape() != imputed.shape() || truth.shape() != mask.shape() {
        return Err(Error::ShapeMismatch {
            what: "imputation_error",
            expected: truth.shape().to_vec(),
            got: imputed.shape().to_vec(),
        });
    }
    let mut se = 0.0;
    let mut ae = 0.0;
    let mut count = 0usize;
    for ((&t, &i), &m) in truth.iter().zip(imputed.iter()).zip(mask.iter()) {
        if m != 0.0 {
            let diff = i - t;
            se += diff * diff;
            ae += diff.abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Data("imputation error over an empty mask".into()));
    }
    Ok((se / count as f64, ae / count as f64))
}

// ---------------------------------------------------------------------------
// Wasserstein distance
// ---------------------------------------------------------------------------

/// How a Wasserstein value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WassersteinMethod {
    /// Optimal assignment on the squared-Euclidean cost.
    Exact,
    /// Sliced approximation with 100 random projections.
    Sliced,
}

/// Largest point count solved exactly.
pub const WASSERSTEIN_EXACT_LIMIT: usize = 256;

/// Minimum-cost perfect assignment (Jonker–Volgenant style shortest
/// augmenting paths); returns row → column.
fn min_cost_assignment(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut assigned_row = vec![0usize; n + 1]; // column -> row (1-based, 0 = free)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[assigned_row[j] - 1] = j - 1;
    }
    row_to_col
}

fn flatten_windows(batch: &Array3<f64>) -> Array2<f64> {
    let (n, tau, d) = batch.dim();
    let mut out = Array2::zeros((n, tau * d));
    for i in 0..n {
        for k in 0..tau {
            for j in 0..d {
                out[[i, k * d + j]] = batch[[i, k, j]];
            }
        }
    }
    out
}

fn subsample(points: &Array2<f64>, n: usize, rng: &mut ChaCha12Rng) -> Array2<f64> {
    if points.nrows() == n {
        return points.clone();
    }
    let mut idx: Vec<usize> = (0..points.nrows()).collect();
    idx.shuffle(rng);
    idx.truncate(n);
    let mut out = Array2::zeros((n, points.ncols()));
    for (row, &i) in idx.iter().enumerate() {
        out.row_mut(row).assign(&points.row(i));
    }
    out
}

fn exact_w2(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut cost = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..a.ncols() {
                let d = a[[i, k]] - b[[j, k]];
                acc += d * d;
            }
            cost[[i, j]] = acc;
        }
    }
    let assignment = min_cost_assignment(&cost);
    let total: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[[i, j]])
        .sum();
    (total / n as f64).sqrt()
}

/// Sliced estimate with the √dim correction, which makes it exact for pure
/// translations and for isotropic Gaussian pairs.
fn sliced_w2(a: &Array2<f64>, b: &Array2<f64>, projections: usize, rng: &mut ChaCha12Rng) -> f64 {
    let n = a.nrows();
    let dim = a.ncols();
    let mut acc = 0.0;
    for _ in 0..projections {
        let mut u: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        u.iter_mut().for_each(|v| *v /= norm);
        let mut pa: Vec<f64> = (0..n)
            .map(|i| (0..dim).map(|k| a[[i, k]] * u[k]).sum())
            .collect();
        let mut pb: Vec<f64> = (0..n)
            .map(|i| (0..dim).map(|k| b[[i, k]] * u[k]).sum())
            .collect();
        pa.sort_by(f64::total_cmp);
        pb.sort_by(f64::total_cmp);
        acc += pa
            .iter()
            .zip(pb.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / n as f64;
    }
    (dim as f64 * acc / projections as f64).sqrt()
}

/// 2-Wasserstein distance with the method used; `seed` controls subsampling
/// and slicing directions.
pub fn wasserstein_detailed(
    a: &Array3<f64>,
    b: &Array3<f64>,
    seed: u64,
) -> Result<(f64, WassersteinMethod)> {
    if a.shape()[1..] != b.shape()[1..] {
        return Err(Error::ShapeMismatch {
            what: "wasserstein: window shape",
            expected: a.shape().to_vec(),
            got: b.shape().to_vec(),
        });
    }
    let n = a.shape()[0].min(b.shape()[0]);
    if n < 2 {
        return Err(Error::Data("wasserstein needs >= 2 samples per side".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pa = subsample(&flatten_windows(a), n, &mut rng);
    let pb = subsample(&flatten_windows(b), n, &mut rng);
    if n <= WASSERSTEIN_EXACT_LIMIT {
        Ok((exact_w2(&pa, &pb), WassersteinMethod::Exact))
    } else {
        Ok((sliced_w2(&pa, &pb, 100, &mut rng), WassersteinMethod::Sliced))
    }
}

/// Empirical 2-Wasserstein between flattened-window point clouds (equalized
/// sample counts; exact assignment for n ≤ 256, sliced beyond).
pub fn prior_data_wasserstein(prior_samples: &Array3<f64>, data_samples: &Array3<f64>) -> Result<f64> {
    Ok(wasserstein_detailed(prior_samples, data_samples, 0)?.0)
}

// ---------------------------------------------------------------------------
// feature-based Fréchet distance
// ---------------------------------------------------------------------------

/// Symmetric PSD matrix square root by eigendecomposition; roundoff-negative
/// eigenvalues are clamped to zero (the jitter-repair analogue for this op).
fn sqrtm_psd(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (a[[i, j]] + a[[j, i]]));
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                let lam = eig.eigenvalues[k].max(0.0).sqrt();
                acc += eig.eigenvectors[(i, k)] * lam * eig.eigenvectors[(j, k)];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// Fréchet distance between two Gaussians:
/// `‖μ_r − μ_s‖² + tr(Σ_r + Σ_s − 2 (Σ_r^{1/2} Σ_s Σ_r^{1/2})^{1/2})`.
pub fn frechet_gaussians(
    mu_r: &Array1<f64>,
    cov_r: &Array2<f64>,
    mu_s: &Array1<f64>,
    cov_s: &Array2<f64>,
) -> Result<f64> {
    let k = mu_r.len();
    if mu_s.len() != k || cov_r.dim() != (k, k) || cov_s.dim() != (k, k) {
        return Err(Error::ShapeMismatch {
            what: "frechet_gaussians",
            expected: vec![k, k],
            got: cov_s.shape().to_vec(),
        });
    }
    let mean_term: f64 = mu_r
        .iter()
        .zip(mu_s.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let sr = sqrtm_psd(cov_r);
    let inner = sr.dot(cov_s).dot(&sr);
    let inner_sqrt = sqrtm_psd(&inner);
    let trace: f64 = (0..k)
        .map(|i| cov_r[[i, i]] + cov_s[[i, i]] - 2.0 * inner_sqrt[[i, i]])
        .sum();
    // tiny negative dust from roundoff
    Ok((mean_term + trace).max(0.0))
}

/// Number of summary features extracted per data feature.
pub const FEATURES_PER_CHANNEL: usize = 6;

/// Summary vector per window: per feature, its mean, standard deviation,
/// lag-1 and lag-2 autocorrelation, dominant DFT bin (normalized by τ), and
/// normalized spectral entropy.
pub fn window_features(batch: &Array3<f64>) -> Array2<f64> {
    let (n, tau, d) = batch.dim();
    let mut out = Array2::zeros((n, FEATURES_PER_CHANNEL * d));
    for w in 0..n {
        for j in 0..d {
            let col: Vec<f64> = (0..tau).map(|k| batch[[w, k, j]]).collect();
            let mean = col.iter().sum::<f64>() / tau as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / tau as f64;
            let std = var.sqrt();
            let autocorr = |lag: usize| -> f64 {
                if var == 0.0 || tau <= lag {
                    return 0.0;
                }
                let mut acc = 0.0;
                for k in 0..tau - lag {
                    acc += (col[k] - mean) * (col[k + lag] - mean);
                }
                acc / (tau as f64 * var)
            };
            // power spectrum over non-DC bins
            let n_bins = tau / 2;
            let mut power = Vec::with_capacity(n_bins);
            for b in 1..=n_bins {
                let (mut re, mut im) = (0.0, 0.0);
                for (k, &x) in col.iter().enumerate() {
                    let ang = 2.0 * std::f64::consts::PI * b as f64 * k as f64 / tau as f64;
                    re += x * ang.cos();
                    im -= x * ang.sin();
                }
                power.push(re * re + im * im);
            }
            let total: f64 = power.iter().sum();
            let (dominant, entropy) = if total > 0.0 && n_bins > 1 {
                let mut best = (0usize, -1.0f64);
                let mut ent = 0.0;
                for (b, &p) in power.iter().enumerate() {
                    if p > best.1 {
                        best = (b, p);
                    }
                    let q = p / total;
                    if q > 0.0 {
                        ent -= q * q.ln();
                    }
                }
                ((best.0 + 1) as f64 / tau as f64, ent / (n_bins as f64).ln())
            } else {
                (0.0, 0.0)
            };
            let base = j * FEATURES_PER_CHANNEL;
            out[[w, base]] = mean;
            out[[w, base + 1]] = std;
            out[[w, base + 2]] = autocorr(1);
            out[[w, base + 3]] = autocorr(2);
            out[[w, base + 4]] = dominant;
            out[[w, base + 5]] = entropy;
        }
    }
    out
}

fn gaussian_fit(features: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let (n, k) = features.dim();
    let mu = features.sum_axis(Axis(0)) / n as f64;
    let mut cov = Array2::zeros((k, k));
    for row in features.outer_iter() {
        for i in 0..k {
            for j in 0..k {
                cov[[i, j]] += (row[i] - mu[i]) * (row[j] - mu[j]);
            }
        }
    }
    (mu, cov / n as f64)
}

/// Fréchet distance between Gaussian fits of per-window summary features.
pub fn feature_frechet(real: &Array3<f64>, synth: &Array3<f64>) -> Result<f64> {
    if real.shape()[0] == 0 || synth.shape()[0] == 0 {
        return Err(Error::Data("feature_frechet needs nonempty batches".into()));
    }
    if real.shape()[1..] != synth.shape()[1..] {
        return Err(Error::ShapeMismatch {
            what: "feature_frechet: window shape",
            expected: real.shape().to_vec(),
            got: synth.shape().to_vec(),
        });
    }
    let fr = window_features(real);
    let fs = window_features(synth);
    let (mu_r, cov_r) = gaussian_fit(&fr);
    let (mu_s, cov_s) = gaussian_fit(&fs);
    frechet_gaussians(&mu_r, &cov_r, &mu_s, &cov_s)
}
