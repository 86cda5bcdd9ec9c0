//! Bridge training: endpoint pairing, the weighted time/frequency objective,
//! and the optimization loop.
//!
//! Each step draws a batch of windows `x_0`, pairs every window with an
//! endpoint `x_T` (a fresh prior draw for unconditional training, the
//! window's own trend for trend tasks, a spline interpolant under a fresh
//! mask for imputation), samples a diffusion time `t` uniformly inside the
//! guard band, forms `x_t` from the closed-form bridge marginal, and
//! minimizes
//!
//! `E[ w_t ( ‖x_0 − D(x_t,t,x_T)‖² + λ ‖FFT(x_0) − FFT(D)‖² ) ]`
//!
//! with `w_t = (σ_t² + σ_data²) / (σ_t² σ_data²)` and an orthonormal FFT, so
//! the frequency term equals the time term exactly (Parseval) and `λ` acts
//! as a pure re-weighting.

use std::io::Write;
use std::path::PathBuf;

use ndarray::{s, Array1, Array2, Array3};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::checkpoint;
use crate::data::{make_mask, MaskSpec};
use crate::denoiser::DenoiserModel;
use crate::error::{Error, Result};
use crate::nn::{clip_global_norm, warmup_inv_sqrt_lr, Adam, AdamConfig, Graph};
use crate::priors::{extract_trend, spline_interpolate, Prior, TrendKind};
use crate::schedule::NoiseSchedule;

/// Optimization hyperparameters.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub n_steps: usize,
    /// Peak learning rate reached after warmup, then inverse-sqrt decay.
    pub lr_warmup_peak: f64,
    pub warmup_steps: u64,
    /// Strength λ of the frequency-domain term.
    pub lambda_fourier: f64,
    pub sigma_data: f64,
    /// Diffusion times are drawn uniformly from `[t_min, t_max_train]`.
    pub t_min: f64,
    pub t_max_train: f64,
    pub seed: u64,
    pub grad_clip: f64,
    pub checkpoint_every: usize,
}

impl TrainConfig {
    /// Defaults matching the mid-size real-data profile
    /// (β_min = 0.2, β_d = 10, σ_data = 0.1 live in the schedule/config).
    pub fn default_for(horizon: f64) -> Self {
        Self {
            batch_size: 128,
            n_steps: 18_000,
            lr_warmup_peak: 0.008,
            warmup_steps: 500,
            lambda_fourier: 1.0,
            sigma_data: 0.1,
            t_min: 1e-4 * horizon,
            t_max_train: (1.0 - 1e-4) * horizon,
            seed: 0,
            grad_clip: 1.0,
            checkpoint_every: 1000,
        }
    }

    pub fn validate(&self, sched: &NoiseSchedule) -> Result<()> {
        if self.batch_size == 0 || self.n_steps == 0 {
            return Err(Error::Config("batch_size and n_steps must be >= 1".into()));
        }
        if !(self.sigma_data > 0.0) {
            return Err(Error::Config(format!(
                "sigma_data must be > 0, got {}",
                self.sigma_data
            )));
        }
        if !(0.0 < self.t_min && self.t_min < self.t_max_train && self.t_max_train < sched.t_max) {
            return Err(Error::Config(format!(
                "need 0 < t_min ({}) < t_max_train ({}) < T ({})",
                self.t_min, self.t_max_train, sched.t_max
            )));
        }
        Ok(())
    }
}

/// Endpoint pairing rule for a training run.
#[derive(Debug, Clone)]
pub enum TrainTask {
    /// Fresh prior draw per example per step.
    Unconditional(Prior),
    /// Endpoint is the window's own extracted trend.
    Trend { kind: TrendKind, cutoff: f64 },
    /// Endpoint is the spline interpolant of the window under a fresh mask.
    Imputation { mask: MaskSpec },
}

impl TrainTask {
    /// Endpoint for one window.
    pub fn endpoint(&self, x0: &Array2<f64>, rng: &mut ChaCha12Rng) -> Result<Array2<f64>> {
        match self {
            TrainTask::Unconditional(prior) => Ok(prior.draw(rng)),
            TrainTask::Trend { kind, cutoff } => extract_trend(x0, *kind, *cutoff),
            TrainTask::Imputation { mask } => {
                let missing = make_mask(x0.dim(), mask, rng)?;
                let observed = missing.mapv(|m| 1.0 - m);
                Ok(spline_interpolate(x0, &observed)?.values)
            }
        }
    }
}

/// Loss weight `w_t = (σ_t² + σ_data²) / (σ_t² σ_data²)`.
///
/// The identity `w_t σ_t² σ_data² = σ_t² + σ_data²` holds by construction;
/// `t` must stay above the schedule's lower guard (σ_t → 0 blows up).
pub fn loss_weight(sched: &NoiseSchedule, t: f64, sigma_data: f64) -> Result<f64> {
    if t < sched.t_min_guard() {
        return Err(Error::EndpointGuard {
            t,
            lo: sched.t_min_guard(),
            hi: sched.t_max,
        });
    }
    let sigma = sched.sigma(t)?;
    let s2 = sigma * sigma;
    let d2 = sigma_data * sigma_data;
    Ok((s2 + d2) / (s2 * d2))
}

/// One drawn training batch: endpoints, times, noisy states, and weights.
pub struct BridgeBatch {
    pub x0: Array3<f64>,
    pub x_end: Array3<f64>,
    pub x_t: Array3<f64>,
    pub t: Array1<f64>,
    pub weights: Array1<f64>,
}

/// Pair every window with an endpoint and draw `x_t` from the bridge
/// marginal at a uniform time.
pub fn draw_bridge_batch(
    x0: &Array3<f64>,
    task: &TrainTask,
    sched: &NoiseSchedule,
    cfg: &TrainConfig,
    rng: &mut ChaCha12Rng,
) -> Result<BridgeBatch> {
    let (n, tau, d) = x0.dim();
    let mut x_end = Array3::zeros((n, tau, d));
    let mut x_t = Array3::zeros((n, tau, d));
    let mut t = Array1::zeros(n);
    let mut weights = Array1::zeros(n);
    for i in 0..n {
        let window = x0.slice(s![i, .., ..]).to_owned();
        let endpoint = task.endpoint(&window, rng)?;
        let ti = cfg.t_min + (cfg.t_max_train - cfg.t_min) * rng.random::<f64>();
        let noise = Array2::from_shape_fn((tau, d), |_| rng.sample::<f64, _>(StandardNormal));
        let xti =
            sched.sample_bridge_marginal(window.view(), endpoint.view(), ti, noise.view())?;
        x_end.slice_mut(s![i, .., ..]).assign(&endpoint);
        x_t.slice_mut(s![i, .., ..]).assign(&xti);
        t[i] = ti;
        weights[i] = loss_weight(sched, ti, cfg.sigma_data)?;
    }
    Ok(BridgeBatch {
        x0: x0.clone(),
        x_end,
        x_t,
        t,
        weights,
    })
}

/// Loss pieces of one forward pass.
pub struct LossBreakdown {
    pub total: f64,
    pub time_term: f64,
    pub freq_term: f64,
}

/// Build the training loss on an existing graph; returns the loss var and
/// the detached breakdown.
pub fn training_loss_graph(
    g: &mut Graph,
    model: &DenoiserModel,
    batch: &BridgeBatch,
    lambda: f64,
) -> (crate::nn::Var, LossBreakdown) {
    let vars = model.forward_graph(g, &batch.x_t, &batch.t, &batch.x_end, None);
    let time_term = g.weighted_sq_error(vars.total, &batch.x0, &batch.weights);

    // orthonormal DFT of prediction and target
    let pred_dft = g.orthonormal_dft(vars.total);
    let target_dft = {
        let mut tg = Graph::new();
        let x = tg.input(batch.x0.clone());
        let y = tg.orthonormal_dft(x);
        tg.value3(y)
    };
    let freq_term = g.weighted_sq_error(pred_dft, &target_dft, &batch.weights);
    let freq_scaled = g.scale_scalar(freq_term, lambda);
    let loss = g.add_scalar(time_term, freq_scaled);

    let breakdown = LossBreakdown {
        total: g.scalar(loss),
        time_term: g.scalar(time_term),
        freq_term: g.scalar(freq_term),
    };
    (loss, breakdown)
}

/// Evaluate the loss for one batch (no update). Non-finite losses report the
/// first offending example.
pub fn training_loss(
    model: &DenoiserModel,
    batch: &BridgeBatch,
    lambda: f64,
) -> Result<LossBreakdown> {
    let mut g = Graph::new();
    let (_, breakdown) = training_loss_graph(&mut g, model, batch, lambda);
    if !breakdown.total.is_finite() {
        let out = model.forward(&batch.x_t, &batch.t, &batch.x_end, None)?;
        for i in 0..batch.x0.shape()[0] {
            let diff = &out.total.slice(s![i, .., ..]) - &batch.x0.slice(s![i, .., ..]);
            if diff.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite loss at batch example {i}"
                )));
            }
        }
        return Err(Error::Numeric("non-finite loss".into()));
    }
    Ok(breakdown)
}

/// One row of the loss log CSV.
#[derive(Debug, Clone, Copy)]
pub struct LossRow {
    pub step: u64,
    pub loss: f64,
    pub time_term: f64,
    pub freq_term: f64,
}

/// Where the loop writes its artifacts.
#[derive(Debug, Clone, Default)]
pub struct TrainSinks {
    pub checkpoint_path: Option<PathBuf>,
    pub loss_csv_path: Option<PathBuf>,
}

/// Training outcome summary.
pub struct TrainOutcome {
    pub final_loss: f64,
    pub steps_run: u64,
    pub log: Vec<LossRow>,
    pub steps_per_sec: f64,
}

/// Run the optimization loop. `start_step` is nonzero when resuming; the rng
/// must then carry the restored state.
pub fn train(
    model: &mut DenoiserModel,
    data: &Array3<f64>,
    task: &TrainTask,
    sched: &NoiseSchedule,
    cfg: &TrainConfig,
    sinks: &TrainSinks,
    start_step: u64,
    rng: &mut ChaCha12Rng,
) -> Result<TrainOutcome> {
    cfg.validate(sched)?;
    let n = data.shape()[0];
    if n == 0 {
        return Err(Error::Data("empty training set".into()));
    }
    let mut adam = Adam::new(&model.store, AdamConfig::default());
    let mut log = Vec::new();
    let mut initial_loss: Option<f64> = None;
    let mut high_loss_streak = 0u32;
    let started = std::time::Instant::now();
    let mut final_loss = f64::NAN;

    let mut csv = match &sinks.loss_csv_path {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            if start_step == 0 {
                writeln!(f, "step,loss,time_term,freq_term")?;
            }
            Some(f)
        }
        None => None,
    };

    for step in (start_step + 1)..=(cfg.n_steps as u64) {
        // batch of windows drawn with replacement
        let mut batch = Array3::zeros((cfg.batch_size, data.shape()[1], data.shape()[2]));
        for b in 0..cfg.batch_size {
            let idx = rng.random_range(0..n);
            batch
                .slice_mut(s![b, .., ..])
                .assign(&data.slice(s![idx, .., ..]));
        }
        let bridge = draw_bridge_batch(&batch, task, sched, cfg, rng)?;

        let mut g = Graph::new();
        let (loss_var, breakdown) = training_loss_graph(&mut g, model, &bridge, cfg.lambda_fourier);
        if !breakdown.total.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite loss at step {step}"
            )));
        }
        let grads = g.backward(loss_var);
        let mut param_grads = grads.into_param_grads();
        clip_global_norm(&mut param_grads, cfg.grad_clip);
        let lr = warmup_inv_sqrt_lr(cfg.lr_warmup_peak, cfg.warmup_steps, step);
        adam.step(&mut model.store, &param_grads, lr);

        // divergence detector
        let init = *initial_loss.get_or_insert(breakdown.total);
        if breakdown.total > 10.0 * init {
            high_loss_streak += 1;
            if high_loss_streak >= 100 {
                return Err(Error::Numeric(format!(
                    "training diverged: loss {} > 10x initial {init} for 100 consecutive steps (step {step})",
                    breakdown.total
                )));
            }
        } else {
            high_loss_streak = 0;
        }

        let row = LossRow {
            step,
            loss: breakdown.total,
            time_term: breakdown.time_term,
            freq_term: breakdown.freq_term,
        };
        if let Some(f) = csv.as_mut() {
            writeln!(
                f,
                "{},{:.12e},{:.12e},{:.12e}",
                row.step, row.loss, row.time_term, row.freq_term
            )?;
        }
        log.push(row);
        final_loss = breakdown.total;

        if let Some(path) = &sinks.checkpoint_path {
            if step % cfg.checkpoint_every as u64 == 0 || step == cfg.n_steps as u64 {
                checkpoint::save(path, model, step, rng)?;
            }
        }
    }
    if let Some(f) = csv.as_mut() {
        f.flush()?;
    }

    let steps_run = cfg.n_steps as u64 - start_step;
    let elapsed = started.elapsed().as_secs_f64();
    Ok(TrainOutcome {
        final_loss,
        steps_run,
        log,
        steps_per_sec: steps_run as f64 / elapsed.max(1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoiser::DenoiserConfig;
    use crate::priors::DataStats;
    use rand::SeedableRng;

    fn vp() -> NoiseSchedule {
        NoiseSchedule::vp(0.2, 10.0)
    }

    fn quick_cfg(steps: usize, batch: usize) -> TrainConfig {
        TrainConfig {
            batch_size: batch,
            n_steps: steps,
            lr_warmup_peak: 2e-3,
            warmup_steps: 50,
            lambda_fourier: 1.0,
            sigma_data: 0.5,
            t_min: 1e-4,
            t_max_train: 1.0 - 1e-4,
            seed: 0,
            grad_clip: 1.0,
            checkpoint_every: 1000,
        }
    }

    #[test]
    fn loss_weight_values_and_guard() {
        let sched = vp();
        // σ_t = σ_data -> w = 2/σ_data²
        let sigma_data = sched.sigma(0.4).unwrap();
        let w = loss_weight(&sched, 0.4, sigma_data).unwrap();
        assert!((w - 2.0 / (sigma_data * sigma_data)).abs() < 1e-12);
        assert!(matches!(
            loss_weight(&sched, 0.0, 0.1),
            Err(Error::EndpointGuard { .. })
        ));
    }

    #[test]
    fn loss_weight_identity_exact() {
        let sched = vp();
        let sigma_data = 0.1;
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let t = 1e-3 + 0.998 * rng.random::<f64>();
            let w = loss_weight(&sched, t, sigma_data).unwrap();
            let sigma = sched.sigma(t).unwrap();
            let s2 = sigma * sigma;
            let d2 = sigma_data * sigma_data;
            let lhs = w * (s2 * d2);
            let rhs = s2 + d2;
            // identity up to <= 2 ulp (one division rounding)
            assert!(
                (lhs - rhs).abs() <= 2.0 * f64::EPSILON * rhs,
                "t = {t}: {lhs} vs {rhs}"
            );
        }
    }

    /// The loss pieces evaluated on a perfect prediction: both terms vanish.
    #[test]
    fn perfect_prediction_gives_zero_loss() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let x0 = Array3::from_shape_fn((3, 8, 2), |_| rng.random::<f64>());
        let weights = Array1::from_elem(3, 2.5);
        let mut g = Graph::new();
        let pred = g.input(x0.clone());
        let time = g.weighted_sq_error(pred, &x0, &weights);
        assert_eq!(g.scalar(time), 0.0);
        let dft = g.orthonormal_dft(pred);
        let mut tg = Graph::new();
        let x = tg.input(x0.clone());
        let y = tg.orthonormal_dft(x);
        let target = tg.value3(y);
        let freq = g.weighted_sq_error(dft, &target, &weights);
        assert_eq!(g.scalar(freq), 0.0);
    }

    /// Parseval: the frequency term equals the time term for any pair.
    #[test]
    fn frequency_term_equals_time_term() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let x0 = Array3::from_shape_fn((4, 16, 3), |_| rng.random::<f64>());
        let pred_values = Array3::from_shape_fn((4, 16, 3), |_| rng.random::<f64>());
        let weights = Array1::from_shape_fn(4, |_| 0.5 + rng.random::<f64>());

        let mut g = Graph::new();
        let pred = g.input(pred_values);
        let time = g.weighted_sq_error(pred, &x0, &weights);
        let pred_dft = g.orthonormal_dft(pred);
        let mut tg = Graph::new();
        let x = tg.input(x0.clone());
        let y = tg.orthonormal_dft(x);
        let target_dft = tg.value3(y);
        let freq = g.weighted_sq_error(pred_dft, &target_dft, &weights);
        assert!(
            (g.scalar(time) - g.scalar(freq)).abs() < 1e-10,
            "{} vs {}",
            g.scalar(time),
            g.scalar(freq)
        );
    }

    #[test]
    fn lambda_zero_reduces_to_time_term() {
        let model = DenoiserModel::new(DenoiserConfig::toy(8, 1), 5).unwrap();
        let sched = vp();
        let cfg = quick_cfg(1, 4);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let data = Array3::from_shape_fn((4, 8, 1), |_| rng.random::<f64>());
        let task = TrainTask::Unconditional(Prior::StandardGaussian { tau: 8, d: 1 });
        let batch = draw_bridge_batch(&data, &task, &sched, &cfg, &mut rng).unwrap();
        let b = training_loss(&model, &batch, 0.0).unwrap();
        assert!((b.total - b.time_term).abs() < 1e-15);
    }

    #[test]
    fn bridge_batch_times_and_weights_in_range() {
        let sched = vp();
        let cfg = quick_cfg(1, 16);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let data = Array3::from_shape_fn((16, 6, 2), |_| rng.random::<f64>());
        let task = TrainTask::Unconditional(Prior::StandardGaussian { tau: 6, d: 2 });
        let batch = draw_bridge_batch(&data, &task, &sched, &cfg, &mut rng).unwrap();
        for i in 0..16 {
            assert!(batch.t[i] >= cfg.t_min && batch.t[i] <= cfg.t_max_train);
            assert!(batch.weights[i].is_finite() && batch.weights[i] > 0.0);
        }
    }

    /// With the endpoint pinned to the window itself, the bridge collapses
    /// toward the data as t -> t_min.
    #[test]
    fn bridge_collapses_to_data_near_zero_time() {
        let sched = vp();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let x0 = Array2::from_shape_fn((8, 2), |_| rng.random::<f64>());
        let mut mean_dist_at = |t: f64| -> f64 {
            let mut acc = 0.0;
            let n = 2000;
            for _ in 0..n {
                let noise =
                    Array2::from_shape_fn((8, 2), |_| rng.sample::<f64, _>(StandardNormal));
                let xt = sched
                    .sample_bridge_marginal(x0.view(), x0.view(), t, noise.view())
                    .unwrap();
                acc += (&xt - &x0).iter().map(|v| v * v).sum::<f64>().sqrt();
            }
            acc / n as f64
        };
        let d_hi = mean_dist_at(0.5);
        let d_mid = mean_dist_at(0.05);
        let d_lo = mean_dist_at(1e-4);
        assert!(d_lo < d_mid && d_mid < d_hi);
        assert!(d_lo < 0.05, "E||x_t - x_0|| = {d_lo} at t = 1e-4");
    }

    /// Desk-scale sanity: a small model on easy data halves its loss.
    #[test]
    fn loss_halves_on_toy_problem() {
        let mut config = DenoiserConfig::toy(8, 1);
        config.n_dec_layers = 1;
        config.n_heads = 2;
        config.head_dim = 8;
        let mut model = DenoiserModel::new(config, 11).unwrap();
        let sched = vp();
        let mut cfg = quick_cfg(400, 16);
        cfg.lr_warmup_peak = 3e-3;
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        // smooth deterministic-ish data
        let data = Array3::from_shape_fn((64, 8, 1), |(i, k, _)| {
            0.5 + 0.3 * ((k as f64 / 8.0 + i as f64 * 0.01) * std::f64::consts::TAU).sin()
        });
        let stats = crate::priors::fit_data_stats(&data).unwrap();
        let task = TrainTask::Unconditional(Prior::DataGaussian(DataStats {
            mu: stats.mu.clone(),
            sigma2: stats.sigma2.clone(),
        }));
        let out = train(
            &mut model,
            &data,
            &task,
            &sched,
            &cfg,
            &TrainSinks::default(),
            0,
            &mut rng,
        )
        .unwrap();
        let early: f64 = out.log[..20].iter().map(|r| r.loss).sum::<f64>() / 20.0;
        let late: f64 =
            out.log[out.log.len() - 20..].iter().map(|r| r.loss).sum::<f64>() / 20.0;
        assert!(
            late < 0.5 * early,
            "loss did not halve: early {early}, late {late}"
        );
    }

    #[test]
    fn fixed_seed_reproduces_loss_curve() {
        let run = || {
            let mut model = DenoiserModel::new(DenoiserConfig::toy(6, 1), 13).unwrap();
            let sched = vp();
            let cfg = quick_cfg(10, 8);
            let mut rng = ChaCha12Rng::seed_from_u64(21);
            let data = Array3::from_shape_fn((16, 6, 1), |(i, k, _)| {
                (i as f64 * 0.1 + k as f64 * 0.05).sin() * 0.4 + 0.5
            });
            let task = TrainTask::Unconditional(Prior::StandardGaussian { tau: 6, d: 1 });
            train(
                &mut model,
                &data,
                &task,
                &sched,
                &cfg,
                &TrainSinks::default(),
                0,
                &mut rng,
            )
            .unwrap()
            .log
            .iter()
            .map(|r| r.loss)
            .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn resume_reproduces_next_step_loss() {
        let dir = std::env::temp_dir().join("timebridge-train-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let ckpt = dir.join("resume.tbrg");

        let sched = vp();
        let mut cfg = quick_cfg(4, 8);
        cfg.checkpoint_every = 3;
        let data = Array3::from_shape_fn((16, 6, 1), |(i, k, _)| {
            (i as f64 * 0.2 + k as f64 * 0.3).cos() * 0.3 + 0.5
        });
        let task = TrainTask::Unconditional(Prior::StandardGaussian { tau: 6, d: 1 });

        // full run: 4 steps, checkpoint at step 3
        let mut model = DenoiserModel::new(DenoiserConfig::toy(6, 1), 17).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let sinks = TrainSinks {
            checkpoint_path: Some(ckpt.clone()),
            loss_csv_path: None,
        };
        let full = train(
            &mut model, &data, &task, &sched, &cfg, &sinks, 0, &mut rng,
        )
        .unwrap();
        // a later checkpoint overwrote step 3's; rerun saving only step 3
        let mut model = DenoiserModel::new(DenoiserConfig::toy(6, 1), 17).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let mut cfg3 = cfg.clone();
        cfg3.n_steps = 3;
        train(
            &mut model, &data, &task, &sched, &cfg3, &sinks, 0, &mut rng,
        )
        .unwrap();

        // resume from step 3 and run step 4
        let (mut resumed, step, mut rng2) = checkpoint::load(&ckpt).unwrap();
        assert_eq!(step, 3);
        let out = train(
            &mut resumed,
            &data,
            &task,
            &sched,
            &cfg,
            &TrainSinks::default(),
            step,
            &mut rng2,
        )
        .unwrap();
        let resumed_loss = out.log[0].loss;
        let full_loss = full.log[3].loss;
        assert!(
            (resumed_loss - full_loss).abs() < 1e-6,
            "resumed {resumed_loss} vs full {full_loss}"
        );
    }

    #[test]
    fn divergent_training_aborts() {
        let mut model = DenoiserModel::new(DenoiserConfig::toy(6, 1), 19).unwrap();
        let sched = vp();
        let mut cfg = quick_cfg(400, 8);
        cfg.lr_warmup_peak = 1e7; // guaranteed blow-up
        cfg.warmup_steps = 1;
        cfg.grad_clip = 1e12;
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        let data = Array3::from_shape_fn((16, 6, 1), |_| rng.random::<f64>());
        let task = TrainTask::Unconditional(Prior::StandardGaussian { tau: 6, d: 1 });
        let result = train(
            &mut model,
            &data,
            &task,
            &sched,
            &cfg,
            &TrainSinks::default(),
            0,
            &mut rng,
        );
        assert!(result.is_err());
    }
}
