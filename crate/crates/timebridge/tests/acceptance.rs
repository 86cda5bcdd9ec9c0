//! Acceptance suite: twelve numbered criteria covering NFE accounting,
//! closed-form bridge statistics, sampler contracts, loss identities, metric
//! sanity, mask statistics, desk-scale training, and prior-quality ordering.
//! Each test prints one `criterion NN PASS/FAIL` line (visible with
//! `--nocapture`) and asserts its stated tolerances.
//!
//! Criterion 04 documents a known impossibility in its zero-churn variance
//! clause: a deterministic sampler launched from a point endpoint draw is a
//! deterministic map of that draw, and the bridge flow's contraction
//! provably collapses the conditional variance (the stochastic-sampling
//! ablation in the literature shows the same collapse at full scale). The
//! clause is asserted anyway — honestly red — with the mean and
//! stochastic-churn clauses all green.

use ndarray::{s, Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use timebridge::data::{self, MaskSpec};
use timebridge::denoiser::{CountingDenoiser, DenoiserConfig, DenoiserModel, GaussianPosteriorDenoiser};
use timebridge::metrics;
use timebridge::nn::Graph;
use timebridge::priors::{self, Prior};
use timebridge::sampler::{self, SamplerConfig};
use timebridge::schedule::NoiseSchedule;
use timebridge::training::{self, TrainConfig, TrainSinks, TrainTask};

fn etth_vp() -> NoiseSchedule {
    NoiseSchedule::vp(0.2, 10.0)
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn oracle(sched: NoiseSchedule, mean: f64, var: f64) -> GaussianPosteriorDenoiser {
    GaussianPosteriorDenoiser {
        sched,
        data_mean: mean,
        data_var: var,
        tau: 1,
        d: 1,
    }
}

/// 1. Γ = 40 hybrid sampling performs exactly 119 denoiser evaluations.
#[test]
fn criterion_01_nfe_accounting() {
    let sched = etth_vp();
    let den = oracle(sched, 0.3, 0.04);
    let counter = CountingDenoiser::new(&den);
    let mut cfg = SamplerConfig::default_for(&sched);
    cfg.n_steps = 40;
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let endpoints = Array3::from_shape_fn((16, 1, 1), |_| rng.sample::<f64, _>(StandardNormal));
    let started = std::time::Instant::now();
    let out = sampler::sample_from_endpoints(&counter, &sched, &endpoints, None, &cfg, &mut rng)
        .unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let pass = out.nfe == 119 && counter.calls.get() == 119 && elapsed < 1.0;
    report(
        "01 nfe-accounting",
        pass,
        &format!("nfe = {} (counter {}), {elapsed:.3} s", out.nfe, counter.calls.get()),
    );
    assert_eq!(out.nfe, 119);
    assert_eq!(counter.calls.get(), 119);
    assert!(elapsed < 1.0, "took {elapsed} s");
}

/// 2. Empirical bridge-marginal moments match the closed form on 20 random
/// triples at 10⁵ draws each.
#[test]
fn criterion_02_bridge_marginal_fidelity() {
    let sched = etth_vp();
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let n = 100_000usize;
    let started = std::time::Instant::now();
    let mut worst_mean_se = 0.0f64;
    let mut worst_var_rel = 0.0f64;
    for _ in 0..20 {
        let x0 = Array1::from_elem(1, rng.random::<f64>() * 2.0 - 1.0);
        let x_end = Array1::from_elem(1, rng.random::<f64>() * 2.0 - 1.0);
        let t = 0.02 + 0.96 * rng.random::<f64>();
        let marginal = sched.bridge_marginal(x0.view(), x_end.view(), t).unwrap();
        let (mu, std) = (marginal.mean[0], marginal.std);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let x = mu + std * z;
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let se = std / (n as f64).sqrt();
        if se > 0.0 {
            worst_mean_se = worst_mean_se.max((mean - mu).abs() / se);
        }
        let var_rel = if std > 0.0 {
            (var - std * std).abs() / (std * std)
        } else {
            var.abs()
        };
        worst_var_rel = worst_var_rel.max(var_rel);
        assert!(
            (mean - mu).abs() <= 3.0 * se.max(1e-12),
            "t = {t}: mean {mean} vs {mu} (3 SE = {})",
            3.0 * se
        );
        assert!(var_rel < 0.02, "t = {t}: var rel err {var_rel}");
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "02 bridge-marginal",
        true,
        &format!(
            "worst |mean err|/SE = {worst_mean_se:.2}, worst var rel err = {worst_var_rel:.4}, {elapsed:.1} s"
        ),
    );
    assert!(elapsed < 30.0, "took {elapsed} s");
}

/// 3. h-function vs central finite differences of the analytic
/// log-transition, VP and VE, relative error < 1e-4.
#[test]
fn criterion_03_h_function_gradient_check() {
    let started = std::time::Instant::now();
    let mut worst = 0.0f64;
    for sched in [etth_vp(), NoiseSchedule::ve(2.0)] {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t = 0.05 + 0.85 * rng.random::<f64>();
            let x: f64 = rng.random::<f64>() * 2.0 - 1.0;
            let y: f64 = rng.random::<f64>() * 2.0 - 1.0;
            // analytic transition moments of the forward SDE
            let ratio = sched.alpha(sched.t_max).unwrap() / sched.alpha(t).unwrap();
            let s_t = sched.sigma(t).unwrap();
            let s_end = sched.sigma(sched.t_max).unwrap();
            let v = s_end * s_end - ratio * ratio * s_t * s_t;
            let log_n = |x_t: f64| {
                let m = ratio * x_t;
                -0.5 * (y - m) * (y - m) / v - 0.5 * (2.0 * std::f64::consts::PI * v).ln()
            };
            let eps = 1e-5;
            let fd = (log_n(x + eps) - log_n(x - eps)) / (2.0 * eps);
            let xa = Array1::from_elem(1, x);
            let ya = Array1::from_elem(1, y);
            let h = sched.h_function(xa.view(), t, ya.view()).unwrap()[0];
            let rel = (h - fd).abs() / fd.abs().max(1e-8);
            worst = worst.max(rel);
            assert!(rel < 1e-4, "kind {:?}, t = {t}: rel err {rel}", sched.kind);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "03 h-function",
        true,
        &format!("worst relative error {worst:.2e}, {elapsed:.2} s"),
    );
    assert!(elapsed < 5.0);
}

/// 4. End-to-end Gaussian oracle transport, exactly as stated: mean within
/// 2% and variance within 5% for both churn settings, and monotone error
/// decay over Γ at zero churn.
///
/// The zero-churn variance clause cannot hold (see the module docs): it is
/// asserted last so the attainable clauses are all verified first, and the
/// printed line records every sub-result.
#[test]
fn criterion_04_gaussian_oracle_end_to_end() {
    let sched = etth_vp();
    let (mu_d, v_d) = (0.3, 0.04);
    let den = oracle(sched, mu_d, v_d);
    let n = 100_000usize;
    let started = std::time::Instant::now();

    let run = |churn: f64, steps: usize, seed: u64| -> (f64, f64) {
        let mut cfg = SamplerConfig::default_for(&sched);
        cfg.churn = churn;
        cfg.n_steps = steps;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let endpoints = Array3::from_shape_fn((n, 1, 1), |_| rng.sample::<f64, _>(StandardNormal));
        let out =
            sampler::sample_from_endpoints(&den, &sched, &endpoints, None, &cfg, &mut rng).unwrap();
        let mean = out.values.iter().sum::<f64>() / n as f64;
        let var = out.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        (mean, var)
    };

    let (mean_s, var_s) = run(0.33, 40, 4);
    let (mean_0, var_0) = run(0.0, 40, 4);

    // monotone combined error over Γ at s = 0 (shared endpoint draws)
    let mut combined = Vec::new();
    for steps in [5usize, 10, 20, 40] {
        let (m, v) = run(0.0, steps, 7);
        combined.push((m - mu_d).abs() / mu_d + (v - v_d).abs() / v_d);
    }
    let monotone = combined.windows(2).all(|w| w[1] < w[0]);

    let mean_ok_s = (mean_s - mu_d).abs() <= 0.02 * mu_d;
    let var_ok_s = (var_s - v_d).abs() / v_d <= 0.05;
    let mean_ok_0 = (mean_0 - mu_d).abs() <= 0.02 * mu_d;
    let var_ok_0 = (var_0 - v_d).abs() / v_d <= 0.05;
    let elapsed = started.elapsed().as_secs_f64();

    let pass = mean_ok_s && var_ok_s && mean_ok_0 && var_ok_0 && monotone && elapsed < 120.0;
    report(
        "04 gaussian-oracle",
        pass,
        &format!(
            "s=0.33: mean {mean_s:.4} var {var_s:.5} | s=0: mean {mean_0:.4} var {var_0:.2e} \
             | combined error over Γ {combined:?} | {elapsed:.1} s \
             (zero-churn variance transport from point endpoints is provably impossible; \
             see module docs)"
        ),
    );
    assert!(mean_ok_s, "s=0.33 mean {mean_s}");
    assert!(var_ok_s, "s=0.33 var {var_s}");
    assert!(mean_ok_0, "s=0 mean {mean_0}");
    assert!(elapsed < 120.0, "took {elapsed} s");
    // the two clauses below are the documented-impossible ones
    assert!(
        var_ok_0,
        "s=0 var {var_0:.2e} vs required within 5% of {v_d}: deterministic transport \
         from point endpoints collapses the conditional variance (documented limitation)"
    );
    assert!(monotone, "combined error not monotone: {combined:?}");
}

/// 5. Point preservation: unmasked cells bit-identical to their spline
/// endpoints over 1000 random imputation problems.
#[test]
fn criterion_05_point_preservation() {
    let sched = etth_vp();
    let (tau, d) = (8usize, 2usize);
    let den = GaussianPosteriorDenoiser {
        sched,
        data_mean: 0.5,
        data_var: 0.03,
        tau,
        d,
    };
    let cfg = SamplerConfig::default_for(&sched);
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let n = 1000usize;
    let started = std::time::Instant::now();

    let mut endpoints = Array3::zeros((n, tau, d));
    let mut gen_mask = Array3::zeros((n, tau, d));
    for i in 0..n {
        let window = Array2::from_shape_fn((tau, d), |_| rng.random::<f64>());
        let missing = data::make_mask((tau, d), &MaskSpec::random(0.5), &mut rng).unwrap();
        let observed = missing.mapv(|m| 1.0 - m);
        let spline = priors::spline_interpolate(&window, &observed).unwrap();
        endpoints.slice_mut(s![i, .., ..]).assign(&spline.values);
        gen_mask.slice_mut(s![i, .., ..]).assign(&missing);
    }
    let out =
        sampler::sample_point_preserving(&den, &sched, &endpoints, &gen_mask, &cfg, &mut rng)
            .unwrap();
    let mut preserved = 0usize;
    for ((idx, &m), (&got, &want)) in gen_mask
        .indexed_iter()
        .zip(out.values.iter().zip(endpoints.iter()))
    {
        if m == 0.0 {
            assert_eq!(
                got.to_bits(),
                want.to_bits(),
                "preserved cell {idx:?} changed"
            );
            preserved += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "05 point-preservation",
        true,
        &format!("{preserved} preserved cells bit-identical across {n} problems, {elapsed:.1} s"),
    );
    assert!(elapsed < 60.0);
}

/// 6. Spline prior matches a brute-force per-segment oracle within 1e-12,
/// both boundary rules included.
#[test]
fn criterion_06_spline_prior_correctness() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let started = std::time::Instant::now();
    for case in 0..100 {
        let tau = 4 + rng.random_range(0..12usize);
        let d = 1 + rng.random_range(0..3usize);
        let values = Array2::from_shape_fn((tau, d), |_| rng.random::<f64>() * 4.0 - 2.0);
        let observed = Array2::from_shape_fn((tau, d), |_| {
            if rng.random::<f64>() < 0.5 {
                1.0
            } else {
                0.0
            }
        });
        let got = priors::spline_interpolate(&values, &observed).unwrap().values;
        // brute-force oracle: nearest observed neighbors by direct scan
        for j in 0..d {
            for k in 0..tau {
                let prev = (0..=k).rev().find(|&p| observed[[p, j]] != 0.0);
                let next = (k..tau).find(|&q| observed[[q, j]] != 0.0);
                let expect = match (prev, next) {
                    (Some(p), _) if p == k => values[[k, j]],
                    (Some(p), Some(q)) => {
                        values[[p, j]]
                            + (values[[q, j]] - values[[p, j]]) / (q - p) as f64
                                * (k - p) as f64
                    }
                    // before the first observation: constant at it
                    (None, Some(q)) => values[[q, j]],
                    // after the last observation: constant at it
                    (Some(p), None) => values[[p, j]],
                    (None, None) => 0.0,
                };
                assert!(
                    (got[[k, j]] - expect).abs() < 1e-12,
                    "case {case}, cell ({k},{j}): {} vs {expect}",
                    got[[k, j]]
                );
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    report("06 spline-prior", true, &format!("100 random configurations, {elapsed:.2} s"));
    assert!(elapsed < 5.0);
}

/// 7. Seasonal head reconstructs pure sinusoids exactly for K = 1 and any
/// signal at full spectrum, τ ∈ {24, 64}.
#[test]
fn criterion_07_seasonal_head_exactness() {
    let started = std::time::Instant::now();
    let mut worst = 0.0f64;
    for tau in [24usize, 64] {
        // K = 1: single integer-bin sinusoid
        for bin in [1usize, 3, tau / 4] {
            let x0 = Array3::from_shape_fn((1, tau, 1), |(_, n, _)| {
                1.3 * (2.0 * std::f64::consts::PI * bin as f64 * n as f64 / tau as f64 + 0.4).cos()
            });
            let mut g = Graph::new();
            let x = g.input(x0.clone());
            let y = g.seasonal_topk(x, 1);
            let yv = g.value3(y);
            let err = yv
                .iter()
                .zip(x0.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            worst = worst.max(err);
            assert!(err < 1e-5, "tau {tau} bin {bin}: max err {err}");
        }
        // full spectrum: arbitrary signal round-trips
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let x0 = Array3::from_shape_fn((2, tau, 2), |_| rng.sample::<f64, _>(StandardNormal));
        let mut g = Graph::new();
        let x = g.input(x0.clone());
        let y = g.seasonal_topk(x, tau / 2 + 1);
        let yv = g.value3(y);
        let err = yv
            .iter()
            .zip(x0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(err);
        assert!(err < 1e-5, "tau {tau} full spectrum: max err {err}");
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "07 seasonal-head",
        true,
        &format!("worst reconstruction error {worst:.2e}, {elapsed:.2} s"),
    );
    assert!(elapsed < 5.0);
}

/// 8. Loss identities: Parseval equality within 1e-10 and the weight
/// identity on 1000 random times (exact up to one division rounding).
#[test]
fn criterion_08_loss_identities() {
    let started = std::time::Instant::now();
    // Parseval
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let x0 = Array3::from_shape_fn((4, 24, 2), |_| rng.random::<f64>());
    let pred = Array3::from_shape_fn((4, 24, 2), |_| rng.random::<f64>());
    let weights = Array1::from_shape_fn(4, |_| 0.5 + rng.random::<f64>());
    let mut g = Graph::new();
    let p = g.input(pred);
    let time_term = g.weighted_sq_error(p, &x0, &weights);
    let p_dft = g.orthonormal_dft(p);
    let target_dft = {
        let mut tg = Graph::new();
        let x = tg.input(x0.clone());
        let y = tg.orthonormal_dft(x);
        tg.value3(y)
    };
    let freq_term = g.weighted_sq_error(p_dft, &target_dft, &weights);
    let parseval_gap = (g.scalar(time_term) - g.scalar(freq_term)).abs();
    assert!(parseval_gap < 1e-10, "Parseval gap {parseval_gap}");

    // weight identity
    let sched = etth_vp();
    let sigma_data = 0.1;
    let mut worst_ulp = 0.0f64;
    for _ in 0..1000 {
        let t = 1e-3 + 0.998 * rng.random::<f64>();
        let w = training::loss_weight(&sched, t, sigma_data).unwrap();
        let sigma = sched.sigma(t).unwrap();
        let (s2, d2) = (sigma * sigma, sigma_data * sigma_data);
        let lhs = w * (s2 * d2);
        let rhs = s2 + d2;
        let ulp = (lhs - rhs).abs() / (f64::EPSILON * rhs);
        worst_ulp = worst_ulp.max(ulp);
        assert!(ulp <= 2.0, "t = {t}: identity off by {ulp} ulp");
    }
    let elapsed = started.elapsed().as_secs_f64();
    report(
        "08 loss-identities",
        true,
        &format!("Parseval gap {parseval_gap:.2e}, worst weight-identity deviation {worst_ulp:.2} ulp, {elapsed:.2} s"),
    );
    assert!(elapsed < 5.0);
}

/// 9. Metric sanity: exact zeros, indistinguishability, oracle equality, and
/// the commuting-covariance closed form.
#[test]
fn criterion_09_metric_sanity() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(9);

    // correlational identity
    let x = data::toy_sines(64, 16, 3, &mut rng).values;
    let corr = metrics::correlational_score(&x, &x).unwrap();
    assert_eq!(corr, 0.0);

    // discriminative(real, real) with >= 1000 windows per side
    let real = data::toy_sines(1000, 24, 2, &mut rng).values;
    let resampled = data::toy_sines(1000, 24, 2, &mut rng).values;
    let cfg = metrics::MetricNetConfig::default();
    let disc = metrics::discriminative_score(&real, &resampled, &cfg).unwrap();
    assert!(disc < 0.05, "discriminative(real, real) = {disc}");

    // imputation error vs naive oracle
    let truth = Array3::from_shape_fn((3, 6, 2), |_| rng.random::<f64>());
    let imputed = Array3::from_shape_fn((3, 6, 2), |_| rng.random::<f64>());
    let mask = Array3::from_shape_fn((3, 6, 2), |_| {
        if rng.random::<f64>() < 0.5 {
            1.0
        } else {
            0.0
        }
    });
    let (mse, mae) = metrics::imputation_error(&truth, &imputed, &mask).unwrap();
    let (mut se, mut ae, mut c) = (0.0, 0.0, 0usize);
    for ((&t, &i), &m) in truth.iter().zip(imputed.iter()).zip(mask.iter()) {
        if m == 1.0 {
            se += (i - t) * (i - t);
            ae += (i - t).abs();
            c += 1;
        }
    }
    assert!((mse - se / c as f64).abs() < 1e-12);
    assert!((mae - ae / c as f64).abs() < 1e-12);

    // Wasserstein of identical sets
    let w = metrics::prior_data_wasserstein(&x, &x).unwrap();
    assert!(w < 1e-12, "wasserstein(x, x) = {w}");

    // Fréchet closed form
    let k = 6;
    let mu = Array1::zeros(k);
    let eye = Array2::eye(k);
    let four = &eye * 4.0;
    let f = metrics::frechet_gaussians(&mu, &eye, &mu, &four).unwrap();
    assert!((f - k as f64).abs() < 1e-6, "frechet = {f}");

    let elapsed = started.elapsed().as_secs_f64();
    report(
        "09 metric-sanity",
        true,
        &format!(
            "correlational 0 exactly, discriminative {disc:.4}, imputation oracle equal, \
             wasserstein 0, frechet closed form {f:.6}, {elapsed:.0} s"
        ),
    );
    assert!(elapsed < 180.0, "took {elapsed} s");
}

/// 10. Mask-generator statistics at 10⁵ cells.
#[test]
fn criterion_10_mask_statistics() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    let random = data::make_mask((100_000, 1), &MaskSpec::random(0.5), &mut rng).unwrap();
    let frac_random = data::mask_fraction(&random);
    assert!((frac_random - 0.5).abs() <= 0.01, "random ratio {frac_random}");

    let geometric = data::make_mask((100_000, 1), &MaskSpec::geometric(0.25, 3.0), &mut rng).unwrap();
    let frac_geo = data::mask_fraction(&geometric);
    let run_len = data::mean_masked_run_length(&geometric);
    assert!((frac_geo - 0.25).abs() <= 0.02, "geometric ratio {frac_geo}");
    assert!((run_len - 3.0).abs() <= 0.2, "mean run length {run_len}");

    let elapsed = started.elapsed().as_secs_f64();
    report(
        "10 mask-statistics",
        true,
        &format!(
            "random ratio {frac_random:.4}, geometric ratio {frac_geo:.4}, run length {run_len:.2}, {elapsed:.1} s"
        ),
    );
    assert!(elapsed < 10.0);
}

/// 11. Desk-scale training on toy sines: post-training correlational < 0.1
/// and discriminative < 0.2, both strictly better than the untrained model,
/// inside 15 minutes.
#[test]
fn criterion_11_desk_scale_training() {
    let started = std::time::Instant::now();
    let sched = etth_vp();
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let (tau, d) = (24usize, 2usize);
    let real = data::toy_sines(1000, tau, d, &mut rng).values;
    let stats = priors::fit_data_stats(&real).unwrap();
    let prior = Prior::DataGaussian(priors::DataStats {
        mu: stats.mu.clone(),
        sigma2: stats.sigma2.clone(),
    });

    let config = DenoiserConfig::toy(tau, d);
    let train_cfg = TrainConfig {
        batch_size: 64,
        n_steps: 2000,
        lr_warmup_peak: 2e-3,
        warmup_steps: 200,
        lambda_fourier: 1.0,
        sigma_data: 0.5,
        t_min: 1e-4,
        t_max_train: 1.0 - 1e-4,
        seed: 11,
        grad_clip: 1.0,
        checkpoint_every: 10_000,
    };
    let task = TrainTask::Unconditional(prior.clone());

    let sample_with = |model: &DenoiserModel, seed: u64| -> Array3<f64> {
        let cfg = SamplerConfig::default_for(&sched);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        sampler::sample_unconditional(model, &sched, &prior, 1000, &cfg, &mut rng)
            .unwrap()
            .values
    };

    let metric_cfg = metrics::MetricNetConfig::default();
    let untrained = DenoiserModel::new(config, 11).unwrap();
    let untrained_synth = sample_with(&untrained, 100);
    let untrained_corr = metrics::correlational_score(&real, &untrained_synth).unwrap();
    let untrained_disc = metrics::discriminative_score(&real, &untrained_synth, &metric_cfg).unwrap();

    let mut model = DenoiserModel::new(config, 11).unwrap();
    let mut train_rng = ChaCha12Rng::seed_from_u64(train_cfg.seed);
    let outcome = training::train(
        &mut model,
        &real,
        &task,
        &sched,
        &train_cfg,
        &TrainSinks::default(),
        0,
        &mut train_rng,
    )
    .unwrap();
    let synth = sample_with(&model, 100);
    let corr = metrics::correlational_score(&real, &synth).unwrap();
    let disc = metrics::discriminative_score(&real, &synth, &metric_cfg).unwrap();

    let elapsed = started.elapsed().as_secs_f64();
    let pass = corr < 0.1
        && disc < 0.2
        && corr < untrained_corr
        && disc < untrained_disc
        && elapsed < 900.0;
    report(
        "11 desk-scale-training",
        pass,
        &format!(
            "final loss {:.4}; correlational {corr:.4} (untrained {untrained_corr:.4}), \
             discriminative {disc:.4} (untrained {untrained_disc:.4}), {elapsed:.0} s",
            outcome.final_loss
        ),
    );
    assert!(corr < 0.1, "correlational {corr}");
    assert!(disc < 0.2, "discriminative {disc}");
    assert!(corr < untrained_corr, "correlational {corr} vs untrained {untrained_corr}");
    assert!(disc < untrained_disc, "discriminative {disc} vs untrained {untrained_disc}");
    assert!(elapsed < 900.0, "took {elapsed} s");
}

/// 12. Prior-quality ordering by Wasserstein distance: data-driven priors
/// sit closer to the data than the standard Gaussian.
#[test]
fn criterion_12_wasserstein_direction() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    let (tau, d, n) = (24usize, 2usize, 256usize);
    let real = data::toy_sines(n, tau, d, &mut rng).values;
    let stats = priors::fit_data_stats(&real).unwrap();

    let data_prior = Prior::DataGaussian(priors::DataStats {
        mu: stats.mu.clone(),
        sigma2: stats.sigma2.clone(),
    });
    let standard = Prior::StandardGaussian { tau, d };
    let data_draws = priors::draw_batch(&data_prior, n, &mut rng);
    let standard_draws = priors::draw_batch(&standard, n, &mut rng);

    // spline endpoints built from the data itself under random masks
    let mut spline_draws = Array3::zeros((n, tau, d));
    for i in 0..n {
        let window = real.slice(s![i, .., ..]).to_owned();
        let missing = data::make_mask((tau, d), &MaskSpec::random(0.5), &mut rng).unwrap();
        let observed = missing.mapv(|m| 1.0 - m);
        let spline = priors::spline_interpolate(&window, &observed).unwrap();
        spline_draws.slice_mut(s![i, .., ..]).assign(&spline.values);
    }

    let w_data = metrics::prior_data_wasserstein(&data_draws, &real).unwrap();
    let w_standard = metrics::prior_data_wasserstein(&standard_draws, &real).unwrap();
    let w_spline = metrics::prior_data_wasserstein(&spline_draws, &real).unwrap();

    let elapsed = started.elapsed().as_secs_f64();
    let pass = w_data < w_standard && w_spline < w_standard && elapsed < 30.0;
    report(
        "12 wasserstein-direction",
        pass,
        &format!(
            "W(data prior, data) = {w_data:.3} < W(standard, data) = {w_standard:.3}; \
             W(spline, data) = {w_spline:.3} < {w_standard:.3}; {elapsed:.1} s"
        ),
    );
    assert!(w_data < w_standard, "{w_data} vs {w_standard}");
    assert!(w_spline < w_standard, "{w_spline} vs {w_standard}");
    assert!(elapsed < 30.0);
}
