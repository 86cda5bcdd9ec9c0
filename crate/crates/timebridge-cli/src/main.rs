//! `timebridge` — diffusion-bridge time-series generation from the command
//! line.
//!
//! Subcommands: `prepare`, `train`, `sample`, `trend-sample`, `impute`,
//! `eval`. Every command takes an optional `--config` file (flat
//! `key = value` text) plus `--set key=value` overrides, writes only inside
//! its `--out-dir`, and echoes the effective configuration into a JSON
//! manifest next to its outputs.
//!
//! Exit codes: 0 success, 2 usage/config, 3 data error, 4 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ndarray::{s, Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use timebridge::checkpoint;
use timebridge::config::{KvConfig, PriorKind, RunConfig};
use timebridge::data;
use timebridge::denoiser::{CondMode, Denoiser, DenoiserModel};
use timebridge::error::Error;
use timebridge::metrics;
use timebridge::priors;
use timebridge::sampler;
use timebridge::training;

#[derive(Parser)]
#[command(name = "timebridge", version, about = "Diffusion-bridge time-series generation")]
struct Cli {
    /// Worker-thread cap (falls back to TIMEBRIDGE_THREADS; computation is
    /// single-threaded and deterministic in this build, so this only caps).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override single keys, e.g. --set train.seed=7 (beats the file).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<KvConfig, Error> {
        let mut kv = match &self.config {
            Some(path) => KvConfig::from_file(path)?,
            None => KvConfig::new(),
        };
        kv.apply_overrides(&self.sets)?;
        Ok(kv)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a CSV, split, window, normalize, and cache prepared batches.
    Prepare {
        /// Input CSV (header row, one numeric row per timestamp).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Train the denoiser on a prepared dataset.
    Train {
        /// Directory produced by `prepare`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Training task: uncond | trend | impute.
        #[arg(long, default_value = "uncond")]
        task: String,
        /// Resume from an existing checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Convenience alias for --set train.seed=N.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Unconditional generation from a trained checkpoint.
    Sample {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Prepared-data directory (prior statistics and normalization).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Number of windows to generate.
        #[arg(long, default_value_t = 256)]
        n: usize,
        /// Write normalized values back to the raw data scale.
        #[arg(long)]
        denormalize: bool,
        /// Emit one SVG line plot per generated window (up to 8).
        #[arg(long)]
        plot: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Trend-conditioned generation: endpoints are trends extracted from the
    /// held-out windows.
    TrendSample {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long)]
        denormalize: bool,
        #[arg(long)]
        plot: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Point-preserving imputation over held-out windows.
    Impute {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Windows to impute (taken from the start of the eval split).
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Optional mask file (CSV of 0/1, τ rows × d columns) applied to
        /// every window; otherwise masks come from the mask.* config.
        #[arg(long)]
        mask_file: Option<PathBuf>,
        #[arg(long)]
        denormalize: bool,
        #[arg(long)]
        plot: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compute the evaluation metrics between two batches.
    Eval {
        /// Real windows (TBDAT1 file).
        #[arg(long)]
        real: PathBuf,
        /// Synthetic windows (TBDAT1 file).
        #[arg(long)]
        synth: PathBuf,
        /// Report path (JSON).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("TIMEBRIDGE_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1);
    if threads == 0 {
        eprintln!("error: --threads must be >= 1");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Prepare {
            input,
            out_dir,
            config,
        } => cmd_prepare(&input, &out_dir, &config),
        Command::Train {
            data,
            out_dir,
            task,
            resume,
            seed,
            config,
        } => cmd_train(&data, &out_dir, &task, resume.as_deref(), seed, &config),
        Command::Sample {
            checkpoint,
            data,
            out_dir,
            n,
            denormalize,
            plot,
            seed,
            config,
        } => cmd_sample(&checkpoint, &data, &out_dir, n, denormalize, plot, seed, &config),
        Command::TrendSample {
            checkpoint,
            data,
            out_dir,
            n,
            denormalize,
            plot,
            seed,
            config,
        } => cmd_trend_sample(&checkpoint, &data, &out_dir, n, denormalize, plot, seed, &config),
        Command::Impute {
            checkpoint,
            data,
            out_dir,
            n,
            mask_file,
            denormalize,
            plot,
            seed,
            config,
        } => cmd_impute(
            &checkpoint,
            &data,
            &out_dir,
            n,
            mask_file.as_deref(),
            denormalize,
            plot,
            seed,
            &config,
        ),
        Command::Eval {
            real,
            synth,
            out,
            seed,
            config,
        } => cmd_eval(&real, &synth, &out, seed, &config),
    }
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct Manifest<'a> {
    command: &'a str,
    n: usize,
    tau: usize,
    d: usize,
    prior: &'a str,
    gamma: usize,
    churn: f64,
    seed: u64,
    nfe: usize,
    ms_per_sample: f64,
    config: &'a std::collections::BTreeMap<String, String>,
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("serialize {}: {e}", path.display())))?;
    std::fs::write(path, text)?;
    Ok(())
}

fn write_batch_csv(path: &Path, batch: &Array3<f64>) -> Result<(), Error> {
    use std::io::Write;
    let (n, tau, d) = batch.dim();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "sample_id,timestamp")?;
    for j in 0..d {
        write!(f, ",feature_{j}")?;
    }
    writeln!(f)?;
    for i in 0..n {
        for k in 0..tau {
            write!(f, "{i},{k}")?;
            for j in 0..d {
                write!(f, ",{:.17e}", batch[[i, k, j]])?;
            }
            writeln!(f)?;
        }
    }
    Ok(())
}

/// Minimal line plot: one polyline per feature over the window.
fn write_window_svg(path: &Path, window: &ndarray::ArrayView2<f64>) -> Result<(), Error> {
    let (tau, d) = window.dim();
    let (width, height, pad) = (480.0, 240.0, 10.0);
    let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-9);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for j in 0..d {
        let mut points = String::new();
        for k in 0..tau {
            let x = pad + (width - 2.0 * pad) * k as f64 / (tau.max(2) - 1) as f64;
            let y = height - pad - (height - 2.0 * pad) * (window[[k, j]] - lo) / span;
            points.push_str(&format!("{x:.2},{y:.2} "));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            palette[j % palette.len()],
            points.trim_end()
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}

fn write_plots(out_dir: &Path, batch: &Array3<f64>) -> Result<(), Error> {
    let dir = out_dir.join("plots");
    std::fs::create_dir_all(&dir)?;
    for i in 0..batch.shape()[0].min(8) {
        let window = batch.slice(s![i, .., ..]);
        write_window_svg(&dir.join(format!("sample_{i:03}.svg")), &window)?;
    }
    Ok(())
}

/// Prepared-dataset files inside a directory.
struct Prepared {
    train: Array3<f64>,
    eval: Array3<f64>,
    norm: data::NormStats,
    stats: priors::DataStats,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct StatsFile {
    mu: Vec<Vec<f64>>,
    sigma2: Vec<Vec<f64>>,
}

fn load_prepared(dir: &Path) -> Result<Prepared, Error> {
    let train = data::read_batch(&dir.join("train.tbdat"))?;
    let eval = data::read_batch(&dir.join("eval.tbdat"))?;
    let norm: data::NormStats =
        serde_json::from_str(&std::fs::read_to_string(dir.join("norm.json"))?)
            .map_err(|e| Error::Data(format!("norm.json: {e}")))?;
    let stats: StatsFile =
        serde_json::from_str(&std::fs::read_to_string(dir.join("stats.json"))?)
            .map_err(|e| Error::Data(format!("stats.json: {e}")))?;
    let tau = stats.mu.len();
    let d = stats.mu.first().map(|r| r.len()).unwrap_or(0);
    let mut mu = Array2::zeros((tau, d));
    let mut sigma2 = Array2::zeros((tau, d));
    for k in 0..tau {
        for j in 0..d {
            mu[[k, j]] = stats.mu[k][j];
            sigma2[[k, j]] = stats.sigma2[k][j];
        }
    }
    Ok(Prepared {
        train,
        eval,
        norm,
        stats: priors::DataStats { mu, sigma2 },
    })
}

fn build_prior(rc: &RunConfig, prepared: &Prepared) -> Result<priors::Prior, Error> {
    let (tau, d) = prepared.stats.mu.dim();
    Ok(match rc.prior_kind {
        PriorKind::Standard => priors::Prior::StandardGaussian { tau, d },
        PriorKind::Data => priors::Prior::DataGaussian(priors::DataStats {
            mu: prepared.stats.mu.clone(),
            sigma2: prepared.stats.sigma2.clone(),
        }),
        PriorKind::Gp => priors::Prior::GaussianProcess(priors::build_gp_prior(
            &prepared.stats,
            rc.eta,
            rc.length_scale,
        )?),
        PriorKind::Trend | PriorKind::Spline => {
            return Err(Error::Config(
                "trend/spline priors are paired per window; use the trend-sample or impute commands"
                    .into(),
            ))
        }
    })
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn cmd_prepare(input: &Path, out_dir: &Path, config: &ConfigArgs) -> Result<(), Error> {
    let kv = config.load()?;
    let rc = RunConfig::from_kv(&kv)?;
    std::fs::create_dir_all(out_dir)?;

    let series = data::load_csv(input, rc.data.skip_first_column)?;
    let (train_series, eval_series) = data::chronological_split(&series, rc.data.train_fraction);
    let train_raw = data::window(&train_series, rc.data.window_len, rc.data.stride)?;
    let eval_raw = match data::window(&eval_series, rc.data.window_len, rc.data.stride) {
        Ok(w) => w,
        // short tail: fall back to the last training-range windows
        Err(_) => train_raw
            .slice(s![train_raw.shape()[0].saturating_sub(8).., .., ..])
            .to_owned(),
    };
    let norm = data::fit_norm_stats(&train_raw)?;
    let train = data::normalize(&train_raw, &norm)?;
    let eval = data::normalize(&eval_raw, &norm)?;
    let stats = priors::fit_data_stats(&train)?;

    data::write_batch(&out_dir.join("train.tbdat"), &train)?;
    data::write_batch(&out_dir.join("eval.tbdat"), &eval)?;
    write_json(&out_dir.join("norm.json"), &norm)?;
    let (tau, d) = stats.mu.dim();
    let stats_file = StatsFile {
        mu: (0..tau)
            .map(|k| (0..d).map(|j| stats.mu[[k, j]]).collect())
            .collect(),
        sigma2: (0..tau)
            .map(|k| (0..d).map(|j| stats.sigma2[[k, j]]).collect())
            .collect(),
    };
    write_json(&out_dir.join("stats.json"), &stats_file)?;

    #[derive(serde::Serialize)]
    struct PrepareManifest<'a> {
        command: &'a str,
        input: String,
        n_train: usize,
        n_eval: usize,
        tau: usize,
        d: usize,
        config: &'a std::collections::BTreeMap<String, String>,
    }
    write_json(
        &out_dir.join("manifest.json"),
        &PrepareManifest {
            command: "prepare",
            input: input.display().to_string(),
            n_train: train.shape()[0],
            n_eval: eval.shape()[0],
            tau,
            d,
            config: kv.as_map(),
        },
    )?;
    println!(
        "prepared {} train / {} eval windows of shape ({tau}, {d}) into {}",
        train.shape()[0],
        eval.shape()[0],
        out_dir.display()
    );
    Ok(())
}

fn cmd_train(
    data_dir: &Path,
    out_dir: &Path,
    task_name: &str,
    resume: Option<&Path>,
    seed: Option<u64>,
    config: &ConfigArgs,
) -> Result<(), Error> {
    let mut kv = config.load()?;
    if let Some(seed) = seed {
        kv.apply_overrides(&[format!("train.seed={seed}")])?;
    }
    let rc = RunConfig::from_kv(&kv)?;
    std::fs::create_dir_all(out_dir)?;
    let prepared = load_prepared(data_dir)?;
    let (_, tau, d) = prepared.train.dim();

    let (task, cond_mode) = match task_name {
        "uncond" => (
            training::TrainTask::Unconditional(build_prior(&rc, &prepared)?),
            CondMode::None,
        ),
        "trend" => (
            training::TrainTask::Trend {
                kind: rc.trend_kind,
                cutoff: rc.trend_cutoff,
            },
            CondMode::Endpoint,
        ),
        "impute" => (
            training::TrainTask::Imputation { mask: rc.mask },
            CondMode::None,
        ),
        other => {
            return Err(Error::Config(format!(
                "task must be uncond|trend|impute, got {other:?}"
            )))
        }
    };

    let (mut model, start_step, mut rng) = match resume {
        Some(path) => checkpoint::load(path)?,
        None => (
            DenoiserModel::new(rc.denoiser_config(tau, d, cond_mode), rc.train.seed)?,
            0,
            ChaCha12Rng::seed_from_u64(rc.train.seed),
        ),
    };

    let sinks = training::TrainSinks {
        checkpoint_path: Some(out_dir.join("checkpoint.tbrg")),
        loss_csv_path: Some(out_dir.join("loss.csv")),
    };
    let outcome = training::train(
        &mut model,
        &prepared.train,
        &task,
        &rc.schedule,
        &rc.train,
        &sinks,
        start_step,
        &mut rng,
    )?;
    write_json(
        &out_dir.join("manifest.json"),
        &serde_json::json!({
            "command": "train",
            "task": task_name,
            "steps": outcome.steps_run,
            "final_loss": outcome.final_loss,
            "steps_per_sec": outcome.steps_per_sec,
            "tau": tau,
            "d": d,
            "config": kv.as_map(),
        }),
    )?;
    println!(
        "trained {} steps, final loss {:.6}, {:.2} steps/s",
        outcome.steps_run, outcome.final_loss, outcome.steps_per_sec
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    checkpoint_path: &Path,
    data_dir: &Path,
    out_dir: &Path,
    n: usize,
    denormalize: bool,
    plot: bool,
    seed: Option<u64>,
    config: &ConfigArgs,
) -> Result<(), Error> {
    let kv = config.load()?;
    let rc = RunConfig::from_kv(&kv)?;
    std::fs::create_dir_all(out_dir)?;
    let prepared = load_prepared(data_dir)?;
    let (model, _, _) = checkpoint::load(checkpoint_path)?;
    check_shape(&model, &prepared)?;
    let prior = build_prior(&rc, &prepared)?;
    let seed = seed.unwrap_or(rc.train.seed);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let result = sampler::sample_unconditional(&model, &rc.schedule, &prior, n, &rc.sampler, &mut rng)?;
    let output = if denormalize {
        data::denormalize(&result.values, &prepared.norm)?
    } else {
        result.values.clone()
    };
    write_batch_csv(&out_dir.join("samples.csv"), &output)?;
    data::write_batch(&out_dir.join("samples.tbdat"), &output)?;
    if plot {
        write_plots(out_dir, &output)?;
    }
    let (tau, d) = model.window_shape();
    write_json(
        &out_dir.join("manifest.json"),
        &Manifest {
            command: "sample",
            n,
            tau,
            d,
            prior: prior.label(),
            gamma: rc.sampler.n_steps,
            churn: rc.sampler.churn,
            seed,
            nfe: result.nfe,
            ms_per_sample: result.ms_per_sample,
            config: kv.as_map(),
        },
    )?;
    println!(
        "sampled {n} windows (NFE {}, {:.3} ms/sample) into {}",
        result.nfe,
        result.ms_per_sample,
        out_dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_trend_sample(
    checkpoint_path: &Path,
    data_dir: &Path,
    out_dir: &Path,
    n: usize,
    denormalize: bool,
    plot: bool,
    seed: Option<u64>,
    config: &ConfigArgs,
) -> Result<(), Error> {
    let kv = config.load()?;
    let rc = RunConfig::from_kv(&kv)?;
    std::fs::create_dir_all(out_dir)?;
    let prepared = load_prepared(data_dir)?;
    let (model, _, _) = checkpoint::load(checkpoint_path)?;
    check_shape(&model, &prepared)?;
    let (tau, d) = model.window_shape();
    let seed = seed.unwrap_or(rc.train.seed);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // endpoints: trends extracted from held-out windows (cycled if needed)
    let source = if prepared.eval.shape()[0] > 0 {
        &prepared.eval
    } else {
        &prepared.train
    };
    let mut endpoints = Array3::zeros((n, tau, d));
    for i in 0..n {
        let window = source
            .slice(s![i % source.shape()[0], .., ..])
            .to_owned();
        let trend = priors::extract_trend(&window, rc.trend_kind, rc.trend_cutoff)?;
        endpoints.slice_mut(s![i, .., ..]).assign(&trend);
    }

    let result =
        sampler::sample_from_endpoints(&model, &rc.schedule, &endpoints, None, &rc.sampler, &mut rng)?;
    let output = if denormalize {
        data::denormalize(&result.values, &prepared.norm)?
    } else {
        result.values.clone()
    };
    write_batch_csv(&out_dir.join("samples.csv"), &output)?;
    data::write_batch(&out_dir.join("samples.tbdat"), &output)?;
    write_batch_csv(&out_dir.join("trends.csv"), &endpoints)?;
    if plot {
        write_plots(out_dir, &output)?;
    }
    write_json(
        &out_dir.join("manifest.json"),
        &Manifest {
            command: "trend-sample",
            n,
            tau,
            d,
            prior: "trend",
            gamma: rc.sampler.n_steps,
            churn: rc.sampler.churn,
            seed,
            nfe: result.nfe,
            ms_per_sample: result.ms_per_sample,
            config: kv.as_map(),
        },
    )?;
    println!(
        "trend-sampled {n} windows (NFE {}, {:.3} ms/sample) into {}",
        result.nfe,
        result.ms_per_sample,
        out_dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_impute(
    checkpoint_path: &Path,
    data_dir: &Path,
    out_dir: &Path,
    n: usize,
    mask_file: Option<&Path>,
    denormalize: bool,
    plot: bool,
    seed: Option<u64>,
    config: &ConfigArgs,
) -> Result<(), Error> {
    let kv = config.load()?;
    let rc = RunConfig::from_kv(&kv)?;
    std::fs::create_dir_all(out_dir)?;
    let prepared = load_prepared(data_dir)?;
    let (model, _, _) = checkpoint::load(checkpoint_path)?;
    check_shape(&model, &prepared)?;
    let (tau, d) = model.window_shape();
    let seed = seed.unwrap_or(rc.train.seed);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let source = if prepared.eval.shape()[0] > 0 {
        &prepared.eval
    } else {
        &prepared.train
    };
    let n = n.min(source.shape()[0]).max(1);

    // fixed mask from file, or a fresh draw per window
    let fixed_mask = match mask_file {
        Some(path) => {
            let m = data::load_csv(path, false)?;
            if m.dim() != (tau, d) {
                return Err(Error::ShapeMismatch {
                    what: "mask file",
                    expected: vec![tau, d],
                    got: m.shape().to_vec(),
                });
            }
            Some(m)
        }
        None => None,
    };

    let mut truth = Array3::zeros((n, tau, d));
    let mut endpoints = Array3::zeros((n, tau, d));
    let mut gen_mask = Array3::zeros((n, tau, d));
    for i in 0..n {
        let window = source.slice(s![i, .., ..]).to_owned();
        let missing = match &fixed_mask {
            Some(m) => m.clone(),
            None => data::make_mask((tau, d), &rc.mask, &mut rng)?,
        };
        let observed = missing.mapv(|m| 1.0 - m);
        let spline = priors::spline_interpolate(&window, &observed)?;
        truth.slice_mut(s![i, .., ..]).assign(&window);
        endpoints.slice_mut(s![i, .., ..]).assign(&spline.values);
        gen_mask.slice_mut(s![i, .., ..]).assign(&missing);
    }
    if gen_mask.sum() == 0.0 {
        return Err(Error::Data(
            "mask selects no cells to impute (empty generation mask)".into(),
        ));
    }

    let result = sampler::sample_point_preserving(
        &model,
        &rc.schedule,
        &endpoints,
        &gen_mask,
        &rc.sampler,
        &mut rng,
    )?;
    let (mse, mae) = metrics::imputation_error(&truth, &result.values, &gen_mask)?;

    let output = if denormalize {
        data::denormalize(&result.values, &prepared.norm)?
    } else {
        result.values.clone()
    };
    write_batch_csv(&out_dir.join("imputed.csv"), &output)?;
    data::write_batch(&out_dir.join("imputed.tbdat"), &output)?;
    write_batch_csv(&out_dir.join("mask.csv"), &gen_mask)?;
    if plot {
        write_plots(out_dir, &output)?;
    }
    write_json(
        &out_dir.join("manifest.json"),
        &serde_json::json!({
            "command": "impute",
            "n": n, "tau": tau, "d": d,
            "prior": "spline",
            "gamma": rc.sampler.n_steps,
            "churn": rc.sampler.churn,
            "seed": seed,
            "nfe": result.nfe,
            "ms_per_sample": result.ms_per_sample,
            "masked_mse": mse,
            "masked_mae": mae,
            "config": kv.as_map(),
        }),
    )?;
    println!(
        "imputed {n} windows (NFE {}): masked-cell MSE {mse:.6}, MAE {mae:.6}",
        result.nfe
    );
    Ok(())
}

fn cmd_eval(
    real_path: &Path,
    synth_path: &Path,
    out: &Path,
    seed: Option<u64>,
    config: &ConfigArgs,
) -> Result<(), Error> {
    let mut kv = config.load()?;
    if let Some(seed) = seed {
        kv.apply_overrides(&[format!("eval.seed={seed}")])?;
    }
    let rc = RunConfig::from_kv(&kv)?;
    let real = data::read_batch(real_path)?;
    let synth = data::read_batch(synth_path)?;
    if real.shape()[2] != synth.shape()[2] {
        return Err(Error::ShapeMismatch {
            what: "eval: feature count",
            expected: vec![real.shape()[2]],
            got: vec![synth.shape()[2]],
        });
    }
    let report = metrics::compute_eval_report(&real, &synth, &rc.metric_net)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_json(out, &report)?;
    print!("{}", report.table());
    Ok(())
}

fn check_shape(model: &DenoiserModel, prepared: &Prepared) -> Result<(), Error> {
    let (tau, d) = model.window_shape();
    let shape = prepared.train.dim();
    if shape.1 != tau || shape.2 != d {
        return Err(Error::ShapeMismatch {
            what: "checkpoint vs prepared data",
            expected: vec![tau, d],
            got: vec![shape.1, shape.2],
        });
    }
    Ok(())
}
