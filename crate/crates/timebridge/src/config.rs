//! Run configuration: a flat `key = value` text format with `#` comments.
//!
//! Every key is validated against the documented schema before any work
//! starts; unknown keys are rejected outright. Command-line flags override
//! file values, and the effective (merged) configuration is echoed into
//! every output manifest so runs stay reproducible from their artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use crate::data::{MaskKind, MaskSpec};
use crate::denoiser::{CondMode, DenoiserConfig};
use crate::error::{Error, Result};
use crate::metrics::MetricNetConfig;
use crate::priors::TrendKind;
use crate::sampler::{GridKind, SamplerConfig};
use crate::schedule::{NoiseSchedule, ScheduleKind};
use crate::training::TrainConfig;

/// The documented key set: `(key, description)`.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("schedule.kind", "noise schedule family: vp | ve"),
    ("schedule.beta_min", "VP beta(t) intercept (default 0.2)"),
    ("schedule.beta_d", "VP beta(t) slope (default 10)"),
    ("schedule.sigma_max", "VE noise level at t_max (default 1)"),
    ("schedule.t_max", "diffusion horizon T (default 1)"),
    ("prior.kind", "endpoint prior: standard | data | gp | trend | spline"),
    ("prior.eta", "GP kernel amplitude eta (default 0.5)"),
    ("prior.length_scale", "GP kernel length scale; omit for per-feature data std"),
    ("trend.kind", "trend extraction: linear | poly3 | butterworth"),
    ("trend.cutoff", "butterworth cutoff as a fraction of Nyquist (default 0.1)"),
    ("data.window_len", "window length tau (default 24)"),
    ("data.stride", "window stride (default 1)"),
    ("data.train_fraction", "chronological train split (default 0.9)"),
    ("data.skip_first_column", "ignore a leading timestamp column: true | false"),
    ("denoiser.n_enc_layers", "encoder layers (default 3)"),
    ("denoiser.n_dec_layers", "decoder layers (default 2)"),
    ("denoiser.n_heads", "attention heads (default 4)"),
    ("denoiser.head_dim", "per-head width (default 16)"),
    ("denoiser.n_topk_freqs", "seasonal top-K bins (default min(5, tau/2+1))"),
    ("denoiser.poly_degree", "trend polynomial degree (default 3)"),
    ("train.batch_size", "training batch size (default 128)"),
    ("train.n_steps", "training steps (default 18000)"),
    ("train.lr_warmup_peak", "peak learning rate after warmup (default 0.008)"),
    ("train.warmup_steps", "linear warmup length (default 500)"),
    ("train.lambda_fourier", "frequency-loss strength lambda (default 1.0)"),
    ("train.sigma_data", "loss-weight data scale sigma_data (default 0.1)"),
    ("train.t_min", "lowest training diffusion time (default 1e-4 T)"),
    ("train.t_max_train", "highest training diffusion time (default (1-1e-4) T)"),
    ("train.seed", "training rng seed (default 0)"),
    ("train.grad_clip", "global gradient-norm clip (default 1.0)"),
    ("train.checkpoint_every", "checkpoint interval in steps (default 1000)"),
    ("sampler.n_steps", "sampling steps Gamma (default 40)"),
    ("sampler.churn", "churn ratio s in [0,1] (default 0.33)"),
    ("sampler.grid", "time grid: uniform | power"),
    ("sampler.t_lo", "lowest sampling time (default guard band)"),
    ("sampler.t_hi", "highest sampling time (default guard band)"),
    ("sampler.final_denoise", "closing denoiser evaluation: true | false"),
    ("mask.kind", "mask protocol: random | geometric"),
    ("mask.ratio", "masked fraction r (default 0.5)"),
    ("mask.mean_segment", "geometric mean masked-run length (default 3)"),
    ("eval.steps", "metric-network training steps (default 2000)"),
    ("eval.batch", "metric-network batch size (default 64)"),
    ("eval.hidden", "metric-network hidden width (default 32)"),
    ("eval.heads", "metric-network attention heads (default 2)"),
    ("eval.layers", "metric-network layers (default 2)"),
    ("eval.lr", "metric-network learning rate (default 1e-3)"),
    ("eval.seed", "metric rng seed (default 0)"),
];

/// Parsed key=value configuration.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    map: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse config text; rejects malformed lines, duplicate keys, and keys
    /// outside the documented schema.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got {raw:?}",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !CONFIG_KEYS.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key {key:?}",
                    lineno + 1
                )));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Ok(Self { map })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply `key=value` overrides (command-line flags beat the file).
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for item in overrides {
            let Some((key, value)) = item.split_once('=') else {
                return Err(Error::Config(format!(
                    "override {item:?} is not of the form key=value"
                )));
            };
            let key = key.trim();
            if !CONFIG_KEYS.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config(format!("unknown key {key:?}")));
            }
            self.map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn parse_with<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.map.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                Error::Config(format!("key {key:?}: cannot parse value {raw:?}"))
            }),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.parse_with(key, default)
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.parse_with(key, default)
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        self.parse_with(key, default)
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        self.parse_with(key, default)
    }

    /// Canonical `key = value` text of the effective configuration.
    pub fn effective(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.map {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Keys as a JSON-able map for manifests.
    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.map
    }
}

/// Endpoint prior selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Standard,
    Data,
    Gp,
    Trend,
    Spline,
}

/// Data-preparation settings.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct DataConfig {
    pub window_len: usize,
    pub stride: usize,
    pub train_fraction: f64,
    pub skip_first_column: bool,
}

/// The merged typed view of a run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub schedule: NoiseSchedule,
    pub prior_kind: PriorKind,
    pub eta: f64,
    pub length_scale: Option<f64>,
    pub trend_kind: TrendKind,
    pub trend_cutoff: f64,
    pub data: DataConfig,
    pub train: TrainConfig,
    pub sampler: SamplerConfig,
    pub mask: MaskSpec,
    pub metric_net: MetricNetConfig,
    /// Denoiser fields, window shape filled in later from data.
    pub n_enc_layers: usize,
    pub n_dec_layers: usize,
    pub n_heads: usize,
    pub head_dim: usize,
    pub n_topk_freqs: Option<usize>,
    pub poly_degree: usize,
}

impl RunConfig {
    /// Build the typed view, validating every value.
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let schedule = {
            let kind = match kv.get("schedule.kind").unwrap_or("vp") {
                "vp" => ScheduleKind::Vp,
                "ve" => ScheduleKind::Ve,
                other => {
                    return Err(Error::Config(format!(
                        "schedule.kind must be vp or ve, got {other:?}"
                    )))
                }
            };
            let sched = NoiseSchedule {
                kind,
                beta_min: kv.f64_or("schedule.beta_min", 0.2)?,
                beta_d: kv.f64_or("schedule.beta_d", 10.0)?,
                sigma_max: kv.f64_or("schedule.sigma_max", 1.0)?,
                t_max: kv.f64_or("schedule.t_max", 1.0)?,
            };
            sched.validate()?;
            sched
        };

        let prior_kind = match kv.get("prior.kind").unwrap_or("data") {
            "standard" => PriorKind::Standard,
            "data" => PriorKind::Data,
            "gp" => PriorKind::Gp,
            "trend" => PriorKind::Trend,
            "spline" => PriorKind::Spline,
            other => {
                return Err(Error::Config(format!(
                    "prior.kind must be standard|data|gp|trend|spline, got {other:?}"
                )))
            }
        };

        let trend_kind = match kv.get("trend.kind").unwrap_or("linear") {
            "linear" => TrendKind::Linear,
            "poly3" => TrendKind::Poly3,
            "butterworth" => TrendKind::Butterworth,
            other => {
                return Err(Error::Config(format!(
                    "trend.kind must be linear|poly3|butterworth, got {other:?}"
                )))
            }
        };

        let data = DataConfig {
            window_len: kv.usize_or("data.window_len", 24)?,
            stride: kv.usize_or("data.stride", 1)?,
            train_fraction: kv.f64_or("data.train_fraction", 0.9)?,
            skip_first_column: kv.bool_or("data.skip_first_column", false)?,
        };
        if data.window_len == 0 || data.stride == 0 {
            return Err(Error::Config("window_len and stride must be >= 1".into()));
        }
        if !(0.0 < data.train_fraction && data.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "data.train_fraction must be in (0,1), got {}",
                data.train_fraction
            )));
        }

        let train = TrainConfig {
            batch_size: kv.usize_or("train.batch_size", 128)?,
            n_steps: kv.usize_or("train.n_steps", 18_000)?,
            lr_warmup_peak: kv.f64_or("train.lr_warmup_peak", 0.008)?,
            warmup_steps: kv.u64_or("train.warmup_steps", 500)?,
            lambda_fourier: kv.f64_or("train.lambda_fourier", 1.0)?,
            sigma_data: kv.f64_or("train.sigma_data", 0.1)?,
            t_min: kv.f64_or("train.t_min", 1e-4 * schedule.t_max)?,
            t_max_train: kv.f64_or("train.t_max_train", (1.0 - 1e-4) * schedule.t_max)?,
            seed: kv.u64_or("train.seed", 0)?,
            grad_clip: kv.f64_or("train.grad_clip", 1.0)?,
            checkpoint_every: kv.usize_or("train.checkpoint_every", 1000)?,
        };
        train.validate(&schedule)?;

        let sampler = SamplerConfig {
            n_steps: kv.usize_or("sampler.n_steps", 40)?,
            churn: kv.f64_or("sampler.churn", 0.33)?,
            grid: match kv.get("sampler.grid").unwrap_or("uniform") {
                "uniform" => GridKind::Uniform,
                "power" => GridKind::Power,
                other => {
                    return Err(Error::Config(format!(
                        "sampler.grid must be uniform or power, got {other:?}"
                    )))
                }
            },
            t_lo: kv.f64_or("sampler.t_lo", schedule.t_min_guard())?,
            t_hi: kv.f64_or("sampler.t_hi", schedule.t_hi_guard())?,
            final_denoise: kv.bool_or("sampler.final_denoise", false)?,
        };
        sampler.validate(&schedule)?;

        let mask = MaskSpec {
            kind: match kv.get("mask.kind").unwrap_or("random") {
                "random" => MaskKind::Random,
                "geometric" => MaskKind::Geometric,
                other => {
                    return Err(Error::Config(format!(
                        "mask.kind must be random or geometric, got {other:?}"
                    )))
                }
            },
            ratio: kv.f64_or("mask.ratio", 0.5)?,
            mean_segment: kv.f64_or("mask.mean_segment", 3.0)?,
        };

        let metric_net = MetricNetConfig {
            steps: kv.usize_or("eval.steps", 2000)?,
            batch: kv.usize_or("eval.batch", 64)?,
            hidden: kv.usize_or("eval.hidden", 32)?,
            n_heads: kv.usize_or("eval.heads", 2)?,
            n_layers: kv.usize_or("eval.layers", 2)?,
            lr: kv.f64_or("eval.lr", 1e-3)?,
            seed: kv.u64_or("eval.seed", 0)?,
        };

        let eta = kv.f64_or("prior.eta", 0.5)?;
        let length_scale = match kv.get("prior.length_scale") {
            None => None,
            Some(raw) => Some(raw.parse().map_err(|_| {
                Error::Config(format!("prior.length_scale: cannot parse {raw:?}"))
            })?),
        };

        Ok(Self {
            schedule,
            prior_kind,
            eta,
            length_scale,
            trend_kind,
            trend_cutoff: kv.f64_or("trend.cutoff", 0.1)?,
            data,
            train,
            sampler,
            mask,
            metric_net,
            n_enc_layers: kv.usize_or("denoiser.n_enc_layers", 3)?,
            n_dec_layers: kv.usize_or("denoiser.n_dec_layers", 2)?,
            n_heads: kv.usize_or("denoiser.n_heads", 4)?,
            head_dim: kv.usize_or("denoiser.head_dim", 16)?,
            n_topk_freqs: match kv.get("denoiser.n_topk_freqs") {
                None => None,
                Some(raw) => Some(raw.parse().map_err(|_| {
                    Error::Config(format!("denoiser.n_topk_freqs: cannot parse {raw:?}"))
                })?),
            },
            poly_degree: kv.usize_or("denoiser.poly_degree", 3)?,
        })
    }

    /// Complete the denoiser configuration once the window shape is known.
    pub fn denoiser_config(&self, tau: usize, d: usize, cond_mode: CondMode) -> DenoiserConfig {
        DenoiserConfig {
            n_enc_layers: self.n_enc_layers,
            n_dec_layers: self.n_dec_layers,
            n_heads: self.n_heads,
            head_dim: self.head_dim,
            n_topk_freqs: self
                .n_topk_freqs
                .unwrap_or_else(|| (tau / 2 + 1).min(5)),
            poly_degree: self.poly_degree,
            window_len: tau,
            n_features: d,
            cond_mode,
        }
    }
}
