//! Dataset ingestion, windowing, normalization, masks, and toy generators.
//!
//! The on-disk pipeline is: a numeric CSV (header row, one row per timestamp)
//! is loaded into an `(L × d)` series, split chronologically, cut into
//! `(τ × d)` windows, and min-max normalized to `[0, 1]` with statistics from
//! the training split only. Prepared batches are cached in a flat binary
//! format (`TBDAT1`) next to a JSON file with the normalization statistics.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{s, Array2, Array3, Axis};
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// A batch of fixed-length windows: `values` has shape `(n, τ, d)`.
#[derive(Debug, Clone)]
pub struct TimeSeriesBatch {
    pub values: Array3<f64>,
    /// Per-feature normalization bounds, when the batch is normalized.
    pub norm: Option<NormStats>,
    /// Dataset identifier carried through for manifests.
    pub source: String,
}

/// Per-feature min/max used by [`normalize`] / [`denormalize`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl TimeSeriesBatch {
    pub fn new(values: Array3<f64>, source: impl Into<String>) -> Self {
        Self {
            values,
            norm: None,
            source: source.into(),
        }
    }

    pub fn n_samples(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn window_len(&self) -> usize {
        self.values.shape()[1]
    }

    pub fn n_features(&self) -> usize {
        self.values.shape()[2]
    }
}

/// Load a CSV with a header row of feature names and one numeric row per
/// timestamp. With `skip_first_column` the leading column (timestamps) is
/// dropped. Parse failures report the 1-based data line.
pub fn load_csv(path: &Path, skip_first_column: bool) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let n_cols = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: bad header: {e}", path.display())))?
        .len();
    let start = if skip_first_column { 1 } else { 0 };
    if n_cols <= start {
        return Err(Error::Data(format!(
            "{}: no feature columns",
            path.display()
        )));
    }
    let d = n_cols - start;
    let mut rows: Vec<f64> = Vec::new();
    let mut n_rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record =
            record.map_err(|e| Error::Data(format!("{}: line {line}: {e}", path.display())))?;
        if record.len() != n_cols {
            return Err(Error::Data(format!(
                "{}: line {line}: expected {n_cols} cells, got {}",
                path.display(),
                record.len()
            )));
        }
        for cell in record.iter().skip(start) {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "{}: line {line}: non-numeric cell {cell:?}",
                    path.display()
                ))
            })?;
            rows.push(v);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    Array2::from_shape_vec((n_rows, d), rows)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Cut a series into windows of length `window_len` at offsets
/// `0, stride, 2·stride, …`; yields `⌊(L − τ)/stride⌋ + 1` windows.
pub fn window(series: &Array2<f64>, window_len: usize, stride: usize) -> Result<Array3<f64>> {
    let (len, d) = series.dim();
    if window_len == 0 || stride == 0 {
        return Err(Error::Config("window_len and stride must be >= 1".into()));
    }
    if len < window_len {
        return Err(Error::Data(format!(
            "series length {len} shorter than window {window_len}"
        )));
    }
    let n = (len - window_len) / stride + 1;
    let mut out = Array3::zeros((n, window_len, d));
    for i in 0..n {
        let off = i * stride;
        out.slice_mut(s![i, .., ..])
            .assign(&series.slice(s![off..off + window_len, ..]));
    }
    Ok(out)
}

/// Chronological train/eval split of a raw series (before windowing).
pub fn chronological_split(
    series: &Array2<f64>,
    train_fraction: f64,
) -> (Array2<f64>, Array2<f64>) {
    let len = series.nrows();
    let cut = ((len as f64) * train_fraction).round() as usize;
    let cut = cut.clamp(1, len.saturating_sub(1).max(1));
    (
        series.slice(s![..cut, ..]).to_owned(),
        series.slice(s![cut.., ..]).to_owned(),
    )
}

/// Compute per-feature min/max over a training batch. Constant features are
/// rejected by feature index.
pub fn fit_norm_stats(train: &Array3<f64>) -> Result<NormStats> {
    let d = train.shape()[2];
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for sample in train.outer_iter() {
        for row in sample.outer_iter() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Data(format!("non-finite value in feature {j}")));
                }
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
    }
    for j in 0..d {
        if !(min[j] < max[j]) {
            return Err(Error::Data(format!(
                "feature {j} is constant (min = max = {}); cannot normalize",
                min[j]
            )));
        }
    }
    Ok(NormStats { min, max })
}

/// Min-max normalize: `x' = (x - min) / (max - min)`, per feature.
pub fn normalize(batch: &Array3<f64>, stats: &NormStats) -> Result<Array3<f64>> {
    let d = batch.shape()[2];
    if stats.min.len() != d {
        return Err(Error::ShapeMismatch {
            what: "normalize: norm stats",
            expected: vec![d],
            got: vec![stats.min.len()],
        });
    }
    let mut out = batch.clone();
    for j in 0..d {
        let (lo, hi) = (stats.min[j], stats.max[j]);
        let span = hi - lo;
        out.slice_mut(s![.., .., j])
            .mapv_inplace(|v| (v - lo) / span);
    }
    Ok(out)
}

/// Inverse of [`normalize`].
pub fn denormalize(batch: &Array3<f64>, stats: &NormStats) -> Result<Array3<f64>> {
    let d = batch.shape()[2];
    if stats.min.len() != d {
        return Err(Error::ShapeMismatch {
            what: "denormalize: norm stats",
            expected: vec![d],
            got: vec![stats.min.len()],
        });
    }
    let mut out = batch.clone();
    for j in 0..d {
        let (lo, hi) = (stats.min[j], stats.max[j]);
        let span = hi - lo;
        out.slice_mut(s![.., .., j]).mapv_inplace(|v| v * span + lo);
    }
    Ok(out)
}

/// Masking protocol. The realized mask is 1 on cells to be *masked*
/// (treated as missing / to be generated) and 0 on observed cells.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskKind {
    /// i.i.d. Bernoulli(r) per cell.
    Random,
    /// Alternating masked/unmasked runs with geometric lengths
    /// (two-state Markov chain, stationary start).
    Geometric,
}

/// Mask-generation parameters.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct MaskSpec {
    pub kind: MaskKind,
    /// Target masked fraction, in [0, 1).
    pub ratio: f64,
    /// Mean masked-run length (geometric kind only).
    pub mean_segment: f64,
}

impl MaskSpec {
    pub fn random(ratio: f64) -> Self {
        Self {
            kind: MaskKind::Random,
            ratio,
            mean_segment: 3.0,
        }
    }

    pub fn geometric(ratio: f64, mean_segment: f64) -> Self {
        Self {
            kind: MaskKind::Geometric,
            ratio,
            mean_segment,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.ratio) {
            return Err(Error::Config(format!(
                "mask ratio must be in [0, 1), got {}",
                self.ratio
            )));
        }
        if self.kind == MaskKind::Geometric && self.ratio > 0.0 {
            let lm = self.mean_segment;
            if lm < 1.0 {
                return Err(Error::Config(format!(
                    "geometric mask needs mean_segment >= 1, got {lm}"
                )));
            }
            let p_um = self.ratio / (lm * (1.0 - self.ratio));
            if !(0.0..=1.0).contains(&p_um) {
                return Err(Error::Config(format!(
                    "geometric mask parameters imply transition probability {p_um} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Generate a binary mask of shape `(τ, d)`; 1 = masked.
///
/// Geometric masks run an independent two-state Markov chain down each
/// feature column: from masked, switch with probability `1/lm`; from
/// unmasked, switch with probability `r/(lm(1-r))`; the first state is drawn
/// from the stationary distribution, which puts mass `r` on masked.
pub fn make_mask(
    shape: (usize, usize),
    spec: &MaskSpec,
    rng: &mut ChaCha12Rng,
) -> Result<Array2<f64>> {
    spec.validate()?;
    let (tau, d) = shape;
    let mut mask = Array2::zeros((tau, d));
    if spec.ratio == 0.0 {
        return Ok(mask);
    }
    match spec.kind {
        MaskKind::Random => {
            for v in mask.iter_mut() {
                if rng.random::<f64>() < spec.ratio {
                    *v = 1.0;
                }
            }
        }
        MaskKind::Geometric => {
            let r = spec.ratio;
            let lm = spec.mean_segment;
            let p_mu = 1.0 / lm; // masked -> unmasked
            let p_um = r / (lm * (1.0 - r)); // unmasked -> masked
            for j in 0..d {
                let mut masked = rng.random::<f64>() < r;
                for k in 0..tau {
                    if masked {
                        mask[[k, j]] = 1.0;
                    }
                    let flip = rng.random::<f64>();
                    masked = if masked { flip >= p_mu } else { flip < p_um };
                }
            }
        }
    }
    Ok(mask)
}

/// Per-(sample, feature) sine parameters used by [`toy_sines`].
#[derive(Debug, Clone, Copy)]
pub struct SineParams {
    /// Cycles per window.
    pub freq: f64,
    /// Phase in radians.
    pub phase: f64,
}

/// Synthetic sine windows: `x_j(k) = sin(2π f_j k/τ + φ_j)` rescaled to
/// `[0, 1]`, with `f_j ~ U(1, 5)` cycles per window and `φ_j ~ U(0, 2π)`
/// drawn independently per sample and feature.
pub fn toy_sines(n: usize, tau: usize, d: usize, rng: &mut ChaCha12Rng) -> TimeSeriesBatch {
    toy_sines_with_params(n, tau, d, rng).0
}

/// As [`toy_sines`] but also returns the drawn `(f, φ)` per `(sample, feature)`.
pub fn toy_sines_with_params(
    n: usize,
    tau: usize,
    d: usize,
    rng: &mut ChaCha12Rng,
) -> (TimeSeriesBatch, Vec<Vec<SineParams>>) {
    let mut values = Array3::zeros((n, tau, d));
    let mut params = Vec::with_capacity(n);
    for i in 0..n {
        let mut per_feature = Vec::with_capacity(d);
        for j in 0..d {
            let freq = 1.0 + 4.0 * rng.random::<f64>();
            let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            for k in 0..tau {
                let arg = 2.0 * std::f64::consts::PI * freq * k as f64 / tau as f64 + phase;
                values[[i, k, j]] = 0.5 * (arg.sin() + 1.0);
            }
            per_feature.push(SineParams { freq, phase });
        }
        params.push(per_feature);
    }
    let mut batch = TimeSeriesBatch::new(values, "toy-sines");
    batch.norm = Some(NormStats {
        min: vec![0.0; d],
        max: vec![1.0; d],
    });
    (batch, params)
}

const TBDAT_MAGIC: &[u8; 6] = b"TBDAT1";

/// Write a batch in the flat binary cache format: 16-byte header
/// (magic `TBDAT1`, version u16, n u32, τ u16, d u16) followed by row-major
/// little-endian `f64` in (sample, timestamp, feature) order.
pub fn write_batch(path: &Path, batch: &Array3<f64>) -> Result<()> {
    let (n, tau, d) = batch.dim();
    if n > u32::MAX as usize || tau > u16::MAX as usize || d > u16::MAX as usize {
        return Err(Error::Data("batch too large for TBDAT1 header".into()));
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(TBDAT_MAGIC)?;
    file.write_all(&1u16.to_le_bytes())?;
    file.write_all(&(n as u32).to_le_bytes())?;
    file.write_all(&(tau as u16).to_le_bytes())?;
    file.write_all(&(d as u16).to_le_bytes())?;
    for &v in batch.iter() {
        file.write_all(&v.to_le_bytes())?;
    }
    file.flush()?;
    Ok(())
}

/// Read a batch written by [`write_batch`].
pub fn read_batch(path: &Path) -> Result<Array3<f64>> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut header = [0u8; 16];
    file.read_exact(&mut header)?;
    if &header[..6] != TBDAT_MAGIC {
        return Err(Error::Data(format!(
            "{}: not a TBDAT1 file",
            path.display()
        )));
    }
    let version = u16::from_le_bytes([header[6], header[7]]);
    if version != 1 {
        return Err(Error::Data(format!(
            "{}: unsupported TBDAT version {version}",
            path.display()
        )));
    }
    let n = u32::from_le_bytes([header[8], header[9], header[10], header[11]]) as usize;
    let tau = u16::from_le_bytes([header[12], header[13]]) as usize;
    let d = u16::from_le_bytes([header[14], header[15]]) as usize;
    let mut buf = vec![0u8; n * tau * d * 8];
    file.read_exact(&mut buf)?;
    let mut values = Vec::with_capacity(n * tau * d);
    for chunk in buf.chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Array3::from_shape_vec((n, tau, d), values)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Empirical masked fraction of a mask.
pub fn mask_fraction(mask: &Array2<f64>) -> f64 {
    mask.sum() / mask.len() as f64
}

/// Mean length of contiguous masked runs down each feature column.
pub fn mean_masked_run_length(mask: &Array2<f64>) -> f64 {
    let mut total = 0usize;
    let mut runs = 0usize;
    for col in mask.axis_iter(Axis(1)) {
        let mut run = 0usize;
        for &v in col.iter() {
            if v == 1.0 {
                run += 1;
            } else if run > 0 {
                total += run;
                runs += 1;
                run = 0;
            }
        }
        if run > 0 {
            total += run;
            runs += 1;
        }
    }
    if runs == 0 {
        0.0
    } else {
        total as f64 / runs as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use rand::SeedableRng;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("timebridge-data-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn load_csv_shapes_and_errors() {
        let p = tmp("ok.csv");
        std::fs::write(&p, "a,b\n1,2\n3,4\n5,6\n").unwrap();
        let m = load_csv(&p, false).unwrap();
        assert_eq!(m.dim(), (3, 2));
        assert_eq!(m[[2, 1]], 6.0);

        let p = tmp("header_only.csv");
        std::fs::write(&p, "a,b\n").unwrap();
        let err = load_csv(&p, false).unwrap_err().to_string();
        assert!(err.contains("no data rows"), "{err}");

        let p = tmp("bad_cell.csv");
        std::fs::write(&p, "a,b\n1,2\n1,x\n").unwrap();
        let err = load_csv(&p, false).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");

        let p = tmp("ragged.csv");
        std::fs::write(&p, "a,b\n1,2\n1\n").unwrap();
        let err = load_csv(&p, false).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn load_csv_skip_timestamp_column() {
        let p = tmp("ts.csv");
        std::fs::write(&p, "date,a,b\n2020-01-01,1,2\n2020-01-02,3,4\n").unwrap();
        let m = load_csv(&p, true).unwrap();
        assert_eq!(m.dim(), (2, 2));
        assert_eq!(m[[1, 0]], 3.0);
    }

    #[test]
    fn csv_round_trip_precision() {
        let p = tmp("roundtrip.csv");
        let vals = [
            0.123456789012345,
            -9.87654321098765e3,
            1.0 / 3.0,
            2.0f64.sqrt(),
        ];
        let mut s = String::from("a\n");
        for v in vals {
            s.push_str(&format!("{v:.17e}\n"));
        }
        std::fs::write(&p, s).unwrap();
        let m = load_csv(&p, false).unwrap();
        for (i, v) in vals.iter().enumerate() {
            let rel = ((m[[i, 0]] - v) / v).abs();
            assert!(rel < 1e-15, "value {v} read back as {}", m[[i, 0]]);
        }
    }

    #[test]
    fn window_counts_and_contents() {
        let series = Array2::from_shape_fn((100, 2), |(i, j)| i as f64 + 1000.0 * j as f64);
        let w = window(&series, 24, 1).unwrap();
        assert_eq!(w.shape(), &[77, 24, 2]);
        // stride = τ, τ | L
        let w2 = window(&series, 25, 25).unwrap();
        assert_eq!(w2.shape()[0], 4);
        // spot-check windows against source slices
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..10 {
            let i = rng.random_range(0..77usize);
            for k in 0..24 {
                for j in 0..2 {
                    assert_eq!(w[[i, k, j]], series[[i + k, j]]);
                }
            }
        }
        assert!(window(&series, 101, 1).is_err());
    }

    #[test]
    fn windowing_is_deterministic() {
        let series = Array2::from_shape_fn((50, 3), |(i, j)| (i * 3 + j) as f64).mapv(|v| v.sin());
        let a = window(&series, 16, 2).unwrap();
        let b = window(&series, 16, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normalize_and_denormalize() {
        let batch = Array3::from_shape_vec((1, 3, 1), vec![2.0, 3.0, 4.0]).unwrap();
        let stats = fit_norm_stats(&batch).unwrap();
        assert_eq!(stats.min, vec![2.0]);
        assert_eq!(stats.max, vec![4.0]);
        let normed = normalize(&batch, &stats).unwrap();
        assert_eq!(normed[[0, 0, 0]], 0.0);
        assert_eq!(normed[[0, 1, 0]], 0.5);
        assert_eq!(normed[[0, 2, 0]], 1.0);
        let back = denormalize(&normed, &stats).unwrap();
        for (a, b) in back.iter().zip(batch.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_round_trip_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let batch = Array3::from_shape_fn((4, 6, 3), |_| rng.random::<f64>() * 10.0 - 5.0);
        let stats = fit_norm_stats(&batch).unwrap();
        let back = denormalize(&normalize(&batch, &stats).unwrap(), &stats).unwrap();
        for (a, b) in back.iter().zip(batch.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_feature_rejected_by_index() {
        let batch = Array3::from_shape_vec((1, 2, 2), vec![1.0, 7.0, 2.0, 7.0]).unwrap();
        let err = fit_norm_stats(&batch).unwrap_err().to_string();
        assert!(err.contains("feature 1"), "{err}");
    }

    #[test]
    fn random_mask_ratio_concentrates() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let spec = MaskSpec::random(0.7);
        let mask = make_mask((1000, 100), &spec, &mut rng).unwrap();
        let frac = mask_fraction(&mask);
        assert!((frac - 0.7).abs() < 0.01, "fraction {frac}");
    }

    #[test]
    fn zero_ratio_mask_is_empty() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mask = make_mask((8, 4), &MaskSpec::random(0.0), &mut rng).unwrap();
        assert_eq!(mask.sum(), 0.0);
    }

    #[test]
    fn geometric_mask_statistics() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let spec = MaskSpec::geometric(0.25, 3.0);
        let mask = make_mask((100_000, 1), &spec, &mut rng).unwrap();
        let frac = mask_fraction(&mask);
        assert!((frac - 0.25).abs() < 0.02, "fraction {frac}");
        let run = mean_masked_run_length(&mask);
        assert!((run - 3.0).abs() < 0.2, "run length {run}");
    }

    #[test]
    fn geometric_mask_invalid_params_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        // r/(lm(1-r)) > 1
        let spec = MaskSpec::geometric(0.9, 1.0);
        assert!(make_mask((4, 4), &spec, &mut rng).is_err());
        let spec = MaskSpec::geometric(0.5, 0.2);
        assert!(make_mask((4, 4), &spec, &mut rng).is_err());
    }

    #[test]
    fn mask_deterministic_per_seed() {
        let spec = MaskSpec::geometric(0.3, 3.0);
        let a = make_mask((32, 5), &spec, &mut ChaCha12Rng::seed_from_u64(77)).unwrap();
        let b = make_mask((32, 5), &spec, &mut ChaCha12Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn toy_sines_stay_in_unit_range() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let batch = toy_sines(16, 24, 3, &mut rng);
        assert!(batch.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn toy_sines_dominant_bin_matches_frequency() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let (batch, params) = toy_sines_with_params(20, 48, 2, &mut rng);
        let tau = 48usize;
        for (i, feats) in params.iter().enumerate() {
            for (j, p) in feats.iter().enumerate() {
                // skip draws near half-integers where the dominant bin is ambiguous
                if (p.freq - p.freq.round()).abs() > 0.4 {
                    continue;
                }
                let mut best = (0usize, -1.0f64);
                for b in 1..=tau / 2 {
                    let (mut re, mut im) = (0.0, 0.0);
                    for k in 0..tau {
                        let ang = -2.0 * std::f64::consts::PI * b as f64 * k as f64 / tau as f64;
                        re += batch.values[[i, k, j]] * ang.cos();
                        im += batch.values[[i, k, j]] * ang.sin();
                    }
                    let a = (re * re + im * im).sqrt();
                    if a > best.1 {
                        best = (b, a);
                    }
                }
                assert_eq!(
                    best.0,
                    p.freq.round() as usize,
                    "sample {i} feature {j} freq {}",
                    p.freq
                );
            }
        }
    }

    #[test]
    fn tbdat_round_trip() {
        let p = tmp("batch.tbdat");
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let batch = Array3::from_shape_fn((5, 7, 3), |_| rng.random::<f64>());
        write_batch(&p, &batch).unwrap();
        let back = read_batch(&p).unwrap();
        assert_eq!(batch, back);
    }

    #[test]
    fn tbdat_rejects_foreign_files() {
        let p = tmp("not_a_batch.bin");
        std::fs::write(&p, b"HELLO world, this is not a batch").unwrap();
        assert!(read_batch(&p).is_err());
    }

    #[test]
    fn chronological_split_is_ordered() {
        let series = arr2(&[
            [1.0],
            [2.0],
            [3.0],
            [4.0],
            [5.0],
            [6.0],
            [7.0],
            [8.0],
            [9.0],
            [10.0],
        ]);
        let (train, eval) = chronological_split(&series, 0.9);
        assert_eq!(train.nrows(), 9);
        assert_eq!(eval.nrows(), 1);
        assert_eq!(eval[[0, 0]], 10.0);
    }
}
