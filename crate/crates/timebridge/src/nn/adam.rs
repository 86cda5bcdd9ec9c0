//! Adam with linear warmup, inverse-sqrt decay, and global-norm clipping.

use std::collections::HashMap;

use ndarray::ArrayD;

use super::tape::ParamStore;

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second-moment state per parameter.
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<ArrayD<f64>>,
    v: Vec<ArrayD<f64>>,
    step: u64,
}

impl Adam {
    pub fn new(store: &ParamStore, cfg: AdamConfig) -> Self {
        let m = (0..store.len())
            .map(|i| ArrayD::zeros(store.value(i).raw_dim()))
            .collect();
        let v = (0..store.len())
            .map(|i| ArrayD::zeros(store.value(i).raw_dim()))
            .collect();
        Self {
            cfg,
            m,
            v,
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update with the given learning rate. Parameters are visited
    /// in sorted id order so runs are bit-reproducible.
    pub fn step(&mut self, store: &mut ParamStore, grads: &HashMap<usize, ArrayD<f64>>, lr: f64) {
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - self.cfg.beta1.powf(t);
        let bc2 = 1.0 - self.cfg.beta2.powf(t);
        let mut ids: Vec<usize> = grads.keys().copied().collect();
        ids.sort_unstable();
        for id in ids {
            let grad = &grads[&id];
            let m = &mut self.m[id];
            let v = &mut self.v[id];
            ndarray::Zip::from(&mut *m).and(grad).for_each(|m, &g| {
                *m = self.cfg.beta1 * *m + (1.0 - self.cfg.beta1) * g;
            });
            ndarray::Zip::from(&mut *v).and(grad).for_each(|v, &g| {
                *v = self.cfg.beta2 * *v + (1.0 - self.cfg.beta2) * g * g;
            });
            let value = store.value_mut(id);
            ndarray::Zip::from(value).and(&*m).and(&*v).for_each(|p, &m, &v| {
                let m_hat = m / bc1;
                let v_hat = v / bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + self.cfg.eps);
            });
        }
    }
}

/// Linear warmup to `peak` over `warmup` steps, then inverse-sqrt decay.
pub fn warmup_inv_sqrt_lr(peak: f64, warmup: u64, step: u64) -> f64 {
    let s = step.max(1) as f64;
    let w = warmup.max(1) as f64;
    peak * (s / w).min((w / s).sqrt())
}

/// Scale gradients in place so their global L2 norm is at most `max_norm`;
/// returns the pre-clip norm. The reduction runs in sorted id order so it is
/// bit-reproducible.
pub fn clip_global_norm(grads: &mut HashMap<usize, ArrayD<f64>>, max_norm: f64) -> f64 {
    let mut ids: Vec<usize> = grads.keys().copied().collect();
    ids.sort_unstable();
    let total: f64 = ids
        .iter()
        .map(|id| grads[id].iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    if total > max_norm && total > 0.0 {
        let scale = max_norm / total;
        for g in grads.values_mut() {
            g.mapv_inplace(|v| v * scale);
        }
    }
    total
}
