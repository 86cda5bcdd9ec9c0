//! Closed-form noise schedules and diffusion-bridge statistics.
//!
//! A [`NoiseSchedule`] fixes the pair `(α_t, σ_t)` of the linear forward SDE
//! `dx = f(x,t) dt + g(t) dw` on the horizon `[0, T]`:
//!
//! - **VP** (variance preserving): `α_t = exp(-¼ β_d t² - ½ β_min t)`,
//!   `σ_t² = 1 - α_t²`, so `α_t² + σ_t² = 1` for all `t`.
//! - **VE** (variance exploding): `α_t = 1`, `σ_t = σ_max · t / T`.
//!
//! On top of the schedule this module provides the bridge quantities used by
//! training and sampling: the marginal of `x_t` given both endpoints
//! (`μ̂_t`, `σ̂_t²`), the endpoint-pinning `h` function
//! `∇_{x_t} log p(x_T | x_t)`, and the reconstruction of the bridge score
//! from a denoiser output.
//!
//! Everything here is an exact closed form; no quadrature or ODE integration
//! is involved, so the functions are pure, deterministic, and cheap.

use ndarray::{Array, ArrayView, Dimension, Zip};

use crate::error::{Error, Result};

/// Schedule family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// Variance preserving: signal decays, total variance stays 1.
    Vp,
    /// Variance exploding: signal untouched, noise grows linearly.
    Ve,
}

/// Closed-form noise schedule over the horizon `[0, t_max]`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NoiseSchedule {
    pub kind: ScheduleKind,
    /// VP: `β(t) = β_min + β_d t` intercept. Unused by VE.
    pub beta_min: f64,
    /// VP: `β(t)` slope. Unused by VE.
    pub beta_d: f64,
    /// VE: noise level reached at `t = t_max`. Unused by VP.
    pub sigma_max: f64,
    /// Horizon `T`.
    pub t_max: f64,
}

/// Relative lower guard: bridge terms require `t >= REL_T_MIN * t_max`.
pub const REL_T_MIN: f64 = 1e-4;
/// Relative upper guard: bridge terms require `t <= (1 - REL_DELTA_GUARD) * t_max`.
pub const REL_DELTA_GUARD: f64 = 1e-4;

/// Gaussian marginal of `x_t` given both bridge endpoints.
///
/// `mean` has the shape of the data; the distribution is isotropic with
/// standard deviation `std`, which vanishes exactly at `t = 0` and `t = T`.
#[derive(Debug, Clone)]
pub struct BridgeMarginal<D: Dimension> {
    pub mean: Array<f64, D>,
    pub std: f64,
}

/// Scalar coefficients of the bridge marginal at a given time:
/// `μ̂_t = c_data · x_0 + c_endpoint · x_T`, `σ̂_t² = var`.
#[derive(Debug, Clone, Copy)]
pub struct BridgeCoeffs {
    pub c_data: f64,
    pub c_endpoint: f64,
    pub var: f64,
}

impl NoiseSchedule {
    /// VP schedule with horizon `T = 1`.
    pub fn vp(beta_min: f64, beta_d: f64) -> Self {
        Self {
            kind: ScheduleKind::Vp,
            beta_min,
            beta_d,
            sigma_max: 0.0,
            t_max: 1.0,
        }
    }

    /// VE schedule with horizon `T = 1`.
    pub fn ve(sigma_max: f64) -> Self {
        Self {
            kind: ScheduleKind::Ve,
            beta_min: 0.0,
            beta_d: 0.0,
            sigma_max,
            t_max: 1.0,
        }
    }

    /// Validate the parameter set.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) {
            return Err(Error::Config(format!("t_max must be > 0, got {}", self.t_max)));
        }
        match self.kind {
            ScheduleKind::Vp => {
                if self.beta_min < 0.0 || self.beta_d < 0.0 {
                    return Err(Error::Config(format!(
                        "VP needs beta_min >= 0 and beta_d >= 0, got {} / {}",
                        self.beta_min, self.beta_d
                    )));
                }
                if self.beta_min == 0.0 && self.beta_d == 0.0 {
                    return Err(Error::Config(
                        "VP with beta_min = beta_d = 0 has no noise at all".into(),
                    ));
                }
            }
            ScheduleKind::Ve => {
                if !(self.sigma_max > 0.0) {
                    return Err(Error::Config(format!(
                        "VE needs sigma_max > 0, got {}",
                        self.sigma_max
                    )));
                }
            }
        }
        Ok(())
    }

    /// Lowest time at which the singular bridge terms may be evaluated.
    pub fn t_min_guard(&self) -> f64 {
        REL_T_MIN * self.t_max
    }

    /// Highest time at which the singular bridge terms may be evaluated.
    pub fn t_hi_guard(&self) -> f64 {
        (1.0 - REL_DELTA_GUARD) * self.t_max
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 || t > self.t_max {
            return Err(Error::Domain {
                what: "t",
                value: t,
                lo: 0.0,
                hi: self.t_max,
            });
        }
        Ok(())
    }

    fn check_guard(&self, t: f64) -> Result<()> {
        self.check_domain(t)?;
        let (lo, hi) = (self.t_min_guard(), self.t_hi_guard());
        if t < lo || t > hi {
            return Err(Error::EndpointGuard { t, lo, hi });
        }
        Ok(())
    }

    /// VP log-SNR exponent `u(t) = ½ β_d t² + β_min t`, so that
    /// `α_t = e^{-u/2}`, `σ_t² = 1 - e^{-u}` and `SNR_t = 1 / (e^u - 1)`.
    fn vp_exponent(&self, t: f64) -> f64 {
        0.5 * self.beta_d * t * t + self.beta_min * t
    }

    /// Signal scale `α_t`.
    pub fn alpha(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match self.kind {
            ScheduleKind::Vp => (-0.5 * self.vp_exponent(t)).exp(),
            ScheduleKind::Ve => 1.0,
        })
    }

    /// Noise scale `σ_t`; strictly increasing, `σ_0 = 0`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match self.kind {
            // 1 - α² via expm1 keeps full precision near t = 0.
            ScheduleKind::Vp => (-(-self.vp_exponent(t)).exp_m1()).sqrt(),
            ScheduleKind::Ve => self.sigma_max * t / self.t_max,
        })
    }

    /// Signal-to-noise ratio `α_t² / σ_t²`; `+∞` at `t = 0`.
    pub fn snr(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        if t == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(match self.kind {
            ScheduleKind::Vp => 1.0 / self.vp_exponent(t).exp_m1(),
            ScheduleKind::Ve => {
                let s = self.sigma(t)?;
                1.0 / (s * s)
            }
        })
    }

    /// `d log α_t / dt` (zero for VE).
    pub fn dlog_alpha_dt(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match self.kind {
            ScheduleKind::Vp => -0.5 * (self.beta_d * t + self.beta_min),
            ScheduleKind::Ve => 0.0,
        })
    }

    /// `d σ_t² / dt`.
    pub fn dsigma2_dt(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match self.kind {
            // σ² = 1 - e^{-u} so dσ²/dt = e^{-u} u'(t).
            ScheduleKind::Vp => {
                (-self.vp_exponent(t)).exp() * (self.beta_d * t + self.beta_min)
            }
            ScheduleKind::Ve => 2.0 * self.sigma_max * self.sigma_max * t / (self.t_max * self.t_max),
        })
    }

    /// Forward-SDE drift `f(x,t)` and squared diffusion `g²(t)`.
    ///
    /// VP: `f = (d log α/dt) x`, `g² = dσ²/dt - 2 (d log α/dt) σ²`;
    /// VE: `f = 0`, `g² = dσ²/dt`.
    pub fn drift_diffusion<D: Dimension>(
        &self,
        x_t: ArrayView<f64, D>,
        t: f64,
    ) -> Result<(Array<f64, D>, f64)> {
        self.check_domain(t)?;
        let g2 = self.diffusion2(t)?;
        let f = match self.kind {
            ScheduleKind::Vp => {
                let c = self.dlog_alpha_dt(t)?;
                x_t.mapv(|v| c * v)
            }
            ScheduleKind::Ve => Array::zeros(x_t.raw_dim()),
        };
        Ok((f, g2))
    }

    /// Squared diffusion coefficient `g²(t)` alone.
    pub fn diffusion2(&self, t: f64) -> Result<f64> {
        let ds2 = self.dsigma2_dt(t)?;
        Ok(match self.kind {
            ScheduleKind::Vp => {
                let s2 = {
                    let s = self.sigma(t)?;
                    s * s
                };
                ds2 - 2.0 * self.dlog_alpha_dt(t)? * s2
            }
            ScheduleKind::Ve => ds2,
        })
    }

    /// `SNR_T / SNR_t`; exactly 0 at `t = 0` and exactly 1 at `t = T`.
    pub fn snr_ratio_from_horizon(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match self.kind {
            ScheduleKind::Vp => {
                self.vp_exponent(t).exp_m1() / self.vp_exponent(self.t_max).exp_m1()
            }
            ScheduleKind::Ve => (t * t) / (self.t_max * self.t_max),
        })
    }

    /// Coefficients of the bridge marginal at time `t`:
    /// `μ̂_t = (SNR_T/SNR_t)(α_t/α_T) x_T + α_t (1 - SNR_T/SNR_t) x_0` and
    /// `σ̂_t² = σ_t² (1 - SNR_T/SNR_t)`.
    pub fn bridge_coeffs(&self, t: f64) -> Result<BridgeCoeffs> {
        self.check_domain(t)?;
        let r = self.snr_ratio_from_horizon(t)?;
        let alpha_t = self.alpha(t)?;
        let alpha_ratio = alpha_t / self.alpha(self.t_max)?;
        let sigma_t = self.sigma(t)?;
        Ok(BridgeCoeffs {
            c_data: alpha_t * (1.0 - r),
            c_endpoint: r * alpha_ratio,
            var: sigma_t * sigma_t * (1.0 - r),
        })
    }

    /// Bridge marginal `q(x_t | x_0, x_T) = N(μ̂_t, σ̂_t² I)`.
    pub fn bridge_marginal<D: Dimension>(
        &self,
        x0: ArrayView<f64, D>,
        x_t_end: ArrayView<f64, D>,
        t: f64,
    ) -> Result<BridgeMarginal<D>> {
        if x0.shape() != x_t_end.shape() {
            return Err(Error::ShapeMismatch {
                what: "bridge_marginal: x0 vs x_T",
                expected: x0.shape().to_vec(),
                got: x_t_end.shape().to_vec(),
            });
        }
        let c = self.bridge_coeffs(t)?;
        let mut mean = Array::zeros(x0.raw_dim());
        Zip::from(&mut mean)
            .and(&x0)
            .and(&x_t_end)
            .for_each(|m, &a, &b| *m = c.c_data * a + c.c_endpoint * b);
        // var is a product of non-negatives up to roundoff; clamp the
        // -1e-18-style dust that can appear at t = T.
        Ok(BridgeMarginal {
            mean,
            std: c.var.max(0.0).sqrt(),
        })
    }

    /// Draw `x_t = μ̂_t + σ̂_t · noise` with caller-supplied standard-normal
    /// noise (determinism stays in the caller's hands).
    pub fn sample_bridge_marginal<D: Dimension>(
        &self,
        x0: ArrayView<f64, D>,
        x_t_end: ArrayView<f64, D>,
        t: f64,
        noise: ArrayView<f64, D>,
    ) -> Result<Array<f64, D>> {
        let marginal = self.bridge_marginal(x0, x_t_end, t)?;
        if noise.shape() != marginal.mean.shape() {
            return Err(Error::ShapeMismatch {
                what: "sample_bridge_marginal: noise",
                expected: marginal.mean.shape().to_vec(),
                got: noise.shape().to_vec(),
            });
        }
        let mut out = marginal.mean;
        Zip::from(&mut out).and(&noise).for_each(|o, &n| *o += marginal.std * n);
        Ok(out)
    }

    /// Endpoint-pinning function `h(x,t) = ∇_{x_t} log p(x_T | x_t)` of the
    /// linear forward SDE.
    ///
    /// VP: `((α_t/α_T) x_T - x_t) / (σ_t² (SNR_t/SNR_T - 1))`;
    /// VE: `(x_T - x_t) / (σ_T² - σ_t²)`.
    /// Requires `t` inside the endpoint guard band (the denominator vanishes
    /// at `t = T`).
    pub fn h_function<D: Dimension>(
        &self,
        x_t: ArrayView<f64, D>,
        t: f64,
        x_t_end: ArrayView<f64, D>,
    ) -> Result<Array<f64, D>> {
        self.check_guard(t)?;
        if x_t.shape() != x_t_end.shape() {
            return Err(Error::ShapeMismatch {
                what: "h_function: x_t vs x_T",
                expected: x_t.shape().to_vec(),
                got: x_t_end.shape().to_vec(),
            });
        }
        let (scale, denom) = match self.kind {
            ScheduleKind::Vp => {
                let r = self.snr_ratio_from_horizon(t)?;
                let s = self.sigma(t)?;
                (
                    self.alpha(t)? / self.alpha(self.t_max)?,
                    s * s * (1.0 / r - 1.0),
                )
            }
            ScheduleKind::Ve => {
                let s_t = self.sigma(t)?;
                let s_end = self.sigma(self.t_max)?;
                (1.0, s_end * s_end - s_t * s_t)
            }
        };
        let mut out = Array::zeros(x_t.raw_dim());
        Zip::from(&mut out)
            .and(&x_t)
            .and(&x_t_end)
            .for_each(|o, &x, &y| *o = (scale * y - x) / denom);
        Ok(out)
    }

    /// Bridge score `∇_{x_t} log q(x_t | x_T)` reconstructed from a denoiser
    /// output `d_out ≈ E[x_0 | x_t, x_T]`:
    ///
    /// `s = (μ̂_t(d_out) - x_t) / σ̂_t²`
    ///
    /// with `μ̂_t(d_out)` the bridge-marginal mean evaluated at `x_0 = d_out`.
    pub fn score_from_denoiser<D: Dimension>(
        &self,
        x_t: ArrayView<f64, D>,
        t: f64,
        x_t_end: ArrayView<f64, D>,
        d_out: ArrayView<f64, D>,
    ) -> Result<Array<f64, D>> {
        self.check_guard(t)?;
        if x_t.shape() != d_out.shape() || x_t.shape() != x_t_end.shape() {
            return Err(Error::ShapeMismatch {
                what: "score_from_denoiser",
                expected: x_t.shape().to_vec(),
                got: d_out.shape().to_vec(),
            });
        }
        let c = self.bridge_coeffs(t)?;
        let mut out = Array::zeros(x_t.raw_dim());
        Zip::from(&mut out)
            .and(&x_t)
            .and(&x_t_end)
            .and(&d_out)
            .for_each(|o, &x, &y, &d| {
                *o = (c.c_endpoint * y + c.c_data * d - x) / c.var;
            });
        Ok(out)
    }
}
