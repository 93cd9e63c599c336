//! Effective channels, per-phase SINRs, the relay matched-filter SINR and the
//! sum rate. Every optimizer and baseline is scored with these functions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Watts.
    pub p_bs_max: f64,
    /// Watts.
    pub p_r_max: f64,
    /// Per-user noise variance, watts.
    pub sigma_k2: Vec<f64>,
    /// Relay noise variance, watts.
    pub sigma_r2: f64,
    /// Linear decoding threshold at the relay.
    pub gamma_r_th: f64,
}

pub const DEFAULT_POWER_W: f64 = 0.01;
pub const DEFAULT_NOISE_W: f64 = 1e-11;
pub const DEFAULT_GAMMA_R_TH: f64 = 10.0;

impl SystemParams {
    pub fn with_defaults(k: usize) -> Self {
        Self {
            p_bs_max: DEFAULT_POWER_W,
            p_r_max: DEFAULT_POWER_W,
            sigma_k2: vec![DEFAULT_NOISE_W; k],
            sigma_r2: DEFAULT_NOISE_W,
            gamma_r_th: DEFAULT_GAMMA_R_TH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, v: f64| Error::Validation {
            field: field.to_string(),
            message: format!("must be positive and finite, got {v}"),
        };
        for (f, v) in [
            ("p_bs_max", self.p_bs_max),
            ("p_r_max", self.p_r_max),
            ("sigma_r2", self.sigma_r2),
            ("gamma_r_th", self.gamma_r_th),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(f, v));
            }
        }
        if let Some(&v) = self.sigma_k2.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(bad("sigma_k2", v));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamformingState {
    /// `M × K`, column `k` is `g_k`.
    pub g: CMat,
    /// `L × K`, column `k` is `f_k`.
    pub f: CMat,
    /// IRS reflection coefficients.
    pub theta: CVec,
}

impl BeamformingState {
    pub fn bs_power(&self) -> f64 {
        self.g.norm_squared()
    }

    pub fn relay_power(&self) -> f64 {
        self.f.norm_squared()
    }

    pub fn max_modulus(&self) -> f64 {
        self.theta.iter().map(|t| t.norm()).fold(0.0, f64::max)
    }

    /// Checks the power and modulus limits with an absolute slack `tol`.
    pub fn check_limits(&self, params: &SystemParams, tol: f64) -> std::result::Result<(), String> {
        if self.bs_power() > params.p_bs_max + tol {
            return Err(format!("BS power {} > {}", self.bs_power(), params.p_bs_max));
        }
        if self.relay_power() > params.p_r_max + tol {
            return Err(format!("relay power {} > {}", self.relay_power(), params.p_r_max));
        }
        if self.max_modulus() > 1.0 + tol {
            return Err(format!("|θ| reaches {}", self.max_modulus()));
        }
        Ok(())
    }
}

/// How the IRS takes part in the two phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IrsUsage {
    /// Same `θ` in both phases.
    #[default]
    BothPhases,
    /// `θ` in the first phase, IRS switched off (`θ = 0`) in the second.
    FirstPhaseOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveChannels {
    /// `K × M`, row `k` is `h'_BS,k`.
    pub h_bs_users: CMat,
    /// `L × M`.
    pub h_bs_r: CMat,
    /// `K × L`, row `k` is `h'_R,k`.
    pub h_r_users: CMat,
}

fn scale_columns(m: &CMat, theta: &CVec) -> CMat {
    let mut out = m.clone();
    for (j, t) in theta.iter().enumerate() {
        for v in out.column_mut(j).iter_mut() {
            *v *= t;
        }
    }
    out
}

fn check_theta(ch: &ChannelSet, theta: &CVec) -> Result<()> {
    ch.validate()?;
    if theta.len() != ch.h_bs_irs.nrows() {
        return Err(Error::Dimension(format!(
            "θ has {} entries, IRS has {}",
            theta.len(),
            ch.h_bs_irs.nrows()
        )));
    }
    Ok(())
}

/// Cascaded-plus-direct channels for `Θ = diag(θ)`.
pub fn effective_channels(ch: &ChannelSet, theta: &CVec) -> Result<EffectiveChannels> {
    check_theta(ch, theta)?;
    let irs_users = scale_columns(&ch.h_irs_users, theta);
    let mut r_irs_theta = ch.h_r_irs.adjoint();
    r_irs_theta = scale_columns(&r_irs_theta, theta);
    Ok(EffectiveChannels {
        h_bs_users: &irs_users * &ch.h_bs_irs + &ch.h_bs_users,
        h_bs_r: r_irs_theta * &ch.h_bs_irs + &ch.h_bs_r,
        h_r_users: &irs_users * &ch.h_r_irs + &ch.h_r_users,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinrReport {
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub gamma_r: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sum_rate: f64,
}

impl SinrReport {
    pub fn min_relay_sinr(&self) -> f64 {
        self.gamma_r.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `|h_k w_k|² / (Σ_{j≠k} |h_k w_j|² + σ_k²)` for every row `h_k` of `h`.
pub fn phase_sinrs(h: &CMat, w: &CMat, sigma2: &[f64]) -> Vec<f64> {
    let hw = h * w;
    (0..h.nrows())
        .map(|k| {
            let signal = hw[(k, k)].norm_sqr();
            let interference: f64 = (0..w.ncols()).filter(|&j| j != k).map(|j| hw[(k, j)].norm_sqr()).sum();
            signal / (interference + sigma2[k])
        })
        .collect()
}

/// Matched-filter SINR for the filter weights `α_k` given as columns.
pub fn mf_sinr_from_alpha(alpha: &CMat, sigma_r2: f64) -> Vec<f64> {
    let gram = alpha.adjoint() * alpha;
    (0..alpha.ncols())
        .map(|k| {
            let nk = gram[(k, k)].re;
            if nk <= 0.0 {
                return 0.0;
            }
            let cross: f64 = (0..alpha.ncols())
                .filter(|&j| j != k)
                .map(|j| gram[(k, j)].norm_sqr())
                .sum();
            nk * nk / (cross + sigma_r2 * nk)
        })
        .collect()
}

pub fn relay_mf_sinr(ch: &ChannelSet, g: &CMat, theta: &CVec, params: &SystemParams) -> Result<Vec<f64>> {
    let eff = effective_channels(ch, theta)?;
    Ok(mf_sinr_from_alpha(&(&eff.h_bs_r * g), params.sigma_r2))
}

pub fn sinr_report(ch: &ChannelSet, state: &BeamformingState, params: &SystemParams) -> Result<SinrReport> {
    sinr_report_with(ch, state, params, IrsUsage::BothPhases)
}

pub fn sinr_report_with(
    ch: &ChannelSet,
    state: &BeamformingState,
    params: &SystemParams,
    usage: IrsUsage,
) -> Result<SinrReport> {
    let d = ch.dims();
    if state.g.shape() != (d.m, d.k) || state.f.shape() != (d.l, d.k) || params.sigma_k2.len() != d.k {
        return Err(Error::Dimension(format!(
            "G is {:?}, F is {:?}, {} noise powers for dims {d:?}",
            state.g.shape(),
            state.f.shape(),
            params.sigma_k2.len()
        )));
    }
    let eff1 = effective_channels(ch, &state.theta)?;
    let h_r_users = match usage {
        IrsUsage::BothPhases => eff1.h_r_users.clone(),
        IrsUsage::FirstPhaseOnly => ch.h_r_users.clone(),
    };
    let gamma1 = phase_sinrs(&eff1.h_bs_users, &state.g, &params.sigma_k2);
    let gamma2 = phase_sinrs(&h_r_users, &state.f, &params.sigma_k2);
    let gamma_r = mf_sinr_from_alpha(&(&eff1.h_bs_r * &state.g), params.sigma_r2);
    let gamma: Vec<f64> = gamma1.iter().zip(&gamma2).map(|(a, b)| a + b).collect();
    let sum_rate = sum_rate(&gamma)?;
    Ok(SinrReport {
        gamma1,
        gamma2,
        gamma_r,
        gamma,
        sum_rate,
    })
}

/// `½ Σ log2(1 + γ_k)` in bits/s/Hz.
pub fn sum_rate(gammas: &[f64]) -> Result<f64> {
    if let Some(&g) = gammas.iter().find(|g| !(**g >= 0.0)) {
        return Err(Error::NegativeSinr(g));
    }
    Ok(0.5 * gammas.iter().map(|g| g.ln_1p()).sum::<f64>() / std::f64::consts::LN_2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftedChannels {
    /// `(N+1) × M`: `[diag(h_IRS,k) H_BS,IRS; h_BS,k]`.
    pub h_b_i: CMat,
    /// `(N+1) × L`: `[diag(h_IRS,k) H_R,IRS; h_R,k]`.
    pub h_r_i: CMat,
}

pub fn lifted_channel_matrices(ch: &ChannelSet, k: usize) -> Result<LiftedChannels> {
    ch.validate()?;
    let d = ch.dims();
    if k >= d.k {
        return Err(Error::Dimension(format!("user {k} out of range for K = {}", d.k)));
    }
    let stack = |cascade: &CMat, direct: &CMat| {
        let mut out = DMatrix::zeros(d.n + 1, cascade.ncols());
        for n in 0..d.n {
            let a = ch.h_irs_users[(k, n)];
            for c in 0..cascade.ncols() {
                out[(n, c)] = a * cascade[(n, c)];
            }
        }
        out.row_mut(d.n).copy_from(&direct.row(k));
        out
    };
    Ok(LiftedChannels {
        h_b_i: stack(&ch.h_bs_irs, &ch.h_bs_users),
        h_r_i: stack(&ch.h_r_irs, &ch.h_r_users),
    })
}

/// `φ = [θ; 1]ᴴ` as a column, i.e. `[conj(θ); 1]`.
pub fn lift_theta(theta: &CVec) -> CVec {
    let n = theta.len();
    CVec::from_fn(n + 1, |i, _| if i < n { theta[i].conj() } else { C64::new(1.0, 0.0) })
}

/// Inverse of [`lift_theta`] after normalizing the last entry to one.
pub fn theta_from_phi(phi: &CVec) -> CVec {
    let n = phi.len() - 1;
    let pivot = phi[n];
    CVec::from_fn(n, |i, _| (phi[i] / pivot).conj())
}
