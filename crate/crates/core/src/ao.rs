//! Alternating optimization over the BS, relay and IRS beamformers, and the
//! benchmark schemes built on it.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::conic::{SolveOptions, SolveStatus};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::subproblems::{run_sca, RandomizationOptions, ScaOptions, SubproblemContext, SubproblemKind};
use crate::system::{
    effective_channels, mf_sinr_from_alpha, sinr_report_with, BeamformingState, IrsUsage, SinrReport, SystemParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Joint BS, relay and IRS design.
    Proposed,
    /// IRS switched off.
    RelayOnly,
    /// IRS phases drawn at random and never optimized.
    RandomIrs,
    /// IRS optimized for the first phase and switched off in the second.
    Independent,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::RelayOnly,
        Scheme::RandomIrs,
        Scheme::Independent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::RelayOnly => "relay_only",
            Scheme::RandomIrs => "random_irs",
            Scheme::Independent => "independent",
        }
    }

    pub fn usage(self) -> IrsUsage {
        match self {
            Scheme::Independent => IrsUsage::FirstPhaseOnly,
            _ => IrsUsage::BothPhases,
        }
    }

    pub fn optimizes_irs(self) -> bool {
        matches!(self, Scheme::Proposed | Scheme::Independent)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name() == key || sch.name().replace('_', "") == key)
            .ok_or_else(|| Error::Parse(format!("unknown scheme `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Bs,
    Relay,
    Irs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AoConfig {
    pub max_outer_iters: usize,
    /// bits/s/Hz
    pub outer_tol: f64,
    pub sca_inner_iters: usize,
    /// bits/s/Hz
    pub sca_tol: f64,
    pub randomization_samples: usize,
    pub rank_one_ratio: f64,
    pub restore_attempts: usize,
    pub order: Vec<Block>,
    pub solver_gap_tol: f64,
    pub solver_feas_tol: f64,
    pub solver_max_iters: usize,
}

impl Default for AoConfig {
    fn default() -> Self {
        let solver = SolveOptions::default();
        Self {
            max_outer_iters: 20,
            outer_tol: 1e-3,
            sca_inner_iters: 5,
            sca_tol: 1e-4,
            randomization_samples: 200,
            rank_one_ratio: 1e-6,
            restore_attempts: 4,
            order: vec![Block::Bs, Block::Relay, Block::Irs],
            solver_gap_tol: solver.gap_tol,
            solver_feas_tol: solver.feas_tol,
            solver_max_iters: solver.max_iter,
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, message: &str| {
            Err(Error::Validation {
                field: field.into(),
                message: message.into(),
            })
        };
        let counts = [
            ("max_outer_iters", self.max_outer_iters),
            ("sca_inner_iters", self.sca_inner_iters),
            ("randomization_samples", self.randomization_samples),
            ("solver_max_iters", self.solver_max_iters),
        ];
        for (f, v) in counts {
            if v == 0 {
                return fail(f, "must be positive");
            }
        }
        let reals = [
            ("outer_tol", self.outer_tol),
            ("sca_tol", self.sca_tol),
            ("rank_one_ratio", self.rank_one_ratio),
            ("solver_gap_tol", self.solver_gap_tol),
            ("solver_feas_tol", self.solver_feas_tol),
        ];
        for (f, v) in reals {
            if !(v > 0.0 && v.is_finite()) {
                return fail(f, "must be positive and finite");
            }
        }
        if self.order.is_empty() {
            return fail("order", "must name at least one block");
        }
        Ok(())
    }

    fn solver(&self) -> SolveOptions {
        SolveOptions {
            gap_tol: self.solver_gap_tol,
            feas_tol: self.solver_feas_tol,
            max_iter: self.solver_max_iters,
            ..SolveOptions::default()
        }
    }

    fn sca(&self) -> ScaOptions {
        ScaOptions {
            max_iters: self.sca_inner_iters,
            tol: self.sca_tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AoStatus {
    Converged,
    MaxIter,
}

/// One subproblem pass within an outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub outer: usize,
    pub block: Block,
    /// User index for BS steps.
    pub user: Option<usize>,
    pub surrogates: Vec<f64>,
    pub statuses: Vec<SolveStatus>,
    pub solver_iterations: usize,
    pub accepted: usize,
    /// True sum rate after the step.
    pub sum_rate: f64,
    /// Relay constraints hold at the incumbent after the step.
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AoTrace {
    /// True sum rate at the start and after every outer iteration.
    pub sum_rates: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub eff_gamma_th: f64,
    pub restorations: usize,
    pub status: AoStatus,
}

impl AoTrace {
    pub fn outer_iters(&self) -> usize {
        self.sum_rates.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct AoOutcome {
    pub state: BeamformingState,
    pub trace: AoTrace,
    pub report: SinrReport,
}

const THETA_STREAM: u64 = 1;
const RANDOMIZATION_STREAM: u64 = 2;

fn unit(v: CVec) -> CVec {
    let n = v.norm();
    if n > 0.0 {
        v / C64::new(n, 0.0)
    } else {
        v
    }
}

/// Columns matched to the rows of `h`, equal power, total power `p`.
fn matched_filter(h: &CMat, p: f64) -> CMat {
    let k = h.nrows();
    let per = C64::new((p / k as f64).sqrt(), 0.0);
    let cols: Vec<CVec> = (0..k).map(|i| unit(h.row(i).adjoint()) * per).collect();
    CMat::from_columns(&cols)
}

/// Random unit-modulus phases, or zero for the relay-only scheme.
pub fn initial_theta(n: usize, scheme: Scheme, seed: u64) -> CVec {
    if scheme == Scheme::RelayOnly {
        return CVec::zeros(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(THETA_STREAM);
    CVec::from_fn(n, |_, _| {
        C64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>())
    })
}

/// Matched-filter beamformers at full power on the effective channels.
pub fn initialize_state(ch: &ChannelSet, params: &SystemParams, scheme: Scheme, seed: u64) -> Result<BeamformingState> {
    let theta = initial_theta(ch.dims().n, scheme, seed);
    let eff = effective_channels(ch, &theta)?;
    let h2 = match scheme.usage() {
        IrsUsage::BothPhases => &eff.h_r_users,
        IrsUsage::FirstPhaseOnly => &ch.h_r_users,
    };
    Ok(BeamformingState {
        g: matched_filter(&eff.h_bs_users, params.p_bs_max),
        f: matched_filter(h2, params.p_r_max),
        theta,
    })
}

/// BS beamformers that orthogonalize the relay filter weights and equalize
/// the relay SINRs, at full power.
fn relay_max_min(h_bs_r: &CMat, k: usize, p: f64) -> Option<CMat> {
    let svd = h_bs_r.clone().svd(false, true);
    let v_t = svd.v_t?;
    let s = &svd.singular_values;
    // singular values come sorted in descending order
    if s.len() < k || !(s[k - 1] > 0.0) {
        return None;
    }
    let inv: Vec<f64> = (0..k).map(|i| 1.0 / (s[i] * s[i])).collect();
    let total: f64 = inv.iter().sum();
    let cols: Vec<CVec> = (0..k)
        .map(|i| v_t.row(i).adjoint() * C64::new((p * inv[i] / total).sqrt(), 0.0))
        .collect();
    Some(CMat::from_columns(&cols))
}

const BLEND_STEPS: usize = 20;

/// Smallest blend of `g` toward the relay max-min design that meets the
/// relay threshold, rescaled to full power.
pub fn relay_feasible_bs(
    ch: &ChannelSet,
    state: &BeamformingState,
    params: &SystemParams,
    threshold: f64,
) -> Result<Option<CMat>> {
    let eff = effective_channels(ch, &state.theta)?;
    let h_r = eff.h_bs_r;
    let ok = |g: &CMat| {
        mf_sinr_from_alpha(&(&h_r * g), params.sigma_r2)
            .iter()
            .all(|&x| x >= threshold * (1.0 + 1e-9))
    };
    if ok(&state.g) {
        return Ok(Some(state.g.clone()));
    }
    let Some(target) = relay_max_min(&h_r, state.g.ncols(), params.p_bs_max) else {
        return Ok(None);
    };
    for step in 1..=BLEND_STEPS {
        let t = step as f64 / BLEND_STEPS as f64;
        let mix = &state.g * C64::new(1.0 - t, 0.0) + &target * C64::new(t, 0.0);
        let norm = mix.norm();
        if !(norm > 0.0) {
            continue;
        }
        let g = mix * C64::new(params.p_bs_max.sqrt() / norm, 0.0);
        if ok(&g) {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Halves `threshold` until `feasible` accepts it, at most `attempts` times.
pub fn restore_threshold(
    threshold: f64,
    attempts: usize,
    mut feasible: impl FnMut(f64) -> Result<bool>,
) -> Result<f64> {
    let mut th = threshold;
    for halvings in 0..=attempts {
        if feasible(th)? {
            if halvings > 0 {
                log::info!("relay threshold lowered from {threshold} to {th}");
            }
            return Ok(th);
        }
        th /= 2.0;
    }
    Err(Error::RestorationExhausted { attempts })
}

/// Effective relay threshold at which a relay-feasible BS design exists
/// for the state's IRS configuration.
pub fn feasibility_restore(
    ch: &ChannelSet,
    state: &BeamformingState,
    params: &SystemParams,
    config: &AoConfig,
) -> Result<f64> {
    restore_threshold(params.gamma_r_th, config.restore_attempts, |th| {
        Ok(relay_feasible_bs(ch, state, params, th)?.is_some())
    })
}

pub fn run_ao(
    ch: &ChannelSet,
    params: &SystemParams,
    config: &AoConfig,
    scheme: Scheme,
    seed: u64,
) -> Result<AoOutcome> {
    params.validate()?;
    config.validate()?;
    let usage = scheme.usage();
    let k_users = ch.dims().k;
    let mut state = initialize_state(ch, params, scheme, seed)?;
    let mut th = feasibility_restore(ch, &state, params, config)?;
    let mut restorations = (params.gamma_r_th / th).log2().round() as usize;
    state.g = relay_feasible_bs(ch, &state, params, th)?.ok_or(Error::NoFeasibleCandidate)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RANDOMIZATION_STREAM);
    let mut ctx = SubproblemContext {
        gamma_r_th: th,
        usage,
        randomization: RandomizationOptions {
            samples: config.randomization_samples,
            rank_one_ratio: config.rank_one_ratio,
        },
        solver: config.solver(),
    };
    let sca = config.sca();

    let mut rate = sinr_report_with(ch, &state, params, usage)?.sum_rate;
    let mut trace = AoTrace {
        sum_rates: vec![rate],
        steps: Vec::new(),
        eff_gamma_th: th,
        restorations,
        status: AoStatus::MaxIter,
    };

    for outer in 0..config.max_outer_iters {
        for &block in &config.order {
            let kinds: Vec<SubproblemKind> = match block {
                Block::Bs => (0..k_users).map(SubproblemKind::Bs).collect(),
                Block::Relay => vec![SubproblemKind::Relay],
                Block::Irs if scheme.optimizes_irs() => vec![SubproblemKind::Irs],
                Block::Irs => vec![],
            };
            for kind in kinds {
                let mut out = run_sca(kind, ch, &state, params, &ctx, &sca, &mut rng)?;
                if out.infeasible && matches!(kind, SubproblemKind::Bs(_)) && restorations < config.restore_attempts {
                    // the incumbent stays feasible at any lower threshold
                    th /= 2.0;
                    restorations += 1;
                    ctx.gamma_r_th = th;
                    log::info!("BS subproblem infeasible, relay threshold lowered to {th}");
                    out = run_sca(kind, ch, &state, params, &ctx, &sca, &mut rng)?;
                }
                state = out.state;
                let report = sinr_report_with(ch, &state, params, usage)?;
                trace.steps.push(StepRecord {
                    outer,
                    block,
                    user: match kind {
                        SubproblemKind::Bs(k) => Some(k),
                        _ => None,
                    },
                    surrogates: out.surrogates,
                    statuses: out.statuses,
                    solver_iterations: out.solver_iterations,
                    accepted: out.accepted,
                    sum_rate: report.sum_rate,
                    feasible: ctx.relay_ok(&report),
                });
            }
        }
        let new_rate = sinr_report_with(ch, &state, params, usage)?.sum_rate;
        trace.sum_rates.push(new_rate);
        let gain = new_rate - rate;
        rate = new_rate;
        if gain < config.outer_tol {
            trace.status = AoStatus::Converged;
            break;
        }
    }
    trace.eff_gamma_th = th;
    trace.restorations = restorations;
    let report = sinr_report_with(ch, &state, params, usage)?;
    Ok(AoOutcome { state, trace, report })
}

/// Final figures of one scheme on one channel realization.
#[derive(Clone, Debug)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub sum_rate: f64,
    pub report: SinrReport,
    pub state: BeamformingState,
    pub feasible: bool,
    pub eff_gamma_th: f64,
    pub outer_iters: usize,
    pub trace: AoTrace,
}

pub fn run_scheme(
    scheme: Scheme,
    ch: &ChannelSet,
    params: &SystemParams,
    config: &AoConfig,
    seed: u64,
) -> Result<SchemeResult> {
    let out = run_ao(ch, params, config, scheme, seed)?;
    let feasible =
        out.report.min_relay_sinr() >= out.trace.eff_gamma_th - 1e-4 && out.state.check_limits(params, 1e-6).is_ok();
    Ok(SchemeResult {
        scheme,
        sum_rate: out.report.sum_rate,
        report: out.report,
        state: out.state,
        feasible,
        eff_gamma_th: out.trace.eff_gamma_th,
        outer_iters: out.trace.outer_iters(),
        trace: out.trace,
    })
}
