//! The three convexified beamforming subproblems (BS, relay, IRS), their
//! slack-variable machinery and rank-one recovery.
//!
//! All subproblems work in noise-normalized units: signal and interference
//! powers are divided by the receiver noise, and lifted beamformers by their
//! power budget, so every slack is dimensionless. Slack pairs are further
//! rescaled per user around their local point, which keeps the conic
//! problems well conditioned when SINRs span several decades.

mod bs;
mod irs;
pub mod randomize;
mod relay;
pub mod taylor;

use rand::Rng;

use crate::channel::ChannelSet;
use crate::conic::epigraph::{emit_epigraph_blocks, Epigraph};
use crate::conic::{
    solve, ConicProblem, ConicSolution, HermBlock, LinExpr, ProblemBuilder, SolveOptions, SolveStatus, Var,
};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, CMat, HermMat, C64};
use crate::system::{effective_channels, sinr_report_with, BeamformingState, IrsUsage, SinrReport, SystemParams};

pub use bs::build_bs_sdp;
pub use irs::build_irs_sdp;
pub use randomize::{randomize_rank_one, RandomizationOptions, RecoveryTarget};
pub use relay::build_relay_sdp;
pub use taylor::{taylor_bound_rate, taylor_bound_u, taylor_bound_v, AffineBound};

/// Signal powers below this (in SNR units) are treated as this value when
/// forming local points.
const SIGNAL_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlackLocalPoint {
    pub s_loc: f64,
    pub i_loc: f64,
}

impl SlackLocalPoint {
    /// Local point of a user pair with signal `t` and interference-plus-noise `j`.
    pub fn from_ratio(t: f64, j: f64) -> Self {
        Self {
            s_loc: 1.0 / t.max(SIGNAL_FLOOR),
            i_loc: j.max(SIGNAL_FLOOR),
        }
    }

    /// Local point of a relay pair, whose signal term enters squared.
    pub fn from_relay(t: f64, j: f64) -> Self {
        let t = t.max(SIGNAL_FLOOR);
        Self {
            s_loc: 1.0 / (t * t),
            i_loc: j.max(SIGNAL_FLOOR),
        }
    }

    pub fn sinr(&self) -> f64 {
        1.0 / (self.s_loc * self.i_loc)
    }
}

/// Taylor points for every slack pair, per user.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPoints {
    pub phase1: Vec<SlackLocalPoint>,
    pub phase2: Vec<SlackLocalPoint>,
    pub relay: Vec<SlackLocalPoint>,
}

fn ratio_points(h: &CMat, w: &CMat, sigma2: &[f64]) -> Vec<SlackLocalPoint> {
    let hw = h * w;
    (0..h.nrows())
        .map(|k| {
            let t = hw[(k, k)].norm_sqr() / sigma2[k];
            let j = 1.0
                + (0..w.ncols())
                    .filter(|&j| j != k)
                    .map(|j| hw[(k, j)].norm_sqr())
                    .sum::<f64>()
                    / sigma2[k];
            SlackLocalPoint::from_ratio(t, j)
        })
        .collect()
}

impl LocalPoints {
    /// Slack values that make every slack constraint tight at `state`.
    pub fn at_state(ch: &ChannelSet, state: &BeamformingState, params: &SystemParams, usage: IrsUsage) -> Result<Self> {
        let eff = effective_channels(ch, &state.theta)?;
        let h2 = match usage {
            IrsUsage::BothPhases => &eff.h_r_users,
            IrsUsage::FirstPhaseOnly => &ch.h_r_users,
        };
        let alpha = (&eff.h_bs_r * &state.g) / C64::new(params.sigma_r2.sqrt(), 0.0);
        let gram = alpha.adjoint() * &alpha;
        let k = state.g.ncols();
        let relay = (0..k)
            .map(|a| {
                let t = gram[(a, a)].re;
                let j = t + (0..k).filter(|&b| b != a).map(|b| gram[(a, b)].norm_sqr()).sum::<f64>();
                SlackLocalPoint::from_relay(t, j)
            })
            .collect();
        Ok(Self {
            phase1: ratio_points(&eff.h_bs_users, &state.g, &params.sigma_k2),
            phase2: ratio_points(h2, &state.f, &params.sigma_k2),
            relay,
        })
    }
}

/// Settings shared by every subproblem solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubproblemContext {
    /// Relay decoding threshold in force (after any restoration).
    pub gamma_r_th: f64,
    pub usage: IrsUsage,
    pub randomization: RandomizationOptions,
    pub solver: SolveOptions,
}

impl SubproblemContext {
    pub fn new(params: &SystemParams) -> Self {
        Self {
            gamma_r_th: params.gamma_r_th,
            usage: IrsUsage::BothPhases,
            randomization: RandomizationOptions::default(),
            solver: SolveOptions::default(),
        }
    }

    /// Relay feasibility test applied to recovered candidates.
    pub fn relay_ok(&self, report: &SinrReport) -> bool {
        report.min_relay_sinr() >= self.gamma_r_th * (1.0 - 1e-9)
    }
}

/// Slack pair of one user in one context, with everything needed to
/// evaluate the pair exactly at a solution.
#[derive(Clone, Debug)]
struct Pair {
    /// `T` for a rate pair, `t` (entering squared) for a relay pair.
    signal: LinExpr,
    /// Exact interference-plus-noise is `base + Σ squares²`.
    base: LinExpr,
    squares: Vec<LinExpr>,
    relay: bool,
    /// 1 or 2 for rate pairs, 0 for relay pairs.
    phase: u8,
    loc: SlackLocalPoint,
    /// Slack expressions in normalized (unscaled) units.
    s: LinExpr,
    i: LinExpr,
}

impl Pair {
    fn exact(&self, sol: &ConicSolution) -> (f64, f64) {
        let t = sol.eval(&self.signal).max(0.0);
        let j = sol.eval(&self.base) + self.squares.iter().map(|q| sol.eval(q).powi(2)).sum::<f64>();
        (t, j)
    }

    fn exact_ratio(&self, sol: &ConicSolution) -> f64 {
        let (t, j) = self.exact(sol);
        if self.relay {
            t * t / j
        } else {
            t / j
        }
    }

    fn exact_local_point(&self, sol: &ConicSolution) -> SlackLocalPoint {
        let (t, j) = self.exact(sol);
        if self.relay {
            SlackLocalPoint::from_relay(t, j)
        } else {
            SlackLocalPoint::from_ratio(t, j)
        }
    }
}

/// Adds the slack pair `S ≥ 1/T`, `I ≥ J` of a rate term. `interference`
/// is the affine upper model of `J` used in the constraint.
fn emit_rate_pair(
    b: &mut ProblemBuilder,
    phase: u8,
    signal: LinExpr,
    interference: LinExpr,
    base: LinExpr,
    squares: Vec<LinExpr>,
    loc: SlackLocalPoint,
) -> Result<Pair> {
    let c = (loc.i_loc / loc.s_loc).sqrt();
    let frag = emit_epigraph_blocks(
        b,
        Epigraph::Hyperbolic {
            u: None,
            v: Some(signal.clone() * (1.0 / c)),
            w: LinExpr::constant(1.0),
        },
    )?;
    let i_scaled = b.add_nonneg();
    b.add_le(interference * (1.0 / c) - LinExpr::var(i_scaled), 0.0);
    Ok(Pair {
        signal,
        base,
        squares,
        relay: false,
        phase,
        loc,
        s: LinExpr::term(frag.slots[0], 1.0 / c),
        i: LinExpr::term(i_scaled, c),
    })
}

/// Adds the relay slack pair `S ≥ 1/t²`, `I ≥ J`.
fn emit_relay_pair(
    b: &mut ProblemBuilder,
    signal: LinExpr,
    interference: LinExpr,
    base: LinExpr,
    squares: Vec<LinExpr>,
    loc: SlackLocalPoint,
) -> Result<Pair> {
    let t0 = loc.s_loc.sqrt().recip();
    let scale = t0 * loc.i_loc.sqrt();
    let frag = emit_epigraph_blocks(
        b,
        Epigraph::SquaredLinear {
            t: signal.clone() * (1.0 / t0),
            s: None,
        },
    )?;
    let i_scaled = b.add_nonneg();
    b.add_le(interference * (1.0 / scale) - LinExpr::var(i_scaled), 0.0);
    Ok(Pair {
        signal,
        base,
        squares,
        relay: true,
        phase: 0,
        loc,
        s: LinExpr::term(frag.slots[0], 1.0 / (t0 * t0)),
        i: LinExpr::term(i_scaled, scale),
    })
}

/// Rate terms of one user: `R ≤ Taylor bound of log2(C + Σ 1/(S I))`.
#[derive(Clone, Debug)]
struct UserTerms {
    c: f64,
    rate: Var,
    pairs: Vec<Pair>,
    relay: Option<Pair>,
}

fn emit_rate(b: &mut ProblemBuilder, c: f64, pairs: Vec<Pair>) -> Result<UserTerms> {
    let rate = b.add_free();
    let locs: Vec<(f64, f64)> = pairs.iter().map(|p| (p.loc.s_loc, p.loc.i_loc)).collect();
    let mut bound = LinExpr::constant(if pairs.is_empty() { c.log2() } else { 0.0 });
    for (tb, p) in taylor_bound_rate(c, &locs)?.iter().zip(&pairs) {
        bound = bound + tb.to_expr(&p.s, &p.i);
    }
    b.add_le(LinExpr::var(rate) - bound, 0.0);
    Ok(UserTerms {
        c,
        rate,
        pairs,
        relay: None,
    })
}

fn emit_relay_threshold(b: &mut ProblemBuilder, pair: &Pair, threshold: f64) -> Result<()> {
    let v = taylor_bound_v(pair.loc.s_loc, pair.loc.i_loc)?;
    // normalize the row by the local SINR so its scale does not depend on it
    let scale = 1.0 / v.constant.max(threshold);
    b.add_ge(v.to_expr(&pair.s, &pair.i) * scale, threshold * scale);
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubproblemKind {
    /// BS beamformer of one user.
    Bs(usize),
    Relay,
    Irs,
}

/// A convexified subproblem together with the handles needed to read its
/// solution back.
#[derive(Clone, Debug)]
pub struct BuiltSubproblem {
    pub kind: SubproblemKind,
    pub problem: ConicProblem,
    variables: Vec<HermBlock>,
    users: Vec<UserTerms>,
    /// Local points of pairs that are not part of this subproblem.
    z_locs: LocalPoints,
}

/// Slack values at a solution, normalized units.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackValues {
    /// `(S, I)` per user of each rate pair present, in phase order.
    pub rate: Vec<Vec<(f64, f64)>>,
    pub relay: Vec<Option<(f64, f64)>>,
}

/// What the lifted optimum says before rank-one recovery.
#[derive(Clone, Debug)]
pub struct LiftedEvaluation {
    /// Half the optimal objective, a lower bound on the lifted sum rate.
    pub surrogate: f64,
    /// `½ Σ log2(C + Σ T/J)` with exact slacks at the lifted solution.
    pub lifted_value: f64,
    /// Relay SINR at the lifted solution, per user (empty if not modelled).
    pub lifted_relay_sinr: Vec<f64>,
    pub lifted: Vec<HermMat>,
    pub slacks: SlackValues,
    /// Local points tight at the lifted solution.
    pub exact_local_points: LocalPoints,
}

impl BuiltSubproblem {
    pub fn evaluate(&self, sol: &ConicSolution) -> LiftedEvaluation {
        let mut surrogate = 0.0;
        let mut lifted_value = 0.0;
        let mut relay_sinr = Vec::new();
        let mut rate = Vec::new();
        let mut relay = Vec::new();
        let mut z = self.z_locs.clone();
        for (k, u) in self.users.iter().enumerate() {
            surrogate += 0.5 * sol.value(u.rate);
            let ratios: f64 = u.pairs.iter().map(|p| p.exact_ratio(sol)).sum();
            lifted_value += 0.5 * (u.c + ratios).log2();
            rate.push(u.pairs.iter().map(|p| (sol.eval(&p.s), sol.eval(&p.i))).collect());
            relay.push(u.relay.as_ref().map(|p| (sol.eval(&p.s), sol.eval(&p.i))));
            if let Some(p) = &u.relay {
                relay_sinr.push(p.exact_ratio(sol));
                z.relay[k] = p.exact_local_point(sol);
            }
            for p in &u.pairs {
                let lp = p.exact_local_point(sol);
                if p.phase == 1 {
                    z.phase1[k] = lp;
                } else {
                    z.phase2[k] = lp;
                }
            }
        }
        LiftedEvaluation {
            surrogate,
            lifted_value,
            lifted_relay_sinr: relay_sinr,
            lifted: self.variables.iter().map(|v| v.value(sol)).collect(),
            slacks: SlackValues { rate, relay },
            exact_local_points: z,
        }
    }
}

/// Builds the subproblem of the given kind around `state`.
pub fn build_subproblem(
    kind: SubproblemKind,
    ch: &ChannelSet,
    state: &BeamformingState,
    z_locs: &LocalPoints,
    params: &SystemParams,
    ctx: &SubproblemContext,
) -> Result<BuiltSubproblem> {
    match kind {
        SubproblemKind::Bs(k) => build_bs_sdp(k, ch, state, z_locs, params, ctx),
        SubproblemKind::Relay => build_relay_sdp(ch, state, z_locs, params, ctx),
        SubproblemKind::Irs => build_irs_sdp(ch, state, z_locs, params, ctx),
    }
}

/// One build, solve and rank-one recovery.
#[derive(Clone, Debug)]
pub struct SubproblemSolution {
    /// Recovered state, or `None` if no feasible candidate was found or the
    /// solve was unusable.
    pub state: Option<BeamformingState>,
    /// True sum rate of `state`.
    pub sum_rate: Option<f64>,
    pub status: SolveStatus,
    pub solver_iterations: usize,
    pub lifted: Option<LiftedEvaluation>,
}

impl SubproblemSolution {
    pub fn surrogate(&self) -> Option<f64> {
        self.lifted.as_ref().map(|l| l.surrogate)
    }
}

/// Projects onto the PSD cone by clamping negative eigenvalues.
fn psd_part(x: &HermMat) -> Result<HermMat> {
    let eig = eig_hermitian(x)?;
    let mut v = eig.vectors.clone();
    for (j, l) in eig.values.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        v.column_mut(j).iter_mut().for_each(|z| *z *= s);
    }
    Ok(HermMat::symmetrize(&v * v.adjoint()))
}

fn score_state(ch: &ChannelSet, s: &BeamformingState, params: &SystemParams, ctx: &SubproblemContext) -> Option<f64> {
    let r = sinr_report_with(ch, s, params, ctx.usage).ok()?;
    ctx.relay_ok(&r).then_some(r.sum_rate)
}

fn recover(
    kind: SubproblemKind,
    lifted: &[HermMat],
    ch: &ChannelSet,
    state: &BeamformingState,
    params: &SystemParams,
    ctx: &SubproblemContext,
    rng: &mut impl Rng,
) -> Result<BeamformingState> {
    let lifted: Vec<HermMat> = lifted.iter().map(psd_part).collect::<Result<_>>()?;
    match kind {
        SubproblemKind::Bs(kp) => {
            let others: f64 = (0..state.g.ncols())
                .filter(|&j| j != kp)
                .map(|j| state.g.column(j).norm_squared())
                .sum();
            let budget = (params.p_bs_max - others).max(0.0);
            let power = (params.p_bs_max * lifted[0].trace()).clamp(0.0, budget);
            let mut cand = state.clone();
            let g = randomize_rank_one(
                &lifted[0],
                RecoveryTarget::Power(power),
                |g| {
                    cand.g.set_column(kp, g);
                    score_state(ch, &cand, params, ctx)
                },
                &ctx.randomization,
                rng,
            )?;
            let mut out = state.clone();
            out.g.set_column(kp, &g);
            Ok(out)
        }
        SubproblemKind::Relay => recover_relay(&lifted, ch, state, params, ctx, rng),
        SubproblemKind::Irs => {
            let mut cand = state.clone();
            let phi = randomize_rank_one(
                &lifted[0],
                RecoveryTarget::Irs,
                |phi| {
                    cand.theta = crate::system::theta_from_phi(phi);
                    score_state(ch, &cand, params, ctx)
                },
                &ctx.randomization,
                rng,
            )?;
            let mut out = state.clone();
            out.theta = crate::system::theta_from_phi(&phi);
            Ok(out)
        }
    }
}

/// Joint randomization of all relay beamformers.
fn recover_relay(
    lifted: &[HermMat],
    ch: &ChannelSet,
    state: &BeamformingState,
    params: &SystemParams,
    ctx: &SubproblemContext,
    rng: &mut impl Rng,
) -> Result<BeamformingState> {
    use randomize::{post_process, GaussianSampler};
    let total: f64 = lifted.iter().map(|x| x.trace().max(0.0)).sum();
    let norm = if total > 1.0 { 1.0 / total } else { 1.0 };
    let powers: Vec<f64> = lifted
        .iter()
        .map(|x| params.p_r_max * x.trace().max(0.0) * norm)
        .collect();
    let samplers: Vec<GaussianSampler> = lifted
        .iter()
        .map(|x| GaussianSampler::new(x, ctx.randomization.rank_one_ratio))
        .collect::<Result<_>>()?;
    let assemble = |cols: Vec<Option<crate::linalg::CVec>>| -> Option<BeamformingState> {
        let mut s = state.clone();
        for (k, c) in cols.into_iter().enumerate() {
            s.f.set_column(k, &c?);
        }
        Some(s)
    };
    if samplers.iter().all(|s| s.near_rank_one()) {
        let cols = samplers
            .iter()
            .zip(&powers)
            .map(|(s, &p)| post_process(s.principal().clone(), RecoveryTarget::Power(p)))
            .collect();
        if let Some(s) = assemble(cols) {
            if score_state(ch, &s, params, ctx).is_some() {
                return Ok(s);
            }
        }
    }
    let mut best: Option<(f64, BeamformingState)> = None;
    for _ in 0..ctx.randomization.samples {
        let cols = samplers
            .iter()
            .zip(&powers)
            .map(|(s, &p)| post_process(s.draw(rng), RecoveryTarget::Power(p)))
            .collect();
        let Some(s) = assemble(cols) else { continue };
        if let Some(v) = score_state(ch, &s, params, ctx) {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, s));
            }
        }
    }
    best.map(|(_, s)| s).ok_or(Error::NoFeasibleCandidate)
}

/// Builds, solves and recovers a rank-one update at the given local points.
pub fn solve_subproblem(
    kind: SubproblemKind,
    ch: &ChannelSet,
    state: &BeamformingState,
    z_locs: &LocalPoints,
    params: &SystemParams,
    ctx: &SubproblemContext,
    rng: &mut impl Rng,
) -> Result<SubproblemSolution> {
    let built = build_subproblem(kind, ch, state, z_locs, params, ctx)?;
    let sol = solve(&built.problem, &ctx.solver);
    if sol.status == SolveStatus::Infeasible {
        return Ok(SubproblemSolution {
            state: None,
            sum_rate: None,
            status: sol.status,
            solver_iterations: sol.iterations,
            lifted: None,
        });
    }
    let lifted = built.evaluate(&sol);
    let recovered = match recover(kind, &lifted.lifted, ch, state, params, ctx, rng) {
        Ok(s) => Some(s),
        Err(Error::NoFeasibleCandidate) => None,
        Err(e) => return Err(e),
    };
    let sum_rate = recovered.as_ref().and_then(|s| score_state(ch, s, params, ctx));
    if !sol.is_optimal() {
        log::debug!(
            "{kind:?} subproblem ended with {:?} after {} iterations",
            sol.status,
            sol.iterations
        );
    }
    Ok(SubproblemSolution {
        state: recovered,
        sum_rate,
        status: sol.status,
        solver_iterations: sol.iterations,
        lifted: Some(lifted),
    })
}

/// Outcome of the successive convex approximation loop of one subproblem.
#[derive(Clone, Debug)]
pub struct ScaOutcome {
    pub state: BeamformingState,
    pub sum_rate: f64,
    /// Surrogate value of every solve, in order.
    pub surrogates: Vec<f64>,
    pub statuses: Vec<SolveStatus>,
    pub solver_iterations: usize,
    /// Number of recovered updates that were accepted.
    pub accepted: usize,
    /// The first solve was reported infeasible.
    pub infeasible: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaOptions {
    pub max_iters: usize,
    /// Stop once an accepted update gains less than this (bits/s/Hz).
    pub tol: f64,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self {
            max_iters: 5,
            tol: 1e-4,
        }
    }
}

/// Repeats build, solve and recovery with local points refreshed at the
/// incumbent. A recovered update replaces the incumbent only if it is relay
/// feasible and does not lower the true sum rate.
pub fn run_sca(
    kind: SubproblemKind,
    ch: &ChannelSet,
    state: &BeamformingState,
    params: &SystemParams,
    ctx: &SubproblemContext,
    sca: &ScaOptions,
    rng: &mut impl Rng,
) -> Result<ScaOutcome> {
    let mut incumbent = state.clone();
    let mut rate = sinr_report_with(ch, &incumbent, params, ctx.usage)?.sum_rate;
    let mut out = ScaOutcome {
        state: incumbent.clone(),
        sum_rate: rate,
        surrogates: Vec::new(),
        statuses: Vec::new(),
        solver_iterations: 0,
        accepted: 0,
        infeasible: false,
    };
    for it in 0..sca.max_iters {
        let z = LocalPoints::at_state(ch, &incumbent, params, ctx.usage)?;
        let sol = solve_subproblem(kind, ch, &incumbent, &z, params, ctx, rng)?;
        out.statuses.push(sol.status);
        out.solver_iterations += sol.solver_iterations;
        if let Some(s) = sol.surrogate() {
            out.surrogates.push(s);
        }
        if sol.status == SolveStatus::Infeasible {
            out.infeasible = it == 0;
            break;
        }
        match (sol.state, sol.sum_rate) {
            (Some(s), Some(r)) if r >= rate => {
                let gain = r - rate;
                incumbent = s;
                rate = r;
                out.accepted += 1;
                if gain < sca.tol {
                    break;
                }
            }
            _ => break,
        }
    }
    out.state = incumbent;
    out.sum_rate = rate;
    Ok(out)
}
