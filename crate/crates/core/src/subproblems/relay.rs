//! Relay beamforming, all users jointly.

use super::{emit_rate, emit_rate_pair, BuiltSubproblem, LocalPoints, SubproblemContext, SubproblemKind};
use crate::channel::ChannelSet;
use crate::conic::{LinExpr, ProblemBuilder};
use crate::error::Result;
use crate::linalg::{CVec, HermMat};
use crate::system::{effective_channels, sinr_report_with, BeamformingState, IrsUsage, SystemParams};

/// Lifted variables `X_k = f_k f_kᴴ / P_R`, one per user.
pub fn build_relay_sdp(
    ch: &ChannelSet,
    state: &BeamformingState,
    z_locs: &LocalPoints,
    params: &SystemParams,
    ctx: &SubproblemContext,
) -> Result<BuiltSubproblem> {
    let k_users = state.f.ncols();
    let l = state.f.nrows();
    let p = params.p_r_max;
    let h2 = match ctx.usage {
        IrsUsage::BothPhases => effective_channels(ch, &state.theta)?.h_r_users,
        IrsUsage::FirstPhaseOnly => ch.h_r_users.clone(),
    };
    let report = sinr_report_with(ch, state, params, ctx.usage)?;

    let mut b = ProblemBuilder::new();
    let xs: Vec<_> = (0..k_users).map(|_| b.add_hermitian_block(l)).collect();
    let mut users = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let hk: CVec = h2.row(k).adjoint();
        let quad = &HermMat::outer(&hk) * (p / params.sigma_k2[k]);
        let signal = xs[k].trace_with(&quad);
        let mut interference = LinExpr::constant(1.0);
        for j in (0..k_users).filter(|&j| j != k) {
            interference = interference + xs[j].trace_with(&quad);
        }
        let pair = emit_rate_pair(
            &mut b,
            2,
            signal,
            interference.clone(),
            interference,
            vec![],
            z_locs.phase2[k],
        )?;
        users.push(emit_rate(&mut b, 1.0 + report.gamma1[k], vec![pair])?);
    }
    let mut power = LinExpr::zero();
    for x in &xs {
        power = power + x.trace_with(&HermMat::identity(l));
    }
    b.add_le(power, 1.0);
    let mut objective = LinExpr::zero();
    for u in &users {
        objective = objective + LinExpr::var(u.rate);
    }
    b.maximize(objective);
    Ok(BuiltSubproblem {
        kind: SubproblemKind::Relay,
        problem: b.build(),
        variables: xs,
        users,
        z_locs: z_locs.clone(),
    })
}
