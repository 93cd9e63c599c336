//! BS beamforming for one user with the other users' beamformers fixed.

use super::{
    emit_rate, emit_rate_pair, emit_relay_pair, emit_relay_threshold, BuiltSubproblem, LocalPoints, SubproblemContext,
    SubproblemKind,
};
use crate::channel::ChannelSet;
use crate::conic::{LinExpr, ProblemBuilder};
use crate::error::{Error, Result};
use crate::linalg::{CVec, HermMat, C64};
use crate::system::{effective_channels, sinr_report_with, BeamformingState, SystemParams};

/// Lifted variable `X = g_{k'} g_{k'}ᴴ / P_BS`. Every user keeps its rate and
/// relay slack pairs; users other than `k'` see `X` only through their
/// interference terms.
pub fn build_bs_sdp(
    kp: usize,
    ch: &ChannelSet,
    state: &BeamformingState,
    z_locs: &LocalPoints,
    params: &SystemParams,
    ctx: &SubproblemContext,
) -> Result<BuiltSubproblem> {
    let k_users = state.g.ncols();
    if kp >= k_users {
        return Err(Error::Dimension(format!("user {kp} out of range for K = {k_users}")));
    }
    let m = state.g.nrows();
    let p = params.p_bs_max;
    let eff = effective_channels(ch, &state.theta)?;
    let report = sinr_report_with(ch, state, params, ctx.usage)?;
    let sigma_r = params.sigma_r2.sqrt();

    let mut b = ProblemBuilder::new();
    let x = b.add_hermitian_block(m);

    // user rate pairs
    let h1g = &eff.h_bs_users * &state.g;
    let mut users = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let s2 = params.sigma_k2[k];
        let hk: CVec = eff.h_bs_users.row(k).adjoint();
        let quad = &HermMat::outer(&hk) * (p / s2);
        let signal = if k == kp {
            x.trace_with(&quad)
        } else {
            LinExpr::constant(h1g[(k, k)].norm_sqr() / s2)
        };
        let mut interference = LinExpr::constant(1.0);
        for j in (0..k_users).filter(|&j| j != k) {
            interference = if j == kp {
                interference + x.trace_with(&quad)
            } else {
                interference + h1g[(k, j)].norm_sqr() / s2
            };
        }
        let pair = emit_rate_pair(
            &mut b,
            1,
            signal,
            interference.clone(),
            interference,
            vec![],
            z_locs.phase1[k],
        )?;
        users.push(emit_rate(&mut b, 1.0 + report.gamma2[k], vec![pair])?);
    }

    // relay pairs; α_j = H'_BS,R g_j / σ_R
    let hr = &eff.h_bs_r / C64::new(sigma_r, 0.0);
    let alpha = &hr * &state.g;
    let gram = alpha.adjoint() * &alpha;
    let hr_gram = &HermMat::symmetrize(hr.adjoint() * &hr) * p;
    for k in 0..k_users {
        let (signal, interference) = if k == kp {
            let mut acc = HermMat::zeros(m);
            for j in (0..k_users).filter(|&j| j != kp) {
                let a: CVec = hr.adjoint() * alpha.column(j);
                acc = &acc + &(&HermMat::outer(&a) * p);
            }
            let t = x.trace_with(&hr_gram);
            (t.clone(), t + x.trace_with(&acc))
        } else {
            let t = gram[(k, k)].re;
            let mut j_const = t;
            for j in (0..k_users).filter(|&j| j != k && j != kp) {
                j_const += gram[(k, j)].norm_sqr();
            }
            let a: CVec = hr.adjoint() * alpha.column(k);
            (LinExpr::constant(t), x.trace_with(&(&HermMat::outer(&a) * p)) + j_const)
        };
        let pair = emit_relay_pair(
            &mut b,
            signal,
            interference.clone(),
            interference,
            vec![],
            z_locs.relay[k],
        )?;
        emit_relay_threshold(&mut b, &pair, ctx.gamma_r_th)?;
        users[k].relay = Some(pair);
    }

    let others: f64 = (0..k_users)
        .filter(|&j| j != kp)
        .map(|j| state.g.column(j).norm_squared())
        .sum();
    b.add_le(x.trace_with(&HermMat::identity(m)), (1.0 - others / p).max(0.0));

    let mut objective = LinExpr::zero();
    for u in &users {
        objective = objective + LinExpr::var(u.rate);
    }
    b.maximize(objective);
    Ok(BuiltSubproblem {
        kind: SubproblemKind::Bs(kp),
        problem: b.build(),
        variables: vec![x],
        users,
        z_locs: z_locs.clone(),
    })
}
