//! IRS reflection design over the lifted matrix `Φ = φφᴴ`, `φ = [conj(θ); 1]`.

use super::{
    emit_rate, emit_rate_pair, emit_relay_pair, emit_relay_threshold, BuiltSubproblem, LocalPoints, SubproblemContext,
    SubproblemKind,
};
use crate::channel::ChannelSet;
use crate::conic::epigraph::{emit_epigraph_blocks, Epigraph};
use crate::conic::{HermBlock, LinExpr, ProblemBuilder};
use crate::error::Result;
use crate::linalg::{CMat, CVec, HermMat, C64};
use crate::system::{lifted_channel_matrices, sinr_report_with, BeamformingState, IrsUsage, SystemParams};

/// `tr(M Φ)` split into real and imaginary parts for non-Hermitian `M`.
fn complex_trace(x: &HermBlock, m: &CMat) -> (LinExpr, LinExpr) {
    let re = HermMat::symmetrize(m.clone());
    let im = HermMat::symmetrize(m * C64::new(0.0, -1.0));
    (x.trace_with(&re), x.trace_with(&im))
}

/// Per-user relay filter weight as a linear map of `[θ; 1]`, conjugated so it
/// acts on `φ`: `conj(α_k) = B_k φ`.
fn relay_maps(ch: &ChannelSet, g: &CMat, sigma_r: f64) -> Vec<CMat> {
    let n = ch.h_bs_irs.nrows();
    let l = ch.h_bs_r.nrows();
    let cascade = &ch.h_bs_irs * g;
    let direct = &ch.h_bs_r * g;
    let r_adj = ch.h_r_irs.adjoint();
    (0..g.ncols())
        .map(|k| {
            let mut a = CMat::zeros(l, n + 1);
            for col in 0..n {
                let s = cascade[(col, k)];
                for row in 0..l {
                    a[(row, col)] = r_adj[(row, col)] * s;
                }
            }
            a.set_column(n, &direct.column(k));
            (a / C64::new(sigma_r, 0.0)).map(|z| z.conj())
        })
        .collect()
}

pub fn build_irs_sdp(
    ch: &ChannelSet,
    state: &BeamformingState,
    z_locs: &LocalPoints,
    params: &SystemParams,
    ctx: &SubproblemContext,
) -> Result<BuiltSubproblem> {
    let k_users = state.g.ncols();
    let n = state.theta.len();
    let mut b = ProblemBuilder::new();
    let phi = b.add_hermitian_block(n + 1);

    // with the IRS off in the second phase its SINR is a constant
    let phase2_const = match ctx.usage {
        IrsUsage::BothPhases => None,
        IrsUsage::FirstPhaseOnly => Some(sinr_report_with(ch, state, params, ctx.usage)?.gamma2),
    };

    let mut users = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let s2 = params.sigma_k2[k];
        let lifted = lifted_channel_matrices(ch, k)?;
        let mut pairs = Vec::new();
        let mut phases = vec![(1u8, &lifted.h_b_i * &state.g, z_locs.phase1[k])];
        if phase2_const.is_none() {
            phases.push((2u8, &lifted.h_r_i * &state.f, z_locs.phase2[k]));
        }
        for (phase, cols, loc) in phases {
            let quad = |j: usize| {
                let v: CVec = cols.column(j).into_owned();
                phi.trace_with(&(&HermMat::outer(&v) * (1.0 / s2)))
            };
            let signal = quad(k);
            let mut interference = LinExpr::constant(1.0);
            for j in (0..k_users).filter(|&j| j != k) {
                interference = interference + quad(j);
            }
            pairs.push(emit_rate_pair(
                &mut b,
                phase,
                signal,
                interference.clone(),
                interference,
                vec![],
                loc,
            )?);
        }
        let c = phase2_const.as_ref().map_or(1.0, |g2| 1.0 + g2[k]);
        users.push(emit_rate(&mut b, c, pairs)?);
    }

    // relay: t_k = tr(B_kᴴB_k Φ), α_kᴴα_j = tr(B_jᴴB_k Φ)
    let maps = relay_maps(ch, &state.g, params.sigma_r2.sqrt());
    for k in 0..k_users {
        let loc = z_locs.relay[k];
        let t = phi.trace_with(&HermMat::symmetrize(maps[k].adjoint() * &maps[k]));
        let scale = loc.i_loc.sqrt();
        let mut interference = t.clone();
        let mut squares = Vec::new();
        for j in (0..k_users).filter(|&j| j != k) {
            let (re, im) = complex_trace(&phi, &(maps[j].adjoint() * &maps[k]));
            let frag = emit_epigraph_blocks(
                &mut b,
                Epigraph::QuadraticForm {
                    a: vec![re.clone() * (1.0 / scale), im.clone() * (1.0 / scale)],
                    t: None,
                },
            )?;
            interference = interference + LinExpr::term(frag.slots[0], scale * scale);
            squares.extend([re, im]);
        }
        let pair = emit_relay_pair(&mut b, t.clone(), interference, t, squares, loc)?;
        emit_relay_threshold(&mut b, &pair, ctx.gamma_r_th)?;
        users[k].relay = Some(pair);
    }

    for i in 0..n {
        b.add_le(phi.diag(i), 1.0);
    }
    b.add_eq(phi.diag(n), 1.0);

    let mut objective = LinExpr::zero();
    for u in &users {
        objective = objective + LinExpr::var(u.rate);
    }
    b.maximize(objective);
    Ok(BuiltSubproblem {
        kind: SubproblemKind::Irs,
        problem: b.build(),
        variables: vec![phi],
        users,
        z_locs: z_locs.clone(),
    })
}
