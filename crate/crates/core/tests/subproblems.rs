use irsdf::ao::{feasibility_restore, initialize_state, relay_feasible_bs, AoConfig, Scheme};
use irsdf::channel::{draw_trial, ChannelSet, Dims, LargeScaleParams};
use irsdf::conic::{solve, SolveStatus};
use irsdf::linalg::{CMat, C64};
use irsdf::subproblems::{
    build_subproblem, run_sca, solve_subproblem, LocalPoints, ScaOptions, SubproblemContext, SubproblemKind,
};
use irsdf::system::{sinr_report_with, BeamformingState, IrsUsage, SystemParams};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn desk(seed: u64, n: usize) -> (ChannelSet, SystemParams, BeamformingState) {
    let dims = Dims { m: 4, l: 2, n, k: 2 };
    let (_, ch) = draw_trial(dims, &LargeScaleParams::default(), seed).unwrap();
    let mut params = SystemParams::with_defaults(2);
    let mut state = initialize_state(&ch, &params, Scheme::Proposed, seed).unwrap();
    params.gamma_r_th = feasibility_restore(&ch, &state, &params, &AoConfig::default()).unwrap();
    state.g = relay_feasible_bs(&ch, &state, &params, params.gamma_r_th)
        .unwrap()
        .expect("feasible start");
    (ch, params, state)
}

fn kinds() -> [SubproblemKind; 4] {
    [
        SubproblemKind::Bs(0),
        SubproblemKind::Bs(1),
        SubproblemKind::Relay,
        SubproblemKind::Irs,
    ]
}

#[test]
fn surrogate_is_anchored_and_sound() {
    for seed in 0..4 {
        let (ch, params, state) = desk(seed, 6);
        let ctx = SubproblemContext::new(&params);
        let incumbent = sinr_report_with(&ch, &state, &params, ctx.usage).unwrap().sum_rate;
        let z = LocalPoints::at_state(&ch, &state, &params, ctx.usage).unwrap();
        for kind in kinds() {
            let built = build_subproblem(kind, &ch, &state, &z, &params, &ctx).unwrap();
            irsdf::conic::validate(&built.problem).unwrap();
            let sol = solve(&built.problem, &ctx.solver);
            assert_eq!(sol.status, SolveStatus::Optimal, "{kind:?} seed {seed}");
            let ev = built.evaluate(&sol);
            // the incumbent is feasible with tight slacks
            assert!(
                ev.surrogate >= incumbent - 1e-6,
                "{kind:?}: {} < {incumbent}",
                ev.surrogate
            );
            // Taylor bounds underestimate
            assert!(
                ev.lifted_value >= ev.surrogate - 1e-6,
                "{kind:?}: {} < {}",
                ev.lifted_value,
                ev.surrogate
            );
            for g in &ev.lifted_relay_sinr {
                assert!(
                    *g >= params.gamma_r_th * (1.0 - 1e-5),
                    "{kind:?}: lifted relay SINR {g}"
                );
            }
        }
    }
}

#[test]
fn resolving_at_the_lifted_optimum_does_not_lose_surrogate() {
    for seed in 10..13 {
        let (ch, params, state) = desk(seed, 6);
        let ctx = SubproblemContext::new(&params);
        let z = LocalPoints::at_state(&ch, &state, &params, ctx.usage).unwrap();
        for kind in kinds() {
            let first = build_subproblem(kind, &ch, &state, &z, &params, &ctx).unwrap();
            let ev = first.evaluate(&solve(&first.problem, &ctx.solver));
            let second = build_subproblem(kind, &ch, &state, &ev.exact_local_points, &params, &ctx).unwrap();
            let sol = solve(&second.problem, &ctx.solver);
            assert_eq!(sol.status, SolveStatus::Optimal);
            let again = second.evaluate(&sol);
            assert!(
                again.surrogate >= ev.surrogate - 1e-6,
                "{kind:?}: {} < {}",
                again.surrogate,
                ev.surrogate
            );
        }
    }
}

#[test]
fn recovered_updates_respect_limits() {
    let (ch, params, state) = desk(21, 8);
    let ctx = SubproblemContext::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let z = LocalPoints::at_state(&ch, &state, &params, ctx.usage).unwrap();
    for kind in kinds() {
        let sol = solve_subproblem(kind, &ch, &state, &z, &params, &ctx, &mut rng).unwrap();
        let s = sol.state.expect("a feasible candidate");
        s.check_limits(&params, 1e-6).unwrap();
        assert!(s.max_modulus() <= 1.0 + 1e-9);
        let r = sinr_report_with(&ch, &s, &params, ctx.usage).unwrap();
        assert!(r.min_relay_sinr() >= params.gamma_r_th - 1e-4);
    }
}

#[test]
fn bs_sweep_over_users_never_lowers_the_rate() {
    let (ch, params, mut state) = desk(31, 4);
    let ctx = SubproblemContext::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rate = sinr_report_with(&ch, &state, &params, ctx.usage).unwrap().sum_rate;
    for kp in 0..2 {
        let out = run_sca(
            SubproblemKind::Bs(kp),
            &ch,
            &state,
            &params,
            &ctx,
            &ScaOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(out.sum_rate >= rate - 1e-12);
        for w in out.surrogates.windows(2) {
            assert!(w[1] >= w[0] - 1e-6, "surrogates {:?}", out.surrogates);
        }
        rate = out.sum_rate;
        state = out.state;
    }
}

fn scalar_channels() -> ChannelSet {
    let s = |re: f64, im: f64| DMatrix::from_element(1, 1, C64::new(re, im));
    // SNR-scale gains with unit noise
    ChannelSet {
        h_bs_r: s(3e-3, 1e-3),
        h_bs_irs: s(1e-3, 0.0),
        h_bs_users: s(2e-4, -1e-4),
        h_r_irs: s(1e-3, 1e-3),
        h_r_users: s(1e-3, 5e-4),
        h_irs_users: s(1e-3, 0.0),
    }
}

fn scalar_params() -> SystemParams {
    SystemParams {
        p_bs_max: 0.01,
        p_r_max: 0.01,
        sigma_k2: vec![1e-11],
        sigma_r2: 1e-11,
        gamma_r_th: 1.0,
    }
}

#[test]
fn scalar_bs_and_relay_reach_full_power() {
    let ch = scalar_channels();
    let params = scalar_params();
    let half = C64::new((params.p_bs_max / 2.0).sqrt(), 0.0);
    let state = BeamformingState {
        g: DMatrix::from_element(1, 1, half),
        f: DMatrix::from_element(1, 1, half),
        theta: nalgebra::dvector![C64::new(0.0, 0.0)],
    };
    let ctx = SubproblemContext::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let bs = run_sca(
        SubproblemKind::Bs(0),
        &ch,
        &state,
        &params,
        &ctx,
        &ScaOptions::default(),
        &mut rng,
    )
    .unwrap();
    assert!((bs.state.bs_power() - params.p_bs_max).abs() < 1e-6 * params.p_bs_max);
    let relay = run_sca(
        SubproblemKind::Relay,
        &ch,
        &state,
        &params,
        &ctx,
        &ScaOptions::default(),
        &mut rng,
    )
    .unwrap();
    assert!((relay.state.relay_power() - params.p_r_max).abs() < 1e-6 * params.p_r_max);
}

#[test]
fn more_relay_power_never_hurts_the_surrogate() {
    let (ch, params, state) = desk(41, 4);
    let ctx = SubproblemContext::new(&params);
    let z = LocalPoints::at_state(&ch, &state, &params, ctx.usage).unwrap();
    let value = |p: &SystemParams| {
        let built = build_subproblem(SubproblemKind::Relay, &ch, &state, &z, p, &ctx).unwrap();
        built.evaluate(&solve(&built.problem, &ctx.solver)).surrogate
    };
    let mut doubled = params.clone();
    doubled.p_r_max *= 2.0;
    assert!(value(&doubled) >= value(&params) - 1e-6);
}

#[test]
fn independent_irs_step_leaves_second_phase_alone() {
    let (ch, params, state) = desk(51, 6);
    let ctx = SubproblemContext {
        usage: IrsUsage::FirstPhaseOnly,
        ..SubproblemContext::new(&params)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let before = sinr_report_with(&ch, &state, &params, ctx.usage).unwrap();
    let out = run_sca(
        SubproblemKind::Irs,
        &ch,
        &state,
        &params,
        &ctx,
        &ScaOptions::default(),
        &mut rng,
    )
    .unwrap();
    let after = sinr_report_with(&ch, &out.state, &params, ctx.usage).unwrap();
    assert_eq!(before.gamma2, after.gamma2);
    assert!(after.sum_rate >= before.sum_rate);
}

#[test]
fn unit_diagonal_phi_is_admissible() {
    // identity Φ: PSD with every |θ_n|² ≤ 1 row tight
    let n = 5;
    let phi = CMat::identity(n + 1, n + 1);
    let eig = irsdf::linalg::eig_hermitian(&irsdf::linalg::HermMat::new(phi.clone()).unwrap()).unwrap();
    assert!(eig.values.iter().all(|&l| l >= 0.0));
    assert!((0..=n).all(|i| phi[(i, i)].re <= 1.0));
}
