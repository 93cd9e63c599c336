use irsdf::conic::{solve, validate, LinExpr, ProblemBuilder, SolveOptions, SolveStatus, Var};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

#[test]
fn min_trace_with_pinned_corner() {
    let mut b = ProblemBuilder::new();
    let x = b.add_psd_block(2);
    b.add_eq(LinExpr::var(x.entry(0, 0)), 1.0);
    b.maximize(-(LinExpr::var(x.entry(0, 0)) + LinExpr::var(x.entry(1, 1))));
    let p = b.build();
    validate(&p).unwrap();
    let s = solve(&p, &opts());
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.primal_objective + 1.0).abs() < 1e-6);
    assert!(s.value(x.entry(1, 1)).abs() < 1e-6);
    assert!(s.value(x.entry(0, 1)).abs() < 1e-6);
    assert!(s.duality_gap <= 1e-7);
}

#[test]
fn lp_corner() {
    let mut b = ProblemBuilder::new();
    let x = b.add_nonneg();
    b.add_le(LinExpr::var(x), 3.0);
    b.maximize(LinExpr::var(x));
    let s = solve(&b.build(), &opts());
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.primal_objective - 3.0).abs() < 1e-6);
    assert!((s.ineq_duals[0] - 1.0).abs() < 1e-6);
}

#[test]
fn spectraplex_attains_top_eigenvalue() {
    let mut b = ProblemBuilder::new();
    let x = b.add_psd_block(2);
    b.add_eq(x.trace_with(&DMatrix::identity(2, 2)), 1.0);
    b.maximize(x.trace_with(&DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0])));
    let s = solve(&b.build(), &opts());
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.primal_objective - 2.0).abs() < 1e-6);
    assert!(s.primal_objective <= s.dual_objective + 1e-7);
}

#[test]
fn free_variables_are_supported() {
    // maximize y s.t. y <= x, x + 2y... : y free, x nonneg, x <= 2 - y  -> y = 1
    let mut b = ProblemBuilder::new();
    let x = b.add_nonneg();
    let y = b.add_free();
    b.add_le(LinExpr::var(y) - LinExpr::var(x), 0.0);
    b.add_le(LinExpr::var(x) + LinExpr::var(y), 2.0);
    b.maximize(LinExpr::var(y));
    let s = solve(&b.build(), &opts());
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.value(y) - 1.0).abs() < 1e-6);
}

#[test]
fn infeasible_lp_is_flagged() {
    let mut b = ProblemBuilder::new();
    let x = b.add_nonneg();
    b.add_le(LinExpr::var(x), -1.0);
    b.maximize(LinExpr::var(x));
    let s = solve(&b.build(), &opts());
    assert_eq!(s.status, SolveStatus::Infeasible);
}

#[test]
fn infeasible_sdp_is_flagged() {
    let mut b = ProblemBuilder::new();
    let x = b.add_psd_block(2);
    b.add_eq(x.trace_with(&DMatrix::identity(2, 2)), -1.0);
    b.maximize(LinExpr::var(x.entry(0, 1)));
    let s = solve(&b.build(), &opts());
    assert_ne!(s.status, SolveStatus::Optimal);
}

/// max tr(C X) s.t. tr(A X) = 1, X ⪰ 0 with A ≻ 0 equals
/// λ_max(A^{-1/2} C A^{-1/2}); cross-checked against a dense grid over the
/// unit circle of rank-one X = x xᵀ / (xᵀ A x).
fn random_single_block(seed: u64) -> (DMatrix<f64>, DMatrix<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sym = |diag_boost: f64| {
        let a = rng.random_range(-1.0..1.0);
        let b = rng.random_range(-1.0..1.0);
        let c = rng.random_range(-1.0..1.0);
        DMatrix::from_row_slice(2, 2, &[a + diag_boost, b, b, c + diag_boost])
    };
    let c = sym(0.0);
    let a = sym(2.0);
    let mut best = f64::NEG_INFINITY;
    let steps = 200_000;
    for k in 0..steps {
        let t = std::f64::consts::PI * k as f64 / steps as f64;
        let v = nalgebra::dvector![t.cos(), t.sin()];
        let val = (v.transpose() * &c * &v)[0] / (v.transpose() * &a * &v)[0];
        best = best.max(val);
    }
    (c, a, best)
}

#[test]
fn matches_grid_oracle_on_random_two_by_two() {
    for seed in 0..20 {
        let (c, a, oracle) = random_single_block(seed);
        let mut b = ProblemBuilder::new();
        let x = b.add_psd_block(2);
        b.add_eq(x.trace_with(&a), 1.0);
        b.maximize(x.trace_with(&c));
        let s = solve(&b.build(), &opts());
        assert_eq!(s.status, SolveStatus::Optimal, "seed {seed}");
        assert!(
            (s.primal_objective - oracle).abs() < 1e-5,
            "seed {seed}: {} vs {}",
            s.primal_objective,
            oracle
        );
    }
}

#[test]
fn argmax_is_scale_invariant() {
    for seed in 0..10 {
        let (c, a, _) = random_single_block(100 + seed);
        let run = |scale: f64| {
            let mut b = ProblemBuilder::new();
            let x = b.add_psd_block(2);
            b.add_eq(x.trace_with(&a), 1.0);
            b.maximize(x.trace_with(&c) * scale);
            let s = solve(&b.build(), &opts());
            assert_eq!(s.status, SolveStatus::Optimal);
            s.psd_values[0].clone()
        };
        let x1 = run(1.0);
        for scale in [0.1, 7.5, 300.0] {
            let xs = run(scale);
            assert!(
                (&x1 - &xs).amax() < 1e-6,
                "seed {seed}, scale {scale}: {}",
                (&x1 - &xs).amax()
            );
        }
    }
}

#[test]
fn mixed_cones_and_duals() {
    // maximize 2·X01 + f s.t. X00 + X11 <= 2, f <= 1 - n, n ≥ 0
    let mut b = ProblemBuilder::new();
    let x = b.add_psd_block(2);
    let n = b.add_nonneg();
    let f = b.add_free();
    b.add_le(LinExpr::var(x.entry(0, 0)) + LinExpr::var(x.entry(1, 1)), 2.0);
    b.add_le(LinExpr::var(f) + LinExpr::var(n), 1.0);
    b.maximize(LinExpr::term(x.entry(0, 1), 2.0) + LinExpr::var(f));
    let s = solve(&b.build(), &opts());
    assert_eq!(s.status, SolveStatus::Optimal);
    // X = [[1,1],[1,1]] gives 2; f = 1 gives 1
    assert!((s.primal_objective - 3.0).abs() < 1e-6);
    assert!(s.ineq_duals.iter().all(|&l| l > -1e-8));
    assert!(s.value(Var::NonNeg(0)) >= -1e-9);
}
