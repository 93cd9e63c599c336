//! Rewrites of the nonlinear convex constraints used by the beamforming
//! subproblems as PSD blocks.
//!
//! Each block's entries are fresh variables pinned to the requested affine
//! expressions by equality rows. Slots passed as `None` are left free inside
//! the block and handed back to the caller, which is how slack variables are
//! usually introduced.

use super::{LinExpr, ProblemBuilder, PsdBlock, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub enum Epigraph {
    /// `u·v ≥ w²`, `u, v ≥ 0` as `[[u, w], [w, v]] ⪰ 0`.
    Hyperbolic {
        u: Option<LinExpr>,
        v: Option<LinExpr>,
        w: LinExpr,
    },
    /// `t²·s ≥ 1` for `t ≥ 0`, through an auxiliary `r` with `t·r ≥ 1` and
    /// `s·1 ≥ r²`.
    SquaredLinear { t: LinExpr, s: Option<LinExpr> },
    /// `Σ a_i² ≤ t` as the Schur block `[[I, a], [aᵀ, t]] ⪰ 0`.
    QuadraticForm { a: Vec<LinExpr>, t: Option<LinExpr> },
}

#[derive(Clone, Debug, Default)]
pub struct Fragment {
    pub blocks: Vec<PsdBlock>,
    /// Variables created for `None` slots, in declaration order
    /// (`u`, `v` / `s` / `t`).
    pub slots: Vec<Var>,
    /// Auxiliary variable `r` of the squared-linear rewrite.
    pub aux: Option<Var>,
}

fn check_refs(b: &ProblemBuilder, e: &LinExpr) -> Result<()> {
    for &(v, c) in &e.terms {
        if b.spec().flat_index(v).is_none() {
            return Err(Error::MalformedHandle(format!("{v} is not declared")));
        }
        if !c.is_finite() {
            return Err(Error::MalformedHandle(format!("non-finite coefficient on {v}")));
        }
    }
    if !e.constant.is_finite() {
        return Err(Error::MalformedHandle("non-finite constant".into()));
    }
    Ok(())
}

/// Pins `entry` to `expr`, or records it as a free slot when `expr` is `None`.
fn pin(b: &mut ProblemBuilder, frag: &mut Fragment, entry: Var, expr: Option<LinExpr>) {
    match expr {
        Some(e) => b.add_eq(LinExpr::var(entry) - e, 0.0),
        None => frag.slots.push(entry),
    }
}

pub fn emit_epigraph_blocks(b: &mut ProblemBuilder, kind: Epigraph) -> Result<Fragment> {
    let mut frag = Fragment::default();
    match kind {
        Epigraph::Hyperbolic { u, v, w } => {
            for e in [u.as_ref(), v.as_ref(), Some(&w)].into_iter().flatten() {
                check_refs(b, e)?;
            }
            let blk = b.add_psd_block(2);
            pin(b, &mut frag, blk.entry(0, 0), u);
            pin(b, &mut frag, blk.entry(1, 1), v);
            pin(b, &mut frag, blk.entry(0, 1), Some(w));
            frag.blocks.push(blk);
        }
        Epigraph::SquaredLinear { t, s } => {
            check_refs(b, &t)?;
            if let Some(s) = &s {
                check_refs(b, s)?;
            }
            // t·r ≥ 1
            let first = b.add_psd_block(2);
            pin(b, &mut frag, first.entry(0, 0), Some(t));
            pin(b, &mut frag, first.entry(0, 1), Some(LinExpr::constant(1.0)));
            let r = first.entry(1, 1);
            // s·1 ≥ r²
            let second = b.add_psd_block(2);
            pin(b, &mut frag, second.entry(0, 0), s);
            pin(b, &mut frag, second.entry(0, 1), Some(LinExpr::var(r)));
            pin(b, &mut frag, second.entry(1, 1), Some(LinExpr::constant(1.0)));
            frag.aux = Some(r);
            frag.blocks.extend([first, second]);
        }
        Epigraph::QuadraticForm { a, t } => {
            if a.is_empty() {
                return Err(Error::MalformedHandle("quadratic form with no components".into()));
            }
            for e in a.iter().chain(t.iter()) {
                check_refs(b, e)?;
            }
            let p = a.len();
            let blk = b.add_psd_block(p + 1);
            for i in 0..p {
                b.add_eq(LinExpr::var(blk.entry(i, i)), 1.0);
                for j in (i + 1)..p {
                    b.add_eq(LinExpr::var(blk.entry(i, j)), 0.0);
                }
            }
            for (i, ai) in a.into_iter().enumerate() {
                pin(b, &mut frag, blk.entry(i, p), Some(ai));
            }
            pin(b, &mut frag, blk.entry(p, p), t);
            frag.blocks.push(blk);
        }
    }
    Ok(frag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve, validate, SolveOptions, SolveStatus};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn lmin2(u: f64, w: f64, v: f64) -> f64 {
        DMatrix::from_row_slice(2, 2, &[u, w, w, v])
            .symmetric_eigen()
            .eigenvalues
            .min()
    }

    #[test]
    fn hyperbolic_boundary_examples() {
        assert!(lmin2(2.0, 1.0, 0.5).abs() < 1e-12);
        assert!((2.0 * 0.5 - 1.0_f64).abs() < 1e-15);
        assert!(lmin2(1.0, 1.0, 1.0).abs() < 1e-12);
    }

    #[test]
    fn squared_linear_substitution() {
        // t = 2, s = 0.25, r = 0.5
        let (t, s, r) = (2.0, 0.25, 0.5);
        assert!(t * t * s >= 1.0 - 1e-15);
        assert!(lmin2(t, 1.0, r) >= -1e-12);
        assert!(lmin2(s, r, 1.0) >= -1e-12);
    }

    #[test]
    fn squared_linear_minimizes_s() {
        // min s s.t. t = 2, t²s ≥ 1  ->  s = 1/4
        let mut b = ProblemBuilder::new();
        let frag = emit_epigraph_blocks(
            &mut b,
            Epigraph::SquaredLinear {
                t: LinExpr::constant(2.0),
                s: None,
            },
        )
        .unwrap();
        let s = frag.slots[0];
        b.maximize(-LinExpr::var(s));
        let p = b.build();
        validate(&p).unwrap();
        let sol = solve(&p, &SolveOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.value(s) - 0.25).abs() < 1e-6, "{}", sol.value(s));
        assert!((sol.value(frag.aux.unwrap()) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn quadratic_form_epigraph() {
        // min t s.t. t ≥ 3² + 4² (a fixed)
        let mut b = ProblemBuilder::new();
        let frag = emit_epigraph_blocks(
            &mut b,
            Epigraph::QuadraticForm {
                a: vec![LinExpr::constant(3.0), LinExpr::constant(4.0)],
                t: None,
            },
        )
        .unwrap();
        b.maximize(-LinExpr::var(frag.slots[0]));
        let sol = solve(&b.build(), &SolveOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.value(frag.slots[0]) - 25.0).abs() < 1e-5);
    }

    #[test]
    fn malformed_handles_rejected() {
        let mut b = ProblemBuilder::new();
        let err = emit_epigraph_blocks(
            &mut b,
            Epigraph::Hyperbolic {
                u: Some(LinExpr::var(Var::Free(0))),
                v: None,
                w: LinExpr::constant(1.0),
            },
        );
        assert!(matches!(err, Err(Error::MalformedHandle(_))));
        let err = emit_epigraph_blocks(&mut b, Epigraph::QuadraticForm { a: vec![], t: None });
        assert!(matches!(err, Err(Error::MalformedHandle(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn hyperbolic_block_matches_product_rule(u in 1e-3f64..10.0, v in 1e-3f64..10.0, w in -10.0f64..10.0) {
            let psd = lmin2(u, w, v) >= -1e-12 * (u + v);
            let hyper = u * v >= w * w;
            // skip razor-thin boundary cases
            if (u * v - w * w).abs() > 1e-9 * (u * v).max(w * w) {
                prop_assert_eq!(psd, hyper);
            }
        }
    }
}
