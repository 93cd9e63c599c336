//! First-order lower bounds of the rate and relay-SINR functions of the slack
//! variables. Both functions are jointly convex on the positive orthant, so
//! the tangent plane at any positive point is a global underestimator.

use std::f64::consts::LN_2;

use crate::conic::LinExpr;
use crate::error::{Error, Result};

/// `constant + coeff_s·(S − s_loc) + coeff_i·(I − i_loc)`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineBound {
    pub constant: f64,
    pub coeff_s: f64,
    pub coeff_i: f64,
    pub s_loc: f64,
    pub i_loc: f64,
}

impl AffineBound {
    pub fn eval(&self, s: f64, i: f64) -> f64 {
        self.constant + self.coeff_s * (s - self.s_loc) + self.coeff_i * (i - self.i_loc)
    }

    pub fn to_expr(&self, s: &LinExpr, i: &LinExpr) -> LinExpr {
        s.clone() * self.coeff_s
            + i.clone() * self.coeff_i
            + (self.constant - self.coeff_s * self.s_loc - self.coeff_i * self.i_loc)
    }
}

fn check(s_loc: f64, i_loc: f64) -> Result<()> {
    if s_loc > 0.0 && i_loc > 0.0 && s_loc.is_finite() && i_loc.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveLocalPoint(s_loc, i_loc))
    }
}

/// `log2(C + Σ_p 1/(S_p I_p))`
pub fn rate_value(c: f64, pairs: &[(f64, f64)]) -> f64 {
    (c + pairs.iter().map(|(s, i)| 1.0 / (s * i)).sum::<f64>()).log2()
}

/// Tangent plane of [`rate_value`] at the given local points, one
/// [`AffineBound`] per pair. The shared constant is carried by the first
/// element; the others have `constant = 0`.
pub fn taylor_bound_rate(c: f64, locs: &[(f64, f64)]) -> Result<Vec<AffineBound>> {
    for &(s, i) in locs {
        check(s, i)?;
    }
    let total = c + locs.iter().map(|(s, i)| 1.0 / (s * i)).sum::<f64>();
    Ok(locs
        .iter()
        .enumerate()
        .map(|(p, &(s, i))| AffineBound {
            constant: if p == 0 { total.log2() } else { 0.0 },
            coeff_s: -1.0 / (s * s * i * total * LN_2),
            coeff_i: -1.0 / (s * i * i * total * LN_2),
            s_loc: s,
            i_loc: i,
        })
        .collect())
}

/// Bound on `u(S, I) = log2(C + 1/(S·I))`.
pub fn taylor_bound_u(s_loc: f64, i_loc: f64, c: f64) -> Result<AffineBound> {
    Ok(taylor_bound_rate(c, &[(s_loc, i_loc)])?[0])
}

/// Bound on `v(S, I) = 1/(S·I)`.
pub fn taylor_bound_v(s_loc: f64, i_loc: f64) -> Result<AffineBound> {
    check(s_loc, i_loc)?;
    let v = 1.0 / (s_loc * i_loc);
    Ok(AffineBound {
        constant: v,
        coeff_s: -v / s_loc,
        coeff_i: -v / i_loc,
        s_loc,
        i_loc,
    })
}
