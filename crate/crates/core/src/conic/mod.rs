//! Small dense conic programs: block-diagonal PSD cones, non-negative and
//! free scalars, linear equalities and inequalities.
//!
//! Problems are assembled with [`ProblemBuilder`], checked with [`validate`]
//! and solved by the primal-dual interior-point method in [`solve`]. The
//! [`epigraph`] helpers rewrite hyperbolic, squared-linear and quadratic-form
//! constraints as PSD blocks so that the solver only ever sees one cone
//! type.

pub mod epigraph;
mod ipm;
mod problem;

use nalgebra::DMatrix;

pub use ipm::solve;
pub use problem::{
    validate, ConeSpec, ConicProblem, Constraint, HermBlock, LinExpr, ProblemBuilder, PsdBlock, Var, RANK_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Primal or dual infeasibility detected (a diverging objective on one
    /// side with a stalled residual on the other).
    Infeasible,
    MaxIter,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Relative duality gap target.
    pub gap_tol: f64,
    /// Relative primal and dual residual target.
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            feas_tol: 1e-7,
            max_iter: 100,
            step_fraction: 0.98,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub psd_values: Vec<DMatrix<f64>>,
    pub nonneg_values: Vec<f64>,
    pub free_values: Vec<f64>,
    /// Multipliers of the equality rows, in problem order.
    pub eq_duals: Vec<f64>,
    /// Multipliers of the `<=` rows (non-negative at optimality).
    pub ineq_duals: Vec<f64>,
    /// Objective value in the maximization sense.
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `max(|p - d|, <X,Z>) / (1 + |p| + |d|)` at the final iterate.
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn value(&self, v: Var) -> f64 {
        match v {
            Var::Entry { block, row, col } => self.psd_values[block][(row, col)],
            Var::NonNeg(k) => self.nonneg_values[k],
            Var::Free(k) => self.free_values[k],
        }
    }

    pub fn eval(&self, e: &LinExpr) -> f64 {
        e.eval(|v| self.value(v))
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
