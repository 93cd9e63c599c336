use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::linalg::{from_real_embedding, real_embedding, HermMat};

/// Rank tolerance used when checking equality rows for linear independence.
pub const RANK_TOL: f64 = 1e-10;

/// Decision variable handle. PSD block entries are addressed by their upper
/// triangle position; `Entry { row, col }` with `row > col` is normalized on
/// construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Entry { block: usize, row: usize, col: usize },
    NonNeg(usize),
    Free(usize),
}

impl Var {
    pub fn entry(block: usize, row: usize, col: usize) -> Self {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        Var::Entry { block, row, col }
    }
}

impl std::fmt::Display for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Var::Entry { block, row, col } => write!(f, "X{block}[{row},{col}]"),
            Var::NonNeg(k) => write!(f, "n{k}"),
            Var::Free(k) => write!(f, "f{k}"),
        }
    }
}

/// Affine expression `Σ coeff·var + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(Var, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![],
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        Self {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    pub fn term(v: Var, c: f64) -> Self {
        Self {
            terms: vec![(v, c)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, v: Var, c: f64) {
        if c != 0.0 {
            self.terms.push((v, c));
        }
    }

    /// Merges duplicate variables and drops zero coefficients.
    pub fn compact(&self) -> Self {
        let mut acc: BTreeMap<Var, f64> = BTreeMap::new();
        for &(v, c) in &self.terms {
            *acc.entry(v).or_insert(0.0) += c;
        }
        Self {
            terms: acc.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    pub fn eval(&self, value: impl Fn(Var) -> f64) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * value(v)).sum::<f64>()
    }
}

impl From<Var> for LinExpr {
    fn from(v: Var) -> Self {
        LinExpr::var(v)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        self.terms.extend_from_slice(&rhs.terms);
        self.constant += rhs.constant;
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += &rhs;
        self
    }
}

impl Add<f64> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: f64) -> LinExpr {
        self.constant += rhs;
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, rhs: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= rhs;
        }
        self.constant *= rhs;
        self
    }
}

/// Cone layout of a problem: PSD blocks (real symmetric), then non-negative
/// scalars, then free scalars.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConeSpec {
    pub psd_block_dims: Vec<usize>,
    pub nonneg_count: usize,
    pub free_count: usize,
}

impl ConeSpec {
    pub fn total_dim(&self) -> usize {
        self.psd_block_dims.iter().map(|d| d * (d + 1) / 2).sum::<usize>() + self.nonneg_count + self.free_count
    }

    /// Position of `v` in the flattened variable vector, or `None` when the
    /// handle does not belong to this layout.
    pub fn flat_index(&self, v: Var) -> Option<usize> {
        let psd_total: usize = self.psd_block_dims.iter().map(|d| d * (d + 1) / 2).sum();
        match v {
            Var::Entry { block, row, col } => {
                let dim = *self.psd_block_dims.get(block)?;
                if row > col || col >= dim {
                    return None;
                }
                let offset: usize = self.psd_block_dims[..block].iter().map(|d| d * (d + 1) / 2).sum();
                // column-major upper triangle
                Some(offset + col * (col + 1) / 2 + row)
            }
            Var::NonNeg(k) if k < self.nonneg_count => Some(psd_total + k),
            Var::Free(k) if k < self.free_count => Some(psd_total + self.nonneg_count + k),
            _ => None,
        }
    }
}

/// `expr (== | <=) rhs`, with the expression constant already folded into
/// `rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rhs: f64,
}

/// Maximize `objective` over the cones in `spec` subject to linear
/// equalities and `<=` inequalities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConicProblem {
    pub spec: ConeSpec,
    pub objective: LinExpr,
    pub eq_constraints: Vec<Constraint>,
    pub ineq_constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PsdBlock {
    pub index: usize,
    pub dim: usize,
}

impl PsdBlock {
    pub fn entry(&self, row: usize, col: usize) -> Var {
        assert!(
            row < self.dim && col < self.dim,
            "entry ({row},{col}) outside block of dim {}",
            self.dim
        );
        Var::entry(self.index, row, col)
    }

    /// `tr(C · X)` for a real symmetric coefficient matrix `C`.
    pub fn trace_with(&self, c: &DMatrix<f64>) -> LinExpr {
        assert_eq!(c.nrows(), self.dim);
        let mut e = LinExpr::zero();
        for col in 0..self.dim {
            e.add_term(self.entry(col, col), c[(col, col)]);
            for row in 0..col {
                e.add_term(self.entry(row, col), c[(row, col)] + c[(col, row)]);
            }
        }
        e
    }
}

/// Complex Hermitian `n × n` variable carried by a real `2n × 2n` PSD block
/// through the real embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermBlock {
    pub block: PsdBlock,
    pub n: usize,
}

impl HermBlock {
    /// `tr(A · X)` for Hermitian `A`; equals `½ tr(embed(A) · Y)`.
    pub fn trace_with(&self, a: &HermMat) -> LinExpr {
        assert_eq!(a.dim(), self.n);
        self.block.trace_with(&(real_embedding(a) * 0.5))
    }

    /// Diagonal entry `X_ii`.
    pub fn diag(&self, i: usize) -> LinExpr {
        let n = self.n;
        LinExpr::term(self.block.entry(i, i), 0.5) + LinExpr::term(self.block.entry(i + n, i + n), 0.5)
    }

    pub fn value(&self, sol: &super::ConicSolution) -> HermMat {
        from_real_embedding(&sol.psd_values[self.block.index]).expect("embedded block has even dimension")
    }
}

#[derive(Debug, Default)]
pub struct ProblemBuilder {
    problem: ConicProblem,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_psd_block(&mut self, dim: usize) -> PsdBlock {
        let index = self.problem.spec.psd_block_dims.len();
        self.problem.spec.psd_block_dims.push(dim);
        PsdBlock { index, dim }
    }

    pub fn add_hermitian_block(&mut self, n: usize) -> HermBlock {
        HermBlock {
            block: self.add_psd_block(2 * n),
            n,
        }
    }

    pub fn add_nonneg(&mut self) -> Var {
        self.problem.spec.nonneg_count += 1;
        Var::NonNeg(self.problem.spec.nonneg_count - 1)
    }

    pub fn add_free(&mut self) -> Var {
        self.problem.spec.free_count += 1;
        Var::Free(self.problem.spec.free_count - 1)
    }

    /// `lhs == rhs`
    pub fn add_eq(&mut self, lhs: LinExpr, rhs: f64) {
        let expr = lhs.compact();
        let rhs = rhs - expr.constant;
        self.problem.eq_constraints.push(Constraint {
            expr: LinExpr { constant: 0.0, ..expr },
            rhs,
        });
    }

    /// `lhs <= rhs`
    pub fn add_le(&mut self, lhs: LinExpr, rhs: f64) {
        let expr = lhs.compact();
        let rhs = rhs - expr.constant;
        self.problem.ineq_constraints.push(Constraint {
            expr: LinExpr { constant: 0.0, ..expr },
            rhs,
        });
    }

    /// `lhs >= rhs`
    pub fn add_ge(&mut self, lhs: LinExpr, rhs: f64) {
        self.add_le(-lhs, -rhs);
    }

    pub fn maximize(&mut self, objective: LinExpr) {
        self.problem.objective = objective.compact();
    }

    pub fn spec(&self) -> &ConeSpec {
        &self.problem.spec
    }

    pub fn build(self) -> ConicProblem {
        self.problem
    }
}

/// Structural and numerical checks. Returns every violation found.
pub fn validate(p: &ConicProblem) -> Result<(), Vec<String>> {
    let mut issues = Vec::new();
    for (b, &d) in p.spec.psd_block_dims.iter().enumerate() {
        if d == 0 {
            issues.push(format!("PSD block {b} has dimension 0"));
        }
    }
    let mut check_expr = |what: &str, e: &LinExpr, rhs: Option<f64>| {
        for &(v, c) in &e.terms {
            if p.spec.flat_index(v).is_none() {
                issues.push(format!("{what}: variable {v} index out of range"));
            }
            if !c.is_finite() {
                issues.push(format!("{what}: non-finite coefficient on {v}"));
            }
        }
        if !e.constant.is_finite() {
            issues.push(format!("{what}: non-finite constant"));
        }
        if let Some(r) = rhs {
            if !r.is_finite() {
                issues.push(format!("{what}: non-finite rhs"));
            }
        }
    };
    check_expr("objective", &p.objective, None);
    for (i, c) in p.eq_constraints.iter().enumerate() {
        check_expr(&format!("eq {i}"), &c.expr, Some(c.rhs));
    }
    for (i, c) in p.ineq_constraints.iter().enumerate() {
        check_expr(&format!("ineq {i}"), &c.expr, Some(c.rhs));
    }
    if issues.is_empty() {
        if let Some(i) = first_dependent_equality(p) {
            issues.push(format!("rank-deficient equalities (row {i} depends on earlier rows)"));
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

/// Modified Gram–Schmidt over the equality rows in flattened coordinates,
/// restricted to the columns that any row touches.
fn first_dependent_equality(p: &ConicProblem) -> Option<usize> {
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &p.eq_constraints {
        for &(v, _) in &c.expr.terms {
            let next = cols.len();
            cols.entry(p.spec.flat_index(v)?).or_insert(next);
        }
    }
    let width = cols.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (i, c) in p.eq_constraints.iter().enumerate() {
        let mut row = vec![0.0; width];
        for &(v, coef) in &c.expr.compact().terms {
            row[cols[&p.spec.flat_index(v)?]] += coef;
        }
        let norm0 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return Some(i);
        }
        row.iter_mut().for_each(|x| *x /= norm0);
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = row.iter().zip(q).map(|(a, b)| a * b).sum();
                row.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= RANK_TOL {
            return Some(i);
        }
        row.iter_mut().for_each(|x| *x /= norm);
        basis.push(row);
    }
    None
}

fn fmt_expr(out: &mut String, e: &LinExpr) {
    if e.terms.is_empty() {
        out.push('0');
    }
    for (k, &(v, c)) in e.terms.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{c:+.12e}*{v}");
    }
}

impl ConicProblem {
    /// Self-describing text dump: one line per constraint, coefficients in
    /// scientific notation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("conic-problem v1\n");
        let dims: Vec<String> = self.spec.psd_block_dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(
            out,
            "cones psd=[{}] nonneg={} free={}",
            dims.join(","),
            self.spec.nonneg_count,
            self.spec.free_count
        );
        out.push_str("maximize ");
        fmt_expr(&mut out, &self.objective);
        let _ = writeln!(out, " {:+.12e}", self.objective.constant);
        for (i, c) in self.eq_constraints.iter().enumerate() {
            let _ = write!(out, "eq {i}: ");
            fmt_expr(&mut out, &c.expr);
            let _ = writeln!(out, " == {:+.12e}", c.rhs);
        }
        for (i, c) in self.ineq_constraints.iter().enumerate() {
            let _ = write!(out, "le {i}: ");
            fmt_expr(&mut out, &c.expr);
            let _ = writeln!(out, " <= {:+.12e}", c.rhs);
        }
        out
    }
}
