//! Infeasible-start primal-dual path-following method with Nesterov–Todd
//! scaling and Mehrotra predictor-corrector steps.
//!
//! Internally the problem is put in the standard primal form
//!
//! ```txt
//!   min  Σ<C_b, X_b> + c_lᵀx_l + c_fᵀx_f
//!   s.t. Σ<A_ib, X_b> + a_ilᵀx_l + a_ifᵀx_f = b_i
//!        X_b ⪰ 0,  x_l ≥ 0,  x_f free
//! ```
//!
//! where `<=` rows receive their own non-negative slack. Each iteration
//! solves the saddle-point system `[[M, A_f], [A_fᵀ, 0]]` built from the
//! Schur complement `M_ij = Σ<A_ib, W_b A_jb W_b> + Σ a_il w_l a_jl`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, LU, SVD};

use super::{ConicProblem, ConicSolution, SolveOptions, SolveStatus, Var};

const INFEAS_OBJ: f64 = 1e8;
const INFEAS_WINDOW: usize = 10;

/// Upper-triangle triplets `(p, q, a)` of a symmetric matrix with
/// `A_pq = A_qp = a`.
type SymTriplets = Vec<(usize, usize, f64)>;

struct Row {
    psd: Vec<(usize, SymTriplets)>,
    lp: Vec<(usize, f64)>,
    free: Vec<(usize, f64)>,
    rhs: f64,
}

struct Standard {
    dims: Vec<usize>,
    n_lp: usize,
    n_free: usize,
    rows: Vec<Row>,
    /// `(row, index into row.psd)` per block.
    touching: Vec<Vec<(usize, usize)>>,
    c_psd: Vec<DMatrix<f64>>,
    c_lp: DVector<f64>,
    c_free: DVector<f64>,
    row_scale: Vec<f64>,
    n_eq: usize,
    n_nonneg: usize,
}

fn sym_dot(t: &SymTriplets, x: &DMatrix<f64>) -> f64 {
    t.iter()
        .map(|&(p, q, a)| if p == q { a * x[(p, p)] } else { 2.0 * a * x[(p, q)] })
        .sum()
}

fn scatter(t: &SymTriplets, scale: f64, out: &mut DMatrix<f64>) {
    for &(p, q, a) in t {
        out[(p, q)] += scale * a;
        if p != q {
            out[(q, p)] += scale * a;
        }
    }
}

impl Standard {
    fn from_problem(p: &ConicProblem) -> Self {
        let dims = p.spec.psd_block_dims.clone();
        let n_nonneg = p.spec.nonneg_count;
        let n_lp = n_nonneg + p.ineq_constraints.len();
        let n_free = p.spec.free_count;

        let split = |expr: &super::LinExpr| {
            let mut psd: std::collections::BTreeMap<usize, SymTriplets> = Default::default();
            let mut lp = vec![];
            let mut free = vec![];
            for &(v, c) in &expr.compact().terms {
                match v {
                    Var::Entry { block, row, col } => {
                        let a = if row == col { c } else { 0.5 * c };
                        psd.entry(block).or_default().push((row, col, a));
                    }
                    Var::NonNeg(k) => lp.push((k, c)),
                    Var::Free(k) => free.push((k, c)),
                }
            }
            (psd.into_iter().collect::<Vec<_>>(), lp, free)
        };

        let mut rows = Vec::new();
        for c in &p.eq_constraints {
            let (psd, lp, free) = split(&c.expr);
            rows.push(Row {
                psd,
                lp,
                free,
                rhs: c.rhs,
            });
        }
        for (i, c) in p.ineq_constraints.iter().enumerate() {
            let (psd, mut lp, free) = split(&c.expr);
            lp.push((n_nonneg + i, 1.0));
            rows.push(Row {
                psd,
                lp,
                free,
                rhs: c.rhs,
            });
        }

        let mut row_scale = Vec::with_capacity(rows.len());
        for row in &mut rows {
            let mut nrm2 = 0.0;
            for (_, t) in &row.psd {
                nrm2 += t
                    .iter()
                    .map(|&(p, q, a)| if p == q { a * a } else { 2.0 * a * a })
                    .sum::<f64>();
            }
            nrm2 += row.lp.iter().map(|(_, a)| a * a).sum::<f64>();
            nrm2 += row.free.iter().map(|(_, a)| a * a).sum::<f64>();
            let s = if nrm2 > 0.0 { 1.0 / nrm2.sqrt() } else { 1.0 };
            for (_, t) in &mut row.psd {
                t.iter_mut().for_each(|e| e.2 *= s);
            }
            row.lp.iter_mut().for_each(|e| e.1 *= s);
            row.free.iter_mut().for_each(|e| e.1 *= s);
            row.rhs *= s;
            row_scale.push(s);
        }

        let mut touching = vec![vec![]; dims.len()];
        for (i, row) in rows.iter().enumerate() {
            for (k, (b, _)) in row.psd.iter().enumerate() {
                touching[*b].push((i, k));
            }
        }

        let mut c_psd: Vec<DMatrix<f64>> = dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
        let mut c_lp = DVector::zeros(n_lp);
        let mut c_free = DVector::zeros(n_free);
        for &(v, c) in &p.objective.compact().terms {
            // maximize obj  <=>  minimize -obj
            match v {
                Var::Entry { block, row, col } => {
                    if row == col {
                        c_psd[block][(row, row)] -= c;
                    } else {
                        c_psd[block][(row, col)] -= 0.5 * c;
                        c_psd[block][(col, row)] -= 0.5 * c;
                    }
                }
                Var::NonNeg(k) => c_lp[k] -= c,
                Var::Free(k) => c_free[k] -= c,
            }
        }

        Self {
            dims,
            n_lp,
            n_free,
            rows,
            touching,
            c_psd,
            c_lp,
            c_free,
            row_scale,
            n_eq: p.eq_constraints.len(),
            n_nonneg,
        }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn nu(&self) -> f64 {
        (self.dims.iter().sum::<usize>() + self.n_lp) as f64
    }

    /// `A(X) + A_l x_l + A_f x_f`
    fn apply(&self, x: &[DMatrix<f64>], xl: &DVector<f64>, xf: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.rows.iter().map(|row| {
                row.psd.iter().map(|(b, t)| sym_dot(t, &x[*b])).sum::<f64>()
                    + row.lp.iter().map(|&(k, a)| a * xl[k]).sum::<f64>()
                    + row.free.iter().map(|&(k, a)| a * xf[k]).sum::<f64>()
            }),
        )
    }

    /// Cone part of `A*(y)`.
    fn adjoint(&self, y: &DVector<f64>) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let mut s: Vec<DMatrix<f64>> = self.dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
        let mut sl = DVector::zeros(self.n_lp);
        for (i, row) in self.rows.iter().enumerate() {
            for (b, t) in &row.psd {
                scatter(t, y[i], &mut s[*b]);
            }
            for &(k, a) in &row.lp {
                sl[k] += a * y[i];
            }
        }
        (s, sl)
    }

    fn adjoint_free(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut sf = DVector::zeros(self.n_free);
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, a) in &row.free {
                sf[k] += a * y[i];
            }
        }
        sf
    }

    fn b(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.rows.iter().map(|r| r.rhs))
    }
}

/// Nesterov–Todd scaling of one PSD block: `W = G Gᵀ`, `W Z W = X`,
/// `G⁻¹ X G⁻ᵀ = Gᵀ Z G = diag(v)`.
struct NtScaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    v: DVector<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<NtScaling> {
    let lx = Cholesky::new(x.clone())?.unpack();
    let lz = Cholesky::new(z.clone())?.unpack();
    let svd = SVD::try_new(lz.transpose() * &lx, false, true, 1e-15, 1000)?;
    let q = svd.v_t?.transpose();
    let s = svd.singular_values;
    if s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let d = s.len();
    let inv_sqrt = DVector::from_iterator(d, s.iter().map(|v| 1.0 / v.sqrt()));
    let sqrt = DVector::from_iterator(d, s.iter().map(|v| v.sqrt()));
    let g = &lx * &q * DMatrix::from_diagonal(&inv_sqrt);
    let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(d, d))?;
    let g_inv = DMatrix::from_diagonal(&sqrt) * q.transpose() * lx_inv;
    let w = &g * g.transpose();
    Some(NtScaling { g, g_inv, w, v: s })
}

/// Largest `α` with `X + α ΔX ⪰ 0` (infinite when `ΔX ⪰ 0`).
fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let l = Cholesky::new(x.clone())?.unpack();
    let li_dx = l.solve_lower_triangular(dx)?;
    let t = l.solve_lower_triangular(&li_dx.transpose())?;
    let t = (&t + t.transpose()) * 0.5;
    let lmin = SymmetricEigen::new(t).eigenvalues.min();
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn max_step_lp(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

fn frob_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

enum Factor {
    Chol(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl Factor {
    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Chol(c) => Some(c.solve(rhs)),
            Factor::Lu(lu) => lu.solve(rhs),
        }
    }
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dzl: DVector<f64>,
    dxf: DVector<f64>,
    dy: DVector<f64>,
}

pub fn solve(p: &ConicProblem, opts: &SolveOptions) -> ConicSolution {
    let mut sf = Standard::from_problem(p);
    // Objective equilibration: iterates are invariant to positive scaling of
    // the objective.
    let c_scale = {
        let n = (sf.c_psd.iter().map(|c| c.norm_squared()).sum::<f64>()
            + sf.c_lp.norm_squared()
            + sf.c_free.norm_squared())
        .sqrt();
        if n > 0.0 && n.is_finite() {
            n
        } else {
            1.0
        }
    };
    sf.c_psd.iter_mut().for_each(|c| *c /= c_scale);
    sf.c_lp /= c_scale;
    sf.c_free /= c_scale;
    let m = sf.m();
    let nu = sf.nu().max(1.0);
    let b = sf.b();
    let b_norm = b.norm();
    let c_norm =
        (sf.c_psd.iter().map(|c| c.norm_squared()).sum::<f64>() + sf.c_lp.norm_squared() + sf.c_free.norm_squared())
            .sqrt();

    // Cold start: scaled identities.
    let mut x: Vec<DMatrix<f64>> = Vec::new();
    let mut z: Vec<DMatrix<f64>> = Vec::new();
    for (bi, &d) in sf.dims.iter().enumerate() {
        let df = d as f64;
        let mut xi = 10.0_f64.max(df.sqrt());
        let mut eta = 10.0_f64.max(df.sqrt()).max(sf.c_psd[bi].norm());
        for &(i, k) in &sf.touching[bi] {
            let t = &sf.rows[i].psd[k].1;
            let an = t
                .iter()
                .map(|&(p, q, a)| if p == q { a * a } else { 2.0 * a * a })
                .sum::<f64>()
                .sqrt();
            xi = xi.max(df.sqrt() * (1.0 + sf.rows[i].rhs.abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        x.push(DMatrix::identity(d, d) * xi);
        z.push(DMatrix::identity(d, d) * eta);
    }
    let lp_scale = {
        let mut xi = 10.0_f64.max((sf.n_lp as f64).sqrt());
        let mut eta = 10.0_f64.max(sf.c_lp.amax());
        for row in &sf.rows {
            let an = row.lp.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();
            if an > 0.0 {
                xi = xi.max((1.0 + row.rhs.abs()) / (1.0 + an));
                eta = eta.max(an);
            }
        }
        (xi, eta)
    };
    let mut xl = DVector::from_element(sf.n_lp, lp_scale.0);
    let mut zl = DVector::from_element(sf.n_lp, lp_scale.1);
    let mut xf = DVector::zeros(sf.n_free);
    let mut y = DVector::zeros(m);

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut pinf_hist: Vec<f64> = Vec::new();
    let mut dinf_hist: Vec<f64> = Vec::new();
    let mut last = (0.0, 0.0, f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for iter in 0..=opts.max_iter {
        iterations = iter;
        // residuals
        let ax = sf.apply(&x, &xl, &xf);
        let rp = &b - &ax;
        let (aty, atyl) = sf.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = (0..sf.dims.len()).map(|i| &sf.c_psd[i] - &z[i] - &aty[i]).collect();
        let rdl = &sf.c_lp - &zl - &atyl;
        let rdf = &sf.c_free - sf.adjoint_free(&y);

        let pobj = (0..sf.dims.len()).map(|i| frob_dot(&sf.c_psd[i], &x[i])).sum::<f64>()
            + sf.c_lp.dot(&xl)
            + sf.c_free.dot(&xf);
        let dobj = b.dot(&y);
        let xz = (0..sf.dims.len()).map(|i| frob_dot(&x[i], &z[i])).sum::<f64>() + xl.dot(&zl);
        let mu = xz / nu;

        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = (rd.iter().map(|r| r.norm_squared()).sum::<f64>() + rdl.norm_squared() + rdf.norm_squared()).sqrt()
            / (1.0 + c_norm);
        let denom = 1.0 + pobj.abs() + dobj.abs();
        let gap = ((pobj - dobj).abs().max(xz.max(0.0))) / denom;
        last = (pobj, dobj, gap, pinf, dinf);

        if ![pobj, dobj, pinf, dinf, mu].iter().all(|v| v.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        if gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }
        pinf_hist.push(pinf);
        dinf_hist.push(dinf);
        let stalled = |h: &[f64]| h.len() > INFEAS_WINDOW && h[h.len() - 1] >= 0.99 * h[h.len() - 1 - INFEAS_WINDOW];
        if (dobj > INFEAS_OBJ && stalled(&pinf_hist)) || (pobj < -INFEAS_OBJ && stalled(&dinf_hist)) {
            status = SolveStatus::Infeasible;
            break;
        }
        if iter == opts.max_iter {
            status = SolveStatus::MaxIter;
            break;
        }

        // scaling
        let mut scal = Vec::with_capacity(sf.dims.len());
        for i in 0..sf.dims.len() {
            match nt_scaling(&x[i], &z[i]) {
                Some(s) => scal.push(s),
                None => {
                    status = SolveStatus::NumericalFailure;
                    break;
                }
            }
        }
        if status == SolveStatus::NumericalFailure {
            break;
        }
        let wl = DVector::from_iterator(sf.n_lp, xl.iter().zip(zl.iter()).map(|(a, c)| a / c));

        // Schur complement
        let mut mmat = DMatrix::<f64>::zeros(m, m);
        for (bi, s) in scal.iter().enumerate() {
            let d = sf.dims[bi];
            let touch = &sf.touching[bi];
            for (ti, &(i, ki)) in touch.iter().enumerate() {
                let ai = &sf.rows[i].psd[ki].1;
                let waw = if ai.len() < d {
                    let mut t = DMatrix::zeros(d, d);
                    for &(p, q, a) in ai {
                        let wp = s.w.column(p);
                        let wq = s.w.column(q);
                        if p == q {
                            t.ger(a, &wp, &wp, 1.0);
                        } else {
                            t.ger(a, &wp, &wq, 1.0);
                            t.ger(a, &wq, &wp, 1.0);
                        }
                    }
                    t
                } else {
                    let mut ad = DMatrix::zeros(d, d);
                    scatter(ai, 1.0, &mut ad);
                    &s.w * ad * &s.w
                };
                for &(j, kj) in &touch[ti..] {
                    let v = sym_dot(&sf.rows[j].psd[kj].1, &waw);
                    mmat[(i, j)] += v;
                    if i != j {
                        mmat[(j, i)] += v;
                    }
                }
            }
        }
        if sf.n_lp > 0 {
            let mut al = DMatrix::<f64>::zeros(m, sf.n_lp);
            for (i, row) in sf.rows.iter().enumerate() {
                for &(k, a) in &row.lp {
                    al[(i, k)] += a;
                }
            }
            let scaled = &al * DMatrix::from_diagonal(&wl);
            mmat += scaled * al.transpose();
        }
        let af = {
            let mut af = DMatrix::<f64>::zeros(m, sf.n_free);
            for (i, row) in sf.rows.iter().enumerate() {
                for &(k, a) in &row.free {
                    af[(i, k)] += a;
                }
            }
            af
        };
        let factor = if sf.n_free == 0 {
            match Cholesky::new(mmat.clone()) {
                Some(c) => Factor::Chol(c),
                None => Factor::Lu(LU::new(mmat.clone())),
            }
        } else {
            let n = m + sf.n_free;
            let mut k = DMatrix::zeros(n, n);
            k.view_mut((0, 0), (m, m)).copy_from(&mmat);
            k.view_mut((0, m), (m, sf.n_free)).copy_from(&af);
            k.view_mut((m, 0), (sf.n_free, m)).copy_from(&af.transpose());
            Factor::Lu(LU::new(k))
        };

        // Solve the Newton system for a given complementarity rhs.
        let newton = |rc: &[DMatrix<f64>], rcl: &DVector<f64>| -> Option<Direction> {
            // h = rp - A(Rc - W Rd W)
            let tmp: Vec<DMatrix<f64>> = (0..sf.dims.len())
                .map(|i| &rc[i] - &scal[i].w * &rd[i] * &scal[i].w)
                .collect();
            let tmpl = DVector::from_iterator(sf.n_lp, (0..sf.n_lp).map(|k| rcl[k] - wl[k] * rdl[k]));
            let h = &rp - sf.apply(&tmp, &tmpl, &DVector::zeros(sf.n_free));
            let mut rhs = DVector::zeros(m + sf.n_free);
            rhs.rows_mut(0, m).copy_from(&h);
            rhs.rows_mut(m, sf.n_free).copy_from(&rdf);
            let sol = factor.solve(&rhs)?;
            let dy = sol.rows(0, m).into_owned();
            let dxf = sol.rows(m, sf.n_free).into_owned();
            let (atdy, atdyl) = sf.adjoint(&dy);
            let dz: Vec<DMatrix<f64>> = (0..sf.dims.len()).map(|i| &rd[i] - &atdy[i]).collect();
            let dx: Vec<DMatrix<f64>> = (0..sf.dims.len())
                .map(|i| {
                    let t = &rc[i] - &scal[i].w * &dz[i] * &scal[i].w;
                    (&t + t.transpose()) * 0.5
                })
                .collect();
            let dzl = &rdl - atdyl;
            let dxl = DVector::from_iterator(sf.n_lp, (0..sf.n_lp).map(|k| rcl[k] - wl[k] * dzl[k]));
            let all_finite = dy.iter().chain(dxf.iter()).all(|v| v.is_finite());
            all_finite.then_some(Direction {
                dx,
                dz,
                dxl,
                dzl,
                dxf,
                dy,
            })
        };

        let steps = |dir: &Direction| -> Option<(f64, f64)> {
            let mut ap = max_step_lp(&xl, &dir.dxl);
            let mut ad = max_step_lp(&zl, &dir.dzl);
            for i in 0..sf.dims.len() {
                ap = ap.min(max_step_psd(&x[i], &dir.dx[i])?);
                ad = ad.min(max_step_psd(&z[i], &dir.dz[i])?);
            }
            Some((ap, ad))
        };

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = x.iter().map(|xi| -xi).collect();
        let rcl_aff = -&xl;
        let Some(aff) = newton(&rc_aff, &rcl_aff) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let Some((ap_aff, ad_aff)) = steps(&aff) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let (ap_aff, ad_aff) = (ap_aff.min(1.0), ad_aff.min(1.0));
        let mut xz_aff = 0.0;
        for i in 0..sf.dims.len() {
            let xa = &x[i] + &aff.dx[i] * ap_aff;
            let za = &z[i] + &aff.dz[i] * ad_aff;
            xz_aff += frob_dot(&xa, &za);
        }
        xz_aff += (&xl + &aff.dxl * ap_aff).dot(&(&zl + &aff.dzl * ad_aff));
        let mu_aff = (xz_aff / nu).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        let target = sigma * mu;

        // corrector
        let mut rc = Vec::with_capacity(sf.dims.len());
        for (i, s) in scal.iter().enumerate() {
            let d = sf.dims[i];
            let dxs = &s.g_inv * &aff.dx[i] * s.g_inv.transpose();
            let dzs = s.g.transpose() * &aff.dz[i] * &s.g;
            let corr = &dxs * &dzs + &dzs * &dxs;
            let mut dmat = DMatrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    let mut num = -corr[(r, c)];
                    if r == c {
                        num += 2.0 * target - 2.0 * s.v[r] * s.v[r];
                    }
                    dmat[(r, c)] = num / (s.v[r] + s.v[c]);
                }
            }
            rc.push(&s.g * dmat * s.g.transpose());
        }
        let rcl = DVector::from_iterator(
            sf.n_lp,
            (0..sf.n_lp).map(|k| (target - xl[k] * zl[k] - aff.dxl[k] * aff.dzl[k]) / zl[k]),
        );
        let Some(dir) = newton(&rc, &rcl) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = steps(&dir) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);

        for i in 0..sf.dims.len() {
            x[i] += &dir.dx[i] * ap;
            z[i] += &dir.dz[i] * ad;
            x[i] = (&x[i] + x[i].transpose()) * 0.5;
            z[i] = (&z[i] + z[i].transpose()) * 0.5;
        }
        xl += &dir.dxl * ap;
        zl += &dir.dzl * ad;
        xf += &dir.dxf * ap;
        y += &dir.dy * ad;
    }

    let (pobj, dobj, gap, pinf, dinf) = last;
    let nonneg_values = xl.iter().take(sf.n_nonneg).copied().collect();
    let duals: Vec<f64> = y.iter().zip(&sf.row_scale).map(|(v, s)| v * s * c_scale).collect();
    // min-form multipliers of `a'x + s = r` are -λ for `a'x <= r` in max form
    let eq_duals = duals[..sf.n_eq].iter().map(|v| -v).collect();
    let ineq_duals = duals[sf.n_eq..].iter().map(|v| -v).collect();
    let constant = p.objective.constant;
    ConicSolution {
        status,
        psd_values: x,
        nonneg_values,
        free_values: xf.iter().copied().collect(),
        eq_duals,
        ineq_duals,
        primal_objective: -pobj * c_scale + constant,
        dual_objective: -dobj * c_scale + constant,
        duality_gap: gap,
        primal_residual: pinf,
        dual_residual: dinf,
        iterations,
    }
}
