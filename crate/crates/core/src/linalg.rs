//! Dense complex and Hermitian matrix primitives.
//!
//! Everything in this crate works on small dense matrices (a few hundred
//! rows at most), so the routines here favour clarity over blocking or
//! sparsity. Hermitian eigendecomposition is delegated to nalgebra's
//! symmetric QR iteration, which handles complex Hermitian input directly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Maximum elementwise deviation from Hermitian symmetry, relative to
/// `max(1, max |a_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A matrix is declared PSD when `λ_min ≥ -PSD_TOL · max_diag`.
pub const PSD_TOL: f64 = 1e-8;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// Complex Hermitian matrix. Construction validates symmetry and forces the
/// diagonal to be exactly real.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMat(CMat);

impl HermMat {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Hermitian matrix entry".into()));
        }
        let scale = m.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
        let n = m.nrows();
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitian { deviation: dev });
        }
        Ok(Self::symmetrize(m))
    }

    /// Projects an arbitrary square matrix onto the Hermitian matrices,
    /// `(A + Aᴴ) / 2`.
    pub fn symmetrize(m: CMat) -> Self {
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self(h)
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMat::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    /// `x xᴴ`
    pub fn outer(x: &CVec) -> Self {
        Self::symmetrize(x * x.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// `Re tr(self · other)`; exact trace of the product for Hermitian pairs.
    pub fn trace_product(&self, other: &HermMat) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0[(i, j)] * other.0[(j, i)]).re;
            }
        }
        acc
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).fold(0.0, f64::max)
    }
}

impl std::ops::Add for &HermMat {
    type Output = HermMat;
    fn add(self, rhs: &HermMat) -> HermMat {
        HermMat(&self.0 + &rhs.0)
    }
}

impl std::ops::Mul<f64> for &HermMat {
    type Output = HermMat;
    fn mul(self, rhs: f64) -> HermMat {
        HermMat(self.0.map(|z| z * rhs))
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eig_hermitian(a: &HermMat) -> Result<HermEigen> {
    let n = a.dim();
    if n == 0 {
        return Ok(HermEigen {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        });
    }
    let eig =
        a.0.clone()
            .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER)
            .ok_or(Error::NoConvergence("Hermitian eigendecomposition"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermEigen { values, vectors })
}

pub fn min_eigenvalue(a: &HermMat) -> Result<f64> {
    let eig = eig_hermitian(a)?;
    Ok(eig.values.first().copied().unwrap_or(0.0))
}

/// PSD test with the tolerance scaled by the largest diagonal entry.
pub fn is_psd(a: &HermMat) -> Result<bool> {
    let lmin = min_eigenvalue(a)?;
    Ok(lmin >= -PSD_TOL * a.max_diag().max(f64::MIN_POSITIVE))
}

/// `[[Re A, -Im A], [Im A, Re A]]`.
pub fn real_embedding(a: &HermMat) -> DMatrix<f64> {
    embed_complex(&a.0)
}

/// Real embedding of an arbitrary complex matrix.
pub fn embed_complex(a: &CMat) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i + r, j + c)] = z.re;
            out[(i, j + c)] = -z.im;
            out[(i + r, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`real_embedding`] for an arbitrary real symmetric `2n × 2n`
/// matrix. The input is first averaged onto the embedded-complex subspace,
/// which preserves every trace inner product against embedded data.
pub fn from_real_embedding(y: &DMatrix<f64>) -> Result<HermMat> {
    let (r, c) = y.shape();
    if r != c || r % 2 != 0 {
        return Err(Error::Dimension(format!(
            "real embedding must be square with even dimension, got {r}x{c}"
        )));
    }
    let n = r / 2;
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
            let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(HermMat::symmetrize(m))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_herm(n: usize, rng: &mut impl Rng) -> HermMat {
        let m = CMat::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermMat::symmetrize(m)
    }

    #[test]
    fn diagonal_eigen() {
        let a = HermMat::from_real(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
        let e = eig_hermitian(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 2.0).abs() < 1e-14);
        // first eigenvector is ±e₂ up to phase
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_like_eigenvalues() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let a = HermMat::new(m).unwrap();
        let e = eig_hermitian(&a).unwrap();
        assert!(e.values[0].abs() < 1e-12);
        assert!((e.values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_and_min_eigen() {
        let a = HermMat::from_real(&DMatrix::from_element(1, 1, 5.0)).unwrap();
        assert_eq!(eig_hermitian(&a).unwrap().values, vec![5.0]);
        assert!((min_eigenvalue(&HermMat::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        let b = HermMat::from_real(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap();
        assert!((min_eigenvalue(&b).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(min_eigenvalue(&HermMat::zeros(2)).unwrap(), 0.0);
        assert!(is_psd(&HermMat::zeros(2)).unwrap());
        assert!(!is_psd(&b).unwrap());
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(HermMat::new(m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn embedding_examples() {
        let real = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let e = real_embedding(&HermMat::from_real(&real).unwrap());
        assert_eq!(e.view((0, 0), (2, 2)), real.view((0, 0), (2, 2)));
        assert_eq!(e.view((2, 2), (2, 2)), real.view((0, 0), (2, 2)));
        assert!(e.view((0, 2), (2, 2)).iter().all(|&x| x == 0.0));

        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let e = real_embedding(&HermMat::new(m).unwrap());
        let mut ev: Vec<f64> = e.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([0.0, 0.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }

        let s = real_embedding(&HermMat::from_real(&DMatrix::from_element(1, 1, 4.0)).unwrap());
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 4.0]));
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 12] {
            let a = random_herm(n, &mut rng);
            let e = eig_hermitian(&a).unwrap();
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let lam = CMat::from_diagonal(&DVector::from_iterator(n, e.values.iter().map(|&x| c(x, 0.0))));
            let rec = &e.vectors * lam * e.vectors.adjoint();
            let scale = max_abs(a.as_matrix());
            assert!(max_abs(&(rec - a.as_matrix())) < 1e-9 * scale);
            let gram = e.vectors.adjoint() * &e.vectors;
            assert!(max_abs(&(gram - CMat::identity(n, n))) < 1e-9);
            assert_eq!(min_eigenvalue(&a).unwrap(), e.values[0]);
        }
    }

    #[test]
    fn embedding_traces_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_herm(4, &mut rng);
            let x = random_herm(4, &mut rng);
            let ea = real_embedding(&a);
            let ex = real_embedding(&x);
            assert!((ea.trace() - 2.0 * a.trace()).abs() < 1e-12);
            let lhs = a.trace_product(&x);
            let rhs = 0.5 * (&ea * &ex).trace();
            assert!((lhs - rhs).abs() < 1e-12);
            assert_eq!(real_embedding(&(&a + &x)), &ea + &ex);
            let back = from_real_embedding(&ea).unwrap();
            assert!(max_abs(&(back.as_matrix() - a.as_matrix())) < 1e-15);
            let mut ev_a = eig_hermitian(&a).unwrap().values;
            ev_a.extend(ev_a.clone());
            ev_a.sort_by(f64::total_cmp);
            let mut ev_e: Vec<f64> = ea.symmetric_eigen().eigenvalues.iter().copied().collect();
            ev_e.sort_by(f64::total_cmp);
            for (p, q) in ev_a.iter().zip(&ev_e) {
                assert!((p - q).abs() < 1e-10);
            }
        }
    }
}
