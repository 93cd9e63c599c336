//! Rank-one recovery from a lifted SDP solution by Gaussian randomization.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, CMat, CVec, HermMat, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RecoveryTarget {
    /// Beamformer rescaled to exactly this transmit power.
    Power(f64),
    /// Lifted IRS vector `[conj(θ); 1]`: the last entry is normalized to one
    /// and the others are clipped to unit modulus.
    Irs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomizationOptions {
    pub samples: usize,
    /// `λ₂/λ₁` at or below which the principal component is used directly.
    pub rank_one_ratio: f64,
}

impl Default for RandomizationOptions {
    fn default() -> Self {
        Self {
            samples: 200,
            rank_one_ratio: 1e-6,
        }
    }
}

/// Draws `V Λ^{1/2} e` with `e ~ CN(0, I)` from a PSD matrix.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    factor: CMat,
    principal: CVec,
    near_rank_one: bool,
}

impl GaussianSampler {
    pub fn new(x: &HermMat, rank_one_ratio: f64) -> Result<Self> {
        let eig = eig_hermitian(x)?;
        let n = x.dim();
        let lambda: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
        let mut factor = eig.vectors.clone();
        for (j, l) in lambda.iter().enumerate() {
            let s = l.sqrt();
            factor.column_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        let l1 = lambda[n - 1];
        let l2 = if n > 1 { lambda[n - 2] } else { 0.0 };
        Ok(Self {
            principal: factor.column(n - 1).into_owned(),
            factor,
            near_rank_one: l1 > 0.0 && l2 <= rank_one_ratio * l1,
        })
    }

    pub fn near_rank_one(&self) -> bool {
        self.near_rank_one
    }

    /// `√λ₁ v₁`
    pub fn principal(&self) -> &CVec {
        &self.principal
    }

    pub fn draw(&self, rng: &mut impl Rng) -> CVec {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let e = CVec::from_fn(self.factor.ncols(), |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * half, im * half)
        });
        &self.factor * e
    }
}

/// Applies the target's normalization; `None` when it is undefined.
pub fn post_process(x: CVec, target: RecoveryTarget) -> Option<CVec> {
    match target {
        RecoveryTarget::Power(p) => {
            let norm = x.norm();
            if p <= 0.0 {
                return Some(CVec::zeros(x.len()));
            }
            if !(norm > 0.0) || !norm.is_finite() {
                return None;
            }
            Some(x * C64::new(p.sqrt() / norm, 0.0))
        }
        RecoveryTarget::Irs => {
            let n = x.len() - 1;
            let pivot = x[n];
            if !(pivot.norm() > 1e-12 * x.norm()) {
                return None;
            }
            let mut phi = x / pivot;
            let mut worst = 0.0f64;
            for z in phi.rows_mut(0, n).iter_mut() {
                let m = z.norm();
                if m > 1.0 {
                    worst = worst.max(m - 1.0);
                    *z /= m;
                }
            }
            if worst > 1e-3 {
                log::debug!("IRS candidate clipped, largest modulus excess {worst:.3e}");
            }
            phi[n] = C64::new(1.0, 0.0);
            Some(phi)
        }
    }
}

/// Returns the feasible candidate with the highest score. `score` yields
/// `None` for infeasible candidates.
pub fn randomize_rank_one(
    x: &HermMat,
    target: RecoveryTarget,
    mut score: impl FnMut(&CVec) -> Option<f64>,
    opts: &RandomizationOptions,
    rng: &mut impl Rng,
) -> Result<CVec> {
    let sampler = GaussianSampler::new(x, opts.rank_one_ratio)?;
    if sampler.near_rank_one() {
        if let Some(v) = post_process(sampler.principal().clone(), target) {
            if score(&v).is_some() {
                return Ok(v);
            }
        }
    }
    let mut best: Option<(f64, CVec)> = None;
    for _ in 0..opts.samples {
        let Some(v) = post_process(sampler.draw(rng), target) else {
            continue;
        };
        if let Some(s) = score(&v) {
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, v));
            }
        }
    }
    best.map(|(_, v)| v).ok_or(Error::NoFeasibleCandidate)
}
