//! Iterative quantization: learn the orthogonal rotation that minimizes
//! sign-quantization loss over the projected training data.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{orthogonality_defect, PcaItqError};

/// Rotation plus per-iteration diagnostics.
#[derive(Debug, Clone)]
pub struct ItqOutcome {
    pub rotation: DMatrix<f64>,
    /// ||B - XR||^2 after each iteration's rotation update; non-increasing.
    pub quantization_loss: Vec<f64>,
    /// max |R^T R - I| after each iteration.
    pub orthogonality_defect: Vec<f64>,
}

/// Alternating minimization over (B, R):
/// fix R, set B = sign(XR); fix B, set R to the orthogonal Procrustes
/// solution for ||B - XR||.
pub fn train_itq(
    projected: &DMatrix<f64>,
    iterations: usize,
    seed: u64,
) -> Result<ItqOutcome, PcaItqError> {
    if iterations < 1 {
        return Err(PcaItqError::NoIterations);
    }
    let l = projected.ncols();
    let mut rotation = random_orthogonal(l, seed);
    let mut quantization_loss = Vec::with_capacity(iterations);
    let mut defects = Vec::with_capacity(iterations);

    for _ in 0..iterations {
        let binary = sign_matrix(&(projected * &rotation));
        rotation = procrustes_rotation(projected, &binary)?;
        let residual = &binary - projected * &rotation;
        quantization_loss.push(residual.norm_squared());
        defects.push(orthogonality_defect(&rotation));
    }

    Ok(ItqOutcome {
        rotation,
        quantization_loss,
        orthogonality_defect: defects,
    })
}

/// Entrywise sign into {-1, +1}; strictly positive maps to +1.
fn sign_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| if v > 0.0 { 1.0 } else { -1.0 })
}

/// Orthogonal matrix that minimizes ||B - XR||_F: with X^T B = U S V^T the
/// minimizer is R = U V^T.
pub(crate) fn procrustes_rotation(
    x: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<DMatrix<f64>, PcaItqError> {
    let m = x.transpose() * b;
    let svd = m
        .try_svd(true, true, 1e-12, 100_000)
        .ok_or(PcaItqError::SvdFailed)?;
    let u = svd.u.ok_or(PcaItqError::SvdFailed)?;
    let v_t = svd.v_t.ok_or(PcaItqError::SvdFailed)?;
    Ok(u * v_t)
}

/// Seeded random orthogonal matrix from the QR factor of a Gaussian draw.
fn random_orthogonal(size: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = DMatrix::from_fn(size, size, |_, _| rng.sample(StandardNormal));
    gaussian.qr().q()
}
