//! Synthetic embedding generator: isotropic Gaussian identity means with
//! Gaussian within-identity noise, fully determined by the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::pcaitq::FloatEmbedding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDatasetSpec {
    pub n_identities: usize,
    pub images_per_identity: usize,
    pub dim: usize,
    /// Standard deviation of identity means around the origin.
    pub sigma_between: f64,
    /// Standard deviation of images around their identity mean; zero makes
    /// every image of an identity identical.
    pub sigma_within: f64,
    pub seed: u64,
}

impl SyntheticDatasetSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.n_identities == 0 || self.images_per_identity == 0 || self.dim == 0 {
            return Err(EvalError::BadSyntheticSpec("counts must be positive"));
        }
        if !(self.sigma_between > 0.0 && self.sigma_between.is_finite()) {
            return Err(EvalError::BadSyntheticSpec("sigma_between must be positive"));
        }
        if !(self.sigma_within >= 0.0 && self.sigma_within.is_finite()) {
            return Err(EvalError::BadSyntheticSpec("sigma_within must be non-negative"));
        }
        if self.sigma_within >= self.sigma_between {
            return Err(EvalError::BadSyntheticSpec(
                "sigma_within must be below sigma_between for meaningful separation",
            ));
        }
        Ok(())
    }
}

pub fn generate_synthetic(spec: &SyntheticDatasetSpec) -> Result<Vec<FloatEmbedding>, EvalError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.n_identities * spec.images_per_identity);
    for label in 0..spec.n_identities as u32 {
        let mean: Vec<f64> = (0..spec.dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * spec.sigma_between)
            .collect();
        for _ in 0..spec.images_per_identity {
            let values = mean
                .iter()
                .map(|m| m + rng.sample::<f64, _>(StandardNormal) * spec.sigma_within)
                .collect();
            out.push(FloatEmbedding { label, values });
        }
    }
    Ok(out)
}
