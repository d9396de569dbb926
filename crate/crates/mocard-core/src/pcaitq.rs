//! Off-card template generation.
//!
//! A float embedding `f` becomes a binary template in three steps: center
//! and project onto the top-L principal directions, rotate by the trained
//! orthogonal ITQ matrix, then binarize by sign (strictly positive
//! coordinates become 1-bits). Enrollment fuses several templates by
//! bit-wise majority. Each trained parameter set is addressed by a
//! RotationID through a small on-disk registry, so rotating the handle
//! revokes every template minted under the old parameters.

mod itq;
mod model_io;
mod pca;

pub use itq::{train_itq, ItqOutcome};
pub use model_io::ModelRegistry;
pub use pca::train_pca;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::apdu::{BinaryTemplate, CodecError};

#[derive(Debug, Error)]
pub enum PcaItqError {
    #[error("embedding has {actual} dimensions, model expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("embeddings disagree on dimensionality ({0} vs {1})")]
    InconsistentDimensions(usize, usize),
    #[error("{samples} samples is not enough to train {bits} bits (need > {bits})")]
    NotEnoughSamples { samples: usize, bits: u16 },
    #[error("embedding dimension {dim} is below the requested {bits} bits")]
    DimensionTooSmall { dim: usize, bits: u16 },
    #[error("unsupported template length: {0} bits")]
    UnsupportedLength(u16),
    #[error("embeddings contain non-finite values")]
    NonFiniteInput,
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("SVD did not converge")]
    SvdFailed,
    #[error("cannot fuse an empty template list")]
    EmptyFusionList,
    #[error("cannot fuse templates of different lengths")]
    MixedFusionLengths,
    #[error("matrix {name} is not orthogonal (defect {defect:.3e})")]
    NotOrthogonal { name: &'static str, defect: f64 },
    #[error("model registry has no free RotationID")]
    RegistryFull,
    #[error("no model registered under RotationID {0}")]
    UnknownRotationId(u16),
    #[error("malformed model file: {0}")]
    ModelFormat(&'static str),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A labelled float embedding, the unit of training and probe input.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatEmbedding {
    pub label: u32,
    pub values: Vec<f64>,
}

/// Trained projection parameters addressed by one RotationID.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaItqModel {
    pub mu: DVector<f64>,
    /// d x L, orthonormal columns.
    pub w_pca: DMatrix<f64>,
    /// L x L orthogonal rotation.
    pub rotation: DMatrix<f64>,
    pub rotation_id: u16,
    pub length_bits: u16,
}

impl PcaItqModel {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Binarize one embedding: bit i is 1 iff the rotated projection is
    /// strictly positive in coordinate i.
    pub fn encode(&self, values: &[f64]) -> Result<BinaryTemplate, PcaItqError> {
        if values.len() != self.dim() {
            return Err(PcaItqError::DimensionMismatch {
                expected: self.dim(),
                actual: values.len(),
            });
        }
        let centered = DVector::from_column_slice(values) - &self.mu;
        let projected = self.w_pca.transpose() * centered;
        let rotated = self.rotation.transpose() * projected;
        let bits: Vec<bool> = rotated.iter().map(|&z| z > 0.0).collect();
        Ok(BinaryTemplate::from_bits(&bits)?)
    }

    pub fn encode_embedding(
        &self,
        embedding: &FloatEmbedding,
    ) -> Result<BinaryTemplate, PcaItqError> {
        self.encode(&embedding.values)
    }

    /// Check the orthogonality invariants of both trained matrices.
    pub fn check_orthogonality(&self, tolerance: f64) -> Result<(), PcaItqError> {
        let w_defect = orthogonality_defect(&self.w_pca);
        if w_defect > tolerance {
            return Err(PcaItqError::NotOrthogonal {
                name: "w_pca",
                defect: w_defect,
            });
        }
        let r_defect = orthogonality_defect(&self.rotation);
        if r_defect > tolerance {
            return Err(PcaItqError::NotOrthogonal {
                name: "rotation",
                defect: r_defect,
            });
        }
        Ok(())
    }
}

/// max |M^T M - I|.
pub(crate) fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let identity = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
    (gram - identity).abs().max()
}

/// Stack embeddings into an N x d sample matrix, validating shape and
/// finiteness.
pub fn embeddings_matrix(embeddings: &[FloatEmbedding]) -> Result<DMatrix<f64>, PcaItqError> {
    let dim = match embeddings.first() {
        Some(e) => e.values.len(),
        None => return Err(PcaItqError::NotEnoughSamples { samples: 0, bits: 0 }),
    };
    for e in embeddings {
        if e.values.len() != dim {
            return Err(PcaItqError::InconsistentDimensions(dim, e.values.len()));
        }
        if e.values.iter().any(|v| !v.is_finite()) {
            return Err(PcaItqError::NonFiniteInput);
        }
    }
    Ok(DMatrix::from_fn(embeddings.len(), dim, |i, j| {
        embeddings[i].values[j]
    }))
}

/// Full training pipeline: PCA, then ITQ on the projected training data.
pub fn train_model(
    embeddings: &[FloatEmbedding],
    length_bits: u16,
    iterations: usize,
    seed: u64,
    rotation_id: u16,
) -> Result<(PcaItqModel, ItqOutcome), PcaItqError> {
    let data = embeddings_matrix(embeddings)?;
    let (mu, w_pca) = train_pca(&data, length_bits)?;
    let centered = {
        let mut m = data;
        for mut row in m.row_iter_mut() {
            row -= mu.transpose();
        }
        m
    };
    let projected = centered * &w_pca;
    let itq = train_itq(&projected, iterations, seed)?;
    let model = PcaItqModel {
        mu,
        w_pca,
        rotation: itq.rotation.clone(),
        rotation_id,
        length_bits,
    };
    Ok((model, itq))
}

/// Bit-wise majority vote across templates of equal length. Even splits
/// take the bit from the first template in list order.
pub fn majority_fuse(templates: &[BinaryTemplate]) -> Result<BinaryTemplate, PcaItqError> {
    let first = templates.first().ok_or(PcaItqError::EmptyFusionList)?;
    let bits = first.length_bits();
    if templates.iter().any(|t| t.length_bits() != bits) {
        return Err(PcaItqError::MixedFusionLengths);
    }
    let total = templates.len();
    let fused: Vec<bool> = (0..usize::from(bits))
        .map(|i| {
            let ones = templates.iter().filter(|t| t.bit(i)).count();
            match (2 * ones).cmp(&total) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => first.bit(i),
            }
        })
        .collect();
    Ok(BinaryTemplate::from_bits(&fused)?)
}
