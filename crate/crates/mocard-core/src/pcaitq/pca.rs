//! PCA front-end: sample mean and the top-L principal directions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::PcaItqError;
use crate::apdu::TEMPLATE_LENGTHS_BITS;

/// Train the centering vector and projection matrix from an N x d sample
/// matrix (rows are samples).
///
/// Columns of the returned projection are the covariance eigenvectors in
/// descending eigenvalue order. Each column is sign-canonicalized so its
/// largest-magnitude entry is non-negative, which makes training
/// deterministic across eigensolver sign conventions.
pub fn train_pca(
    data: &DMatrix<f64>,
    length_bits: u16,
) -> Result<(DVector<f64>, DMatrix<f64>), PcaItqError> {
    if !TEMPLATE_LENGTHS_BITS.contains(&length_bits) {
        return Err(PcaItqError::UnsupportedLength(length_bits));
    }
    let (n, d) = data.shape();
    let l = usize::from(length_bits);
    if n <= l {
        return Err(PcaItqError::NotEnoughSamples {
            samples: n,
            bits: length_bits,
        });
    }
    if d < l {
        return Err(PcaItqError::DimensionTooSmall {
            dim: d,
            bits: length_bits,
        });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(PcaItqError::NonFiniteInput);
    }

    let mu = DVector::from_fn(d, |j, _| data.column(j).sum() / n as f64);
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= mu.transpose();
    }
    let mut covariance = centered.transpose() * &centered / (n as f64 - 1.0);
    // Symmetrize away accumulation noise before the eigensolver.
    covariance = (&covariance + covariance.transpose()) * 0.5;

    let eigen = SymmetricEigen::new(covariance);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .expect("finite eigenvalues")
    });

    let mut w = DMatrix::zeros(d, l);
    for (col, &idx) in order.iter().take(l).enumerate() {
        let mut v = eigen.eigenvectors.column(idx).clone_owned();
        let mut max_abs = 0.0f64;
        let mut max_idx = 0usize;
        for (i, &value) in v.iter().enumerate() {
            if value.abs() > max_abs {
                max_abs = value.abs();
                max_idx = i;
            }
        }
        if v[max_idx] < 0.0 {
            v.neg_mut();
        }
        w.set_column(col, &v);
    }
    Ok((mu, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcaitq::orthogonality_defect;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Axis-aligned anisotropic Gaussian: variances 9, 4, 1, then a flat
    /// low-variance tail.
    fn anisotropic(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, d, |_, j| {
            let sigma = match j {
                0 => 3.0,
                1 => 2.0,
                2 => 1.0,
                _ => 0.1,
            };
            rng.sample::<f64, _>(StandardNormal) * sigma
        })
    }

    #[test]
    fn first_direction_aligns_with_highest_variance_axis() {
        let data = anisotropic(400, 20, 1);
        let (_, w) = train_pca(&data, 16).unwrap();
        // Axis 0 carries the largest variance.
        assert!(w[(0, 0)].abs() >= 0.99, "alignment {}", w[(0, 0)].abs());
    }

    #[test]
    fn centered_data_has_near_zero_mean() {
        let raw = anisotropic(300, 20, 2);
        let col_means = DVector::from_fn(20, |j, _| raw.column(j).sum() / 300.0);
        let mut data = raw;
        for mut row in data.row_iter_mut() {
            row -= col_means.transpose();
        }
        let (mu, _) = train_pca(&data, 16).unwrap();
        assert!(mu.amax() < 1e-9);
    }

    #[test]
    fn projected_training_data_is_decorrelated() {
        let data = anisotropic(500, 24, 3);
        let (mu, w) = train_pca(&data, 16).unwrap();
        let mut centered = data;
        for mut row in centered.row_iter_mut() {
            row -= mu.transpose();
        }
        let projected = centered * &w;
        let cov = projected.transpose() * &projected / 499.0;
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert!(cov[(i, j)].abs() < 1e-6, "cov[{i},{j}] = {}", cov[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn projection_columns_are_orthonormal() {
        let data = anisotropic(200, 40, 4);
        let (_, w) = train_pca(&data, 32).unwrap();
        assert!(orthogonality_defect(&w) < 1e-9);
    }

    #[test]
    fn eigenvalue_order_is_descending() {
        let data = anisotropic(400, 20, 5);
        let (mu, w) = train_pca(&data, 16).unwrap();
        let mut centered = data;
        for mut row in centered.row_iter_mut() {
            row -= mu.transpose();
        }
        let projected = centered * &w;
        let variances: Vec<f64> = (0..16)
            .map(|j| {
                let col = projected.column(j);
                col.dot(&col) / 399.0
            })
            .collect();
        for pair in variances.windows(2) {
            assert!(pair[0] >= pair[1], "variances not descending: {variances:?}");
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let data = DMatrix::<f64>::zeros(16, 20);
        assert!(matches!(
            train_pca(&data, 16),
            Err(PcaItqError::NotEnoughSamples { samples: 16, bits: 16 })
        ));
        let data = DMatrix::<f64>::zeros(40, 10);
        assert!(matches!(
            train_pca(&data, 16),
            Err(PcaItqError::DimensionTooSmall { dim: 10, bits: 16 })
        ));
        let data = DMatrix::<f64>::zeros(40, 20);
        assert!(matches!(
            train_pca(&data, 24),
            Err(PcaItqError::UnsupportedLength(24))
        ));
    }
}
