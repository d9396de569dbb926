//! ROC construction and operating-point selection over integer thresholds.

use super::{EvalError, OperatingPoint, RocCurve, RocRow, ScoreSet};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Build the integer-threshold ROC: for each tau in 0..=L,
/// tpr = |{g <= tau}| / |genuine| and far = |{i <= tau}| / |impostor|.
pub fn compute_roc(scores: &ScoreSet) -> Result<RocCurve, EvalError> {
    if scores.genuine.is_empty() || scores.impostor.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    let bits = scores.length_bits;
    let l = usize::from(bits);
    let mut genuine_hist = vec![0u64; l + 1];
    let mut impostor_hist = vec![0u64; l + 1];
    for &d in &scores.genuine {
        *genuine_hist
            .get_mut(d as usize)
            .ok_or(EvalError::ScoreOutOfRange { value: d, bits })? += 1;
    }
    for &d in &scores.impostor {
        *impostor_hist
            .get_mut(d as usize)
            .ok_or(EvalError::ScoreOutOfRange { value: d, bits })? += 1;
    }
    let n_genuine = scores.genuine.len() as f64;
    let n_impostor = scores.impostor.len() as f64;
    let mut rows = Vec::with_capacity(l + 1);
    let mut genuine_cum = 0u64;
    let mut impostor_cum = 0u64;
    for tau in 0..=l {
        genuine_cum += genuine_hist[tau];
        impostor_cum += impostor_hist[tau];
        let tpr = genuine_cum as f64 / n_genuine;
        rows.push(RocRow {
            tau: tau as u32,
            tpr,
            far: impostor_cum as f64 / n_impostor,
            frr: 1.0 - tpr,
        });
    }
    Ok(RocCurve {
        length_bits: bits,
        rows,
    })
}

/// Equal-error operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EerPoint {
    pub tau: u32,
    pub eer: f64,
    pub far: f64,
    pub frr: f64,
}

/// Pick the integer tau minimizing |far - frr| (smallest tau on ties) and
/// report the midpoint (far + frr) / 2 as the EER.
pub fn find_eer(curve: &RocCurve) -> EerPoint {
    let best = curve
        .rows
        .iter()
        .min_by(|a, b| {
            let da = (a.far - a.frr).abs();
            let db = (b.far - b.frr).abs();
            da.partial_cmp(&db).expect("finite rates")
        })
        .expect("curve has rows");
    EerPoint {
        tau: best.tau,
        eer: (best.far + best.frr) / 2.0,
        far: best.far,
        frr: best.frr,
    }
}

/// Pick the tau whose achieved FAR is closest to `target`.
///
/// Ties go to the lower achieved FAR, then to the higher TPR, then to the
/// smaller tau.
pub fn tpr_at_far(curve: &RocCurve, target: f64) -> Result<OperatingPoint, EvalError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(EvalError::BadFarTarget(target));
    }
    let mut best: Option<&RocRow> = None;
    for row in &curve.rows {
        let better = match best {
            None => true,
            Some(b) => {
                let (diff, best_diff) = ((row.far - target).abs(), (b.far - target).abs());
                diff < best_diff
                    || (diff == best_diff
                        && (row.far < b.far || (row.far == b.far && row.tpr > b.tpr)))
            }
        };
        if better {
            best = Some(row);
        }
    }
    let row = best.expect("curve has rows");
    Ok(OperatingPoint {
        tau: row.tau,
        tpr: row.tpr,
        far: row.far,
        target_far: Some(target),
    })
}

/// Normal-approximation binomial confidence interval around proportion `p`
/// observed over `n` trials, clamped to [0, 1].
pub fn binomial_ci(p: f64, n: u64, z: f64) -> (f64, f64) {
    let half_width = z * (p * (1.0 - p) / n as f64).sqrt();
    ((p - half_width).max(0.0), (p + half_width).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(genuine: &[u32], impostor: &[u32], bits: u16) -> ScoreSet {
        ScoreSet {
            genuine: genuine.to_vec(),
            impostor: impostor.to_vec(),
            length_bits: bits,
        }
    }

    #[test]
    fn perfect_separation() {
        let s = scores(&[0], &[16], 16);
        let curve = compute_roc(&s).unwrap();
        for row in &curve.rows[..16] {
            assert_eq!((row.tpr, row.far), (1.0, 0.0), "tau {}", row.tau);
        }
        assert_eq!(curve.rows[16].far, 1.0);
        assert_eq!(find_eer(&curve).eer, 0.0);
        let op = tpr_at_far(&curve, 0.01).unwrap();
        assert_eq!((op.tpr, op.far), (1.0, 0.0));
    }

    #[test]
    fn hand_counted_three_row_curve() {
        let s = scores(&[0, 1], &[1, 2], 16);
        let curve = compute_roc(&s).unwrap();
        assert_eq!((curve.rows[0].tpr, curve.rows[0].far), (0.5, 0.0));
        assert_eq!((curve.rows[1].tpr, curve.rows[1].far), (1.0, 0.5));
        assert_eq!((curve.rows[2].tpr, curve.rows[2].far), (1.0, 1.0));
    }

    #[test]
    fn eer_tie_takes_smallest_tau() {
        // tau=0: |0 - 0.5| = 0.5; tau=1: |0.5 - 0| = 0.5 -> pick tau=0,
        // EER = (0 + 0.5)/2 = 0.25.
        let s = scores(&[0, 1], &[1, 2], 16);
        let point = find_eer(&compute_roc(&s).unwrap());
        assert_eq!(point.tau, 0);
        assert_eq!(point.eer, 0.25);
    }

    #[test]
    fn far_target_prefers_closest_achieved_far() {
        let s = scores(&[0, 1], &[1, 2], 16);
        let op = tpr_at_far(&compute_roc(&s).unwrap(), 0.01).unwrap();
        assert_eq!(op.tau, 0);
        assert_eq!((op.tpr, op.far), (0.5, 0.0));
    }

    #[test]
    fn far_target_validation() {
        let s = scores(&[0], &[1], 16);
        let curve = compute_roc(&s).unwrap();
        assert!(tpr_at_far(&curve, 0.0).is_err());
        assert!(tpr_at_far(&curve, 1.0).is_err());
    }

    #[test]
    fn rejects_empty_and_out_of_range() {
        assert!(matches!(
            compute_roc(&scores(&[], &[1], 16)),
            Err(EvalError::EmptyScores)
        ));
        assert!(matches!(
            compute_roc(&scores(&[17], &[1], 16)),
            Err(EvalError::ScoreOutOfRange { value: 17, bits: 16 })
        ));
    }

    #[test]
    fn roc_rates_are_monotone_in_tau() {
        let s = scores(&[3, 5, 5, 9, 2], &[7, 8, 8, 12, 16, 1], 16);
        let curve = compute_roc(&s).unwrap();
        for pair in curve.rows.windows(2) {
            assert!(pair[1].tpr >= pair[0].tpr);
            assert!(pair[1].far >= pair[0].far);
        }
        assert_eq!(curve.rows.last().unwrap().tpr, 1.0);
        assert_eq!(curve.rows.last().unwrap().far, 1.0);
    }

    #[test]
    fn overlapping_gaussians_eer_matches_monte_carlo_overlap() {
        // Genuine ~ Binomial-ish around 20, impostor around 44 with the same
        // spread: symmetric overlap, EER equals the tail mass at the
        // crossing point within sampling error.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut genuine = Vec::new();
        let mut impostor = Vec::new();
        for _ in 0..20_000 {
            let g: f64 = 20.0 + 6.0 * rng.sample::<f64, _>(rand_distr::StandardNormal);
            let i: f64 = 44.0 + 6.0 * rng.sample::<f64, _>(rand_distr::StandardNormal);
            genuine.push(g.round().clamp(0.0, 64.0) as u32);
            impostor.push(i.round().clamp(0.0, 64.0) as u32);
        }
        let curve = compute_roc(&ScoreSet {
            genuine,
            impostor,
            length_bits: 64,
        })
        .unwrap();
        let point = find_eer(&curve);
        // Crossing at 32, two standard deviations from both means:
        // expected tail mass ~ Phi(-2) = 0.0228.
        assert!((point.eer - 0.0228).abs() < 0.005, "eer {}", point.eer);
    }

    #[test]
    fn binomial_ci_shrinks_with_n_and_clamps() {
        let (lo_small, hi_small) = binomial_ci(0.5, 100, Z_99);
        let (lo_big, hi_big) = binomial_ci(0.5, 10_000, Z_99);
        assert!(hi_small - lo_small > hi_big - lo_big);
        let (lo, hi) = binomial_ci(0.001, 50, Z_99);
        assert_eq!(lo, 0.0);
        assert!(hi < 1.0);
        let (_, hi) = binomial_ci(0.999, 50, Z_99);
        assert_eq!(hi, 1.0);
    }
}
