//! Evaluation metrics for recovered estimates.
//!
//! All direction metrics normalize the estimate internally, so any
//! positive rescaling of an estimate scores identically.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::model::{sign_pm, ProblemInstance, SparseSignal};

/// Metrics of one estimate against one instance.
#[derive(Debug, Clone, Copy)]
pub struct EvaluationReport {
    /// Angular error in units of half-turns (radians over pi), in [0, 1].
    pub angular_error: f64,
    /// Reconstruction SNR in dB; `+inf` for an exact recovery.
    pub r_snr_db: f64,
    /// Fraction of true support missed.
    pub fnr: f64,
    /// Fraction of off-support coordinates falsely selected.
    pub fpr: f64,
    /// Fraction of measurement signs the estimate gets wrong.
    pub hamming_fraction: f64,
    pub wall_clock_seconds: f64,
}

/// `acos(<x/||x||, truth>) / pi`, clamped against floating-point overshoot
/// of the inner product.
pub fn angular_error(estimate: &[f64], truth: &SparseSignal) -> Result<f64> {
    if estimate.len() != truth.dimension() {
        return Err(Error::Shape(format!(
            "estimate length {} vs truth dimension {}",
            estimate.len(),
            truth.dimension()
        )));
    }
    let nrm = norm2(estimate);
    if nrm == 0.0 {
        return Err(Error::UndefinedMetric(
            "angular error of the zero vector".into(),
        ));
    }
    let cosine = (dot(estimate, truth.values()) / nrm).clamp(-1.0, 1.0);
    Ok(cosine.acos() / std::f64::consts::PI)
}

/// `-20 log10 ||x/||x|| - truth||`; `+inf` when the normalized estimate
/// equals the truth exactly.
pub fn reconstruction_snr(estimate: &[f64], truth: &SparseSignal) -> Result<f64> {
    if estimate.len() != truth.dimension() {
        return Err(Error::Shape(format!(
            "estimate length {} vs truth dimension {}",
            estimate.len(),
            truth.dimension()
        )));
    }
    let nrm = norm2(estimate);
    if nrm == 0.0 {
        return Err(Error::UndefinedMetric(
            "reconstruction SNR of the zero vector".into(),
        ));
    }
    let diff_sq: f64 = estimate
        .iter()
        .zip(truth.values())
        .map(|(&e, &t)| {
            let d = e / nrm - t;
            d * d
        })
        .sum();
    if diff_sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * diff_sq.log10())
}

/// False negative and false positive support rates. Supports are compared
/// exactly: solvers emit hard-thresholded vectors, so a coordinate is
/// selected iff it is nonzero.
pub fn support_rates(estimate: &[f64], truth: &SparseSignal) -> Result<(f64, f64)> {
    if estimate.len() != truth.dimension() {
        return Err(Error::Shape(format!(
            "estimate length {} vs truth dimension {}",
            estimate.len(),
            truth.dimension()
        )));
    }
    let n = truth.dimension();
    let s = truth.sparsity();
    if s == 0 {
        return Err(Error::UndefinedMetric(
            "support rates need a nonempty true support".into(),
        ));
    }
    if n <= s {
        return Err(Error::UndefinedMetric("support rates need n > s".into()));
    }
    let true_support = truth.support();
    let mut missed = 0usize;
    for &j in true_support {
        if estimate[j] == 0.0 {
            missed += 1;
        }
    }
    let mut false_alarms = 0usize;
    for (j, &v) in estimate.iter().enumerate() {
        if v != 0.0 && true_support.binary_search(&j).is_err() {
            false_alarms += 1;
        }
    }
    Ok((
        missed as f64 / s as f64,
        false_alarms as f64 / (n - s) as f64,
    ))
}

/// Fraction of rows where `sgn(<a_i, x>)` disagrees with the observation,
/// with `sgn(0) = +1`.
pub fn hamming_fraction(estimate: &[f64], instance: &ProblemInstance) -> Result<f64> {
    if estimate.len() != instance.dimension() {
        return Err(Error::Shape(format!(
            "estimate length {} vs instance dimension {}",
            estimate.len(),
            instance.dimension()
        )));
    }
    let mismatches = instance
        .matrix
        .mul_vec(estimate)
        .iter()
        .zip(instance.observations.signs())
        .filter(|&(&p, &y)| sign_pm(p) != y)
        .count();
    Ok(mismatches as f64 / instance.measurements() as f64)
}

/// Full evaluation of an estimate against an instance with ground truth.
pub fn evaluate(
    estimate: &[f64],
    instance: &ProblemInstance,
    wall_clock_seconds: f64,
) -> Result<EvaluationReport> {
    let truth = instance
        .truth
        .as_ref()
        .ok_or_else(|| Error::UndefinedMetric("instance carries no ground truth".into()))?;
    let ae = angular_error(estimate, truth)?;
    let r_snr_db = reconstruction_snr(estimate, truth)?;
    let (fnr, fpr) = support_rates(estimate, truth)?;
    let hamming = hamming_fraction(estimate, instance)?;
    Ok(EvaluationReport {
        angular_error: ae,
        r_snr_db,
        fnr,
        fpr,
        hamming_fraction: hamming,
        wall_clock_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_signal;
    use crate::rng::Rng;

    fn unit_truth(values: Vec<f64>) -> SparseSignal {
        let n = values.len();
        let support: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect();
        SparseSignal::new(n, support, values).unwrap()
    }

    #[test]
    fn angular_error_extremes() {
        let truth = unit_truth(vec![1.0, 0.0, 0.0]);
        assert_eq!(angular_error(&[1.0, 0.0, 0.0], &truth).unwrap(), 0.0);
        assert_eq!(angular_error(&[0.0, 1.0, 0.0], &truth).unwrap(), 0.5);
        assert_eq!(angular_error(&[-1.0, 0.0, 0.0], &truth).unwrap(), 1.0);
    }

    #[test]
    fn angular_error_is_scale_invariant() {
        let truth = unit_truth(vec![0.6, 0.8, 0.0]);
        let x = vec![0.3, 0.5, -0.1];
        let base = angular_error(&x, &truth).unwrap();
        // Power-of-two scalings are exact in floating point, so the error
        // matches bit for bit.
        for &c in &[0.5, 2.0, 1024.0] {
            let scaled: Vec<f64> = x.iter().map(|&v| c * v).collect();
            assert_eq!(angular_error(&scaled, &truth).unwrap(), base);
        }
        // Arbitrary positive scalings agree to rounding.
        let scaled: Vec<f64> = x.iter().map(|&v| 3.7 * v).collect();
        assert!((angular_error(&scaled, &truth).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn angular_error_rejects_zero_estimate() {
        let truth = unit_truth(vec![1.0, 0.0]);
        assert!(matches!(
            angular_error(&[0.0, 0.0], &truth),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn r_snr_known_values() {
        // Orthogonal unit vectors: ||diff||^2 = 2, R-SNR = -10 log10 2.
        let truth = unit_truth(vec![1.0, 0.0]);
        let r = reconstruction_snr(&[0.0, 1.0], &truth).unwrap();
        assert!((r - (-3.010299956639812)).abs() < 1e-12);

        // ||diff|| = 0.1 gives exactly 20 dB.
        let d: f64 = 0.1;
        let c = 1.0 - d * d / 2.0; // cos between unit vectors at distance d
        let s = (1.0 - c * c).sqrt();
        let r2 = reconstruction_snr(&[c, s], &truth).unwrap();
        assert!((r2 - 20.0).abs() < 1e-10, "got {r2}");

        // Exact recovery reports the +inf sentinel; scaling keeps it.
        assert_eq!(
            reconstruction_snr(&[2.0, 0.0], &truth).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn r_snr_cosine_identity() {
        // -10 log10(2 - 2 cos(pi * AE)) equals the direct formula.
        let mut rng = Rng::seed_from_u64(100);
        for _ in 0..200 {
            let truth = generate_signal(12, 4, &mut rng).unwrap();
            let est: Vec<f64> = (0..12).map(|_| rng.normal()).collect();
            let ae = angular_error(&est, &truth).unwrap();
            let direct = reconstruction_snr(&est, &truth).unwrap();
            let via_identity = -10.0 * (2.0 - 2.0 * (std::f64::consts::PI * ae).cos()).log10();
            if direct.is_finite() {
                assert!(
                    (direct - via_identity).abs() <= 1e-10 * direct.abs().max(1.0),
                    "direct {direct} vs identity {via_identity}"
                );
            }
        }
    }

    #[test]
    fn support_rates_cases() {
        let v = 0.5;
        let truth = unit_truth(vec![v, v, v, v, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        // Perfect support.
        let (fnr, fpr) =
            support_rates(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &truth).unwrap();
        assert_eq!((fnr, fpr), (0.0, 0.0));
        // Zero estimate: all misses, no false alarms.
        let (fnr, fpr) = support_rates(&[0.0; 10], &truth).unwrap();
        assert_eq!((fnr, fpr), (1.0, 0.0));
        // Miss one true index, add two false ones: (1/4, 2/6).
        let (fnr, fpr) =
            support_rates(&[1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0], &truth).unwrap();
        assert!((fnr - 0.25).abs() < 1e-15);
        assert!((fpr - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn support_rates_reject_degenerate_inputs() {
        let truth = unit_truth(vec![1.0]);
        assert!(matches!(
            support_rates(&[1.0], &truth),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn hamming_fraction_consistency_and_flip() {
        let instance = crate::model::ProblemInstance::generate(10, 40, 2, 1e9, 5).unwrap();
        let truth = instance.truth.clone().unwrap();
        // Noise-free: the truth reproduces its own observations.
        assert_eq!(hamming_fraction(truth.values(), &instance).unwrap(), 0.0);
        // Negating a consistent estimate flips every measurement
        // (zero-margin rows are measure zero).
        let neg: Vec<f64> = truth.values().iter().map(|&v| -v).collect();
        assert_eq!(hamming_fraction(&neg, &instance).unwrap(), 1.0);
    }

    #[test]
    fn hamming_fraction_matches_naive_loop() {
        let instance = crate::model::ProblemInstance::generate(15, 60, 3, 1.0, 9).unwrap();
        let mut rng = Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..15).map(|_| rng.normal()).collect();
        let fast = hamming_fraction(&x, &instance).unwrap();
        let mut count = 0;
        for i in 0..60 {
            let p = dot(instance.matrix.row(i), &x);
            let s = if p >= 0.0 { 1 } else { -1 };
            if s != instance.observations.signs()[i] {
                count += 1;
            }
        }
        assert_eq!(fast, count as f64 / 60.0);
    }

    #[test]
    fn hamming_fraction_positive_scale_invariance() {
        let instance = crate::model::ProblemInstance::generate(15, 60, 3, 1.0, 10).unwrap();
        let mut rng = Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..15).map(|_| rng.normal()).collect();
        let base = hamming_fraction(&x, &instance).unwrap();
        let scaled: Vec<f64> = x.iter().map(|&v| 7.25 * v).collect();
        assert_eq!(hamming_fraction(&scaled, &instance).unwrap(), base);
    }

    #[test]
    fn evaluate_produces_consistent_report() {
        let instance = crate::model::ProblemInstance::generate(20, 80, 3, 10.0, 12).unwrap();
        let truth = instance.truth.clone().unwrap();
        let report = evaluate(truth.values(), &instance, 0.125).unwrap();
        assert_eq!(report.angular_error, 0.0);
        assert_eq!(report.r_snr_db, f64::INFINITY);
        assert_eq!(report.fnr, 0.0);
        assert_eq!(report.fpr, 0.0);
        assert!(report.hamming_fraction >= 0.0 && report.hamming_fraction <= 1.0);
        assert_eq!(report.wall_clock_seconds, 0.125);
    }
}
