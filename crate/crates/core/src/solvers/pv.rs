//! Closed-form correlation maximizer.
//!
//! The maximizer of `<y, Ax>` over `{||x||_0 <= s, ||x||_2 <= 1}` has the
//! explicit solution `(A^T y)_s / ||(A^T y)_s||_2`: restricted to any
//! support `I`, Cauchy-Schwarz gives the optimum `(A^T y)|_I /
//! ||(A^T y)|_I||` with value `||(A^T y)|_I||`, which is maximized by the
//! top-s support. Non-iterative.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::model::{OneBitObservations, SensingMatrix};
use crate::solvers::{truncate_top_k, HaltReason, SolverResult};

/// Computes the closed-form estimate. Errors if `A^T y = 0`, where the
/// correlation objective is identically zero and no direction is
/// preferred.
pub fn pv_l0_solve(
    matrix: &SensingMatrix,
    observations: &OneBitObservations,
    sparsity: usize,
) -> Result<SolverResult> {
    let started = Instant::now();
    if observations.len() != matrix.rows() {
        return Err(Error::Shape(format!(
            "{} observations for {} matrix rows",
            observations.len(),
            matrix.rows()
        )));
    }
    if sparsity == 0 || sparsity > matrix.cols() {
        return Err(Error::InvalidConfig(format!(
            "sparsity {sparsity} must be in 1..={}",
            matrix.cols()
        )));
    }
    let y: Vec<f64> = observations.signs().iter().map(|&v| v as f64).collect();
    let correlation = matrix.tr_mul_vec(&y);
    if correlation.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateInstance(
            "A^T y is zero; the correlation objective is constant".into(),
        ));
    }
    let mut estimate = truncate_top_k(&correlation, sparsity)?;
    let nrm = norm2(&estimate);
    for v in estimate.iter_mut() {
        *v /= nrm;
    }
    Ok(SolverResult::finish(
        estimate,
        0,
        HaltReason::NonIterative,
        started,
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::model::ProblemInstance;
    use crate::rng::Rng;

    fn correlation_objective(
        matrix: &SensingMatrix,
        observations: &OneBitObservations,
        x: &[f64],
    ) -> f64 {
        let ax = matrix.mul_vec(x);
        ax.iter()
            .zip(observations.signs())
            .map(|(&p, &y)| y as f64 * p)
            .sum()
    }

    #[test]
    fn full_support_is_normalized_correlation() {
        let instance = ProblemInstance::generate(10, 30, 3, 1.0, 7).unwrap();
        let result = pv_l0_solve(&instance.matrix, &instance.observations, 10).unwrap();
        let y: Vec<f64> = instance
            .observations
            .signs()
            .iter()
            .map(|&v| v as f64)
            .collect();
        let aty = instance.matrix.tr_mul_vec(&y);
        let nrm = norm2(&aty);
        for (e, a) in result.estimate.iter().zip(&aty) {
            assert!((e - a / nrm).abs() < 1e-15);
        }
        assert_eq!(result.halt, HaltReason::NonIterative);
        assert_eq!(result.iterations, 0);
    }

    #[test]
    fn attains_exhaustive_support_optimum() {
        // The achieved correlation equals the maximum of ||(A^T y)|_S||
        // over all C(n, s) supports.
        let mut rng = Rng::seed_from_u64(3);
        for trial in 0..30 {
            let n = 10;
            let s = 3;
            let instance = ProblemInstance::generate(n, 25, 3, 1.0, 500 + trial).unwrap();
            let result = pv_l0_solve(&instance.matrix, &instance.observations, s).unwrap();
            let achieved =
                correlation_objective(&instance.matrix, &instance.observations, &result.estimate);

            let y: Vec<f64> = instance
                .observations
                .signs()
                .iter()
                .map(|&v| v as f64)
                .collect();
            let aty = instance.matrix.tr_mul_vec(&y);
            // Exhaustive oracle over supports; per support the optimum value
            // is the restricted norm of A^T y.
            let mut best = f64::NEG_INFINITY;
            let subsets = crate::solvers::projection::tests_support::all_subsets(n, s);
            for support in subsets {
                let v: f64 = support.iter().map(|&j| aty[j] * aty[j]).sum::<f64>().sqrt();
                best = best.max(v);
            }
            assert!(
                (achieved - best).abs() <= 1e-12 * best.max(1.0),
                "trial {trial}: achieved {achieved}, exhaustive {best}"
            );
            // The objective value also equals ||(A^T y)_s||.
            let top = crate::solvers::truncate_top_k(&aty, s).unwrap();
            assert!((achieved - norm2(&top)).abs() <= 1e-12 * best.max(1.0));
            let _ = &mut rng;
        }
    }

    #[test]
    fn estimate_is_unit_norm_and_sparse() {
        let instance = ProblemInstance::generate(50, 100, 5, 10.0, 11).unwrap();
        let result = pv_l0_solve(&instance.matrix, &instance.observations, 5).unwrap();
        assert!((norm2(&result.estimate) - 1.0).abs() < 1e-12);
        assert!(result.estimate.iter().filter(|&&v| v != 0.0).count() <= 5);
        // Dot with itself through the objective: <y, A x> > 0 at the optimum.
        assert!(
            correlation_objective(&instance.matrix, &instance.observations, &result.estimate) > 0.0
        );
        assert!(dot(&result.estimate, &result.normalized) > 0.99);
    }

    #[test]
    fn degenerate_zero_correlation_is_an_error() {
        // Two opposing measurements of the same row force A^T y = 0.
        let matrix = SensingMatrix::new(2, 2, vec![1.0, 0.5, 1.0, 0.5]).unwrap();
        let observations = OneBitObservations::new(vec![1, -1]).unwrap();
        assert!(matches!(
            pv_l0_solve(&matrix, &observations, 1),
            Err(Error::DegenerateInstance(_))
        ));
    }
}
