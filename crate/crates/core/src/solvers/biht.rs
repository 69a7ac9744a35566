//! Binary iterative hard thresholding baselines.
//!
//! Gradient-style corrections toward sign consistency with per-iteration
//! hard thresholding to s terms:
//!
//! - one-sided l1: `x <- [x + (tau/m) A^T (y - sgn(Ax))]_s`
//! - one-sided l2: subgradient step on `sum_i max(0, -y_i <a_i, x>)^2`,
//!   then the same s-term truncation.
//!
//! The final estimate is normalized to the unit sphere. Step size is
//! `tau = 1` with a rescale guard if an iterate's norm exceeds 1e3.
//! Iteration starts from the normalized s-term correlation
//! `(A^T y)_s / ||(A^T y)_s||`; the origin is a stationary point of the
//! one-sided l2 penalty, so a zero start would never move.

use std::time::Instant;

use crate::error::Result;
use crate::linalg::{norm2, scale, sub};
use crate::model::{sign_pm, OneBitObservations, SensingMatrix};
use crate::solvers::{
    halting_check, hamming_distance, truncate_top_k, HaltReason, SolverConfig, SolverResult,
    SolverTrace,
};

/// Which one-sided penalty drives the correction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BihtVariant {
    OneSidedL1,
    OneSidedL2,
}

const STEP: f64 = 1.0;
const NORM_GUARD: f64 = 1e3;

/// One-sided objective value: `sum_i (-y_i <a_i,x>)_+` for l1,
/// `sum_i (-y_i <a_i,x>)_+^2` for l2.
fn one_sided_objective(variant: BihtVariant, margins: &[f64]) -> f64 {
    margins
        .iter()
        .map(|&u| {
            let v = (-u).max(0.0);
            match variant {
                BihtVariant::OneSidedL1 => v,
                BihtVariant::OneSidedL2 => v * v,
            }
        })
        .sum()
}

/// Runs binary iterative hard thresholding.
pub fn biht_solve(
    matrix: &SensingMatrix,
    observations: &OneBitObservations,
    snr_eta: f64,
    cfg: &SolverConfig,
    variant: BihtVariant,
) -> Result<SolverResult> {
    let started = Instant::now();
    let n = matrix.cols();
    let m = matrix.rows();
    cfg.validate(n)?;
    if observations.len() != m {
        return Err(crate::error::Error::Shape(format!(
            "{} observations for {m} matrix rows",
            observations.len()
        )));
    }

    let mut x = {
        let y: Vec<f64> = observations.signs().iter().map(|&v| v as f64).collect();
        let correlation = matrix.tr_mul_vec(&y);
        let mut init = truncate_top_k(&correlation, cfg.sparsity)?;
        let nrm = norm2(&init);
        if nrm > 0.0 {
            scale(&mut init, 1.0 / nrm);
        }
        init
    };
    let mut trace = cfg.keep_trace.then(Vec::new);
    let mut halt = HaltReason::MaxIterations;
    let mut iterations = 0;

    for _ in 0..cfg.max_outer_iterations {
        let ax = matrix.mul_vec(&x);
        let correction: Vec<f64> = match variant {
            BihtVariant::OneSidedL1 => {
                // (tau/m) * (y - sgn(Ax)) per measurement.
                ax.iter()
                    .zip(observations.signs())
                    .map(|(&p, &y)| STEP / m as f64 * (y as f64 - sign_pm(p) as f64))
                    .collect()
            }
            BihtVariant::OneSidedL2 => {
                // Descent on sum (u_i)_-^2 with u_i = y_i <a_i, x>:
                // subgradient is 2 (u_i)_- y_i a_i.
                ax.iter()
                    .zip(observations.signs())
                    .map(|(&p, &y)| {
                        let u = y as f64 * p;
                        -STEP / m as f64 * 2.0 * u.min(0.0) * y as f64
                    })
                    .collect()
            }
        };
        let update = matrix.tr_mul_vec(&correction);
        let raw: Vec<f64> = x.iter().zip(&update).map(|(a, b)| a + b).collect();
        let mut next = truncate_top_k(&raw, cfg.sparsity)?;
        let next_norm = norm2(&next);
        if next_norm > NORM_GUARD {
            scale(&mut next, 1.0 / next_norm);
        }

        let hamming = hamming_distance(matrix, &next, observations);
        let step_norm = norm2(&sub(&next, &x));
        if let Some(values) = trace.as_mut() {
            let margins: Vec<f64> = matrix
                .mul_vec(&next)
                .iter()
                .zip(observations.signs())
                .map(|(&p, &y)| y as f64 * p)
                .collect();
            values.push(one_sided_objective(variant, &margins));
        }
        x = next;
        iterations += 1;

        if halting_check(cfg, snr_eta, m, hamming, step_norm)? {
            halt = match cfg.halting {
                crate::solvers::Halting::HammingThreshold { .. } => HaltReason::HammingThreshold,
                crate::solvers::Halting::IterateStall { .. } => HaltReason::IterateStall,
                crate::solvers::Halting::MaxIterations => HaltReason::MaxIterations,
            };
            break;
        }
    }

    // The estimate lives on the unit sphere; only its direction matters.
    let estimate = crate::solvers::normalize_or_zero(&x);
    Ok(SolverResult::finish(
        estimate,
        iterations,
        halt,
        started,
        trace.map(SolverTrace::Loss),
    ))
}
