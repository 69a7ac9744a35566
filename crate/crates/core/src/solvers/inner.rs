//! Ball-constrained minimization over a fixed support.
//!
//! Solves `min f(x) s.t. x = 0 off T, ||x||_2 <= r` by projected gradient
//! with a backtracking (halving) Armijo line search in the compressed
//! coordinates of `T`. The subproblem is convex (the loss is a convex
//! composition), so first-order stationarity of the projected step
//! identifies the minimizer.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, project_to_ball, sub};
use crate::objective::ObjectiveSpec;
use crate::solvers::InnerSettings;

const ARMIJO: f64 = 1e-4;
// The SNR-scaled loss at extreme SNR has curvature ~ eta^2, demanding step
// sizes ~ 1/eta^2; the floor sits far below any such scale so the search
// only gives up when f64 itself runs out.
const MIN_STEP: f64 = 1e-280;

/// Result of an inner solve.
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    /// Dense minimizer, supported on the requested index set.
    pub point: Vec<f64>,
    /// Whether the stationarity residual met the tolerance; when false the
    /// best iterate found is returned rather than an error.
    pub converged: bool,
    /// `||z - P(z - d g)|| / d` at the final accepted step size `d`,
    /// relative to `max(1, ||g||)`.
    pub stationarity: f64,
    pub iterations: usize,
}

/// Minimizes the objective over `{x : supp(x) ⊆ support, ||x||_2 <= r}`.
///
/// `warm_start` is a dense point whose restriction to `support` seeds the
/// iteration (entries off the support are ignored); it is projected into
/// the ball first, and the returned loss never exceeds the warm start's.
pub fn restricted_ball_minimize(
    objective: &ObjectiveSpec<'_>,
    support: &[usize],
    r: f64,
    warm_start: &[f64],
    settings: &InnerSettings,
) -> Result<InnerOutcome> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidConfig(format!("radius {r} must be positive")));
    }
    let n = objective.dimension();
    if warm_start.len() != n {
        return Err(Error::Shape(format!(
            "warm start has length {}, expected {n}",
            warm_start.len()
        )));
    }
    if support.is_empty() {
        // The only feasible point is the origin.
        return Ok(InnerOutcome {
            point: vec![0.0; n],
            converged: true,
            stationarity: 0.0,
            iterations: 0,
        });
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != support.len() {
        return Err(Error::Domain("support indices must be distinct".into()));
    }

    // Work in the compressed coordinates of the support.
    let restricted_matrix = objective.matrix().restrict_columns(&sorted)?;
    let restricted = objective.restrict(&restricted_matrix, objective.observations())?;

    let mut z: Vec<f64> = sorted.iter().map(|&j| warm_start[j]).collect();
    project_to_ball(&mut z, r);

    let mut eval = restricted.loss(&z)?;
    let mut step = 1.0f64;
    let mut converged = false;
    let mut stationarity = f64::INFINITY;
    let mut iterations = 0;

    for _ in 0..settings.max_inner_iterations {
        let g = restricted.gradient_from_margins(&eval.margins)?;
        let g_norm = norm2(&g);
        // Try to grow the step back after conservative iterations.
        step = (step * 2.0).min(1e6);
        let mut accepted = None;
        while step >= MIN_STEP {
            let mut cand: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect();
            project_to_ball(&mut cand, r);
            let cand_eval = restricted.loss(&cand)?;
            let decrease = dot(&g, &sub(&z, &cand));
            if cand_eval.value <= eval.value - ARMIJO * decrease {
                accepted = Some((cand, cand_eval));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cand_eval)) = accepted else {
            // Line search exhausted: no accepted descent step within
            // machine range. Measure stationarity at a unit probe step.
            let mut probe: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - gi).collect();
            project_to_ball(&mut probe, r);
            stationarity = norm2(&sub(&z, &probe));
            converged = stationarity <= settings.kkt_tolerance * g_norm.max(1.0);
            break;
        };
        iterations += 1;
        let residual = norm2(&sub(&z, &cand)) / step;
        z = cand;
        eval = cand_eval;
        stationarity = residual;
        if residual <= settings.kkt_tolerance * g_norm.max(1.0) {
            converged = true;
            break;
        }
    }

    let mut point = vec![0.0; n];
    for (&j, &v) in sorted.iter().zip(&z) {
        point[j] = v;
    }
    Ok(InnerOutcome {
        point,
        converged,
        stationarity,
        iterations,
    })
}
