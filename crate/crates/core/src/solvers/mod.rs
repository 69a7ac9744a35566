//! Solvers for the sparse one-bit recovery problem.
//!
//! The main solver is greedy support pursuit over the radius-`r` ball
//! ([`grasp_solve`]): each iteration merges the 2s largest-gradient
//! coordinates with the current support, minimizes the loss over that
//! merged support inside the ball, and prunes back to s terms. Baselines:
//! binary iterative hard thresholding with one-sided l1/l2 penalties
//! ([`biht_solve`]) and the closed-form correlation maximizer
//! ([`pv_l0_solve`]).

mod biht;
mod grasp;
mod inner;
mod projection;
mod pv;

pub use biht::{biht_solve, BihtVariant};
pub use grasp::grasp_solve;
pub use inner::{restricted_ball_minimize, InnerOutcome};
pub use projection::{bounded_sparse_projection, top_k_support, truncate_top_k};
pub use pv::pv_l0_solve;

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::model::{expected_flip_rate, sign_pm, OneBitObservations, SensingMatrix};

/// Halting rule for the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Halting {
    /// Stop once the estimate's one-bit measurements are within
    /// `m * (expected_flip_rate(eta) + slack)` Hamming distance of the
    /// observations.
    HammingThreshold { slack: f64 },
    /// Run for the configured number of outer iterations.
    MaxIterations,
    /// Stop when consecutive iterates differ by less than `tol` in norm.
    IterateStall { tol: f64 },
}

/// Settings for the inner ball-constrained minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSettings {
    pub max_inner_iterations: usize,
    pub kkt_tolerance: f64,
}

impl Default for InnerSettings {
    fn default() -> Self {
        InnerSettings {
            max_inner_iterations: 200,
            kkt_tolerance: 1e-6,
        }
    }
}

/// Configuration shared by the iterative solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Desired sparsity level s.
    pub sparsity: usize,
    /// Radius of the feasible ball (1 for one-bit recovery).
    pub radius: f64,
    pub max_outer_iterations: usize,
    pub halting: Halting,
    pub inner: InnerSettings,
    /// Retain the per-iteration trace in the result.
    pub keep_trace: bool,
}

impl SolverConfig {
    /// Defaults: unit ball, 100 outer iterations, Hamming halting with
    /// slack 0.05, inner tolerance 1e-6 with 200 iterations.
    pub fn new(sparsity: usize) -> Self {
        SolverConfig {
            sparsity,
            radius: 1.0,
            max_outer_iterations: 100,
            halting: Halting::HammingThreshold { slack: 0.05 },
            inner: InnerSettings::default(),
            keep_trace: false,
        }
    }

    pub fn with_halting(mut self, halting: Halting) -> Self {
        self.halting = halting;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.keep_trace = true;
        self
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        if self.sparsity == 0 || self.sparsity > dimension {
            return Err(Error::InvalidConfig(format!(
                "sparsity {} must be in 1..={dimension}",
                self.sparsity
            )));
        }
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "radius {} must be positive",
                self.radius
            )));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_outer_iterations must be positive".into(),
            ));
        }
        if !self.inner.kkt_tolerance.is_finite() || self.inner.kkt_tolerance <= 0.0 {
            return Err(Error::InvalidConfig(
                "kkt_tolerance must be positive".into(),
            ));
        }
        if let Halting::HammingThreshold { slack } = self.halting {
            if !slack.is_finite() || slack < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "halting slack {slack} must be nonnegative"
                )));
            }
        }
        if let Halting::IterateStall { tol } = self.halting {
            if !tol.is_finite() || tol <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "stall tolerance {tol} must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// Why a solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    HammingThreshold,
    MaxIterations,
    IterateStall,
    /// Closed-form solvers that never iterate.
    NonIterative,
}

impl HaltReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            HaltReason::HammingThreshold => "hamming",
            HaltReason::MaxIterations => "max-iterations",
            HaltReason::IterateStall => "stall",
            HaltReason::NonIterative => "non-iterative",
        }
    }
}

/// One recorded iteration of the support-pursuit solver.
#[derive(Debug, Clone)]
pub struct GraspTraceStep {
    pub iteration: usize,
    /// Support of the 2s largest gradient entries.
    pub gradient_support: Vec<usize>,
    /// Union of the previous iterate's support with `gradient_support`.
    pub merged_support: Vec<usize>,
    /// Minimizer over the merged support inside the ball.
    pub crude_estimate: Vec<f64>,
    /// The crude estimate pruned to its best s terms.
    pub pruned_iterate: Vec<f64>,
    pub loss_value: f64,
    /// Hamming distance between `sgn(A x)` and the observations.
    pub hamming_distance: usize,
    /// Whether the inner solve met its stationarity tolerance.
    pub inner_converged: bool,
}

/// Per-iteration history, shaped by the solver family.
#[derive(Debug, Clone)]
pub enum SolverTrace {
    Grasp(Vec<GraspTraceStep>),
    /// Per-iteration objective values for the thresholding baselines.
    Loss(Vec<f64>),
}

/// Outcome of a solver run.
#[derive(Debug, Clone)]
pub struct SolverResult {
    /// Final iterate as produced by the solver.
    pub estimate: Vec<f64>,
    /// Unit-normalized copy (all-zero if the estimate is zero).
    pub normalized: Vec<f64>,
    pub iterations: usize,
    pub halt: HaltReason,
    pub wall_clock_seconds: f64,
    pub trace: Option<SolverTrace>,
}

impl SolverResult {
    pub(crate) fn finish(
        estimate: Vec<f64>,
        iterations: usize,
        halt: HaltReason,
        started: std::time::Instant,
        trace: Option<SolverTrace>,
    ) -> Self {
        let normalized = normalize_or_zero(&estimate);
        SolverResult {
            estimate,
            normalized,
            iterations,
            halt,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            trace,
        }
    }

    pub fn grasp_trace(&self) -> Option<&[GraspTraceStep]> {
        match &self.trace {
            Some(SolverTrace::Grasp(steps)) => Some(steps),
            _ => None,
        }
    }
}

pub(crate) fn normalize_or_zero(v: &[f64]) -> Vec<f64> {
    let n = norm2(v);
    if n == 0.0 {
        vec![0.0; v.len()]
    } else {
        v.iter().map(|&x| x / n).collect()
    }
}

/// Hamming distance between `sgn(A x)` and the observations,
/// with `sgn(0) = +1`.
pub fn hamming_distance(
    matrix: &SensingMatrix,
    x: &[f64],
    observations: &OneBitObservations,
) -> usize {
    matrix
        .mul_vec(x)
        .iter()
        .zip(observations.signs())
        .filter(|&(&p, &y)| sign_pm(p) != y)
        .count()
}

/// The Hamming count at or below which the SNR-aware halting rule fires:
/// `floor(m * (expected_flip_rate(eta) + slack))`.
pub fn hamming_threshold(m: usize, snr_eta: f64, slack: f64) -> Result<usize> {
    let rate = expected_flip_rate(snr_eta)?;
    Ok((m as f64 * (rate + slack)).floor() as usize)
}

/// Evaluates the configured halting rule after an iteration.
///
/// `hamming` is the current estimate's Hamming distance to the
/// observations and `step_norm` the norm of the last iterate change.
pub fn halting_check(
    cfg: &SolverConfig,
    snr_eta: f64,
    m: usize,
    hamming: usize,
    step_norm: f64,
) -> Result<bool> {
    Ok(match cfg.halting {
        Halting::HammingThreshold { slack } => hamming <= hamming_threshold(m, snr_eta, slack)?,
        Halting::MaxIterations => false,
        Halting::IterateStall { tol } => step_norm <= tol,
    })
}
