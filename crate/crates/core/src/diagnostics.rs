//! Empirical restricted-curvature diagnostics.
//!
//! The solver's contraction behavior is governed by how well-conditioned
//! the loss Hessian is on sparse subspaces near the origin: with
//! `alpha_k(x)` and `beta_k(x)` the extreme curvatures over directions
//! sharing a size-k support with `x` inside the radius-r ball, the
//! condition ratio `mu_k = max alpha_k/beta_k` controls the per-iteration
//! error recursion
//!
//! ```text
//! ||x^(t+1) - x_ref|| <= (mu^2 - mu) ||x^(t) - x_ref|| + 2 (mu + 1) eps
//! ```
//!
//! where `eps` bounds `||[grad f(x_ref)]_{3s}|| / beta_{4s}`. A worst-case
//! `mu_k` cannot be certified by sampling, so [`estimate_srh`] reports an
//! **empirical lower bound**: random size-k supports and random points in
//! the restricted ball, with the extreme eigenvalues of each restricted
//! Hessian block. [`contraction_trace`] replays a recorded solver run
//! against the recursion with these sampled constants.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{norm2, sub, symmetric_extreme_eigenvalues};
use crate::model::SparseSignal;
use crate::objective::ObjectiveSpec;
use crate::rng::{mix_seed, Rng};
use crate::solvers::{top_k_support, SolverResult};

/// Samples below this curvature are reported as degenerate and excluded
/// from the condition ratio.
const DEGENERATE_BETA: f64 = 1e-14;

/// Anything exposing restricted Hessian blocks and gradients; implemented
/// by the probit objective and by simple test surrogates.
pub trait CurvatureModel {
    fn dimension(&self) -> usize;
    /// Row-major `|I| x |I|` principal Hessian submatrix at `x`.
    fn restricted_hessian(&self, x: &[f64], support: &[usize]) -> Result<Vec<f64>>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl CurvatureModel for ObjectiveSpec<'_> {
    fn dimension(&self) -> usize {
        ObjectiveSpec::dimension(self)
    }

    fn restricted_hessian(&self, x: &[f64], support: &[usize]) -> Result<Vec<f64>> {
        ObjectiveSpec::restricted_hessian(self, x, support)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        ObjectiveSpec::gradient(self, x)
    }
}

/// One curvature probe: a random support, a random point in its
/// restricted ball, and the extreme eigenvalues there.
#[derive(Debug, Clone)]
pub struct SrhSample {
    pub support: Vec<usize>,
    pub point: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

/// Sampled curvature bounds of order `k` within radius `r`.
#[derive(Debug, Clone)]
pub struct SrhEstimate {
    pub order: usize,
    pub radius: f64,
    pub samples: Vec<SrhSample>,
    /// Max over non-degenerate samples of `alpha/beta`; an empirical
    /// lower bound on the worst-case ratio, `None` if every sample was
    /// degenerate.
    pub mu_estimate: Option<f64>,
    /// Number of samples with `beta` below the degeneracy cutoff.
    pub degenerate_count: usize,
}

impl SrhEstimate {
    /// Smallest non-degenerate sampled curvature.
    pub fn min_beta(&self) -> Option<f64> {
        self.samples
            .iter()
            .filter(|s| s.beta >= DEGENERATE_BETA)
            .map(|s| s.beta)
            .min_by(f64::total_cmp)
    }
}

impl fmt::Display for SrhEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "restricted-curvature probe: order {}, radius {}, {} samples ({} degenerate)",
            self.order,
            self.radius,
            self.samples.len(),
            self.degenerate_count
        )?;
        match self.mu_estimate {
            Some(mu) => writeln!(
                f,
                "empirical lower bound on mu_{}: {:.6} (sampling cannot certify the worst case)",
                self.order, mu
            )?,
            None => writeln!(f, "all samples degenerate; no mu estimate")?,
        }
        if let Some(beta) = self.min_beta() {
            writeln!(f, "smallest sampled curvature beta: {beta:.6e}")?;
        }
        let alpha_max = self
            .samples
            .iter()
            .map(|s| s.alpha)
            .fold(f64::NEG_INFINITY, f64::max);
        writeln!(f, "largest sampled curvature alpha: {alpha_max:.6e}")
    }
}

/// Probes the restricted curvature of `model` at `num_samples` random
/// (support, point) pairs: each support is a uniform size-`k` subset, each
/// point is uniform in the radius-`r` ball of that restricted subspace.
///
/// Per-sample generators are split from one master seed drawn off `rng`,
/// so a longer run extends a shorter one sample-for-sample.
pub fn estimate_srh(
    model: &impl CurvatureModel,
    k: usize,
    r: f64,
    num_samples: usize,
    rng: &mut Rng,
) -> Result<SrhEstimate> {
    let n = model.dimension();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "order k={k} must be in 1..={n}"
        )));
    }
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidConfig(format!("radius {r} must be positive")));
    }
    if num_samples == 0 {
        return Err(Error::InvalidConfig(
            "num_samples must be at least 1".into(),
        ));
    }
    let master = rng.next_u64();
    let mut samples = Vec::with_capacity(num_samples);
    let mut degenerate_count = 0;
    let mut mu: Option<f64> = None;

    for i in 0..num_samples {
        let mut sample_rng = Rng::seed_from_u64(mix_seed(master, &[i as u64]));
        let support = sample_rng.sample_indices(n, k);
        // Uniform in the k-dimensional ball: Gaussian direction scaled by
        // r * U^(1/k).
        let direction: Vec<f64> = (0..k).map(|_| sample_rng.normal()).collect();
        let dir_norm = norm2(&direction);
        let radius = r * sample_rng.uniform().powf(1.0 / k as f64);
        let mut point = vec![0.0; n];
        if dir_norm > 0.0 {
            for (&j, &d) in support.iter().zip(&direction) {
                point[j] = radius * d / dir_norm;
            }
        }
        let hess = model.restricted_hessian(&point, &support)?;
        let (beta, alpha) = symmetric_extreme_eigenvalues(&hess, k);
        if beta < DEGENERATE_BETA {
            degenerate_count += 1;
        } else {
            let ratio = alpha / beta;
            mu = Some(mu.map_or(ratio, |m: f64| m.max(ratio)));
        }
        samples.push(SrhSample {
            support,
            point,
            alpha,
            beta,
        });
    }

    Ok(SrhEstimate {
        order: k,
        radius: r,
        samples,
        mu_estimate: mu,
        degenerate_count,
    })
}

/// A recorded solver run replayed against the sampled contraction
/// recursion.
#[derive(Debug, Clone)]
pub struct ContractionTrace {
    /// `errors[t] = ||x^(t) - reference||` at the start of iteration `t`
    /// (so `errors[0] = ||reference||` for the zero start); length equals
    /// the number of iterations run.
    pub errors: Vec<f64>,
    /// `||[grad f(reference)]_{3s}|| / min sampled beta` - a sampled proxy
    /// for the recursion's offset term.
    pub epsilon_estimate: f64,
    /// `mu^2 - mu` from the sampled condition ratio.
    pub predicted_ratio: f64,
    /// Whether each consecutive error pair satisfies the sampled
    /// recursion; diagnostic only, since the sampled mu underestimates.
    pub bound_holds: Vec<bool>,
}

impl fmt::Display for ContractionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "contraction trace: predicted ratio {:.4}, epsilon estimate {:.4e} (from sampled constants)",
            self.predicted_ratio, self.epsilon_estimate
        )?;
        for (t, e) in self.errors.iter().enumerate() {
            let mark = match self.bound_holds.get(t) {
                Some(true) => " (recursion holds)",
                Some(false) => " (recursion violated)",
                None => "",
            };
            writeln!(f, "  t={t}: error {e:.6e}{mark}")?;
        }
        Ok(())
    }
}

/// Replays a traced solver run: per-iteration distances to `reference`,
/// the sampled-epsilon offset, and where the recursion inequality holds.
///
/// `srh` should be an order-4s probe of the same objective; `sparsity` is
/// the solver's s (the gradient is truncated to its best 3s terms).
pub fn contraction_trace(
    model: &impl CurvatureModel,
    result: &SolverResult,
    reference: &SparseSignal,
    srh: &SrhEstimate,
    sparsity: usize,
) -> Result<ContractionTrace> {
    let steps = result.grasp_trace().ok_or_else(|| {
        Error::MissingData("contraction trace needs a retained solver trace".into())
    })?;
    if reference.dimension() != model.dimension() {
        return Err(Error::Shape(format!(
            "reference dimension {} vs model dimension {}",
            reference.dimension(),
            model.dimension()
        )));
    }

    // errors[t] = distance at iteration start; the run began at zero.
    let mut errors = Vec::with_capacity(steps.len());
    errors.push(norm2(reference.values()));
    for step in steps.iter().take(steps.len().saturating_sub(1)) {
        errors.push(norm2(&sub(&step.pruned_iterate, reference.values())));
    }

    let gradient = model.gradient(reference.values())?;
    let top = top_k_support(&gradient, (3 * sparsity).min(gradient.len()))?;
    let gradient_top_norm = top
        .iter()
        .map(|&j| gradient[j] * gradient[j])
        .sum::<f64>()
        .sqrt();
    let epsilon_estimate = match srh.min_beta() {
        Some(beta) => gradient_top_norm / beta,
        None => f64::INFINITY,
    };
    let predicted_ratio = srh.mu_estimate.map_or(f64::INFINITY, |mu| mu * mu - mu);

    let offset = match srh.mu_estimate {
        Some(mu) => 2.0 * (mu + 1.0) * epsilon_estimate,
        None => f64::INFINITY,
    };
    let bound_holds: Vec<bool> = errors
        .windows(2)
        .map(|w| w[1] <= predicted_ratio * w[0] + offset)
        .collect();

    Ok(ContractionTrace {
        errors,
        epsilon_estimate,
        predicted_ratio,
        bound_holds,
    })
}
