//! The one-bit losses, their gradients, and Hessian quadratic forms.
//!
//! Two variants of the negative average log-probit likelihood over margins
//! `t_i = y_i <a_i, x>`:
//!
//! - the modified loss `f0(x) = -(1/m) sum_i log Phi(t_i)`, whose
//!   constrained minimizer stays bounded, and
//! - the scaled likelihood loss `-(1/m) sum_i log Phi(eta * t_i)`, which
//!   matches the noise model exactly but degenerates as the SNR grows:
//!   along a consistent direction it keeps decreasing with the iterate
//!   norm, so it only makes sense inside a norm ball.
//!
//! Derivatives are analytic: with `g(t) = -log Phi(t)`, `g'(t) =
//! -lambda(t)` (the inverse Mills ratio) and `g''(t) = lambda(t)(t +
//! lambda(t))`, giving
//!
//! ```text
//! grad f(x)            = -(c/m) sum_i lambda(c t_i) y_i a_i
//! d^T hess f(x) d      = (c^2/m) sum_i g''(c t_i) <a_i, d>^2
//! ```
//!
//! with `c = 1` for the modified loss and `c = eta` for the scaled one.
//! Both are convex, so every Hessian quadratic form is nonnegative.

pub mod probit;

pub use probit::{erfc, erfcx, inverse_mills, log_norm_cdf, norm_cdf, norm_pdf};

use crate::error::{Error, Result};
use crate::model::{OneBitObservations, ProblemInstance, SensingMatrix};

/// Which loss a solver minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// SNR absorbed into the model: margins enter `log Phi` unscaled.
    Modified,
    /// True likelihood: margins scaled by the instance SNR.
    Mle,
}

/// A loss bound to one problem instance.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec<'a> {
    kind: LossKind,
    scale: f64,
    matrix: &'a SensingMatrix,
    observations: &'a OneBitObservations,
}

/// Loss value together with the margin cache `t_i = y_i <a_i, x>`, so a
/// following gradient evaluation at the same point reuses the
/// matrix-vector product.
#[derive(Debug, Clone)]
pub struct LossEvaluation {
    pub value: f64,
    pub margins: Vec<f64>,
}

impl<'a> ObjectiveSpec<'a> {
    pub fn new(
        kind: LossKind,
        scale: f64,
        matrix: &'a SensingMatrix,
        observations: &'a OneBitObservations,
    ) -> Result<Self> {
        if observations.len() != matrix.rows() {
            return Err(Error::Shape(format!(
                "{} observations for {} matrix rows",
                observations.len(),
                matrix.rows()
            )));
        }
        if kind == LossKind::Mle && !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "scale {scale} must be positive and finite for the Mle loss"
            )));
        }
        Ok(ObjectiveSpec {
            kind,
            scale,
            matrix,
            observations,
        })
    }

    /// The modified loss `f0` on an instance.
    pub fn modified(instance: &'a ProblemInstance) -> Result<Self> {
        Self::new(
            LossKind::Modified,
            1.0,
            &instance.matrix,
            &instance.observations,
        )
    }

    /// The likelihood loss with the instance's true SNR as scale.
    pub fn mle(instance: &'a ProblemInstance) -> Result<Self> {
        Self::new(
            LossKind::Mle,
            instance.snr_eta,
            &instance.matrix,
            &instance.observations,
        )
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn matrix(&self) -> &SensingMatrix {
        self.matrix
    }

    pub fn observations(&self) -> &OneBitObservations {
        self.observations
    }

    pub fn dimension(&self) -> usize {
        self.matrix.cols()
    }

    pub fn measurements(&self) -> usize {
        self.matrix.rows()
    }

    /// The factor multiplying margins inside `log Phi`.
    pub fn margin_scale(&self) -> f64 {
        match self.kind {
            LossKind::Modified => 1.0,
            LossKind::Mle => self.scale,
        }
    }

    /// The same loss bound to a column restriction of the matrix.
    pub fn restrict<'b>(
        &self,
        restricted: &'b SensingMatrix,
        observations: &'b OneBitObservations,
    ) -> Result<ObjectiveSpec<'b>> {
        ObjectiveSpec::new(self.kind, self.scale, restricted, observations)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::Shape(format!(
                "point has length {}, expected {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(())
    }

    /// Margins `t_i = y_i <a_i, x>` (unscaled).
    pub fn margins(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut ax = self.matrix.mul_vec(x);
        for (v, &y) in ax.iter_mut().zip(self.observations.signs()) {
            *v *= y as f64;
        }
        Ok(ax)
    }

    /// Loss value plus margin cache.
    pub fn loss(&self, x: &[f64]) -> Result<LossEvaluation> {
        let margins = self.margins(x)?;
        let value = self.loss_from_margins(&margins)?;
        Ok(LossEvaluation { value, margins })
    }

    pub fn loss_from_margins(&self, margins: &[f64]) -> Result<f64> {
        let c = self.margin_scale();
        let m = margins.len() as f64;
        let mut sum = 0.0;
        for &t in margins {
            sum += log_norm_cdf(c * t)?;
        }
        Ok((-sum / m).max(0.0))
    }

    /// Analytic gradient at `x`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let margins = self.margins(x)?;
        self.gradient_from_margins(&margins)
    }

    /// Gradient from a margin cache produced at the same point.
    pub fn gradient_from_margins(&self, margins: &[f64]) -> Result<Vec<f64>> {
        if margins.len() != self.measurements() {
            return Err(Error::Shape(format!(
                "margin cache of length {}, expected {}",
                margins.len(),
                self.measurements()
            )));
        }
        let c = self.margin_scale();
        let m = margins.len() as f64;
        let mut weights = Vec::with_capacity(margins.len());
        for (&t, &y) in margins.iter().zip(self.observations.signs()) {
            weights.push(-(c / m) * inverse_mills(c * t)? * y as f64);
        }
        Ok(self.matrix.tr_mul_vec(&weights))
    }

    /// Hessian quadratic form `delta^T hess f(x) delta`; nonnegative by
    /// convexity.
    pub fn hessian_quadratic_form(&self, x: &[f64], delta: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(delta)?;
        let margins = self.margins(x)?;
        let a_delta = self.matrix.mul_vec(delta);
        let c = self.margin_scale();
        let m = margins.len() as f64;
        let mut sum = 0.0;
        for (&t, &ad) in margins.iter().zip(&a_delta) {
            sum += probit::curvature(c * t)? * ad * ad;
        }
        Ok((c * c / m) * sum)
    }

    /// The `|I| x |I|` principal submatrix of the Hessian at `x` over the
    /// index set `I`, row-major. Symmetric positive semidefinite.
    ///
    /// The full `n x n` Hessian is never materialized; diagnostics only
    /// ever need small support-restricted blocks.
    pub fn restricted_hessian(&self, x: &[f64], index_set: &[usize]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let k = index_set.len();
        let n = self.dimension();
        let mut seen = std::collections::HashSet::with_capacity(k);
        for &j in index_set {
            if j >= n {
                return Err(Error::Domain(format!(
                    "index {j} out of range for dimension {n}"
                )));
            }
            if !seen.insert(j) {
                return Err(Error::Domain(format!("duplicate index {j} in restriction")));
            }
        }
        let margins = self.margins(x)?;
        let c = self.margin_scale();
        let m = margins.len() as f64;
        let scale = c * c / m;
        let mut hess = vec![0.0; k * k];
        for (i, &t) in margins.iter().enumerate() {
            let w = scale * probit::curvature(c * t)?;
            if w == 0.0 {
                continue;
            }
            let row = self.matrix.row(i);
            for p in 0..k {
                let ap = row[index_set[p]];
                if ap == 0.0 {
                    continue;
                }
                for q in p..k {
                    hess[p * k + q] += w * ap * row[index_set[q]];
                }
            }
        }
        for p in 0..k {
            for q in (p + 1)..k {
                hess[q * k + p] = hess[p * k + q];
            }
        }
        Ok(hess)
    }
}
