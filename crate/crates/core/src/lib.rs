//! Sparse signal recovery from one-bit sign measurements.
//!
//! A measurement is the sign of a noisy linear projection of an unknown
//! sparse unit-norm signal: `y_i = sgn(eta * <a_i, x> + e_i)` with standard
//! Gaussian noise `e_i` and input SNR `eta`. This crate provides:
//!
//! - synthetic problem generation with seeded, reproducible randomness
//!   ([`model`]),
//! - numerically stable probit losses with analytic gradients and Hessian
//!   quadratic forms ([`objective`]),
//! - the greedy support-pursuit solver over the sparse unit ball together
//!   with binary iterative hard thresholding and closed-form correlation
//!   baselines ([`solvers`]),
//! - evaluation metrics: angular error, reconstruction SNR, support rates,
//!   Hamming consistency ([`metrics`]),
//! - empirical restricted-curvature diagnostics ([`diagnostics`]),
//! - a Monte Carlo benchmark harness with CSV and SVG plot output
//!   ([`harness`]).
//!
//! Everything downstream of a seed is deterministic: generators, solvers,
//! and the harness produce bit-identical results for identical inputs.
//!
//! # Example
//!
//! Recover a 5-sparse signal in dimension 100 from 800 one-bit
//! measurements at 20 dB input SNR:
//!
//! ```
//! use onebitcs::metrics::evaluate;
//! use onebitcs::model::{db_to_linear, ProblemInstance};
//! use onebitcs::objective::ObjectiveSpec;
//! use onebitcs::solvers::{grasp_solve, SolverConfig};
//!
//! let eta = db_to_linear(20.0);
//! let instance = ProblemInstance::generate(100, 800, 5, eta, 7).unwrap();
//!
//! let objective = ObjectiveSpec::modified(&instance).unwrap();
//! let result = grasp_solve(&objective, eta, &SolverConfig::new(5)).unwrap();
//!
//! let report = evaluate(&result.estimate, &instance, result.wall_clock_seconds).unwrap();
//! assert!(report.angular_error < 0.1);
//! assert_eq!(report.fnr, 0.0);
//! ```

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod objective;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
