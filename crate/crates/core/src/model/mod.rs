//! Measurement model and synthetic problem generation.
//!
//! A problem instance consists of a sensing matrix `A` with iid standard
//! Gaussian entries, an s-sparse unit-norm ground truth `x`, and one-bit
//! observations
//!
//! ```text
//! y_i = sgn(eta * <a_i, x> + e_i),    e_i ~ N(0, 1)
//! ```
//!
//! where `eta > 0` is the input SNR on a linear scale (`eta_linear =
//! 10^(dB/20)`). The sign of an exact zero is defined as `+1`.
//!
//! All generators are pure functions of their arguments and the seeded
//! generator passed in: repeated calls are bit-identical.

mod io;

pub use io::{read_instance, read_instance_from, write_instance, write_instance_to};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::rng::Rng;

/// Sign convention used throughout: `sgn(0) := +1`.
#[inline]
pub fn sign_pm(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// Converts an SNR in dB to the linear amplitude ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Converts a linear SNR to dB.
#[inline]
pub fn linear_to_db(eta: f64) -> f64 {
    20.0 * eta.log10()
}

/// An s-sparse unit-norm ground-truth signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    dimension: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSignal {
    /// Builds a signal from a dense value vector, checking the invariants:
    /// the nonzeros sit exactly on `support` and the norm is 1 within 1e-12.
    pub fn new(dimension: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if values.len() != dimension {
            return Err(Error::Shape(format!(
                "signal has {} values but dimension {dimension}",
                values.len()
            )));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(Error::InvalidConfig("duplicate support indices".into()));
        }
        if sorted.last().is_some_and(|&i| i >= dimension) {
            return Err(Error::InvalidConfig("support index out of range".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            let on_support = sorted.binary_search(&i).is_ok();
            if on_support && v == 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "zero entry at support index {i}"
                )));
            }
            if !on_support && v != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "nonzero entry off support at {i}"
                )));
            }
        }
        let nrm = norm2(&values);
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "signal norm {nrm} is not 1 within 1e-12"
            )));
        }
        Ok(SparseSignal {
            dimension,
            support: sorted,
            values,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Sorted support indices.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// Dense value vector (zeros off support).
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Dense sensing matrix; row `i` is the measurement vector `a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>, // row-major
}

impl SensingMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig(format!(
                "matrix dimensions {rows}x{cols} must be positive"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix buffer has {} entries, expected {}",
                data.len(),
                rows * cols
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("matrix entries must be finite".into()));
        }
        Ok(SensingMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row-major entry buffer.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T y`, accumulated row by row for cache locality.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += yi * a;
            }
        }
        out
    }

    /// Copies the columns listed in `indices` into a new `rows x |indices|`
    /// matrix. Used by the restricted inner solver.
    pub fn restrict_columns(&self, indices: &[usize]) -> Result<SensingMatrix> {
        if indices.is_empty() {
            return Err(Error::InvalidConfig("empty column restriction".into()));
        }
        if indices.iter().any(|&j| j >= self.cols) {
            return Err(Error::Domain("column index out of range".into()));
        }
        let mut data = Vec::with_capacity(self.rows * indices.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(indices.iter().map(|&j| row[j]));
        }
        SensingMatrix::new(self.rows, indices.len(), data)
    }
}

/// One-bit observations; every entry is exactly +1 or -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneBitObservations {
    signs: Vec<i8>,
}

impl OneBitObservations {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if !signs.iter().all(|&s| s == 1 || s == -1) {
            return Err(Error::InvalidConfig("observations must be +1 or -1".into()));
        }
        Ok(OneBitObservations { signs })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
}

/// A generated (or loaded) problem: matrix, observations, optional truth,
/// the true SNR, and the seed it came from.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub matrix: SensingMatrix,
    pub observations: OneBitObservations,
    /// Ground truth; absent for externally supplied data.
    pub truth: Option<SparseSignal>,
    /// True SNR on a linear scale.
    pub snr_eta: f64,
    pub seed: u64,
}

impl ProblemInstance {
    /// Generates a full synthetic instance from a single seed: support and
    /// signal, then matrix, then noisy sign measurements.
    pub fn generate(n: usize, m: usize, s: usize, snr_eta: f64, seed: u64) -> Result<Self> {
        let mut rng = Rng::seed_from_u64(seed);
        Self::generate_with(n, m, s, snr_eta, seed, &mut rng)
    }

    /// As [`generate`](Self::generate) but drawing from a caller-owned
    /// generator (the `seed` field is recorded as metadata only).
    pub fn generate_with(
        n: usize,
        m: usize,
        s: usize,
        snr_eta: f64,
        seed: u64,
        rng: &mut Rng,
    ) -> Result<Self> {
        let truth = generate_signal(n, s, rng)?;
        let matrix = generate_matrix(m, n, rng)?;
        let observations = measure(&matrix, &truth, snr_eta, rng)?;
        Ok(ProblemInstance {
            matrix,
            observations,
            truth: Some(truth),
            snr_eta,
            seed,
        })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.cols()
    }

    pub fn measurements(&self) -> usize {
        self.matrix.rows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.observations.len() != self.matrix.rows() {
            return Err(Error::Shape(format!(
                "{} observations for {} matrix rows",
                self.observations.len(),
                self.matrix.rows()
            )));
        }
        if let Some(truth) = &self.truth {
            if truth.dimension() != self.matrix.cols() {
                return Err(Error::Shape(format!(
                    "truth dimension {} != matrix cols {}",
                    truth.dimension(),
                    self.matrix.cols()
                )));
            }
        }
        if !self.snr_eta.is_finite() || self.snr_eta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "snr_eta {} must be positive",
                self.snr_eta
            )));
        }
        Ok(())
    }
}

/// Draws an s-sparse unit-norm signal: a uniform random s-subset of `0..n`
/// carries an s-dimensional standard Gaussian draw normalized to unit norm.
pub fn generate_signal(n: usize, s: usize, rng: &mut Rng) -> Result<SparseSignal> {
    if s == 0 || s > n {
        return Err(Error::InvalidConfig(format!(
            "sparsity s={s} must satisfy 1 <= s <= n={n}"
        )));
    }
    let support = rng.sample_indices(n, s);
    loop {
        let block: Vec<f64> = (0..s).map(|_| rng.normal()).collect();
        let nrm = norm2(&block);
        // A numerically zero Gaussian block is a measure-zero event; redraw.
        if nrm < 1e-12 {
            continue;
        }
        let mut values = vec![0.0; n];
        for (&idx, &b) in support.iter().zip(&block) {
            values[idx] = b / nrm;
        }
        // Renormalize once more so the unit-norm invariant holds to 1e-12.
        let total = norm2(&values);
        for v in values.iter_mut() {
            *v /= total;
        }
        if values.iter().filter(|&&v| v != 0.0).count() != s {
            continue;
        }
        return SparseSignal::new(n, support, values);
    }
}

/// Draws an `m x n` matrix with iid standard Gaussian entries.
pub fn generate_matrix(m: usize, n: usize, rng: &mut Rng) -> Result<SensingMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidConfig(format!(
            "matrix dimensions {m}x{n} must be positive"
        )));
    }
    let data: Vec<f64> = (0..m * n).map(|_| rng.normal()).collect();
    SensingMatrix::new(m, n, data)
}

/// Takes one-bit measurements `y_i = sgn(eta * <a_i, x> + e_i)` with iid
/// standard normal noise.
pub fn measure(
    matrix: &SensingMatrix,
    signal: &SparseSignal,
    snr_eta: f64,
    rng: &mut Rng,
) -> Result<OneBitObservations> {
    if matrix.cols() != signal.dimension() {
        return Err(Error::Shape(format!(
            "matrix has {} cols but signal dimension is {}",
            matrix.cols(),
            signal.dimension()
        )));
    }
    if !snr_eta.is_finite() || snr_eta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "snr_eta {snr_eta} must be positive"
        )));
    }
    let projections = matrix.mul_vec(signal.values());
    let signs = projections
        .iter()
        .map(|&p| sign_pm(snr_eta * p + rng.normal()))
        .collect();
    OneBitObservations::new(signs)
}

/// Probability that noise flips the sign of a measurement:
/// `P(sgn(eta*g + e) != sgn(g))` for independent standard normal `g`, `e`,
/// which is `acos(eta / sqrt(eta^2 + 1)) / pi`.
///
/// Decreases from 1/2 (pure noise) to 0 (noiseless); drives the Hamming
/// halting threshold.
pub fn expected_flip_rate(snr_eta: f64) -> Result<f64> {
    if !snr_eta.is_finite() || snr_eta <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "snr_eta {snr_eta} must be positive"
        )));
    }
    let rho = snr_eta / snr_eta.hypot(1.0);
    Ok(rho.acos() / std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_has_exact_sparsity_and_unit_norm() {
        let mut rng = Rng::seed_from_u64(1);
        let sig = generate_signal(1000, 10, &mut rng).unwrap();
        assert_eq!(sig.dimension(), 1000);
        assert_eq!(sig.sparsity(), 10);
        assert_eq!(sig.values().iter().filter(|&&v| v != 0.0).count(), 10);
        assert!((norm2(sig.values()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn one_dimensional_signal_is_plus_or_minus_one() {
        let mut rng = Rng::seed_from_u64(3);
        let sig = generate_signal(1, 1, &mut rng).unwrap();
        assert!(sig.values()[0] == 1.0 || sig.values()[0] == -1.0);
    }

    #[test]
    fn signal_generation_is_deterministic() {
        let a = generate_signal(8, 2, &mut Rng::seed_from_u64(42)).unwrap();
        let b = generate_signal(8, 2, &mut Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn signal_rejects_bad_sparsity() {
        let mut rng = Rng::seed_from_u64(1);
        assert!(matches!(
            generate_signal(4, 5, &mut rng),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            generate_signal(4, 0, &mut rng),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn signal_support_is_uniform() {
        // Each index of 0..6 should carry a nonzero with frequency s/n.
        let mut rng = Rng::seed_from_u64(13);
        let (n, s, reps) = (6, 2, 12_000);
        let mut counts = vec![0usize; n];
        for _ in 0..reps {
            let sig = generate_signal(n, s, &mut rng).unwrap();
            for &i in sig.support() {
                counts[i] += 1;
            }
        }
        let expected = reps as f64 * s as f64 / n as f64;
        for &c in &counts {
            assert!((c as f64 - expected).abs() / expected < 0.05);
        }
    }

    #[test]
    fn matrix_shape_and_determinism() {
        let a = generate_matrix(20, 10, &mut Rng::seed_from_u64(5)).unwrap();
        let b = generate_matrix(20, 10, &mut Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a.rows(), 20);
        assert_eq!(a.cols(), 10);
        assert_eq!(a, b);
        assert!(matches!(
            generate_matrix(0, 10, &mut Rng::seed_from_u64(5)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn matrix_entries_have_zero_mean() {
        // Law of large numbers on the 40_000 entries of a 200x200 draw.
        let m = generate_matrix(200, 200, &mut Rng::seed_from_u64(77)).unwrap();
        let mean: f64 = m.data().iter().sum::<f64>() / (200.0 * 200.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn measure_output_matches_rows_and_is_pm_one() {
        let mut rng = Rng::seed_from_u64(2);
        let sig = generate_signal(30, 3, &mut rng).unwrap();
        let mat = generate_matrix(50, 30, &mut rng).unwrap();
        let obs = measure(&mat, &sig, 10.0, &mut rng).unwrap();
        assert_eq!(obs.len(), 50);
        assert!(obs.signs().iter().all(|&s| s == 1 || s == -1));
    }

    #[test]
    fn measure_noiseless_limit_matches_clean_signs() {
        let mut rng = Rng::seed_from_u64(4);
        let sig = generate_signal(20, 4, &mut rng).unwrap();
        let mat = generate_matrix(100, 20, &mut rng).unwrap();
        let obs = measure(&mat, &sig, 1e12, &mut rng).unwrap();
        let clean = mat.mul_vec(sig.values());
        for (i, (&y, &p)) in obs.signs().iter().zip(&clean).enumerate() {
            if p != 0.0 {
                assert_eq!(y, sign_pm(p), "row {i}");
            }
        }
    }

    #[test]
    fn measure_rejects_dimension_mismatch() {
        let mut rng = Rng::seed_from_u64(6);
        let sig = generate_signal(10, 2, &mut rng).unwrap();
        let mat = generate_matrix(5, 11, &mut rng).unwrap();
        assert!(matches!(
            measure(&mat, &sig, 1.0, &mut rng),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn single_row_flip_probability_matches_normal_cdf() {
        // With a = x (unit norm) and eta = 1, P(y = +1) = Phi(1).
        // Monte Carlo oracle with 10^6 noise draws, tolerance 0.002.
        const PHI_ONE: f64 = 0.8413447460685429;
        let sig = SparseSignal::new(2, vec![0, 1], vec![0.6, 0.8]).unwrap();
        let mat = SensingMatrix::new(1, 2, vec![0.6, 0.8]).unwrap();
        let mut rng = Rng::seed_from_u64(99);
        let draws = 1_000_000;
        let mut plus = 0usize;
        for _ in 0..draws {
            let obs = measure(&mat, &sig, 1.0, &mut rng).unwrap();
            if obs.signs()[0] == 1 {
                plus += 1;
            }
        }
        let p = plus as f64 / draws as f64;
        assert!((p - PHI_ONE).abs() < 0.002, "P(y=+1) = {p}");
    }

    #[test]
    fn sign_of_zero_is_positive() {
        assert_eq!(sign_pm(0.0), 1);
        assert_eq!(sign_pm(-0.0), 1);
        assert_eq!(sign_pm(-1e-300), -1);
    }

    #[test]
    fn flip_rate_limits_and_known_value() {
        // eta -> infinity: noiseless, no flips.
        assert!(expected_flip_rate(1e12).unwrap() < 1e-10);
        // eta -> 0+: pure noise, rate 1/2.
        assert!((expected_flip_rate(1e-12).unwrap() - 0.5).abs() < 1e-10);
        // eta = 1: acos(1/sqrt(2))/pi = 1/4 exactly.
        assert!((expected_flip_rate(1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            expected_flip_rate(0.0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            expected_flip_rate(-1.0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn flip_rate_matches_monte_carlo() {
        // Independent oracle: sample (g, e) pairs directly.
        let mut rng = Rng::seed_from_u64(123);
        for &eta in &[0.5, 1.0, 3.1622776601683795] {
            let expected = expected_flip_rate(eta).unwrap();
            let draws = 1_000_000;
            let mut flips = 0usize;
            for _ in 0..draws {
                let g = rng.normal();
                let e = rng.normal();
                if sign_pm(eta * g + e) != sign_pm(g) {
                    flips += 1;
                }
            }
            let rate = flips as f64 / draws as f64;
            assert!(
                (rate - expected).abs() < 0.002,
                "eta={eta}: {rate} vs {expected}"
            );
        }
    }

    #[test]
    fn empirical_hamming_mismatch_matches_flip_rate() {
        // measure(A, x, eta) vs sgn(A x) over 10^5 rows: mismatch within
        // 3 standard errors of the expected flip rate.
        let mut rng = Rng::seed_from_u64(7);
        let sig = generate_signal(16, 4, &mut rng).unwrap();
        let m = 100_000;
        let mat = generate_matrix(m, 16, &mut rng).unwrap();
        for &eta in &[1.0, 10.0] {
            let obs = measure(&mat, &sig, eta, &mut rng).unwrap();
            let clean = mat.mul_vec(sig.values());
            let mismatches = obs
                .signs()
                .iter()
                .zip(&clean)
                .filter(|&(&y, &p)| y != sign_pm(p))
                .count();
            let rate = mismatches as f64 / m as f64;
            let p = expected_flip_rate(eta).unwrap();
            let se = (p * (1.0 - p) / m as f64).sqrt();
            assert!(
                (rate - p).abs() <= 3.0 * se,
                "eta={eta}: rate {rate}, expected {p} +- {se}"
            );
        }
    }

    #[test]
    fn db_conversion_round_trips() {
        for &db in &[0.0, 10.0, 20.0, -3.0] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
        assert!((db_to_linear(20.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn instance_generation_is_deterministic_and_valid() {
        let a = ProblemInstance::generate(50, 80, 5, 10.0, 31).unwrap();
        let b = ProblemInstance::generate(50, 80, 5, 10.0, 31).unwrap();
        a.validate().unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.observations, b.observations);
        assert_eq!(a.truth.as_ref().unwrap(), b.truth.as_ref().unwrap());
    }
}
