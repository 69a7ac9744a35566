//! Monte Carlo benchmark harness.
//!
//! Runs a grid of (sparsity, measurement count, SNR) cells, each with a
//! number of independent trials, over a roster of solvers; writes one raw
//! CSV row per (trial, solver), an aggregated summary CSV, a metadata
//! sidecar, and SVG plots of each metric against the sampling ratio m/n.
//!
//! Determinism contract: for a fixed grid and base seed, the raw CSV is
//! byte-identical across runs and parallelism levels, except for the
//! wall-clock `seconds` column. Every trial's seed is derived from the
//! base seed and the cell coordinates by SplitMix64 folding, so results
//! are reproducible row by row.

mod aggregate;
mod plot;
mod run;

pub use aggregate::{aggregate, CellSummary, MetricKind};
pub use plot::{emit_plots, PlotSeries};
pub use run::{run_grid, run_grid_collect, GridOutput, RawRecord};

use crate::error::{Error, Result};
use crate::rng::mix_seed;
use crate::solvers::{Halting, InnerSettings, SolverConfig};

/// The solvers the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SolverKind {
    /// Support pursuit on the modified (SNR-absorbed) loss.
    Grasp,
    /// Support pursuit on the SNR-scaled likelihood loss.
    GraspEta,
    /// Binary iterative hard thresholding, one-sided l1.
    Biht,
    /// Binary iterative hard thresholding, one-sided l2.
    BihtL2,
    /// Closed-form sparse correlation maximizer.
    PvL0,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Grasp,
        SolverKind::GraspEta,
        SolverKind::Biht,
        SolverKind::BihtL2,
        SolverKind::PvL0,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Grasp => "grasp",
            SolverKind::GraspEta => "grasp-eta",
            SolverKind::Biht => "biht",
            SolverKind::BihtL2 => "biht-l2",
            SolverKind::PvL0 => "pv-l0",
        }
    }

    pub fn parse(name: &str) -> Result<SolverKind> {
        match name.trim() {
            "grasp" => Ok(SolverKind::Grasp),
            "grasp-eta" => Ok(SolverKind::GraspEta),
            "biht" => Ok(SolverKind::Biht),
            "biht-l2" => Ok(SolverKind::BihtL2),
            "pv-l0" => Ok(SolverKind::PvL0),
            other => Err(Error::InvalidConfig(format!(
                "unknown solver \"{other}\" (expected grasp, grasp-eta, biht, biht-l2, or pv-l0)"
            ))),
        }
    }
}

/// One benchmark campaign: the cell axes, trial count, seeding, roster,
/// and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    /// Signal dimension.
    pub n: usize,
    pub sparsity_levels: Vec<usize>,
    pub m_values: Vec<usize>,
    pub snr_db_values: Vec<f64>,
    /// Trials per (s, m, snr) cell.
    pub trials: usize,
    pub base_seed: u64,
    pub solvers: Vec<SolverKind>,
    /// Redraw the sensing matrix each trial (true) or share one matrix per
    /// cell, seeded from the cell coordinates (false).
    pub redraw_matrix_per_trial: bool,
    pub max_outer_iterations: usize,
    /// Slack added to the expected flip rate in the Hamming halting rule.
    pub halting_slack: f64,
    pub max_inner_iterations: usize,
    pub kkt_tolerance: f64,
}

impl ExperimentGrid {
    /// Desk-scale grid that finishes in minutes: n = 200,
    /// m in {50, 100, ..., 500}, s in {5, 10}, SNR in {0, 10, 20} dB,
    /// 50 trials.
    pub fn desk() -> Self {
        ExperimentGrid {
            n: 200,
            sparsity_levels: vec![5, 10],
            m_values: (1..=10).map(|i| 50 * i).collect(),
            snr_db_values: vec![0.0, 10.0, 20.0],
            trials: 50,
            base_seed: 20240501,
            solvers: SolverKind::ALL.to_vec(),
            redraw_matrix_per_trial: true,
            max_outer_iterations: 100,
            halting_slack: 0.05,
            max_inner_iterations: 200,
            kkt_tolerance: 1e-6,
        }
    }

    /// Full-scale grid: n = 1000, m in {100, ..., 2000},
    /// s in {10, 20, 30}, SNR in {0, 10, 20} dB, 200 trials. Slow.
    pub fn full() -> Self {
        ExperimentGrid {
            n: 1000,
            sparsity_levels: vec![10, 20, 30],
            m_values: (1..=20).map(|i| 100 * i).collect(),
            snr_db_values: vec![0.0, 10.0, 20.0],
            trials: 200,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if self.sparsity_levels.is_empty()
            || self.m_values.is_empty()
            || self.snr_db_values.is_empty()
        {
            return Err(Error::InvalidConfig("grid axes must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidConfig(
                "solver roster must be nonempty".into(),
            ));
        }
        for &s in &self.sparsity_levels {
            if s == 0 || s > self.n {
                return Err(Error::InvalidConfig(format!(
                    "sparsity {s} outside 1..={}",
                    self.n
                )));
            }
        }
        for &m in &self.m_values {
            if m == 0 {
                return Err(Error::InvalidConfig("m values must be positive".into()));
            }
        }
        if !self.halting_slack.is_finite() || self.halting_slack < 0.0 {
            return Err(Error::InvalidConfig(
                "halting_slack must be nonnegative".into(),
            ));
        }
        if !self.kkt_tolerance.is_finite() || self.kkt_tolerance <= 0.0 {
            return Err(Error::InvalidConfig(
                "kkt_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Solver configuration for one cell of this grid.
    pub fn solver_config(&self, sparsity: usize) -> SolverConfig {
        SolverConfig {
            sparsity,
            radius: 1.0,
            max_outer_iterations: self.max_outer_iterations,
            halting: Halting::HammingThreshold {
                slack: self.halting_slack,
            },
            inner: InnerSettings {
                max_inner_iterations: self.max_inner_iterations,
                kkt_tolerance: self.kkt_tolerance,
            },
            keep_trace: false,
        }
    }

    /// Parses the flat `key=value` grid file format: one key per line,
    /// lists comma-separated, `#` comments and blank lines allowed.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut grid = Self::desk();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!(
                    "line {}: expected key=value, got \"{line}\"",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad =
                |what: &str| Error::Format(format!("line {}: bad {what} \"{value}\"", lineno + 1));
            match key {
                "n" => grid.n = value.parse().map_err(|_| bad("integer"))?,
                "sparsity_levels" => {
                    grid.sparsity_levels = parse_list(value).map_err(|_| bad("integer list"))?
                }
                "m_values" => grid.m_values = parse_list(value).map_err(|_| bad("integer list"))?,
                "snr_db_values" => {
                    grid.snr_db_values = parse_list(value).map_err(|_| bad("number list"))?
                }
                "trials" => grid.trials = value.parse().map_err(|_| bad("integer"))?,
                "base_seed" => grid.base_seed = value.parse().map_err(|_| bad("integer"))?,
                "solvers" => {
                    grid.solvers = value
                        .split(',')
                        .map(SolverKind::parse)
                        .collect::<Result<Vec<_>>>()?;
                }
                "redraw_matrix_per_trial" => {
                    grid.redraw_matrix_per_trial = value.parse().map_err(|_| bad("boolean"))?;
                }
                "max_outer_iterations" => {
                    grid.max_outer_iterations = value.parse().map_err(|_| bad("integer"))?;
                }
                "halting_slack" => grid.halting_slack = value.parse().map_err(|_| bad("number"))?,
                "max_inner_iterations" => {
                    grid.max_inner_iterations = value.parse().map_err(|_| bad("integer"))?;
                }
                "kkt_tolerance" => grid.kkt_tolerance = value.parse().map_err(|_| bad("number"))?,
                other => {
                    return Err(Error::Format(format!(
                        "line {}: unknown key \"{other}\"",
                        lineno + 1
                    )))
                }
            }
        }
        grid.validate()?;
        Ok(grid)
    }

    /// Serializes back to the `key=value` format.
    pub fn to_key_values(&self) -> String {
        let list_usize = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let list_f64 = |v: &[f64]| {
            v.iter()
                .map(|x| fmt_float(*x))
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "n={}\nsparsity_levels={}\nm_values={}\nsnr_db_values={}\ntrials={}\nbase_seed={}\nsolvers={}\nredraw_matrix_per_trial={}\nmax_outer_iterations={}\nhalting_slack={}\nmax_inner_iterations={}\nkkt_tolerance={}\n",
            self.n,
            list_usize(&self.sparsity_levels),
            list_usize(&self.m_values),
            list_f64(&self.snr_db_values),
            self.trials,
            self.base_seed,
            self.solvers.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
            self.redraw_matrix_per_trial,
            self.max_outer_iterations,
            fmt_float(self.halting_slack),
            self.max_inner_iterations,
            fmt_float(self.kkt_tolerance),
        )
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, ()> {
    value
        .split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| ()))
        .collect()
}

/// Seed for one (s, m, snr, trial) draw: SplitMix64 fold of the base seed
/// with the cell coordinates. Using the coordinate values (not indices)
/// keeps a cell's trials identical across differently shaped grids.
pub fn trial_seed(base_seed: u64, s: usize, m: usize, snr_db: f64, trial: usize) -> u64 {
    mix_seed(
        base_seed,
        &[s as u64, m as u64, snr_db.to_bits(), trial as u64],
    )
}

/// Seed for the shared per-cell matrix when `redraw_matrix_per_trial` is
/// off; the trial slot carries a sentinel outside the trial range.
pub fn cell_matrix_seed(base_seed: u64, s: usize, m: usize, snr_db: f64) -> u64 {
    mix_seed(base_seed, &[s as u64, m as u64, snr_db.to_bits(), u64::MAX])
}

/// Floating-point formatting used in every text artifact: shortest
/// round-trip representation, with "inf"/"-inf"/"nan" literals.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}
