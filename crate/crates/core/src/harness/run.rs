//! Grid execution and raw CSV emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::harness::{
    aggregate, cell_matrix_seed, emit_plots, fmt_float, trial_seed, CellSummary, ExperimentGrid,
    SolverKind,
};
use crate::metrics::{evaluate, EvaluationReport};
use crate::model::{db_to_linear, generate_matrix, generate_signal, measure, ProblemInstance};
use crate::objective::ObjectiveSpec;
use crate::rng::{Rng, GENERATOR_NAME};
use crate::solvers::{biht_solve, grasp_solve, pv_l0_solve, BihtVariant, SolverResult};

/// Raw CSV column order; pinned, do not reorder.
pub const RAW_HEADER: &str =
    "base_seed,trial_seed,n,m,s,eta_db,solver,ae,rsnr_db,fnr,fpr,hamming_fraction,iterations,halt_reason,failed,seconds";

/// One (trial, solver) outcome.
#[derive(Debug, Clone)]
pub struct RawRecord {
    pub base_seed: u64,
    pub trial_seed: u64,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub eta_db: f64,
    pub solver: SolverKind,
    /// Trial index within the cell; used for ordering, not serialized.
    pub trial: usize,
    pub report: Option<EvaluationReport>,
    pub iterations: usize,
    pub halt_reason: String,
    pub failed: bool,
    pub seconds: f64,
}

impl RawRecord {
    pub fn to_csv_row(&self) -> String {
        let (ae, rsnr, fnr, fpr, hamming) = match &self.report {
            Some(r) => (
                r.angular_error,
                r.r_snr_db,
                r.fnr,
                r.fpr,
                r.hamming_fraction,
            ),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.base_seed,
            self.trial_seed,
            self.n,
            self.m,
            self.s,
            fmt_float(self.eta_db),
            self.solver.name(),
            fmt_float(ae),
            fmt_float(rsnr),
            fmt_float(fnr),
            fmt_float(fpr),
            fmt_float(hamming),
            self.iterations,
            self.halt_reason,
            self.failed,
            fmt_float(self.seconds),
        )
    }
}

/// Paths produced by a grid run.
#[derive(Debug, Clone)]
pub struct GridOutput {
    pub raw_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub meta: PathBuf,
    pub plot_dir: PathBuf,
    pub summaries: Vec<CellSummary>,
    pub warnings: Vec<String>,
}

struct Task {
    s: usize,
    m: usize,
    eta_db: f64,
    trial: usize,
}

/// Runs every (cell, trial, solver) combination, in parallel over `jobs`
/// worker threads, and returns the rows in deterministic sorted order.
pub fn run_grid_collect(grid: &ExperimentGrid, jobs: usize) -> Result<Vec<RawRecord>> {
    grid.validate()?;
    let jobs = jobs.max(1);

    let mut tasks = Vec::new();
    for &s in &grid.sparsity_levels {
        for &m in &grid.m_values {
            for &eta_db in &grid.snr_db_values {
                for trial in 0..grid.trials {
                    tasks.push(Task {
                        s,
                        m,
                        eta_db,
                        trial,
                    });
                }
            }
        }
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Vec<RawRecord>>>> = Mutex::new(vec![None; tasks.len()]);
    let first_error: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(tasks.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= tasks.len() {
                    break;
                }
                match run_task(grid, &tasks[idx]) {
                    Ok(rows) => {
                        slots.lock().unwrap()[idx] = Some(rows);
                    }
                    Err(e) => {
                        let mut guard = first_error.lock().unwrap();
                        if guard.is_none() {
                            *guard = Some(e);
                        }
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let mut rows: Vec<RawRecord> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .flatten()
        .flatten()
        .collect();
    // Task enumeration is already ordered, but sort defensively so the
    // on-disk order never depends on scheduling.
    rows.sort_by(|a, b| {
        (a.s, a.m)
            .cmp(&(b.s, b.m))
            .then(a.eta_db.total_cmp(&b.eta_db))
            .then(a.solver.cmp(&b.solver))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(rows)
}

fn run_task(grid: &ExperimentGrid, task: &Task) -> Result<Vec<RawRecord>> {
    let eta = db_to_linear(task.eta_db);
    let seed = trial_seed(grid.base_seed, task.s, task.m, task.eta_db, task.trial);
    let instance = if grid.redraw_matrix_per_trial {
        ProblemInstance::generate(grid.n, task.m, task.s, eta, seed)?
    } else {
        // Shared per-cell matrix; signal and noise stay per-trial.
        let matrix_seed = cell_matrix_seed(grid.base_seed, task.s, task.m, task.eta_db);
        let matrix = generate_matrix(task.m, grid.n, &mut Rng::seed_from_u64(matrix_seed))?;
        let mut rng = Rng::seed_from_u64(seed);
        let truth = generate_signal(grid.n, task.s, &mut rng)?;
        let observations = measure(&matrix, &truth, eta, &mut rng)?;
        ProblemInstance {
            matrix,
            observations,
            truth: Some(truth),
            snr_eta: eta,
            seed,
        }
    };

    let cfg = grid.solver_config(task.s);
    let mut rows = Vec::with_capacity(grid.solvers.len());
    for &solver in &grid.solvers {
        let outcome: Result<SolverResult> = match solver {
            SolverKind::Grasp => {
                ObjectiveSpec::modified(&instance).and_then(|spec| grasp_solve(&spec, eta, &cfg))
            }
            SolverKind::GraspEta => {
                ObjectiveSpec::mle(&instance).and_then(|spec| grasp_solve(&spec, eta, &cfg))
            }
            SolverKind::Biht => biht_solve(
                &instance.matrix,
                &instance.observations,
                eta,
                &cfg,
                BihtVariant::OneSidedL1,
            ),
            SolverKind::BihtL2 => biht_solve(
                &instance.matrix,
                &instance.observations,
                eta,
                &cfg,
                BihtVariant::OneSidedL2,
            ),
            SolverKind::PvL0 => pv_l0_solve(&instance.matrix, &instance.observations, task.s),
        };
        let row = match outcome {
            Ok(result) => {
                let report = evaluate(&result.estimate, &instance, result.wall_clock_seconds)?;
                RawRecord {
                    base_seed: grid.base_seed,
                    trial_seed: seed,
                    n: grid.n,
                    m: task.m,
                    s: task.s,
                    eta_db: task.eta_db,
                    solver,
                    trial: task.trial,
                    report: Some(report),
                    iterations: result.iterations,
                    halt_reason: result.halt.as_str().to_string(),
                    failed: false,
                    seconds: result.wall_clock_seconds,
                }
            }
            // A solver failure on one trial is recorded, not fatal.
            Err(err) => RawRecord {
                base_seed: grid.base_seed,
                trial_seed: seed,
                n: grid.n,
                m: task.m,
                s: task.s,
                eta_db: task.eta_db,
                solver,
                trial: task.trial,
                report: None,
                iterations: 0,
                halt_reason: format!("failed: {}", err.to_string().replace(',', ";")),
                failed: true,
                seconds: 0.0,
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Runs the grid and writes `raw.csv`, `summary.csv`, `meta.txt`, and
/// `plots/` under `out_dir`. Every file is staged with a `.tmp` suffix and
/// renamed once all content is complete.
pub fn run_grid(grid: &ExperimentGrid, out_dir: &Path, jobs: usize) -> Result<GridOutput> {
    let rows = run_grid_collect(grid, jobs)?;
    let (summaries, warnings) = aggregate(&rows);

    fs::create_dir_all(out_dir)?;
    let raw_path = out_dir.join("raw.csv");
    let summary_path = out_dir.join("summary.csv");
    let meta_path = out_dir.join("meta.txt");

    write_atomically(&raw_path, &raw_csv_content(&rows))?;
    write_atomically(&summary_path, &aggregate::summary_csv_content(&summaries))?;
    write_atomically(&meta_path, &meta_content(grid))?;

    let plot_dir = out_dir.join("plots");
    emit_plots(&summaries, grid.n, &plot_dir)?;

    Ok(GridOutput {
        raw_csv: raw_path,
        summary_csv: summary_path,
        meta: meta_path,
        plot_dir,
        summaries,
        warnings,
    })
}

pub(crate) fn raw_csv_content(rows: &[RawRecord]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RAW_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_row());
        out.push('\n');
    }
    out
}

fn meta_content(grid: &ExperimentGrid) -> String {
    format!(
        "generator={GENERATOR_NAME}\nseed_derivation=splitmix64(base_seed, s, m, eta_db_bits, trial)\n{}",
        grid.to_key_values()
    )
}

pub(crate) fn write_atomically(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
