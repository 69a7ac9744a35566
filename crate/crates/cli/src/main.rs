//! Command-line interface for one-bit sparse recovery.
//!
//! Subcommands: `generate` (write a synthetic problem instance),
//! `solve` (run one solver on an instance file), `bench` (run a Monte
//! Carlo grid and emit CSVs and plots), `diag` (curvature diagnostics).
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure.
//! Seed precedence: `--seed` flag > `ONEBITCS_SEED` env var > default.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use onebitcs::diagnostics::estimate_srh;
use onebitcs::harness::{fmt_float, run_grid, ExperimentGrid, SolverKind};
use onebitcs::metrics::evaluate;
use onebitcs::model::{db_to_linear, read_instance, write_instance, ProblemInstance};
use onebitcs::objective::ObjectiveSpec;
use onebitcs::rng::Rng;
use onebitcs::solvers::{
    biht_solve, grasp_solve, pv_l0_solve, BihtVariant, SolverConfig, SolverResult, SolverTrace,
};

const DEFAULT_SEED: u64 = 1;

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<onebitcs::Error> for CliError {
    fn from(e: onebitcs::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

const USAGE: &str = "\
onebitcs - sparse signal recovery from one-bit sign measurements

USAGE:
  onebitcs <SUBCOMMAND> [FLAGS]

SUBCOMMANDS:
  generate   Write a synthetic problem instance file
  solve      Run one solver on an instance file
  bench      Run a Monte Carlo benchmark grid
  diag       Curvature diagnostics on an instance
  help       Show this message

Run `onebitcs <SUBCOMMAND> --help` for per-subcommand flags.

SEED PRECEDENCE:
  --seed flag > ONEBITCS_SEED environment variable > default (1)
";

const GENERATE_USAGE: &str = "\
onebitcs generate - write a synthetic problem instance file

USAGE:
  onebitcs generate --out PATH [FLAGS]

FLAGS:
  --n N          Signal dimension (default: 200)
  --m M          Number of measurements (default: 400)
  --s S          Sparsity of the ground truth (default: 5)
  --eta-db DB    Input SNR in dB, linear eta = 10^(DB/20) (default: 20)
  --seed U64     Seed (default: ONEBITCS_SEED env or 1)
  --out PATH     Output file (required)
  --help         Show this message
";

const SOLVE_USAGE: &str = "\
onebitcs solve - run one solver on an instance file

USAGE:
  onebitcs solve --in PATH --solver NAME --s S --out PATH [FLAGS]

FLAGS:
  --in PATH        Instance file written by `generate` (required)
  --solver NAME    grasp | grasp-eta | biht | biht-l2 | pv-l0 (required)
  --s S            Sparsity level for the solver (required)
  --eta-db DB      Override the instance SNR used for halting and the
                   SNR-scaled objective (default: value in the file)
  --max-iter N     Outer iteration cap (default: 100)
  --slack F        Hamming halting slack (default: 0.05)
  --trace          Dump the per-iteration trace into the output
  --out PATH       Output report file (required)
  --help           Show this message
";

const BENCH_USAGE: &str = "\
onebitcs bench - run a Monte Carlo benchmark grid

USAGE:
  onebitcs bench --out DIR [FLAGS]

FLAGS:
  --grid PATH    Grid config file (key=value lines; see README). When
                 omitted the desk-scale default grid is used.
  --full         Use the full-scale grid instead of the desk default
                 (slow; ignored when --grid is given)
  --out DIR      Output directory: raw.csv, summary.csv, meta.txt, plots/
  --jobs N       Worker threads (default: logical processors)
  --seed U64     Override the grid's base seed
  --help         Show this message
";

const DIAG_USAGE: &str = "\
onebitcs diag srh - sampled restricted-curvature diagnostics

USAGE:
  onebitcs diag srh --in PATH --k K [FLAGS]

FLAGS:
  --in PATH         Instance file (required)
  --k K             Curvature order: support size probed (required)
  --samples N       Number of sampled (support, point) pairs (default: 50)
  --radius R        Ball radius (default: 1)
  --objective NAME  modified | mle (default: modified)
  --seed U64        Seed (default: ONEBITCS_SEED env or 1)
  --out PATH        Also write the report to a file
  --help            Show this message
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &[String]) -> Result<(), CliError> {
    let Some(subcommand) = args.first() else {
        print!("{USAGE}");
        return Err(CliError::usage("missing subcommand"));
    };
    let rest = &args[1..];
    match subcommand.as_str() {
        "generate" => cmd_generate(rest),
        "solve" => cmd_solve(rest),
        "bench" => cmd_bench(rest),
        "diag" => cmd_diag(rest),
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::usage(format!(
            "unknown subcommand \"{other}\"; expected generate, solve, bench, or diag"
        ))),
    }
}

/// Minimal flag cursor: `--key value` pairs plus boolean switches.
struct Flags<'a> {
    args: &'a [String],
    pos: usize,
}

impl<'a> Flags<'a> {
    fn new(args: &'a [String]) -> Self {
        Flags { args, pos: 0 }
    }

    fn next_flag(&mut self) -> Option<&'a str> {
        let flag = self.args.get(self.pos)?;
        self.pos += 1;
        Some(flag.as_str())
    }

    fn value(&mut self, flag: &str) -> Result<&'a str, CliError> {
        let v = self
            .args
            .get(self.pos)
            .ok_or_else(|| CliError::usage(format!("missing value for {flag}")))?;
        self.pos += 1;
        Ok(v)
    }

    fn parsed<T: std::str::FromStr>(&mut self, flag: &str) -> Result<T, CliError> {
        let raw = self.value(flag)?;
        raw.parse()
            .map_err(|_| CliError::usage(format!("invalid value \"{raw}\" for {flag}")))
    }
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("ONEBITCS_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::usage(format!("ONEBITCS_SEED is not a valid u64: \"{v}\""))),
        Err(_) => Ok(None),
    }
}

fn resolve_seed(flag_seed: Option<u64>) -> Result<u64, CliError> {
    Ok(match flag_seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(DEFAULT_SEED),
    })
}

fn write_text_atomically(path: &Path, content: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp-out");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn cmd_generate(args: &[String]) -> Result<(), CliError> {
    let mut n = 200usize;
    let mut m = 400usize;
    let mut s = 5usize;
    let mut eta_db = 20.0f64;
    let mut seed: Option<u64> = None;
    let mut out: Option<PathBuf> = None;

    let mut flags = Flags::new(args);
    while let Some(flag) = flags.next_flag() {
        match flag {
            "--n" => n = flags.parsed(flag)?,
            "--m" => m = flags.parsed(flag)?,
            "--s" => s = flags.parsed(flag)?,
            "--eta-db" => eta_db = flags.parsed(flag)?,
            "--seed" => seed = Some(flags.parsed(flag)?),
            "--out" => out = Some(PathBuf::from(flags.value(flag)?)),
            "--help" | "-h" => {
                print!("{GENERATE_USAGE}");
                return Ok(());
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown flag {other} for generate"
                )))
            }
        }
    }
    let out = out.ok_or_else(|| CliError::usage("missing required flag --out"))?;
    let seed = resolve_seed(seed)?;

    let instance =
        ProblemInstance::generate(n, m, s, db_to_linear(eta_db), seed).map_err(|e| match e {
            onebitcs::Error::InvalidConfig(msg) => CliError::usage(msg),
            other => CliError::Runtime(other.to_string()),
        })?;
    let tmp = out.with_extension("tmp-out");
    write_instance(&instance, &tmp)?;
    std::fs::rename(&tmp, &out)?;
    println!(
        "wrote instance n={n} m={m} s={s} eta_db={} seed={seed} -> {}",
        fmt_float(eta_db),
        out.display()
    );
    Ok(())
}

fn cmd_solve(args: &[String]) -> Result<(), CliError> {
    let mut input: Option<PathBuf> = None;
    let mut solver: Option<String> = None;
    let mut sparsity: Option<usize> = None;
    let mut eta_db: Option<f64> = None;
    let mut max_iter = 100usize;
    let mut slack = 0.05f64;
    let mut trace = false;
    let mut out: Option<PathBuf> = None;

    let mut flags = Flags::new(args);
    while let Some(flag) = flags.next_flag() {
        match flag {
            "--in" => input = Some(PathBuf::from(flags.value(flag)?)),
            "--solver" => solver = Some(flags.value(flag)?.to_string()),
            "--s" => sparsity = Some(flags.parsed(flag)?),
            "--eta-db" => eta_db = Some(flags.parsed(flag)?),
            "--max-iter" => max_iter = flags.parsed(flag)?,
            "--slack" => slack = flags.parsed(flag)?,
            "--trace" => trace = true,
            "--out" => out = Some(PathBuf::from(flags.value(flag)?)),
            "--help" | "-h" => {
                print!("{SOLVE_USAGE}");
                return Ok(());
            }
            other => return Err(CliError::usage(format!("unknown flag {other} for solve"))),
        }
    }
    let input = input.ok_or_else(|| CliError::usage("missing required flag --in"))?;
    let solver_name = solver.ok_or_else(|| CliError::usage("missing required flag --solver"))?;
    let sparsity = sparsity.ok_or_else(|| CliError::usage("missing required flag --s"))?;
    let out = out.ok_or_else(|| CliError::usage("missing required flag --out"))?;
    let kind = SolverKind::parse(&solver_name)
        .map_err(|e| CliError::usage(format!("{e} (flag --solver)")))?;

    let mut instance = read_instance(&input)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", input.display())))?;
    if let Some(db) = eta_db {
        instance.snr_eta = db_to_linear(db);
    }
    let eta = instance.snr_eta;

    let mut cfg = SolverConfig::new(sparsity);
    cfg.max_outer_iterations = max_iter;
    cfg.halting = onebitcs::solvers::Halting::HammingThreshold { slack };
    cfg.keep_trace = trace;
    cfg.validate(instance.dimension())
        .map_err(|e| CliError::usage(e.to_string()))?;

    let result: SolverResult = match kind {
        SolverKind::Grasp => {
            let spec = ObjectiveSpec::modified(&instance)?;
            grasp_solve(&spec, eta, &cfg)?
        }
        SolverKind::GraspEta => {
            let spec = ObjectiveSpec::mle(&instance)?;
            grasp_solve(&spec, eta, &cfg)?
        }
        SolverKind::Biht => biht_solve(
            &instance.matrix,
            &instance.observations,
            eta,
            &cfg,
            BihtVariant::OneSidedL1,
        )?,
        SolverKind::BihtL2 => biht_solve(
            &instance.matrix,
            &instance.observations,
            eta,
            &cfg,
            BihtVariant::OneSidedL2,
        )?,
        SolverKind::PvL0 => pv_l0_solve(&instance.matrix, &instance.observations, sparsity)?,
    };

    let mut report = String::new();
    let _ = writeln!(report, "solver={}", kind.name());
    let _ = writeln!(report, "n={}", instance.dimension());
    let _ = writeln!(report, "m={}", instance.measurements());
    let _ = writeln!(report, "s={sparsity}");
    let _ = writeln!(report, "eta_db={}", fmt_float(20.0 * eta.log10()));
    let _ = writeln!(report, "iterations={}", result.iterations);
    let _ = writeln!(report, "halt_reason={}", result.halt.as_str());
    let _ = writeln!(report, "seconds={}", fmt_float(result.wall_clock_seconds));
    if instance.truth.is_some() {
        let metrics = evaluate(&result.estimate, &instance, result.wall_clock_seconds)?;
        let _ = writeln!(report, "ae={}", fmt_float(metrics.angular_error));
        let _ = writeln!(report, "rsnr_db={}", fmt_float(metrics.r_snr_db));
        let _ = writeln!(report, "fnr={}", fmt_float(metrics.fnr));
        let _ = writeln!(report, "fpr={}", fmt_float(metrics.fpr));
        let _ = writeln!(
            report,
            "hamming_fraction={}",
            fmt_float(metrics.hamming_fraction)
        );
    } else {
        let hamming = onebitcs::metrics::hamming_fraction(&result.estimate, &instance)?;
        let _ = writeln!(report, "hamming_fraction={}", fmt_float(hamming));
    }
    let _ = writeln!(report, "estimate={}", join_floats(&result.estimate));
    let _ = writeln!(report, "normalized={}", join_floats(&result.normalized));
    match &result.trace {
        Some(SolverTrace::Grasp(steps)) => {
            for step in steps {
                let _ = writeln!(
                    report,
                    "trace_{}=loss:{},hamming:{},support:{},inner_converged:{}",
                    step.iteration,
                    fmt_float(step.loss_value),
                    step.hamming_distance,
                    step.merged_support.len(),
                    step.inner_converged
                );
            }
        }
        Some(SolverTrace::Loss(values)) => {
            for (t, v) in values.iter().enumerate() {
                let _ = writeln!(report, "trace_{t}=loss:{}", fmt_float(*v));
            }
        }
        None => {}
    }

    write_text_atomically(&out, &report)?;
    println!(
        "solved with {} in {} iterations -> {}",
        kind.name(),
        result.iterations,
        out.display()
    );
    Ok(())
}

fn cmd_bench(args: &[String]) -> Result<(), CliError> {
    let mut grid_path: Option<PathBuf> = None;
    let mut full = false;
    let mut out: Option<PathBuf> = None;
    let mut jobs: Option<usize> = None;
    let mut seed: Option<u64> = None;

    let mut flags = Flags::new(args);
    while let Some(flag) = flags.next_flag() {
        match flag {
            "--grid" => grid_path = Some(PathBuf::from(flags.value(flag)?)),
            "--full" => full = true,
            "--out" => out = Some(PathBuf::from(flags.value(flag)?)),
            "--jobs" => jobs = Some(flags.parsed(flag)?),
            "--seed" => seed = Some(flags.parsed(flag)?),
            "--help" | "-h" => {
                print!("{BENCH_USAGE}");
                return Ok(());
            }
            other => return Err(CliError::usage(format!("unknown flag {other} for bench"))),
        }
    }
    let out = out.ok_or_else(|| CliError::usage("missing required flag --out"))?;

    let mut grid = match &grid_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            ExperimentGrid::from_key_values(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        }
        None if full => ExperimentGrid::full(),
        None => ExperimentGrid::desk(),
    };
    if let Some(s) = seed {
        grid.base_seed = s;
    }
    let jobs = jobs.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    if jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }

    let cells = grid.sparsity_levels.len() * grid.m_values.len() * grid.snr_db_values.len();
    println!(
        "running {} cells x {} trials x {} solvers on {jobs} threads (base_seed {})",
        cells,
        grid.trials,
        grid.solvers.len(),
        grid.base_seed
    );
    let output = run_grid(&grid, &out, jobs)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    println!("raw rows    -> {}", output.raw_csv.display());
    println!("summaries   -> {}", output.summary_csv.display());
    println!("metadata    -> {}", output.meta.display());
    println!("plots       -> {}", output.plot_dir.display());
    Ok(())
}

fn cmd_diag(args: &[String]) -> Result<(), CliError> {
    let Some(mode) = args.first() else {
        print!("{DIAG_USAGE}");
        return Err(CliError::usage("missing diag mode; expected \"srh\""));
    };
    if mode == "--help" || mode == "-h" {
        print!("{DIAG_USAGE}");
        return Ok(());
    }
    if mode != "srh" {
        return Err(CliError::usage(format!(
            "unknown diag mode \"{mode}\"; expected \"srh\""
        )));
    }

    let mut input: Option<PathBuf> = None;
    let mut k: Option<usize> = None;
    let mut samples = 50usize;
    let mut radius = 1.0f64;
    let mut objective = "modified".to_string();
    let mut seed: Option<u64> = None;
    let mut out: Option<PathBuf> = None;

    let mut flags = Flags::new(&args[1..]);
    while let Some(flag) = flags.next_flag() {
        match flag {
            "--in" => input = Some(PathBuf::from(flags.value(flag)?)),
            "--k" => k = Some(flags.parsed(flag)?),
            "--samples" => samples = flags.parsed(flag)?,
            "--radius" => radius = flags.parsed(flag)?,
            "--objective" => objective = flags.value(flag)?.to_string(),
            "--seed" => seed = Some(flags.parsed(flag)?),
            "--out" => out = Some(PathBuf::from(flags.value(flag)?)),
            "--help" | "-h" => {
                print!("{DIAG_USAGE}");
                return Ok(());
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown flag {other} for diag srh"
                )))
            }
        }
    }
    let input = input.ok_or_else(|| CliError::usage("missing required flag --in"))?;
    let k = k.ok_or_else(|| CliError::usage("missing required flag --k"))?;
    let seed = resolve_seed(seed)?;

    let instance = read_instance(&input)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", input.display())))?;
    let spec = match objective.as_str() {
        "modified" => ObjectiveSpec::modified(&instance)?,
        "mle" => ObjectiveSpec::mle(&instance)?,
        other => {
            return Err(CliError::usage(format!(
                "unknown objective \"{other}\" for --objective; expected modified or mle"
            )))
        }
    };
    let mut rng = Rng::seed_from_u64(seed);
    let estimate = estimate_srh(&spec, k, radius, samples, &mut rng).map_err(|e| match e {
        onebitcs::Error::InvalidConfig(msg) => CliError::usage(msg),
        other => CliError::Runtime(other.to_string()),
    })?;
    let report = format!("{estimate}");
    print!("{report}");
    if let Some(path) = out {
        write_text_atomically(&path, &report)?;
    }
    Ok(())
}

fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|&x| fmt_float(x))
        .collect::<Vec<_>>()
        .join(",")
}
