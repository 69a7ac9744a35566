//! Per-cell aggregation of raw trial rows.

use crate::harness::{fmt_float, RawRecord, SolverKind};

/// Summary CSV column order; pinned.
pub const SUMMARY_HEADER: &str = "s,m,eta_db,solver,metric,mean,median,stderr,trials,excluded";

/// Metrics summarized per cell, in fixed emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    AngularError,
    RSnrDb,
    Fnr,
    Fpr,
    HammingFraction,
    Seconds,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::AngularError,
        MetricKind::RSnrDb,
        MetricKind::Fnr,
        MetricKind::Fpr,
        MetricKind::HammingFraction,
        MetricKind::Seconds,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::AngularError => "ae",
            MetricKind::RSnrDb => "rsnr_db",
            MetricKind::Fnr => "fnr",
            MetricKind::Fpr => "fpr",
            MetricKind::HammingFraction => "hamming_fraction",
            MetricKind::Seconds => "seconds",
        }
    }

    fn extract(&self, row: &RawRecord) -> f64 {
        match (self, &row.report) {
            (MetricKind::Seconds, _) => row.seconds,
            (_, None) => f64::NAN,
            (MetricKind::AngularError, Some(r)) => r.angular_error,
            (MetricKind::RSnrDb, Some(r)) => r.r_snr_db,
            (MetricKind::Fnr, Some(r)) => r.fnr,
            (MetricKind::Fpr, Some(r)) => r.fpr,
            (MetricKind::HammingFraction, Some(r)) => r.hamming_fraction,
        }
    }
}

/// Statistics of one metric over one grid cell.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub s: usize,
    pub m: usize,
    pub eta_db: f64,
    pub solver: SolverKind,
    pub metric: MetricKind,
    /// Mean over finite values.
    pub mean: f64,
    /// Median over all non-failed values (infinities included).
    pub median: f64,
    /// Standard error of the mean over finite values; 0 for fewer than
    /// two values.
    pub stderr: f64,
    /// Non-failed trial count in the cell.
    pub trials: usize,
    /// Non-finite values excluded from mean/stderr.
    pub excluded: usize,
}

impl CellSummary {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.s,
            self.m,
            fmt_float(self.eta_db),
            self.solver.name(),
            self.metric.name(),
            fmt_float(self.mean),
            fmt_float(self.median),
            fmt_float(self.stderr),
            self.trials,
            self.excluded,
        )
    }
}

/// Groups raw rows by (s, m, eta_db, solver) and summarizes every metric.
/// Cells whose trials all failed are omitted, with one warning each.
pub fn aggregate(rows: &[RawRecord]) -> (Vec<CellSummary>, Vec<String>) {
    let mut keys: Vec<(usize, usize, u64, SolverKind)> = rows
        .iter()
        .map(|r| (r.s, r.m, r.eta_db.to_bits(), r.solver))
        .collect();
    keys.sort();
    keys.dedup();

    let mut summaries = Vec::new();
    let mut warnings = Vec::new();
    for (s, m, eta_bits, solver) in keys {
        let eta_db = f64::from_bits(eta_bits);
        let cell: Vec<&RawRecord> = rows
            .iter()
            .filter(|r| {
                r.s == s && r.m == m && r.eta_db.to_bits() == eta_bits && r.solver == solver
            })
            .collect();
        let ok: Vec<&&RawRecord> = cell.iter().filter(|r| !r.failed).collect();
        let failures = cell.len() - ok.len();
        if ok.is_empty() {
            warnings.push(format!(
                "cell s={s} m={m} eta_db={} solver={}: all {failures} trials failed; omitted",
                fmt_float(eta_db),
                solver.name()
            ));
            continue;
        }
        if failures > 0 {
            warnings.push(format!(
                "cell s={s} m={m} eta_db={} solver={}: {failures} failed trials excluded",
                fmt_float(eta_db),
                solver.name()
            ));
        }
        for metric in MetricKind::ALL {
            let values: Vec<f64> = ok.iter().map(|r| metric.extract(r)).collect();
            summaries.push(summarize(s, m, eta_db, solver, metric, &values));
        }
    }
    (summaries, warnings)
}

fn summarize(
    s: usize,
    m: usize,
    eta_db: f64,
    solver: SolverKind,
    metric: MetricKind,
    values: &[f64],
) -> CellSummary {
    let finite: Vec<f64> = values.iter().cloned().filter(|v| v.is_finite()).collect();
    let excluded = values.len() - finite.len();
    let mean = if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let stderr = if finite.len() < 2 {
        0.0
    } else {
        let var =
            finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (finite.len() - 1) as f64;
        (var / finite.len() as f64).sqrt()
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() {
        f64::NAN
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    CellSummary {
        s,
        m,
        eta_db,
        solver,
        metric,
        mean,
        median,
        stderr,
        trials: values.len(),
        excluded,
    }
}

pub(crate) fn summary_csv_content(summaries: &[CellSummary]) -> String {
    let mut out = String::with_capacity(48 * (summaries.len() + 1));
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for c in summaries {
        out.push_str(&c.to_csv_row());
        out.push('\n');
    }
    out
}
