//! Self-contained SVG plot emission.
//!
//! One plot per (metric, SNR, sparsity): sampling ratio m/n on the x axis,
//! per-solver mean with standard-error bars on the y axis. The execution
//! time plot uses a base-10 logarithmic y axis. Next to every SVG sits a
//! CSV with exactly the summary rows that were plotted.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::harness::aggregate::summary_csv_content;
use crate::harness::{fmt_float, CellSummary, MetricKind, SolverKind};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// One plotted line: a solver's (x, mean, stderr) points.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64, f64)>,
}

/// Writes every (metric, eta, s) plot found in `summaries` to `dir`,
/// returning the SVG paths. Each plot's data is also written as CSV.
pub fn emit_plots(summaries: &[CellSummary], n: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut etas: Vec<u64> = summaries.iter().map(|c| c.eta_db.to_bits()).collect();
    etas.sort();
    etas.dedup();
    let mut sparsities: Vec<usize> = summaries.iter().map(|c| c.s).collect();
    sparsities.sort_unstable();
    sparsities.dedup();

    let mut written = Vec::new();
    for metric in MetricKind::ALL {
        if metric == MetricKind::HammingFraction {
            // Not one of the reported figure panels.
            continue;
        }
        for &eta_bits in &etas {
            let eta_db = f64::from_bits(eta_bits);
            for &s in &sparsities {
                let slice: Vec<&CellSummary> = summaries
                    .iter()
                    .filter(|c| c.metric == metric && c.eta_db.to_bits() == eta_bits && c.s == s)
                    .collect();
                if slice.is_empty() {
                    continue;
                }
                let mut solvers: Vec<SolverKind> = slice.iter().map(|c| c.solver).collect();
                solvers.sort();
                solvers.dedup();
                let series: Vec<PlotSeries> = solvers
                    .iter()
                    .map(|&solver| PlotSeries {
                        name: solver.name().to_string(),
                        points: {
                            let mut pts: Vec<(f64, f64, f64)> = slice
                                .iter()
                                .filter(|c| c.solver == solver)
                                .map(|c| (c.m as f64 / n as f64, c.mean, c.stderr))
                                .collect();
                            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                            pts
                        },
                    })
                    .collect();
                let log_y = metric == MetricKind::Seconds;
                let title = format!(
                    "{} vs sampling ratio (s={s}, snr={} dB)",
                    metric.name(),
                    fmt_float(eta_db)
                );
                let stem = format!("{}_s{}_eta{}", metric.name(), s, file_token(eta_db));
                let svg_path = dir.join(format!("{stem}.svg"));
                let svg = render_line_plot(&title, "m/n", metric.name(), &series, log_y);
                crate::harness::run::write_atomically(&svg_path, &svg)?;
                let rows: Vec<CellSummary> = slice.iter().map(|c| (*c).clone()).collect();
                crate::harness::run::write_atomically(
                    &dir.join(format!("{stem}.csv")),
                    &summary_csv_content(&rows),
                )?;
                written.push(svg_path);
            }
        }
    }
    Ok(written)
}

fn file_token(v: f64) -> String {
    fmt_float(v).replace('-', "m").replace('.', "p")
}

/// Renders a line plot with error bars as a standalone SVG document.
pub fn render_line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[PlotSeries],
    log_y: bool,
) -> String {
    let transform = |v: f64| if log_y { v.log10() } else { v };

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, mean, se) in &s.points {
            if !mean.is_finite() {
                continue;
            }
            if log_y && mean <= 0.0 {
                continue;
            }
            xs.push(x);
            ys.push(transform(mean));
            if !log_y {
                ys.push(mean - se);
                ys.push(mean + se);
            }
        }
    }
    let (x_min, x_max) = padded_range(&xs);
    let (y_min, y_max) = padded_range(&ys);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| {
        MARGIN_T + (y_max - transform_value(y, log_y).unwrap_or(y_min)) / (y_max - y_min) * plot_h
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        escape(title)
    ));

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B,
        MARGIN_L + plot_w,
        HEIGHT - MARGIN_B
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B
    ));

    // Ticks.
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = x_min + t * (x_max - x_min);
        let xp = MARGIN_L + t * plot_w;
        svg.push_str(&format!(
            "<line x1=\"{xp}\" y1=\"{}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{xp}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_B + 18.0,
            tick_label(xv)
        ));
        let yv = y_min + t * (y_max - y_min);
        let yp = MARGIN_T + (1.0 - t) * plot_h;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{MARGIN_L}\" y2=\"{yp}\" stroke=\"black\"/>\n",
            MARGIN_L - 5.0
        ));
        let label = if log_y {
            format!("1e{}", tick_label(yv))
        } else {
            tick_label(yv)
        };
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{label}</text>\n",
            MARGIN_L - 8.0,
            yp + 4.0
        ));
    }

    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(&if log_y { format!("{y_label} (log scale)") } else { y_label.to_string() })
    ));

    // Series.
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut path = String::new();
        for &(x, mean, se) in &s.points {
            if !mean.is_finite() || (log_y && mean <= 0.0) {
                continue;
            }
            let xp = sx(x);
            let yp = sy(mean);
            path.push_str(&format!(
                "{}{:.2},{:.2} ",
                if path.is_empty() { "M" } else { "L" },
                xp,
                yp
            ));
            svg.push_str(&format!(
                "<circle cx=\"{xp:.2}\" cy=\"{yp:.2}\" r=\"2.5\" fill=\"{color}\"/>\n"
            ));
            if !log_y && se > 0.0 {
                let y_lo = sy(mean - se);
                let y_hi = sy(mean + se);
                svg.push_str(&format!(
                    "<line x1=\"{xp:.2}\" y1=\"{y_lo:.2}\" x2=\"{xp:.2}\" y2=\"{y_hi:.2}\" stroke=\"{color}\" stroke-width=\"1\"/>\n"
                ));
            }
        }
        if !path.is_empty() {
            svg.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.trim_end()
            ));
        }
        // Legend entry.
        let ly = MARGIN_T + 14.0 + 18.0 * si as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        svg.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            lx + 22.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            lx + 28.0,
            ly + 4.0,
            escape(&s.name)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn transform_value(v: f64, log_y: bool) -> Option<f64> {
    if log_y {
        (v > 0.0).then(|| v.log10())
    } else {
        Some(v)
    }
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (0.01..10000.0).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> Vec<PlotSeries> {
        vec![
            PlotSeries {
                name: "grasp".into(),
                points: vec![(0.25, 0.4, 0.05), (0.5, 0.3, 0.04), (0.75, 0.2, 0.02)],
            },
            PlotSeries {
                name: "pv-l0".into(),
                points: vec![(0.25, 0.45, 0.05), (0.5, 0.42, 0.03), (0.75, 0.38, 0.02)],
            },
        ]
    }

    #[test]
    fn svg_is_well_formed_and_contains_series() {
        let svg = render_line_plot("test", "m/n", "ae", &series(), false);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("grasp"));
        assert!(svg.contains("pv-l0"));
        assert!(svg.matches("<path").count() == 2);
        // Error bars present for both series (3 points each).
        assert!(svg.matches("stroke-width=\"1\"").count() == 6);
    }

    #[test]
    fn log_axis_skips_nonpositive_and_labels_powers() {
        let s = vec![PlotSeries {
            name: "t".into(),
            points: vec![(0.25, 0.001, 0.0), (0.5, 0.0, 0.0), (0.75, 10.0, 0.0)],
        }];
        let svg = render_line_plot("time", "m/n", "seconds", &s, true);
        // Two finite positive points only.
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("log scale"));
        assert!(svg.contains("1e"));
    }

    #[test]
    fn infinite_means_are_skipped() {
        let s = vec![PlotSeries {
            name: "t".into(),
            points: vec![(0.25, f64::INFINITY, 0.0), (0.5, 1.0, 0.1)],
        }];
        let svg = render_line_plot("x", "m/n", "rsnr_db", &s, false);
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn plot_count_matches_metric_times_cells() {
        // 5 plotted metrics x 1 eta x 1 s from a tiny aggregate.
        use crate::harness::{aggregate, run_grid_collect, ExperimentGrid, SolverKind};
        let grid = ExperimentGrid {
            n: 20,
            sparsity_levels: vec![2],
            m_values: vec![15, 30],
            snr_db_values: vec![10.0],
            trials: 2,
            solvers: vec![SolverKind::PvL0],
            ..ExperimentGrid::desk()
        };
        let rows = run_grid_collect(&grid, 1).unwrap();
        let (summaries, _) = aggregate(&rows);
        let dir = std::env::temp_dir().join(format!("onebitcs-plot-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let written = emit_plots(&summaries, grid.n, &dir).unwrap();
        assert_eq!(written.len(), 5);
        for p in &written {
            assert!(p.exists());
            let data = p.with_extension("csv");
            assert!(data.exists());
        }
        // Plotted CSV rows come from the same summaries.
        let content = std::fs::read_to_string(dir.join("ae_s2_eta10.csv")).unwrap();
        for line in content.lines().skip(1) {
            assert!(summaries.iter().any(|c| c.to_csv_row() == line));
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn full_panel_grid_emits_45_plots() {
        // 5 plotted metrics x 3 snr values x 3 sparsity levels.
        use crate::harness::{CellSummary, MetricKind, SolverKind};
        let mut summaries = Vec::new();
        for &s in &[10usize, 20, 30] {
            for &eta in &[0.0f64, 10.0, 20.0] {
                for &m in &[100usize, 200] {
                    for metric in MetricKind::ALL {
                        summaries.push(CellSummary {
                            s,
                            m,
                            eta_db: eta,
                            solver: SolverKind::Grasp,
                            metric,
                            mean: 1.0,
                            median: 1.0,
                            stderr: 0.1,
                            trials: 3,
                            excluded: 0,
                        });
                    }
                }
            }
        }
        let dir = std::env::temp_dir().join(format!("onebitcs-panel-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let written = emit_plots(&summaries, 1000, &dir).unwrap();
        assert_eq!(written.len(), 45);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
