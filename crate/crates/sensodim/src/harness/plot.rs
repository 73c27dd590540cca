//! Plot-data emission: per-mode CSV curves and SVG line charts of success
//! rate against movement amplitude (log scale).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::estimators::Method;

use super::summary::{PerformanceTable, SummaryTarget};
use crate::sim::ExplorationMode;

const CHART_WIDTH: f64 = 640.0;
const CHART_HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

const METHOD_COLORS: [(Method, &str); 4] = [
    (Method::Linear, "#1f77b4"),
    (Method::Cca, "#d62728"),
    (Method::CcaBootInfinitesimal, "#2ca02c"),
    (Method::CcaBootFinite, "#9467bd"),
];

/// Writes one CSV and one SVG per exploration mode present in the table.
/// Returns the created paths; an empty table is an error.
pub fn emit_plot_data(table: &PerformanceTable, dir: &Path) -> io::Result<Vec<PathBuf>> {
    if table.rows.is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "empty performance table: nothing to plot",
        ));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for mode in ExplorationMode::ALL {
        let target = SummaryTarget::Mode(mode);
        let mut amplitudes: Vec<f64> = table
            .rows
            .iter()
            .filter(|r| r.target == target)
            .map(|r| r.amplitude)
            .collect();
        amplitudes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        amplitudes.dedup();
        if amplitudes.is_empty() {
            continue;
        }
        let methods: Vec<Method> = Method::ALL
            .into_iter()
            .filter(|&m| table.rows.iter().any(|r| r.target == target && r.method == m))
            .collect();

        let csv_path = dir.join(format!("performance_{}.csv", mode.label()));
        let mut csv = String::from("amplitude");
        for m in &methods {
            write!(csv, ",{}", m.label()).unwrap();
        }
        csv.push('\n');
        for &a in &amplitudes {
            write!(csv, "{a}").unwrap();
            for &m in &methods {
                match table.rate(a, target, m) {
                    Some(p) => write!(csv, ",{p}").unwrap(),
                    None => csv.push(','),
                }
            }
            csv.push('\n');
        }
        fs::write(&csv_path, csv).map_err(|e| {
            io::Error::new(e.kind(), format!("writing {}: {e}", csv_path.display()))
        })?;
        written.push(csv_path);

        let svg_path = dir.join(format!("performance_{}.svg", mode.label()));
        let svg = render_svg(table, target, &amplitudes, &methods, mode.label());
        fs::write(&svg_path, svg).map_err(|e| {
            io::Error::new(e.kind(), format!("writing {}: {e}", svg_path.display()))
        })?;
        written.push(svg_path);
    }
    Ok(written)
}

fn render_svg(
    table: &PerformanceTable,
    target: SummaryTarget,
    amplitudes: &[f64],
    methods: &[Method],
    title: &str,
) -> String {
    let x0 = amplitudes.first().copied().unwrap().log10();
    let x1 = amplitudes.last().copied().unwrap().log10();
    let span = if (x1 - x0).abs() < f64::EPSILON {
        1.0
    } else {
        x1 - x0
    };
    let plot_w = CHART_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = CHART_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |a: f64| MARGIN_LEFT + (a.log10() - x0) / span * plot_w;
    // y axis fixed to [0, 100] percent.
    let sy = |p: f64| MARGIN_TOP + (100.0 - p) / 100.0 * plot_h;

    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" viewBox=\"0 0 {CHART_WIDTH} {CHART_HEIGHT}\">\n"
    )
    .unwrap();
    write!(
        svg,
        "<rect width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" fill=\"white\"/>\n"
    )
    .unwrap();
    write!(
        svg,
        "<text x=\"{}\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">Success rate, {title} exploration</text>\n",
        MARGIN_LEFT
    )
    .unwrap();

    for tick in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let y = sy(tick);
        write!(
            svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#ddd\"/>\n",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        )
        .unwrap();
        write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{tick}</text>\n",
            MARGIN_LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    for &a in amplitudes {
        let x = sx(a);
        write!(
            svg,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#eee\"/>\n",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        )
        .unwrap();
        write!(
            svg,
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">1e{}</text>\n",
            MARGIN_TOP + plot_h + 16.0,
            a.log10().round() as i64
        )
        .unwrap();
    }
    write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">amplitude (degrees)</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        CHART_HEIGHT - 12.0
    )
    .unwrap();

    for (i, &method) in methods.iter().enumerate() {
        let color = METHOD_COLORS
            .iter()
            .find(|(m, _)| *m == method)
            .map_or("#333", |(_, c)| *c);
        let mut points = String::new();
        for &a in amplitudes {
            if let Some(p) = table.rate(a, target, method) {
                write!(points, "{},{} ", sx(a), sy(p.clamp(0.0, 100.0))).unwrap();
            }
        }
        write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            points.trim_end()
        )
        .unwrap();
        let ly = MARGIN_TOP + 14.0 * i as f64 + 8.0;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        write!(
            svg,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            lx + 18.0
        )
        .unwrap();
        write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            lx + 24.0,
            ly + 4.0,
            method.label()
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::summary::{summarize, SummaryRow};
    use crate::harness::TrialRecord;

    #[test]
    fn empty_table_is_an_error() {
        let table = PerformanceTable::default();
        let dir = std::env::temp_dir().join("sensodim-plot-empty");
        assert!(emit_plot_data(&table, &dir).is_err());
    }

    #[test]
    fn produces_one_csv_and_svg_per_mode() {
        let mut records = Vec::new();
        for (ai, amp) in [1e-6, 1e-4, 1e-2].iter().enumerate() {
            for mode in ExplorationMode::ALL {
                for method in [Method::Linear, Method::Cca] {
                    for trial in 0..4 {
                        let truth = crate::harness::ground_truth(mode, 3);
                        let good = (trial + ai) % 2 == 0;
                        records.push(TrialRecord {
                            trial,
                            amplitude: *amp,
                            mode,
                            method,
                            estimated: Some(if good { truth } else { truth + 1 }),
                            ground_truth: truth,
                            correct: good,
                            error: None,
                            diagnostics: None,
                            wall_time_ms: 0.0,
                        });
                    }
                }
            }
        }
        let table = summarize(&records);
        let dir = std::env::temp_dir().join("sensodim-plot-test");
        let _ = std::fs::remove_dir_all(&dir);
        let files = emit_plot_data(&table, &dir).unwrap();
        assert_eq!(files.len(), 6);
        let csv = std::fs::read_to_string(dir.join("performance_agent.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "amplitude,linear,cca");
        assert_eq!(lines.count(), 3);
        let svg = std::fs::read_to_string(dir.join("performance_both.svg")).unwrap();
        assert!(svg.contains("<polyline"));
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn rates_stay_in_bounds() {
        let rows = vec![SummaryRow {
            amplitude: 1e-3,
            target: SummaryTarget::Mode(ExplorationMode::AgentOnly),
            method: Method::Linear,
            correct: 3,
            trials: 4,
            percent: 75.0,
        }];
        let table = PerformanceTable { rows };
        for r in &table.rows {
            assert!((0.0..=100.0).contains(&r.percent));
        }
    }
}
