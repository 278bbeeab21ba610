//! CSV ingestion, JSON run reports, power-curve CSV output, and the
//! in-house SVG plot backing the CLI.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::core::{Error, Result, Sample, TestConfig, TestOutcome};
use crate::montecarlo::PowerPoint;

pub const SCHEMA_VERSION: &str = "1";

/// Per-group block of a run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
    pub median: f64,
    pub bandwidth: f64,
    pub density_at_median: f64,
}

/// Serializable report of one test run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub config: TestConfig,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub reject: bool,
    pub groups: Vec<GroupSummary>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(
        config: &TestConfig,
        samples: &[Sample],
        outcome: &TestOutcome,
        warnings: Vec<String>,
    ) -> Self {
        let groups = samples
            .iter()
            .enumerate()
            .map(|(i, s)| GroupSummary {
                label: s.label().to_string(),
                n: s.n(),
                median: outcome.medians[i],
                bandwidth: outcome.bandwidths[i],
                density_at_median: outcome.density_at_median[i],
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            config: *config,
            statistic: outcome.statistic,
            df: outcome.df,
            p_value: outcome.p_value,
            reject: outcome.reject,
            groups,
            warnings,
        }
    }

    /// JSON with every float printed at 17 significant digits, so the
    /// report round-trips losslessly.
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision::default());
        self.serialize(&mut ser).expect("report serialization");
        String::from_utf8(out).expect("json is utf-8")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<json>".into(),
            row: e.line(),
            col: e.column(),
            message: e.to_string(),
        })
    }
}

/// JSON formatter printing f64 values with 17 significant digits.
#[derive(Default)]
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        // 1 leading digit + 16 decimals = 17 significant digits.
        write!(writer, "{value:.16e}")
    }
}

fn parse_cell(raw: &str, path: &str, row: usize, col: usize) -> Result<f64> {
    let trimmed = raw.trim();
    trimmed.parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_string(),
        row,
        col,
        message: format!("expected a number, found '{trimmed}'"),
    })
}

fn looks_numeric(cell: &str) -> bool {
    cell.trim().parse::<f64>().is_ok()
}

/// Parses a single-column CSV of observations (mode A). The first row
/// is treated as a header when it is not numeric.
pub fn parse_single_column(text: &str, path: &str, label: &str) -> Result<Sample> {
    let mut values = Vec::new();
    let mut first_data_row = true;
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cell = line.split(',').next().unwrap_or("");
        if first_data_row && !looks_numeric(cell) {
            first_data_row = false;
            continue; // header
        }
        first_data_row = false;
        values.push(parse_cell(cell, path, row, 1)?);
    }
    Sample::new(label, values)
}

/// Parses a grouped CSV with columns (group, value) (mode B). Groups
/// are ordered by first appearance, which fixes the contrast order.
pub fn parse_grouped(text: &str, path: &str) -> Result<Vec<Sample>> {
    let mut order: Vec<String> = Vec::new();
    let mut buckets: Vec<Vec<f64>> = Vec::new();
    let mut first_data_row = true;
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.splitn(2, ',');
        let group = cols.next().unwrap_or("").trim();
        let value_cell = cols.next().ok_or_else(|| Error::Parse {
            path: path.to_string(),
            row,
            col: 2,
            message: "missing value column".into(),
        })?;
        if first_data_row && !looks_numeric(value_cell) {
            first_data_row = false;
            continue; // header
        }
        first_data_row = false;
        let value = parse_cell(value_cell, path, row, 2)?;
        match order.iter().position(|g| g == group) {
            Some(i) => buckets[i].push(value),
            None => {
                order.push(group.to_string());
                buckets.push(vec![value]);
            }
        }
    }
    order
        .into_iter()
        .zip(buckets)
        .map(|(label, values)| Sample::new(label, values))
        .collect()
}

fn read_file(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.display().to_string()));
    }
    Ok(fs::read_to_string(path)?)
}

/// Mode A ingestion: one file per group, argument order defines the
/// contrast order; the file stem is the group label.
pub fn parse_sample_files(paths: &[impl AsRef<Path>]) -> Result<Vec<Sample>> {
    let mut samples = Vec::with_capacity(paths.len());
    for p in paths {
        let path = p.as_ref();
        let text = read_file(path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        samples.push(parse_single_column(&text, &path.display().to_string(), &label)?);
    }
    crate::core::validate_samples(samples)
}

/// Mode B ingestion from a grouped file.
pub fn parse_grouped_file(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let path = path.as_ref();
    let text = read_file(path)?;
    crate::core::validate_samples(parse_grouped(&text, &path.display().to_string())?)
}

/// CSV rendering of a power curve: `delta,power,mc_stderr,errors`.
pub fn power_csv(points: &[PowerPoint]) -> String {
    let mut out = String::from("delta,power,mc_stderr,errors\n");
    for p in points {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{}", p.delta, p.power, p.mc_stderr, p.errors)
            .unwrap();
    }
    out
}

/// Writes `content` to `path` atomically: temp file in the same
/// directory, then rename. Partial output is never visible.
pub fn write_atomic(path: impl AsRef<Path>, content: &str) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp_name = format!(
        ".{}.tmp-{}",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default(),
        std::process::id()
    );
    let tmp_path = match dir {
        Some(d) => d.join(&tmp_name),
        None => std::path::PathBuf::from(&tmp_name),
    };
    let mut f = fs::File::create(&tmp_path)?;
    f.write_all(content.as_bytes())?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp_path, path)?;
    Ok(())
}

/// Renders a power curve as a standalone SVG line plot with labeled
/// axes and a dashed reference line at the significance level.
pub fn power_svg(points: &[PowerPoint], alpha: f64) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 60.0; // left margin
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 50.0;
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;

    let (dmin, dmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.delta), hi.max(p.delta))
        });
    let span = if dmax > dmin { dmax - dmin } else { 1.0 };
    let x = |d: f64| ML + (d - dmin) / span * plot_w;
    let y = |pw: f64| MT + (1.0 - pw) * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .unwrap();
    writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    // Axes.
    writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        MT + plot_h,
        ML + plot_w,
        MT + plot_h
    )
    .unwrap();
    writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>",
        MT + plot_h
    )
    .unwrap();
    // Y ticks at 0, 0.25, ..., 1.
    for i in 0..=4 {
        let v = i as f64 * 0.25;
        let yy = y(v);
        writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{yy}\" x2=\"{ML}\" y2=\"{yy}\" stroke=\"black\"/>",
            ML - 5.0
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{v:.2}</text>",
            ML - 8.0,
            yy + 4.0
        )
        .unwrap();
    }
    // X ticks at each point (thinned to at most 11).
    let stride = (points.len() / 11).max(1);
    for p in points.iter().step_by(stride) {
        let xx = x(p.delta);
        writeln!(
            svg,
            "<line x1=\"{xx}\" y1=\"{}\" x2=\"{xx}\" y2=\"{}\" stroke=\"black\"/>",
            MT + plot_h,
            MT + plot_h + 5.0
        )
        .unwrap();
        writeln!(
            svg,
            "<text x=\"{xx}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{:.3}</text>",
            MT + plot_h + 18.0,
            p.delta
        )
        .unwrap();
    }
    // Axis labels.
    writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">delta</text>",
        ML + plot_w / 2.0,
        H - 10.0
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"15\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">power</text>",
        MT + plot_h / 2.0,
        MT + plot_h / 2.0
    )
    .unwrap();
    // Alpha reference line.
    writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"5,5\"/>",
        y(alpha),
        ML + plot_w,
        y(alpha)
    )
    .unwrap();
    writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"gray\">alpha = {alpha}</text>",
        ML + plot_w - 90.0,
        y(alpha) - 5.0
    )
    .unwrap();
    // The curve itself.
    let poly: Vec<String> = points.iter().map(|p| format!("{},{}", x(p.delta), y(p.power))).collect();
    writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>",
        poly.join(" ")
    )
    .unwrap();
    for p in points {
        writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"steelblue\"/>",
            x(p.delta),
            y(p.power)
        )
        .unwrap();
    }
    writeln!(svg, "</svg>").unwrap();
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::TestConfig;
    use crate::inference::median_test;

    #[test]
    fn single_column_basic() {
        let s = parse_single_column("1\n2\n3\n", "a.csv", "a").unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn single_column_header_detected() {
        let s = parse_single_column("value\n1\n2\n", "a.csv", "a").unwrap();
        assert_eq!(s.n(), 2);
    }

    #[test]
    fn single_column_bad_cell_names_row() {
        let err = parse_single_column("1\nxyz\n3\n", "a.csv", "a").unwrap_err();
        match err {
            Error::Parse { row, col, .. } => {
                assert_eq!(row, 2);
                assert_eq!(col, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grouped_order_by_first_appearance() {
        let text = "b,10\na,1\nb,20\na,2\n";
        let samples = parse_grouped(text, "g.csv").unwrap();
        assert_eq!(samples[0].label(), "b");
        assert_eq!(samples[1].label(), "a");
        assert_eq!(samples[0].values(), &[10.0, 20.0]);
    }

    #[test]
    fn grouped_undersized_group_rejected() {
        let text = "a,1\nb,2\na,3\n";
        let err = parse_grouped(text, "g.csv").unwrap_err();
        assert!(matches!(err, Error::TooFewObservations { .. }));
    }

    #[test]
    fn grouped_header_detected() {
        let text = "group,value\na,1\na,2\nb,3\nb,4\n";
        let samples = parse_grouped(text, "g.csv").unwrap();
        assert_eq!(samples.len(), 2);
    }

    #[test]
    fn report_round_trips() {
        let a = Sample::new("a", vec![1.0, 2.0, 3.5, 0.25, -1.0]).unwrap();
        let b = Sample::new("b", vec![4.0, 5.5, 6.0, 3.75, 8.0]).unwrap();
        let cfg = TestConfig::default();
        let samples = [a, b];
        let outcome = median_test(&samples, &cfg).unwrap();
        let report = RunReport::new(&cfg, &samples, &outcome, vec!["w".into()]);
        let json = report.to_json();
        let back = RunReport::from_json(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn power_csv_shape() {
        let points = vec![
            PowerPoint { delta: 0.0, power: 0.05, mc_stderr: 0.01, errors: 0 },
            PowerPoint { delta: 0.5, power: 1.0, mc_stderr: 0.0, errors: 0 },
        ];
        let csv = power_csv(&points);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "delta,power,mc_stderr,errors");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn svg_contains_axes_and_curve() {
        let points = vec![
            PowerPoint { delta: 0.0, power: 0.05, mc_stderr: 0.01, errors: 0 },
            PowerPoint { delta: 0.25, power: 0.6, mc_stderr: 0.01, errors: 0 },
            PowerPoint { delta: 0.5, power: 1.0, mc_stderr: 0.0, errors: 0 },
        ];
        let svg = power_svg(&points, 0.05);
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("alpha = 0.05"));
        assert!(svg.contains(">delta<"));
        assert!(svg.contains(">power<"));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "first").unwrap();
        write_atomic(&path, "second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
        // No temp litter left behind.
        let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn missing_file_reported() {
        let err = parse_sample_files(&["/nonexistent/file.csv"]).unwrap_err();
        assert!(matches!(err, Error::FileNotFound(_)));
    }
}
