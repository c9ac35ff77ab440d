//! The comparison report and its derived views.
//!
//! `report.json` is the source of truth. The CSV, LaTeX and SVG files are
//! rendered from the same [`ComparisonReport`] and show every number rounded
//! half-up to four decimals.
//!
//! Layout of an output directory:
//!
//! ```text
//! report.json
//! table1_<metric>.csv / .tex   point estimates
//! table2_<metric>.csv / .tex   ordered percentile intervals
//! table3_<metric>.csv / .tex   intervals of differences from the best team
//! table4_<metric>.csv / .tex   pairwise differences with significance marks
//! fig1_intervals.svg
//! fig2_differences.svg
//! fig3_<metric>_<a>_vs_<b>.svg
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{Analysis, PairDiffs};
use crate::error::ReportError;
use crate::inference::{ConfidenceInterval, DifferenceResult, PValueResult, StarCell, Stars};
use crate::metrics::{display4, ConfusionCounts, MetricKind};
use crate::svg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub config: ConfigEcho,
    pub point_estimates: Vec<PointRow>,
    pub metrics: Vec<MetricReport>,
    pub histograms: Vec<PairReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub teams: Vec<String>,
    pub b: usize,
    pub seed: u64,
    pub level: f64,
    pub positive: String,
    pub metrics: Vec<MetricKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub team: String,
    pub counts: ConfusionCounts,
    pub scores: Vec<ScoreEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub metric: MetricKind,
    pub value: f64,
    pub defined: bool,
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: MetricKind,
    /// `None` when there is only one team.
    pub best: Option<String>,
    pub intervals: Vec<IntervalRow>,
    pub differences: Vec<DifferenceRow>,
    pub star_matrix: Vec<StarRow>,
    pub degenerate: Vec<DegenerateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRow {
    pub rank: usize,
    pub team: String,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub point_display: String,
    pub lower_display: String,
    pub upper_display: String,
}

impl IntervalRow {
    pub fn new(rank: usize, team: String, ci: &ConfidenceInterval) -> Self {
        IntervalRow {
            rank,
            team,
            point: ci.point,
            lower: ci.lower,
            upper: ci.upper,
            level: ci.level,
            point_display: display4(ci.point),
            lower_display: display4(ci.lower),
            upper_display: display4(ci.upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceRow {
    pub best: String,
    pub team: String,
    pub delta: f64,
    pub lower: f64,
    pub mean: f64,
    pub upper: f64,
    pub contains_zero: bool,
    pub p_value: f64,
    pub delta_display: String,
    pub lower_display: String,
    pub mean_display: String,
    pub upper_display: String,
}

impl DifferenceRow {
    pub fn new(d: &DifferenceResult, p: &PValueResult) -> Self {
        DifferenceRow {
            best: d.team_a.clone(),
            team: d.team_b.clone(),
            delta: d.delta,
            lower: d.ci.lower,
            mean: d.mean,
            upper: d.ci.upper,
            contains_zero: d.contains_zero,
            p_value: p.p,
            delta_display: display4(d.delta),
            lower_display: display4(d.ci.lower),
            mean_display: display4(d.mean),
            upper_display: display4(d.ci.upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarRow {
    pub row: usize,
    pub col: usize,
    pub row_team: String,
    pub col_team: String,
    pub delta: f64,
    pub p_value: f64,
    pub b_exceed: usize,
    pub p_two_sided: f64,
    pub stars: Stars,
    pub delta_display: String,
    pub p_display: String,
}

impl From<&StarCell> for StarRow {
    fn from(c: &StarCell) -> Self {
        StarRow {
            row: c.row,
            col: c.col,
            row_team: c.row_team.clone(),
            col_team: c.col_team.clone(),
            delta: c.delta,
            p_value: c.p.p,
            b_exceed: c.p.b_exceed,
            p_two_sided: c.p.two_sided(),
            stars: c.stars,
            delta_display: display4(c.delta),
            p_display: display4(c.p.p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateRow {
    pub team: String,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub metric: MetricKind,
    pub team_a: String,
    pub team_b: String,
    pub delta: f64,
    pub p_value: f64,
    pub b_exceed: usize,
    pub p_two_sided: f64,
    pub delta_display: String,
    pub p_display: String,
    pub file: String,
}

impl ComparisonReport {
    /// Canonical JSON: pretty-printed, trailing newline, shortest
    /// round-tripping float representation.
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn metric(&self, m: MetricKind) -> Option<&MetricReport> {
        self.metrics.iter().find(|r| r.metric == m)
    }
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), ReportError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| ReportError::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| ReportError::Invalid(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 strings"))
}

fn full(x: f64) -> String {
    // Shortest representation that parses back to the same f64.
    format!("{x:?}")
}

fn latex_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            c => out.push(c),
        }
    }
    out
}

fn latex_stars(s: Stars) -> &'static str {
    match s {
        Stars::None => "",
        Stars::Dagger => "$\\dagger$",
        Stars::One => "*",
        Stars::Two => "**",
        Stars::Three => "***",
    }
}

fn latex_table(caption: &str, cols: &str, header: &[String], rows: &[Vec<String>], note: Option<&str>) -> String {
    let mut s = String::new();
    s.push_str("\\begin{table}[!h]\n");
    s.push_str(&format!("\\caption{{{caption}}}\n"));
    s.push_str("\\centering\n");
    s.push_str(&format!("\\begin{{tabular}}[t]{{{cols}}}\n\\hline\n"));
    s.push_str(&header.join(" & "));
    s.push_str("\\\\\n\\hline\n");
    for r in rows {
        s.push_str(&r.join(" & "));
        s.push_str("\\\\\n");
    }
    s.push_str("\\hline\n\\end{tabular}\n");
    if let Some(n) = note {
        s.push_str(n);
        s.push('\n');
    }
    s.push_str("\\end{table}\n");
    s
}

const STAR_NOTE: &str = "\\par\\footnotesize Note: $\\dagger p<.1$, *$p<.05$, **$p<.01$\\footnotemark, and ***$p<.001$.\n\\footnotetext{Corrected threshold: ** marks $p<.01$, not $p<.1$, which would coincide with $\\dagger$.}";

/// Writes `report.json` and the CSV and LaTeX files for tables 1 to 4.
pub fn emit_tables(r: &ComparisonReport, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let mut written = Vec::new();
    write(dir, "report.json", &r.to_json()?, &mut written)?;

    for m in &r.config.metrics {
        let mr = r
            .metric(*m)
            .ok_or_else(|| ReportError::Invalid(format!("no section for {m}")))?;
        let name = m.name();

        // Table 1: point estimates, best first.
        let mut points: Vec<(&PointRow, &ScoreEntry)> = r
            .point_estimates
            .iter()
            .filter_map(|p| p.scores.iter().find(|s| s.metric == *m).map(|s| (p, s)))
            .collect();
        points.sort_by(|a, b| b.1.value.total_cmp(&a.1.value).then_with(|| a.0.team.cmp(&b.0.team)));
        let rows: Vec<Vec<String>> = points
            .iter()
            .map(|(p, s)| {
                vec![
                    p.team.clone(),
                    p.counts.tp.to_string(),
                    p.counts.fp.to_string(),
                    p.counts.fn_.to_string(),
                    p.counts.tn.to_string(),
                    full(s.value),
                    s.defined.to_string(),
                    s.display.clone(),
                ]
            })
            .collect();
        let csv = csv_string(&["team", "tp", "fp", "fn", "tn", "value", "defined", "display"], rows)?;
        write(dir, &format!("table1_{name}.csv"), &csv, &mut written)?;
        let tex_rows: Vec<Vec<String>> = points
            .iter()
            .map(|(p, s)| vec![latex_escape(&p.team), s.display.clone()])
            .collect();
        let tex = latex_table(
            &format!("Results on the full dataset: {}", m.title()),
            "lr",
            &["Team".into(), m.title().into()],
            &tex_rows,
            None,
        );
        write(dir, &format!("table1_{name}.tex"), &tex, &mut written)?;

        // Table 2: ordered intervals.
        let rows = mr.intervals.iter().map(|i| {
            vec![
                i.rank.to_string(),
                i.team.clone(),
                full(i.point),
                full(i.lower),
                full(i.upper),
                full(i.level),
                i.point_display.clone(),
                i.lower_display.clone(),
                i.upper_display.clone(),
            ]
        });
        let csv = csv_string(
            &[
                "rank",
                "team",
                "point",
                "lower",
                "upper",
                "level",
                "point_display",
                "lower_display",
                "upper_display",
            ],
            rows,
        )?;
        write(dir, &format!("table2_{name}.csv"), &csv, &mut written)?;
        let tex_rows: Vec<Vec<String>> = mr
            .intervals
            .iter()
            .map(|i| {
                vec![
                    latex_escape(&i.team),
                    format!("({},{})", i.lower_display, i.upper_display),
                ]
            })
            .collect();
        let tex = latex_table(
            &format!("Ordered bootstrap confidence intervals: {}", m.title()),
            "lc",
            &["Team".into(), "CI".into()],
            &tex_rows,
            None,
        );
        write(dir, &format!("table2_{name}.tex"), &tex, &mut written)?;

        // Table 3: differences from the best.
        let rows = mr.differences.iter().map(|d| {
            vec![
                d.best.clone(),
                d.team.clone(),
                full(d.delta),
                full(d.lower),
                full(d.mean),
                full(d.upper),
                d.contains_zero.to_string(),
                full(d.p_value),
                d.lower_display.clone(),
                d.mean_display.clone(),
                d.upper_display.clone(),
            ]
        });
        let csv = csv_string(
            &[
                "best",
                "team",
                "delta",
                "lower",
                "mean",
                "upper",
                "contains_zero",
                "p_value",
                "lower_display",
                "mean_display",
                "upper_display",
            ],
            rows,
        )?;
        write(dir, &format!("table3_{name}.csv"), &csv, &mut written)?;
        let tex_rows: Vec<Vec<String>> = mr
            .differences
            .iter()
            .map(|d| {
                vec![
                    latex_escape(&d.team),
                    d.lower_display.clone(),
                    d.mean_display.clone(),
                    d.upper_display.clone(),
                ]
            })
            .collect();
        let best = mr.best.as_deref().map(latex_escape).unwrap_or_default();
        let tex = latex_table(
            &format!(
                "Bootstrap confidence intervals of differences from the best ({best}): {}",
                m.title()
            ),
            "lrrr",
            &["Team".into(), "ICI".into(), "Mean".into(), "SCI".into()],
            &tex_rows,
            None,
        );
        write(dir, &format!("table3_{name}.tex"), &tex, &mut written)?;

        // Table 4: star matrix.
        let rows = mr.star_matrix.iter().map(|c| {
            vec![
                c.row_team.clone(),
                c.col_team.clone(),
                full(c.delta),
                full(c.p_value),
                c.b_exceed.to_string(),
                full(c.p_two_sided),
                c.stars.symbol().to_string(),
                c.delta_display.clone(),
                c.p_display.clone(),
            ]
        });
        let csv = csv_string(
            &[
                "row_team",
                "column_team",
                "delta",
                "p_value",
                "b_exceed",
                "p_two_sided",
                "stars",
                "delta_display",
                "p_display",
            ],
            rows,
        )?;
        write(dir, &format!("table4_{name}.csv"), &csv, &mut written)?;
        write(dir, &format!("table4_{name}.tex"), &star_matrix_latex(mr), &mut written)?;
    }
    Ok(written)
}

fn star_matrix_latex(mr: &MetricReport) -> String {
    let ranked: Vec<&str> = mr.intervals.iter().map(|i| i.team.as_str()).collect();
    let caption = format!(
        "Differences of {} score (column)-(row), and their significance",
        mr.metric.title()
    );
    if ranked.len() < 2 || mr.star_matrix.is_empty() {
        return latex_table(&caption, "l", &[String::new()], &[], Some(STAR_NOTE));
    }
    let cols = ranked.len() - 1;
    let mut header = vec![String::new()];
    header.extend(ranked[..cols].iter().map(|t| latex_escape(t)));
    let rows: Vec<Vec<String>> = (1..ranked.len())
        .map(|row| {
            let mut r = vec![latex_escape(ranked[row])];
            for col in 0..cols {
                let cell = mr.star_matrix.iter().find(|c| c.row == row && c.col == col);
                r.push(match cell {
                    Some(c) if c.stars == Stars::None => c.delta_display.clone(),
                    Some(c) => format!("{} {}", c.delta_display, latex_stars(c.stars)),
                    None => String::new(),
                });
            }
            r
        })
        .collect();
    latex_table(
        &caption,
        &format!("l{}", "l".repeat(cols)),
        &header,
        &rows,
        Some(STAR_NOTE),
    )
}

/// Figure 1: ordered percentile intervals, one panel per metric.
pub fn emit_interval_plot(r: &ComparisonReport, dir: &Path) -> Result<PathBuf, ReportError> {
    let sections: Vec<(MetricKind, Vec<IntervalRow>)> =
        r.metrics.iter().map(|m| (m.metric, m.intervals.clone())).collect();
    if sections.iter().all(|(_, rows)| rows.is_empty()) {
        return Err(ReportError::Invalid("interval plot needs at least one team".into()));
    }
    let mut written = Vec::new();
    write(dir, "fig1_intervals.svg", &svg::interval_plot(&sections), &mut written)?;
    Ok(written.remove(0))
}

/// Figure 2: difference-from-best intervals colored by zero containment.
pub fn emit_difference_plot(r: &ComparisonReport, dir: &Path) -> Result<PathBuf, ReportError> {
    let sections: Vec<(MetricKind, String, Vec<DifferenceRow>)> = r
        .metrics
        .iter()
        .filter_map(|m| m.best.clone().map(|b| (m.metric, b, m.differences.clone())))
        .collect();
    if sections.is_empty() {
        return Err(ReportError::Invalid("difference plot needs at least two teams".into()));
    }
    let mut written = Vec::new();
    write(
        dir,
        "fig2_differences.svg",
        &svg::difference_plot(&sections),
        &mut written,
    )?;
    Ok(written.remove(0))
}

/// Figure 3: histogram of one pair's replicate differences.
pub fn emit_histogram(diffs: &[f64], delta: f64, title: &str, dir: &Path, file: &str) -> Result<PathBuf, ReportError> {
    if diffs.is_empty() {
        return Err(ReportError::Invalid("histogram needs at least one replicate".into()));
    }
    let mut written = Vec::new();
    write(dir, file, &svg::histogram(diffs, delta, title), &mut written)?;
    Ok(written.remove(0))
}

fn pair_title(p: &PairDiffs) -> String {
    format!(
        "Bootstrap distribution of {} differences: {} - {}",
        p.metric.title(),
        p.team_a,
        p.team_b
    )
}

/// Writes every table and figure of an analysis into `dir`, creating it if
/// needed. Returns the written paths in emission order.
pub fn emit_all(a: &Analysis, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|e| ReportError::io(dir, e))?;
    let mut written = emit_tables(&a.report, dir)?;
    written.push(emit_interval_plot(&a.report, dir)?);
    if a.report.metrics.iter().any(|m| m.best.is_some()) {
        written.push(emit_difference_plot(&a.report, dir)?);
    }
    for (pair, entry) in a.pairs.iter().zip(&a.report.histograms) {
        written.push(emit_histogram(
            &pair.diffs,
            pair.delta,
            &pair_title(pair),
            dir,
            &entry.file,
        )?);
    }
    Ok(written)
}
