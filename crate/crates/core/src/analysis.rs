//! One full comparison run: bootstrap every team, then derive every table.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{InferenceError, ResampleError};
use crate::inference::{self, ranking, PValueResult, DEFAULT_LEVEL};
use crate::metrics::{display4, MetricKind};
use crate::report::{
    ComparisonReport, ConfigEcho, DegenerateRow, DifferenceRow, IntervalRow, MetricReport, PairReport, PointRow,
    ScoreEntry, StarRow,
};
use crate::resample::{make_plan, paired_difference, BootstrapSet, DEFAULT_REPLICATES};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub b: usize,
    pub seed: u64,
    pub level: f64,
    pub metrics: Vec<MetricKind>,
    /// Pairs whose difference histograms are drawn. `None` means the best
    /// team against the runner-up and against the third-placed team.
    pub pairs: Option<Vec<(String, String)>>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            b: DEFAULT_REPLICATES,
            seed: DEFAULT_SEED,
            level: DEFAULT_LEVEL,
            metrics: MetricKind::ALL.to_vec(),
            pairs: None,
        }
    }
}

/// Replicate differences behind one histogram.
#[derive(Debug, Clone)]
pub struct PairDiffs {
    pub metric: MetricKind,
    pub team_a: String,
    pub team_b: String,
    pub delta: f64,
    pub p: PValueResult,
    pub diffs: Vec<f64>,
}

impl PairDiffs {
    /// File-name fragment, e.g. `f1_NLPCIC_vs_CIMATMTYGTO`.
    pub fn slug(&self) -> String {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
                .collect()
        };
        format!(
            "{}_{}_vs_{}",
            self.metric.name(),
            clean(&self.team_a),
            clean(&self.team_b)
        )
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub set: BootstrapSet,
    pub report: ComparisonReport,
    pub pairs: Vec<PairDiffs>,
}

/// Metric used for histograms: F1 when selected, else the first selected.
pub fn histogram_metric(metrics: &[MetricKind]) -> Option<MetricKind> {
    if metrics.contains(&MetricKind::F1) {
        Some(MetricKind::F1)
    } else {
        metrics.iter().min().copied()
    }
}

pub fn analyze(ds: &LabeledDataset, config: &AnalysisConfig) -> Result<Analysis, InferenceError> {
    if config.metrics.is_empty() {
        return Err(InferenceError::NoMetrics);
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(InferenceError::InvalidLevel(config.level));
    }
    let plan = make_plan(ds.len(), config.b, config.seed);
    let set = BootstrapSet::compute(ds, &plan, &config.metrics)?;
    let metrics = set.metrics().to_vec();

    let point_estimates = set
        .teams()
        .iter()
        .map(|team| PointRow {
            team: team.clone(),
            counts: set.counts(team).expect("known team"),
            scores: metrics
                .iter()
                .map(|&m| {
                    let s = set.point(team, m).expect("known team");
                    ScoreEntry {
                        metric: m,
                        value: s.value,
                        defined: s.defined,
                        display: display4(s.value),
                    }
                })
                .collect(),
        })
        .collect();

    let mut metric_reports = Vec::with_capacity(metrics.len());
    for &m in &metrics {
        let intervals = inference::ordered_intervals(&set, m, config.level)?
            .into_iter()
            .enumerate()
            .map(|(i, (team, ci))| IntervalRow::new(i + 1, team, &ci))
            .collect();
        let ranked = ranking(&set, m);
        let (best, differences, star_matrix) = if ranked.len() >= 2 {
            let best_dist = set.get(&ranked[0], m).expect("ranked");
            let diffs = inference::differences_from_best(&set, m, config.level)?
                .into_iter()
                .map(|d| {
                    let other = set.get(&d.team_b, m).expect("ranked");
                    let (_, p) = inference::pair_p_value(best_dist, other)?;
                    Ok(DifferenceRow::new(&d, &p))
                })
                .collect::<Result<Vec<_>, InferenceError>>()?;
            let matrix = inference::star_matrix(&set, m)?;
            let rows = matrix.cells.iter().map(StarRow::from).collect();
            (Some(ranked[0].clone()), diffs, rows)
        } else {
            (None, Vec::new(), Vec::new())
        };
        let degenerate = set
            .for_metric(m)
            .iter()
            .map(|d| DegenerateRow {
                team: d.team.clone(),
                replicates: d.degenerate_count,
            })
            .collect();
        metric_reports.push(MetricReport {
            metric: m,
            best,
            intervals,
            differences,
            star_matrix,
            degenerate,
        });
    }

    let pairs = histogram_pairs(&set, config)?;
    let histograms = pairs
        .iter()
        .map(|p| PairReport {
            metric: p.metric,
            team_a: p.team_a.clone(),
            team_b: p.team_b.clone(),
            delta: p.delta,
            p_value: p.p.p,
            b_exceed: p.p.b_exceed,
            p_two_sided: p.p.two_sided(),
            delta_display: display4(p.delta),
            p_display: display4(p.p.p),
            file: format!("fig3_{}.svg", p.slug()),
        })
        .collect();

    let report = ComparisonReport {
        config: ConfigEcho {
            n: ds.len(),
            teams: set.teams().to_vec(),
            b: config.b,
            seed: config.seed,
            level: config.level,
            positive: ds.positive().to_string(),
            metrics: metrics.clone(),
        },
        point_estimates,
        metrics: metric_reports,
        histograms,
    };
    Ok(Analysis { set, report, pairs })
}

fn histogram_pairs(set: &BootstrapSet, config: &AnalysisConfig) -> Result<Vec<PairDiffs>, InferenceError> {
    let Some(metric) = histogram_metric(set.metrics()) else {
        return Ok(Vec::new());
    };
    let requested: Vec<(String, String)> = match &config.pairs {
        Some(p) => p.clone(),
        None => {
            let ranked = ranking(set, metric);
            ranked
                .iter()
                .skip(1)
                .take(2)
                .map(|t| (ranked[0].clone(), t.clone()))
                .collect()
        }
    };
    requested
        .into_iter()
        .map(|(a, b)| {
            let da = set
                .get(&a, metric)
                .ok_or_else(|| ResampleError::UnknownTeam(a.clone()))?;
            let db = set
                .get(&b, metric)
                .ok_or_else(|| ResampleError::UnknownTeam(b.clone()))?;
            // Orient so the first team has the higher full-dataset score.
            let (da, db) = if db.point.value > da.point.value {
                (db, da)
            } else {
                (da, db)
            };
            let diffs = paired_difference(da, db)?;
            let (delta, p) = inference::pair_p_value(da, db)?;
            Ok(PairDiffs {
                metric,
                team_a: da.team.clone(),
                team_b: db.team.clone(),
                delta,
                p,
                diffs,
            })
        })
        .collect()
}
