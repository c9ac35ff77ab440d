//! Percentile intervals, paired differences, shifted-null p-values and the
//! pairwise significance matrix.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::InferenceError;
use crate::metrics::MetricKind;
use crate::resample::{mean, paired_difference, BootstrapSet, ScoreDistribution};

pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Full-dataset estimate; not necessarily the interval midpoint.
    pub point: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Empirical quantile of sorted data, interpolating linearly between order
/// statistics at position `q * (len - 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn check_level(level: f64) -> Result<(), InferenceError> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(InferenceError::InvalidLevel(level))
    }
}

/// Percentile interval of arbitrary replicate values around a given point.
pub fn percentile_interval(values: &[f64], level: f64, point: f64) -> Result<ConfidenceInterval, InferenceError> {
    check_level(level)?;
    if values.is_empty() {
        return Err(InferenceError::EmptyDistribution);
    }
    let sorted = sorted_copy(values);
    let alpha = 1.0 - level;
    Ok(ConfidenceInterval {
        lower: quantile_sorted(&sorted, alpha / 2.0),
        upper: quantile_sorted(&sorted, 1.0 - alpha / 2.0),
        level,
        point,
    })
}

pub fn percentile_ci(d: &ScoreDistribution, level: f64) -> Result<ConfidenceInterval, InferenceError> {
    percentile_interval(&d.values, level, d.point.value)
}

/// Descending by point estimate, ties by name.
fn by_point_desc(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// Team names ranked best-first on `metric`.
pub fn ranking(set: &BootstrapSet, metric: MetricKind) -> Vec<String> {
    let mut teams: Vec<(&str, f64)> = set
        .for_metric(metric)
        .iter()
        .map(|d| (d.team.as_str(), d.point.value))
        .collect();
    teams.sort_by(|a, b| by_point_desc(*a, *b));
    teams.into_iter().map(|(t, _)| t.to_string()).collect()
}

pub fn ordered_intervals(
    set: &BootstrapSet,
    metric: MetricKind,
    level: f64,
) -> Result<Vec<(String, ConfidenceInterval)>, InferenceError> {
    ranking(set, metric)
        .into_iter()
        .map(|team| {
            let d = set.get(&team, metric).expect("ranked team");
            Ok((team, percentile_ci(d, level)?))
        })
        .collect()
}

/// Closed-interval overlap: touching endpoints count.
pub fn overlap(a: &ConfidenceInterval, b: &ConfidenceInterval) -> bool {
    a.lower.max(b.lower) <= a.upper.min(b.upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceResult {
    pub team_a: String,
    pub team_b: String,
    /// Full-dataset `score(a) - score(b)`.
    pub delta: f64,
    pub ci: ConfidenceInterval,
    /// Mean of the per-replicate differences.
    pub mean: f64,
    pub contains_zero: bool,
}

/// Paired comparison of `a` minus `b` on a shared plan.
pub fn compare(a: &ScoreDistribution, b: &ScoreDistribution, level: f64) -> Result<DifferenceResult, InferenceError> {
    let diffs = paired_difference(a, b)?;
    let delta = a.point.value - b.point.value;
    let ci = percentile_interval(&diffs, level, delta)?;
    Ok(DifferenceResult {
        team_a: a.team.clone(),
        team_b: b.team.clone(),
        delta,
        ci,
        mean: mean(&diffs),
        contains_zero: ci.contains(0.0),
    })
}

/// Best team (by full-dataset score) against each other team, sorted by the
/// bootstrap mean difference ascending.
pub fn differences_from_best(
    set: &BootstrapSet,
    metric: MetricKind,
    level: f64,
) -> Result<Vec<DifferenceResult>, InferenceError> {
    let ranked = ranking(set, metric);
    if ranked.len() < 2 {
        return Err(InferenceError::TooFewTeams(ranked.len()));
    }
    let best = set.get(&ranked[0], metric).expect("ranked team");
    let mut out = ranked[1..]
        .iter()
        .map(|t| compare(best, set.get(t, metric).expect("ranked team"), level))
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|x, y| x.mean.total_cmp(&y.mean).then_with(|| x.team_b.cmp(&y.team_b)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    /// `(exceed + 1) / (b + 1)`
    AddOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValueResult {
    pub p: f64,
    pub b_exceed: usize,
    pub b: usize,
    pub smoothing: Smoothing,
}

impl PValueResult {
    /// Two-sided counterpart, `min(1, 2p)`.
    pub fn two_sided(&self) -> f64 {
        (2.0 * self.p).min(1.0)
    }
}

/// One-sided p-value for "A beats B by `delta`".
///
/// The replicate differences are centred near `delta`, so shifting them to a
/// null centred at zero and asking how often they exceed `delta` is the same
/// as counting replicates strictly above `2 * delta`. The count is smoothed
/// as `(exceed + 1) / (b + 1)`; a zero `delta` gives `p = 1`.
pub fn p_value(diffs: &[f64], delta: f64) -> Result<PValueResult, InferenceError> {
    if delta < 0.0 {
        return Err(InferenceError::NegativeDelta(delta));
    }
    if diffs.is_empty() {
        return Err(InferenceError::EmptyDistribution);
    }
    let threshold = 2.0 * delta;
    let b_exceed = diffs.iter().filter(|&&d| d > threshold).count();
    let b = diffs.len();
    // No observed advantage: nothing to test.
    let p = if delta == 0.0 {
        1.0
    } else {
        (b_exceed + 1) as f64 / (b + 1) as f64
    };
    Ok(PValueResult {
        p,
        b_exceed,
        b,
        smoothing: Smoothing::AddOne,
    })
}

/// Significance marks, loosest to strictest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stars {
    None,
    /// p < .1
    Dagger,
    /// p < .05
    One,
    /// p < .01
    Two,
    /// p < .001
    Three,
}

impl Stars {
    pub fn from_p(p: f64) -> Stars {
        if p < 0.001 {
            Stars::Three
        } else if p < 0.01 {
            Stars::Two
        } else if p < 0.05 {
            Stars::One
        } else if p < 0.1 {
            Stars::Dagger
        } else {
            Stars::None
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::Dagger => "†",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        }
    }

    /// Upper p bound for this mark; `None` has no bound.
    pub fn threshold(self) -> Option<f64> {
        match self {
            Stars::None => None,
            Stars::Dagger => Some(0.1),
            Stars::One => Some(0.05),
            Stars::Two => Some(0.01),
            Stars::Three => Some(0.001),
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarCell {
    /// Index of the lower-ranked (row) team.
    pub row: usize,
    /// Index of the higher-ranked (column) team; always `< row`.
    pub col: usize,
    pub row_team: String,
    pub col_team: String,
    /// `score(col) - score(row)`, non-negative.
    pub delta: f64,
    pub p: PValueResult,
    pub stars: Stars,
}

/// Lower triangle of pairwise comparisons, teams ranked best-first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarMatrix {
    pub metric: MetricKind,
    pub teams: Vec<String>,
    /// Row-major over the lower triangle.
    pub cells: Vec<StarCell>,
}

impl StarMatrix {
    pub fn cell(&self, row: usize, col: usize) -> Option<&StarCell> {
        if col >= row || row >= self.teams.len() {
            return None;
        }
        self.cells.get(row * (row - 1) / 2 + col)
    }

    pub fn cell_by_name(&self, row_team: &str, col_team: &str) -> Option<&StarCell> {
        let row = self.teams.iter().position(|t| t == row_team)?;
        let col = self.teams.iter().position(|t| t == col_team)?;
        self.cell(row, col)
    }
}

/// p-value of the better-ranked `a` over `b` on a shared plan.
pub fn pair_p_value(a: &ScoreDistribution, b: &ScoreDistribution) -> Result<(f64, PValueResult), InferenceError> {
    let diffs = paired_difference(a, b)?;
    // Ties in rank can only produce delta == 0 here; clamp float noise.
    let delta = (a.point.value - b.point.value).max(0.0);
    Ok((delta, p_value(&diffs, delta)?))
}

pub fn star_matrix(set: &BootstrapSet, metric: MetricKind) -> Result<StarMatrix, InferenceError> {
    let teams = ranking(set, metric);
    if teams.len() < 2 {
        return Err(InferenceError::TooFewTeams(teams.len()));
    }
    let dists: Vec<&ScoreDistribution> = teams.iter().map(|t| set.get(t, metric).expect("ranked team")).collect();
    let mut cells = Vec::with_capacity(teams.len() * (teams.len() - 1) / 2);
    for row in 1..teams.len() {
        for col in 0..row {
            let (delta, p) = pair_p_value(dists[col], dists[row])?;
            cells.push(StarCell {
                row,
                col,
                row_team: teams[row].clone(),
                col_team: teams[col].clone(),
                delta,
                p,
                stars: Stars::from_p(p.p),
            });
        }
    }
    Ok(StarMatrix { metric, teams, cells })
}
