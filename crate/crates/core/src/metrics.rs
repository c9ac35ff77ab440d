//! Positive-class confusion counts and the three challenge metrics.
//!
//! Every metric is a function of [`ConfusionCounts`] alone, which is what lets
//! the resampling engine evaluate a replicate by counting rather than by
//! re-comparing label strings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::MetricsError;

/// An opaque class token. Comparison is exact and case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(token: impl Into<String>) -> Result<Self, MetricsError> {
        let token = token.into();
        if token.is_empty() {
            return Err(MetricsError::EmptyLabel);
        }
        Ok(Label(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Counts for one prediction column against gold, positive-vs-rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn gold_positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn predicted_positives(&self) -> u64 {
        self.tp + self.fp
    }

    pub fn score(&self, metric: MetricKind) -> Score {
        score(self, metric)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Precision,
    Recall,
    F1,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Precision, MetricKind::Recall, MetricKind::F1];

    /// Lowercase name used in file names and JSON keys.
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Precision => "precision",
            MetricKind::Recall => "recall",
            MetricKind::F1 => "f1",
        }
    }

    /// Human-facing column title.
    pub fn title(self) -> &'static str {
        match self {
            MetricKind::Precision => "Precision",
            MetricKind::Recall => "Recall",
            MetricKind::F1 => "F1",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "precision" | "p" => Ok(MetricKind::Precision),
            "recall" | "r" => Ok(MetricKind::Recall),
            "f1" | "f" | "f-score" | "fscore" => Ok(MetricKind::F1),
            other => Err(MetricsError::UnknownMetric(other.to_string())),
        }
    }
}

/// A metric value in `[0, 1]`.
///
/// A `0/0` metric is reported as `value = 0.0` with `defined = false`; callers
/// that aggregate scores use the value as-is and count the flag separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub defined: bool,
}

impl Score {
    pub const UNDEFINED: Score = Score {
        value: 0.0,
        defined: false,
    };

    fn ratio(num: u64, den: u64) -> Score {
        if den == 0 {
            Score::UNDEFINED
        } else {
            Score {
                value: num as f64 / den as f64,
                defined: true,
            }
        }
    }
}

/// Tallies `gold` against `pred` with `positive` as the positive class.
pub fn confusion<S: AsRef<str>, T: AsRef<str>>(
    gold: &[S],
    pred: &[T],
    positive: &Label,
) -> Result<ConfusionCounts, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let pos = positive.as_str();
    let mut c = ConfusionCounts::default();
    for (g, p) in gold.iter().zip(pred) {
        match (g.as_ref() == pos, p.as_ref() == pos) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn score(c: &ConfusionCounts, metric: MetricKind) -> Score {
    match metric {
        MetricKind::Precision => Score::ratio(c.tp, c.tp + c.fp),
        MetricKind::Recall => Score::ratio(c.tp, c.tp + c.fn_),
        MetricKind::F1 => {
            let p = Score::ratio(c.tp, c.tp + c.fp);
            let r = Score::ratio(c.tp, c.tp + c.fn_);
            if !p.defined || !r.defined || p.value + r.value == 0.0 {
                Score::UNDEFINED
            } else {
                Score {
                    value: 2.0 * p.value * r.value / (p.value + r.value),
                    defined: true,
                }
            }
        }
    }
}

/// Full-dataset scores keyed by team then metric.
pub type PointEstimates = BTreeMap<String, BTreeMap<MetricKind, Score>>;

pub fn point_estimates(ds: &LabeledDataset) -> PointEstimates {
    ds.teams()
        .map(|(team, _)| {
            let c = ds.confusion(team).expect("team listed by the dataset");
            let scores = MetricKind::ALL.iter().map(|&m| (m, score(&c, m))).collect();
            (team.to_string(), scores)
        })
        .collect()
}

/// Rounds half away from zero to `decimals` places, for display only.
///
/// A tiny relative slack absorbs binary representation error so that values
/// such as `0.71545` (stored as `0.715449999...`) round up as their decimal
/// form says they should.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = x.abs() * scale;
    let rounded = (scaled + 0.5 + scaled * 1e-12).floor() / scale;
    if x < 0.0 && rounded != 0.0 {
        -rounded
    } else {
        rounded
    }
}

/// `round_half_up(x, 4)` rendered with exactly four decimals.
pub fn display4(x: f64) -> String {
    format!("{:.4}", round_half_up(x, 4))
}
