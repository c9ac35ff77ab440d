//! Shared with-replacement resample plans and per-replicate metric evaluation.
//!
//! Row `r` of a plan is drawn from a ChaCha8 stream keyed by `(seed, r)`, so a
//! row can be regenerated in isolation and replicates can be evaluated in any
//! order on any number of threads without changing a single output bit.
//! Every team is scored on the same row for a given replicate; that shared
//! row is what makes per-replicate differences between teams meaningful.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::ResampleError;
use crate::metrics::{score, ConfusionCounts, MetricKind, Score};

pub const DEFAULT_REPLICATES: usize = 10_000;

/// `b` rows of `n` indices drawn uniformly from `[0, n)`.
///
/// The indices are not stored; [`ResamplePlan::row`] regenerates any row on
/// demand and always yields the same values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResamplePlan {
    n: usize,
    b: usize,
    seed: u64,
}

pub fn make_plan(n: usize, b: usize, seed: u64) -> ResamplePlan {
    ResamplePlan::new(n, b, seed)
}

impl ResamplePlan {
    /// # Panics
    ///
    /// If `n` or `b` is zero.
    pub fn new(n: usize, b: usize, seed: u64) -> Self {
        assert!(n >= 1, "resample plan needs n >= 1");
        assert!(b >= 1, "resample plan needs b >= 1");
        ResamplePlan { n, b, seed }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn row_rng(&self, r: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(r as u64);
        rng
    }

    /// Overwrites `buf` with row `r`.
    pub fn fill_row(&self, r: usize, buf: &mut Vec<usize>) {
        assert!(r < self.b, "replicate {r} out of range for b={}", self.b);
        let mut rng = self.row_rng(r);
        let n = self.n;
        buf.clear();
        buf.extend((0..n).map(|_| rng.random_range(0..n)));
    }

    pub fn row(&self, r: usize) -> Vec<usize> {
        let mut buf = Vec::with_capacity(self.n);
        self.fill_row(r, &mut buf);
        buf
    }

    /// All rows, materialized. Only sensible for small plans.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.b).map(|r| self.row(r)).collect()
    }

    /// Evaluates `f(r, row_r)` for every replicate, in parallel on the current
    /// rayon pool, returning results in replicate order.
    pub fn map_replicates<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &[usize]) -> T + Sync + Send,
    {
        (0..self.b)
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(self.n),
                |buf, r| {
                    self.fill_row(r, buf);
                    f(r, buf)
                },
            )
            .collect()
    }
}

/// Bootstrap scores of one team on one metric, indexed by replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub team: String,
    pub metric: MetricKind,
    /// Full-dataset score.
    pub point: Score,
    pub values: Vec<f64>,
    /// Replicates where the metric was 0/0 and recorded as 0.
    pub degenerate_count: usize,
    pub plan: ResamplePlan,
}

impl ScoreDistribution {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    fn from_scores(
        team: &str,
        metric: MetricKind,
        point: Score,
        scores: impl Iterator<Item = Score>,
        plan: ResamplePlan,
    ) -> Self {
        let mut degenerate_count = 0;
        let values = scores
            .map(|s| {
                if !s.defined {
                    degenerate_count += 1;
                }
                s.value
            })
            .collect();
        ScoreDistribution {
            team: team.to_string(),
            metric,
            point,
            values,
            degenerate_count,
            plan,
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Per-example outcome codes for every team, example-major, so one pass over
/// a resample row tallies all teams at once.
///
/// Code layout: bit 1 = gold positive, bit 0 = predicted positive.
struct OutcomeTable {
    k: usize,
    codes: Vec<u8>,
}

impl OutcomeTable {
    fn new(ds: &LabeledDataset, teams: &[&str]) -> Self {
        let pos = ds.positive().as_str();
        let k = teams.len();
        let cols: Vec<&[String]> = teams.iter().map(|t| ds.predictions(t).expect("known team")).collect();
        let mut codes = Vec::with_capacity(ds.len() * k);
        for (i, g) in ds.gold().iter().enumerate() {
            let gold_bit = if g == pos { 2u8 } else { 0 };
            codes.extend(cols.iter().map(|c| gold_bit | (c[i] == pos) as u8));
        }
        OutcomeTable { k, codes }
    }

    fn tally(&self, row: &[usize]) -> Vec<ConfusionCounts> {
        let mut cells = vec![[0u64; 4]; self.k];
        for &i in row {
            let codes = &self.codes[i * self.k..(i + 1) * self.k];
            for (cell, &code) in cells.iter_mut().zip(codes) {
                cell[code as usize] += 1;
            }
        }
        cells
            .into_iter()
            .map(|c| ConfusionCounts {
                tn: c[0],
                fp: c[1],
                fn_: c[2],
                tp: c[3],
            })
            .collect()
    }
}

fn check_plan(ds: &LabeledDataset, plan: &ResamplePlan) -> Result<(), ResampleError> {
    if plan.n != ds.len() {
        return Err(ResampleError::SizeMismatch {
            plan: plan.n,
            dataset: ds.len(),
        });
    }
    Ok(())
}

/// Confusion counts of every listed team on every replicate: `[replicate][team]`.
pub fn replicate_counts(
    ds: &LabeledDataset,
    teams: &[&str],
    plan: &ResamplePlan,
) -> Result<Vec<Vec<ConfusionCounts>>, ResampleError> {
    check_plan(ds, plan)?;
    if let Some(t) = teams.iter().find(|t| ds.predictions(t).is_none()) {
        return Err(ResampleError::UnknownTeam(t.to_string()));
    }
    let table = OutcomeTable::new(ds, teams);
    Ok(plan.map_replicates(|_, row| table.tally(row)))
}

pub fn distribution(
    ds: &LabeledDataset,
    team: &str,
    metric: MetricKind,
    plan: &ResamplePlan,
) -> Result<ScoreDistribution, ResampleError> {
    let counts = replicate_counts(ds, &[team], plan)?;
    let point = score(&ds.confusion(team).expect("checked"), metric);
    Ok(ScoreDistribution::from_scores(
        team,
        metric,
        point,
        counts.iter().map(|c| score(&c[0], metric)),
        *plan,
    ))
}

/// Element-wise `a - b` over replicates.
pub fn paired_difference(a: &ScoreDistribution, b: &ScoreDistribution) -> Result<Vec<f64>, ResampleError> {
    if a.plan != b.plan || a.values.len() != b.values.len() {
        return Err(ResampleError::PlanMismatch);
    }
    if a.metric != b.metric {
        return Err(ResampleError::MetricMismatch);
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect())
}

/// Every team's distributions for a set of metrics, all on one plan.
#[derive(Debug, Clone)]
pub struct BootstrapSet {
    plan: ResamplePlan,
    teams: Vec<String>,
    counts: Vec<ConfusionCounts>,
    metrics: Vec<MetricKind>,
    /// `[team][metric]`, metrics in the order of `self.metrics`.
    dists: Vec<Vec<ScoreDistribution>>,
}

impl BootstrapSet {
    /// Scores all teams of `ds` on every replicate of `plan`.
    pub fn compute(ds: &LabeledDataset, plan: &ResamplePlan, metrics: &[MetricKind]) -> Result<Self, ResampleError> {
        let names = ds.team_names();
        let per_rep = replicate_counts(ds, &names, plan)?;
        let mut metrics_sorted = metrics.to_vec();
        metrics_sorted.sort();
        metrics_sorted.dedup();
        let counts: Vec<ConfusionCounts> = names.iter().map(|t| ds.confusion(t).expect("known")).collect();
        let dists = names
            .iter()
            .enumerate()
            .map(|(ti, team)| {
                metrics_sorted
                    .iter()
                    .map(|&m| {
                        ScoreDistribution::from_scores(
                            team,
                            m,
                            score(&counts[ti], m),
                            per_rep.iter().map(|rep| score(&rep[ti], m)),
                            *plan,
                        )
                    })
                    .collect()
            })
            .collect();
        Ok(BootstrapSet {
            plan: *plan,
            teams: names.into_iter().map(str::to_string).collect(),
            counts,
            metrics: metrics_sorted,
            dists,
        })
    }

    pub fn plan(&self) -> &ResamplePlan {
        &self.plan
    }

    /// Team names in dataset column order.
    pub fn teams(&self) -> &[String] {
        &self.teams
    }

    pub fn metrics(&self) -> &[MetricKind] {
        &self.metrics
    }

    pub fn counts(&self, team: &str) -> Option<ConfusionCounts> {
        self.team_index(team).map(|i| self.counts[i])
    }

    fn team_index(&self, team: &str) -> Option<usize> {
        self.teams.iter().position(|t| t == team)
    }

    pub fn get(&self, team: &str, metric: MetricKind) -> Option<&ScoreDistribution> {
        let ti = self.team_index(team)?;
        let mi = self.metrics.iter().position(|&m| m == metric)?;
        Some(&self.dists[ti][mi])
    }

    pub fn point(&self, team: &str, metric: MetricKind) -> Option<Score> {
        self.get(team, metric).map(|d| d.point)
    }

    /// Distributions for one metric in team column order.
    pub fn for_metric(&self, metric: MetricKind) -> Vec<&ScoreDistribution> {
        match self.metrics.iter().position(|&m| m == metric) {
            Some(mi) => self.dists.iter().map(|d| &d[mi]).collect(),
            None => Vec::new(),
        }
    }
}
