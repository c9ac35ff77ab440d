//! Paired bootstrap comparison of shared-task submissions.
//!
//! Given one gold-standard column and one prediction column per team, the
//! crate computes precision, recall and F1 for the positive class, resamples
//! the examples with replacement on a plan shared by every team, and turns
//! the resulting score distributions into percentile intervals, intervals of
//! differences from the best team, shifted-null p-values and a pairwise
//! significance matrix. Reports are written as JSON, CSV, LaTeX and SVG.

pub mod analysis;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod inference;
pub mod metrics;
pub mod report;
pub mod resample;
mod svg;

pub use analysis::{analyze, Analysis, AnalysisConfig};
pub use dataset::{load, reconstruct, LabeledDataset, LoadConfig, ReconstructionSpec, TeamCounts};
pub use error::{DatasetError, InferenceError, MetricsError, ReportError, ResampleError};
pub use inference::{
    differences_from_best, ordered_intervals, overlap, p_value, percentile_ci, star_matrix, ConfidenceInterval,
    DifferenceResult, PValueResult, StarMatrix, Stars,
};
pub use metrics::{confusion, point_estimates, score, ConfusionCounts, Label, MetricKind, Score};
pub use report::{emit_all, emit_difference_plot, emit_histogram, emit_interval_plot, emit_tables, ComparisonReport};
pub use resample::{distribution, make_plan, paired_difference, BootstrapSet, ResamplePlan, ScoreDistribution};
pub use svg::freedman_diaconis_bins;
