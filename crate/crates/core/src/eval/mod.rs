//! Measurement: confusion metrics, curves, cross-validation, paired
//! model-comparison tests and univariate feature scoring.

pub mod curves;
pub mod cv;
pub mod features;
pub mod metrics;

pub use curves::{auc, auc_rank, pr_curve, roc_curve, write_curve_csv, CurveKind, CurvePoint, CurvePoints};
pub use cv::{kfold_cv, stratified_folds, CvSummary, FoldResult, Resampling};
pub use features::{ensemble_rank, feature_scores, FeatureScoreTable, FeatureScores, RankedFeature, Scorer};
pub use metrics::{confusion, metric_report, MetricReport, UndefinedFlags};
pub use stat_tests::{paired_5x2_ttest, roc_permutation_test, ComparisonMetric, TTestResult};
