use serde::{Deserialize, Serialize};

use crate::domain::{ClassLabel, ConfusionCounts};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMetric {
    Precision,
    Recall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub metric: TargetMetric,
    pub value: f64,
}

/// LS precision and recall when predicting LS for `score >= threshold`.
/// Undefined precision (no LS predictions) is reported as `None`.
pub fn precision_recall_at(scores: &[f64], truth: &[ClassLabel], threshold: f64) -> (Option<f64>, f64) {
    let mut c = ConfusionCounts::default();
    for (s, t) in scores.iter().zip(truth) {
        let pred = if *s >= threshold { ClassLabel::Ls } else { ClassLabel::Ss };
        c.record(pred, *t);
    }
    let precision = (c.tp + c.fp > 0).then(|| c.tp as f64 / (c.tp + c.fp) as f64);
    let recall = if c.tp + c.fn_ > 0 {
        c.tp as f64 / (c.tp + c.fn_) as f64
    } else {
        0.0
    };
    (precision, recall)
}

/// Scans the distinct scores as candidate thresholds. A recall target
/// returns the largest threshold reaching it; a precision target the
/// smallest.
pub fn calibrate_threshold(scores: &[f64], truth: &[ClassLabel], target: CalibrationTarget) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::invalid("scores and truth differ in length"));
    }
    if scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::invalid("scores must lie in [0,1]"));
    }
    if !truth.iter().any(|t| t.is_ls()) {
        return Err(Error::invalid("calibration needs at least one LS instance"));
    }
    let mut candidates: Vec<f64> = scores.to_vec();
    candidates.sort_by(|a, b| b.total_cmp(a));
    candidates.dedup();
    let metric_at = |t: f64| {
        let (p, r) = precision_recall_at(scores, truth, t);
        match target.metric {
            TargetMetric::Precision => p,
            TargetMetric::Recall => Some(r),
        }
    };
    let feasible = |t: &f64| metric_at(*t).is_some_and(|m| m >= target.value);
    let found = match target.metric {
        // Candidates are descending: first feasible is the largest.
        TargetMetric::Recall => candidates.iter().copied().find(feasible),
        TargetMetric::Precision => candidates.iter().rev().copied().find(feasible),
    };
    found.ok_or_else(|| Error::Unachievable {
        metric: match target.metric {
            TargetMetric::Precision => "precision",
            TargetMetric::Recall => "recall",
        },
        target: target.value,
        best: candidates
            .iter()
            .filter_map(|&t| metric_at(t))
            .fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::{Ls, Ss};

    fn target(metric: TargetMetric, value: f64) -> CalibrationTarget {
        CalibrationTarget { metric, value }
    }

    #[test]
    fn three_point_examples() {
        let s = [0.9, 0.8, 0.2];
        let t = [Ls, Ls, Ss];
        assert_eq!(calibrate_threshold(&s, &t, target(TargetMetric::Recall, 1.0)).unwrap(), 0.8);
        assert_eq!(calibrate_threshold(&s, &t, target(TargetMetric::Precision, 1.0)).unwrap(), 0.8);
    }

    #[test]
    fn exhaustive_scan_agrees() {
        // Oracle: evaluate every candidate and pick by rule.
        let s = [0.95, 0.7, 0.7, 0.6, 0.4, 0.3, 0.1];
        let t = [Ls, Ss, Ls, Ls, Ss, Ls, Ss];
        for v in [0.5, 0.75, 1.0] {
            let mut best_r = None;
            let mut best_p = None;
            for &c in &s {
                let (p, r) = precision_recall_at(&s, &t, c);
                if r >= v && best_r.is_none_or(|b| c > b) {
                    best_r = Some(c);
                }
                if p.is_some_and(|p| p >= v) && best_p.is_none_or(|b| c < b) {
                    best_p = Some(c);
                }
            }
            assert_eq!(calibrate_threshold(&s, &t, target(TargetMetric::Recall, v)).ok(), best_r);
            assert_eq!(calibrate_threshold(&s, &t, target(TargetMetric::Precision, v)).ok(), best_p);
        }
    }

    #[test]
    fn unachievable_reports_best() {
        let s = [0.9, 0.8];
        let t = [Ss, Ls];
        match calibrate_threshold(&s, &t, target(TargetMetric::Precision, 0.9)) {
            Err(Error::Unachievable { best, .. }) => assert_eq!(best, 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
