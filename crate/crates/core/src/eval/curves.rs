use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::ClassLabel;
use crate::error::{Error, Result};
use crate::stats::average_ranks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Roc,
    Pr,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Roc => "roc",
            CurveKind::Pr => "pr",
        }
    }
}

/// One operating point. For ROC `x` is FPR and `y` TPR; for PR `x` is
/// recall and `y` precision. `defined` is false when `y` had a zero
/// denominator (reported as 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub x: f64,
    pub y: f64,
    pub defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoints {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
}

/// Cumulative (tp, fp) after admitting each distinct score, highest first.
/// The leading entry is the empty prediction at threshold +inf.
fn sweep(scores: &[f64], truth: &[ClassLabel]) -> Result<Vec<(f64, u64, u64)>> {
    if scores.len() != truth.len() {
        return Err(Error::invalid("scores and truth differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = vec![(f64::INFINITY, 0, 0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]].is_ls() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push((s, tp, fp));
    }
    Ok(out)
}

fn class_totals(truth: &[ClassLabel]) -> (u64, u64) {
    let pos = truth.iter().filter(|t| t.is_ls()).count() as u64;
    (pos, truth.len() as u64 - pos)
}

pub fn roc_curve(scores: &[f64], truth: &[ClassLabel]) -> Result<CurvePoints> {
    let (pos, neg) = class_totals(truth);
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("ROC needs both LS and SS instances"));
    }
    let points = sweep(scores, truth)?
        .into_iter()
        .map(|(threshold, tp, fp)| CurvePoint {
            threshold,
            x: fp as f64 / neg as f64,
            y: tp as f64 / pos as f64,
            defined: true,
        })
        .collect();
    Ok(CurvePoints { kind: CurveKind::Roc, points })
}

pub fn pr_curve(scores: &[f64], truth: &[ClassLabel]) -> Result<CurvePoints> {
    let (pos, _) = class_totals(truth);
    if pos == 0 {
        return Err(Error::invalid("PR curve needs at least one LS instance"));
    }
    let points = sweep(scores, truth)?
        .into_iter()
        .map(|(threshold, tp, fp)| {
            let predicted = tp + fp;
            CurvePoint {
                threshold,
                x: tp as f64 / pos as f64,
                y: if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 },
                defined: predicted > 0,
            }
        })
        .collect();
    Ok(CurvePoints { kind: CurveKind::Pr, points })
}

/// Trapezoidal area over the defined points, in sweep order.
pub fn auc(curve: &CurvePoints) -> f64 {
    let pts: Vec<&CurvePoint> = curve.points.iter().filter(|p| p.defined).collect();
    pts.windows(2)
        .map(|w| (w[1].x - w[0].x) * (w[0].y + w[1].y) * 0.5)
        .sum()
}

/// ROC AUC as the Mann-Whitney concordance with ties counted 1/2.
pub fn auc_rank(scores: &[f64], truth: &[ClassLabel]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::invalid("scores and truth differ in length"));
    }
    let (pos, neg) = class_totals(truth);
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("AUC needs both LS and SS instances"));
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(truth).filter(|(_, t)| t.is_ls()).map(|(r, _)| r).sum();
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Writes `threshold,x,y`; an undefined `y` is left empty.
pub fn write_curve_csv<W: Write>(sink: W, curve: &CurvePoints) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["threshold", "x", "y"])?;
    for p in &curve.points {
        let y = if p.defined { format!("{}", p.y) } else { String::new() };
        w.write_record([format!("{}", p.threshold), format!("{}", p.x), y])?;
    }
    w.flush()?;
    Ok(())
}
