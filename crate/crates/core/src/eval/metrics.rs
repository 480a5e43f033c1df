use serde::{Deserialize, Serialize};

use crate::domain::{ClassLabel, ConfusionCounts};
use crate::error::{Error, Result};

pub fn confusion(pred: &[ClassLabel], truth: &[ClassLabel]) -> Result<ConfusionCounts> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "prediction length {} differs from truth length {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (p, t) in pred.iter().zip(truth) {
        c.record(*p, *t);
    }
    Ok(c)
}

/// Which ratios had a zero denominator and were reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedFlags {
    pub precision_ls: bool,
    pub precision_ss: bool,
    pub recall_ls: bool,
    pub recall_ss: bool,
    pub f1_ls: bool,
    pub f1_ss: bool,
}

impl UndefinedFlags {
    pub fn any(&self) -> bool {
        self.precision_ls || self.precision_ss || self.recall_ls || self.recall_ss || self.f1_ls || self.f1_ss
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision_ls: f64,
    pub precision_ss: f64,
    pub recall_ls: f64,
    pub recall_ss: f64,
    pub f1_ls: f64,
    pub f1_ss: f64,
    pub f1_weighted: f64,
    pub counts: ConfusionCounts,
    pub undefined: UndefinedFlags,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn f1(p: f64, r: f64) -> (f64, bool) {
    if p + r == 0.0 {
        (0.0, true)
    } else {
        (2.0 * p * r / (p + r), false)
    }
}

/// Positive-class precision, recall and F1 for `c`.
fn positive_metrics(c: &ConfusionCounts) -> [(f64, bool); 3] {
    let p = ratio(c.tp, c.tp + c.fp);
    let r = ratio(c.tp, c.tp + c.fn_);
    [p, r, f1(p.0, r.0)]
}

pub fn metric_report(counts: ConfusionCounts) -> Result<MetricReport> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::invalid("metric_report needs at least one prediction"));
    }
    let [p_ls, r_ls, f_ls] = positive_metrics(&counts);
    let [p_ss, r_ss, f_ss] = positive_metrics(&counts.swapped());
    let support_ls = (counts.tp + counts.fn_) as f64;
    let support_ss = (counts.tn + counts.fp) as f64;
    Ok(MetricReport {
        accuracy: (counts.tp + counts.tn) as f64 / total as f64,
        precision_ls: p_ls.0,
        precision_ss: p_ss.0,
        recall_ls: r_ls.0,
        recall_ss: r_ss.0,
        f1_ls: f_ls.0,
        f1_ss: f_ss.0,
        f1_weighted: (support_ls * f_ls.0 + support_ss * f_ss.0) / total as f64,
        counts,
        undefined: UndefinedFlags {
            precision_ls: p_ls.1,
            precision_ss: p_ss.1,
            recall_ls: r_ls.1,
            recall_ss: r_ss.1,
            f1_ls: f_ls.1,
            f1_ss: f_ss.1,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::{Ls, Ss};

    #[test]
    fn counts_examples() {
        assert_eq!(confusion(&[Ls, Ls, Ss], &[Ls, Ls, Ss]).unwrap(), ConfusionCounts::new(2, 1, 0, 0));
        assert_eq!(confusion(&[Ss, Ss, Ls], &[Ls, Ls, Ss]).unwrap(), ConfusionCounts::new(0, 0, 1, 2));
        assert!(confusion(&[Ls], &[]).is_err());
    }

    #[test]
    fn perfect_counts() {
        let r = metric_report(ConfusionCounts::new(4, 4, 0, 0)).unwrap();
        for v in [r.accuracy, r.precision_ls, r.precision_ss, r.recall_ls, r.recall_ss, r.f1_ls, r.f1_ss, r.f1_weighted] {
            assert_eq!(v, 1.0);
        }
        assert!(!r.undefined.any());
    }

    #[test]
    fn equal_precision_recall_half() {
        let r = metric_report(ConfusionCounts::new(1, 1, 1, 1)).unwrap();
        assert_eq!(r.f1_ls, 0.5);
    }

    #[test]
    fn zero_denominator_flagged() {
        let r = metric_report(ConfusionCounts::new(0, 5, 0, 3)).unwrap();
        assert_eq!(r.precision_ls, 0.0);
        assert!(r.undefined.precision_ls);
        assert!(r.undefined.f1_ls);
        assert!(!r.undefined.recall_ls);
        assert!(metric_report(ConfusionCounts::default()).is_err());
    }
}
