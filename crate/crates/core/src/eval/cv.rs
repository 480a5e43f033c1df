use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::curves::auc_rank;
use super::metrics::{confusion, metric_report, MetricReport};
use crate::classify::{ScoreInput, TrainerSpec};
use crate::data::{smote, undersample, Dataset};
use crate::domain::ClassLabel;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::stats::{mean, sample_std};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resampling {
    #[default]
    None,
    Undersample,
    Smote { k: usize },
}

impl Resampling {
    pub fn apply(self, train: &Dataset, seed: u64) -> Result<Dataset> {
        match self {
            Resampling::None => Ok(train.clone()),
            Resampling::Undersample => undersample(train, seed),
            Resampling::Smote { k } => smote(train, k, seed),
        }
    }
}

/// Test-row indices for each of `k` stratified folds. Each class is
/// shuffled and dealt round-robin, continuing the fold cursor across
/// classes so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[ClassLabel], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    let (mut ls, mut ss): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i].is_ls());
    let smallest = ls.len().min(ss.len());
    if k > smallest {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the smaller class count {smallest}; every fold needs both classes"
        )));
    }
    let mut rng = rng_from_seed(seed);
    ss.shuffle(&mut rng);
    ls.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (pos, row) in ss.into_iter().chain(ls).enumerate() {
        folds[pos % k].push(row);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Complement of `test` within `0..n`.
pub(crate) fn train_rows(n: usize, test: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    test.iter().for_each(|&i| mask[i] = false);
    (0..n).filter(|&i| mask[i]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub threshold: f64,
    pub report: MetricReport,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub folds: Vec<FoldResult>,
    /// Each row's score from the fold in which it was held out.
    pub oof_scores: Vec<f64>,
    pub mean: BTreeMap<String, f64>,
    pub std: BTreeMap<String, f64>,
}

type FoldColumn = (&'static str, fn(&FoldResult) -> f64);

impl CvSummary {
    fn from_folds(folds: Vec<FoldResult>, oof_scores: Vec<f64>) -> Self {
        let columns: [FoldColumn; 9] = [
            ("accuracy", |f| f.report.accuracy),
            ("precision_ls", |f| f.report.precision_ls),
            ("precision_ss", |f| f.report.precision_ss),
            ("recall_ls", |f| f.report.recall_ls),
            ("recall_ss", |f| f.report.recall_ss),
            ("f1_ls", |f| f.report.f1_ls),
            ("f1_ss", |f| f.report.f1_ss),
            ("f1_weighted", |f| f.report.f1_weighted),
            ("auc", |f| f.auc),
        ];
        let mut m = BTreeMap::new();
        let mut s = BTreeMap::new();
        for (name, get) in columns {
            let vals: Vec<f64> = folds.iter().map(get).collect();
            m.insert(name.to_string(), mean(&vals).unwrap_or(0.0));
            s.insert(name.to_string(), sample_std(&vals).unwrap_or(0.0));
        }
        Self {
            folds,
            oof_scores,
            mean: m,
            std: s,
        }
    }
}

pub(crate) struct Evaluation {
    pub threshold: f64,
    pub report: MetricReport,
    pub auc: f64,
    pub scores: Vec<f64>,
}

/// Trains on `train` and measures on `test`.
pub(crate) fn fit_and_evaluate(trainer: &TrainerSpec, train: &Dataset, test: &Dataset, seed: u64) -> Result<Evaluation> {
    let clf = trainer.fit(train, seed)?;
    let input = ScoreInput::from_dataset(test);
    let scores = clf.score(&input)?;
    let pred: Vec<ClassLabel> = scores.iter().map(|&s| clf.label_for(s)).collect();
    let report = metric_report(confusion(&pred, &test.y)?)?;
    Ok(Evaluation {
        threshold: clf.threshold,
        report,
        auc: auc_rank(&scores, &test.y)?,
        scores,
    })
}

/// Stratified k-fold cross-validation; resampling touches training folds only.
pub fn kfold_cv(trainer: &TrainerSpec, data: &Dataset, k: usize, seed: u64, resampling: Resampling) -> Result<CvSummary> {
    let folds = stratified_folds(&data.y, k, derive_seed(seed, "cv/folds"))?;
    let mut results = Vec::with_capacity(k);
    let mut oof = vec![0.0; data.len()];
    for (i, test_rows) in folds.iter().enumerate() {
        let train = data.select(&train_rows(data.len(), test_rows));
        let train = resampling.apply(&train, derive_seed(seed, &format!("cv/fold{i}/resample")))?;
        let test = data.select(test_rows);
        let e = fit_and_evaluate(trainer, &train, &test, derive_seed(seed, &format!("cv/fold{i}/model")))?;
        for (&row, &s) in test_rows.iter().zip(&e.scores) {
            oof[row] = s;
        }
        results.push(FoldResult {
            fold: i,
            threshold: e.threshold,
            report: e.report,
            auc: e.auc,
        });
    }
    Ok(CvSummary::from_folds(results, oof))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ModelSpec;
    use ClassLabel::{Ls, Ss};

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<ClassLabel> = (0..53).map(|i| if i % 3 == 0 { Ss } else { Ls }).collect();
        let folds = stratified_folds(&labels, 5, 9).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..53).collect::<Vec<_>>());
        for f in &folds {
            assert!(f.iter().any(|&i| labels[i].is_ls()) && f.iter().any(|&i| !labels[i].is_ls()));
        }
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn too_many_folds() {
        let labels = vec![Ls, Ls, Ls, Ss, Ss];
        assert!(stratified_folds(&labels, 3, 0).is_err());
        assert!(stratified_folds(&labels, 2, 0).is_ok());
        assert!(stratified_folds(&labels, 1, 0).is_err());
    }

    #[test]
    fn perfect_scores_one_everywhere() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let y: Vec<ClassLabel> = (0..40).map(|i| if i % 4 == 0 { Ss } else { Ls }).collect();
        let d = Dataset::from_rows(x, y).unwrap();
        for resampling in [Resampling::None, Resampling::Undersample] {
            let s = kfold_cv(&TrainerSpec::new(ModelSpec::Perfect), &d, 5, 3, resampling).unwrap();
            assert!(s.folds.iter().all(|f| f.report.f1_weighted == 1.0 && f.auc == 1.0));
            assert_eq!(s.std["f1_weighted"], 0.0);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let x: Vec<Vec<f64>> = (0..60).map(|i| vec![(i as f64 * 0.37).sin(), (i % 7) as f64]).collect();
        let y: Vec<ClassLabel> = (0..60).map(|i| if (i * 5) % 9 < 5 { Ls } else { Ss }).collect();
        let d = Dataset::from_rows(x, y).unwrap();
        let t = TrainerSpec::new(ModelSpec::Lda { regularization: None });
        let a = kfold_cv(&t, &d, 4, 11, Resampling::Smote { k: 3 }).unwrap();
        let b = kfold_cv(&t, &d, 4, 11, Resampling::Smote { k: 3 }).unwrap();
        assert_eq!(a, b);
    }
}
