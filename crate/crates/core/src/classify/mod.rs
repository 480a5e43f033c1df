//! LS/SS score models and thresholded classifiers.
//!
//! Every model emits a score in [0,1] read as `P(LS)`. A
//! [`CalibratedClassifier`] predicts LS iff `score >= threshold`.

pub mod calibrate;
pub mod external;
pub mod lda;
pub mod logistic;
pub mod spec;

use serde::{Deserialize, Serialize};

pub use calibrate::{calibrate_threshold, CalibrationTarget, TargetMetric};
pub use external::{load_external_predictions, write_predictions, ExternalScores};
pub use lda::{train_lda, LdaModel};
pub use logistic::{train_logistic, LogisticHyper, LogisticModel, Standardizer};
pub use spec::{ModelSpec, ThresholdRule, TrainerSpec};

use crate::data::Dataset;
use crate::domain::ClassLabel;
use crate::error::{Error, Result};
use crate::seed::keyed_uniform;

/// What a model may look at when scoring a batch of encounters.
#[derive(Debug, Clone, Copy)]
pub struct ScoreInput<'a> {
    pub ids: &'a [String],
    pub features: Option<&'a [Vec<f64>]>,
    pub truth: Option<&'a [ClassLabel]>,
}

impl<'a> ScoreInput<'a> {
    pub fn from_dataset(d: &'a Dataset) -> Self {
        Self {
            ids: &d.ids,
            features: Some(&d.x),
            truth: Some(&d.y),
        }
    }

    fn features(&self) -> Result<&'a [Vec<f64>]> {
        let f = self
            .features
            .ok_or_else(|| Error::invalid("this model needs feature vectors"))?;
        if f.len() != self.ids.len() {
            return Err(Error::invalid("feature rows and ids differ in length"));
        }
        Ok(f)
    }

    fn truth(&self) -> Result<&'a [ClassLabel]> {
        let t = self
            .truth
            .ok_or_else(|| Error::invalid("this model needs ground-truth labels"))?;
        if t.len() != self.ids.len() {
            return Err(Error::invalid("truth labels and ids differ in length"));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreModel {
    Logistic(LogisticModel),
    Lda(LdaModel),
    /// 1.0 for true LS, 0.0 for true SS.
    Perfect,
    /// Independent Bernoulli(p_ls) labels, fixed per encounter and seed.
    Random { p_ls: f64, seed: u64 },
    /// Truth with SS flipped at `fp_rate` and LS flipped at `fn_rate`.
    ConfusionNoise { fp_rate: f64, fn_rate: f64, seed: u64 },
    External(ExternalScores),
}

impl ScoreModel {
    pub fn kind(&self) -> &'static str {
        match self {
            ScoreModel::Logistic(_) => "logistic",
            ScoreModel::Lda(_) => "lda",
            ScoreModel::Perfect => "perfect",
            ScoreModel::Random { .. } => "random",
            ScoreModel::ConfusionNoise { .. } => "confusion_noise",
            ScoreModel::External(_) => "external",
        }
    }

    pub fn score(&self, input: &ScoreInput<'_>) -> Result<Vec<f64>> {
        match self {
            ScoreModel::Logistic(m) => Ok(input.features()?.iter().map(|r| m.score(r)).collect()),
            ScoreModel::Lda(m) => m.score_rows(input.features()?),
            ScoreModel::Perfect => Ok(input.truth()?.iter().map(|t| t.indicator()).collect()),
            ScoreModel::Random { p_ls, seed } => Ok(input
                .ids
                .iter()
                .map(|id| if keyed_uniform(*seed, id) < *p_ls { 1.0 } else { 0.0 })
                .collect()),
            ScoreModel::ConfusionNoise { fp_rate, fn_rate, seed } => {
                let truth = input.truth()?;
                Ok(input
                    .ids
                    .iter()
                    .zip(truth)
                    .map(|(id, t)| {
                        let rate = if t.is_ls() { fn_rate } else { fp_rate };
                        let label = if keyed_uniform(*seed, id) < *rate { t.flipped() } else { *t };
                        label.indicator()
                    })
                    .collect())
            }
            ScoreModel::External(m) => input.ids.iter().map(|id| m.get(id)).collect(),
        }
    }

    /// Restores derived state after deserialisation.
    pub fn prepare(&mut self) -> Result<()> {
        if let ScoreModel::Lda(m) = self {
            m.prepare()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedClassifier {
    pub model: ScoreModel,
    pub threshold: f64,
}

impl CalibratedClassifier {
    pub fn new(model: ScoreModel, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::invalid(format!("threshold {threshold} outside [0,1]")));
        }
        Ok(Self { model, threshold })
    }

    pub fn label_for(&self, score: f64) -> ClassLabel {
        if score >= self.threshold {
            ClassLabel::Ls
        } else {
            ClassLabel::Ss
        }
    }

    pub fn score(&self, input: &ScoreInput<'_>) -> Result<Vec<f64>> {
        self.model.score(input)
    }

    pub fn predict(&self, input: &ScoreInput<'_>) -> Result<Vec<ClassLabel>> {
        Ok(self.score(input)?.into_iter().map(|s| self.label_for(s)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut c: Self = serde_json::from_str(text)?;
        c.model.prepare()?;
        Self::new(c.model, c.threshold)
    }
}

pub fn perfect_classifier() -> CalibratedClassifier {
    CalibratedClassifier {
        model: ScoreModel::Perfect,
        threshold: 0.5,
    }
}

pub fn random_classifier(p_ls: f64, seed: u64) -> Result<CalibratedClassifier> {
    if !(0.0..=1.0).contains(&p_ls) {
        return Err(Error::invalid(format!("p_ls {p_ls} outside [0,1]")));
    }
    CalibratedClassifier::new(ScoreModel::Random { p_ls, seed }, 0.5)
}

pub fn confusion_noise_classifier(fp_rate: f64, fn_rate: f64, seed: u64) -> Result<CalibratedClassifier> {
    for (name, r) in [("fp_rate", fp_rate), ("fn_rate", fn_rate)] {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid(format!("{name} {r} outside [0,1]")));
        }
    }
    CalibratedClassifier::new(ScoreModel::ConfusionNoise { fp_rate, fn_rate, seed }, 0.5)
}
