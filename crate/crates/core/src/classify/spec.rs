//! Declarative trainer descriptions used by cross-validation, the
//! statistical tests and the experiment configs.

use std::fs::File;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{
    calibrate_threshold, load_external_predictions, train_lda, train_logistic, CalibratedClassifier,
    CalibrationTarget, LogisticHyper, ScoreInput, ScoreModel, TargetMetric,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Logistic {
        #[serde(default)]
        hyper: LogisticHyper,
    },
    Lda {
        #[serde(default)]
        regularization: Option<f64>,
    },
    Perfect,
    Random {
        #[serde(default = "half")]
        p_ls: f64,
    },
    ConfusionNoise {
        fp_rate: f64,
        fn_rate: f64,
    },
    External {
        path: PathBuf,
    },
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdRule {
    Fixed { value: f64 },
    /// Smallest training-data threshold reaching this LS precision.
    Precision { value: f64 },
    /// Largest training-data threshold reaching this LS recall.
    Recall { value: f64 },
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Fixed { value: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerSpec {
    pub model: ModelSpec,
    #[serde(default)]
    pub threshold: ThresholdRule,
}

impl TrainerSpec {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            threshold: ThresholdRule::default(),
        }
    }

    pub fn with_threshold(mut self, rule: ThresholdRule) -> Self {
        self.threshold = rule;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.model {
            ModelSpec::Logistic { .. } => "logistic",
            ModelSpec::Lda { .. } => "lda",
            ModelSpec::Perfect => "perfect",
            ModelSpec::Random { .. } => "random",
            ModelSpec::ConfusionNoise { .. } => "confusion_noise",
            ModelSpec::External { .. } => "external",
        }
    }

    /// Builds the score model, then picks the threshold on `train` only.
    pub fn fit(&self, train: &Dataset, seed: u64) -> Result<CalibratedClassifier> {
        let model = match &self.model {
            ModelSpec::Logistic { hyper } => ScoreModel::Logistic(train_logistic(&train.x, &train.y, hyper)?),
            ModelSpec::Lda { regularization } => ScoreModel::Lda(train_lda(&train.x, &train.y, *regularization)?),
            ModelSpec::Perfect => ScoreModel::Perfect,
            ModelSpec::Random { p_ls } => ScoreModel::Random {
                p_ls: *p_ls,
                seed: derive_seed(seed, "classifier/random"),
            },
            ModelSpec::ConfusionNoise { fp_rate, fn_rate } => ScoreModel::ConfusionNoise {
                fp_rate: *fp_rate,
                fn_rate: *fn_rate,
                seed: derive_seed(seed, "classifier/confusion_noise"),
            },
            ModelSpec::External { path } => {
                let file = File::open(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
                ScoreModel::External(load_external_predictions(file)?)
            }
        };
        let threshold = match self.threshold {
            ThresholdRule::Fixed { value } => value,
            ThresholdRule::Precision { value } | ThresholdRule::Recall { value } => {
                let metric = if matches!(self.threshold, ThresholdRule::Precision { .. }) {
                    TargetMetric::Precision
                } else {
                    TargetMetric::Recall
                };
                let scores = model.score(&ScoreInput::from_dataset(train))?;
                calibrate_threshold(&scores, &train.y, CalibrationTarget { metric, value })?
            }
        };
        CalibratedClassifier::new(model, threshold)
    }
}
