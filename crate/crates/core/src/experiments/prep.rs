//! Fit-on-train preprocessing chain turning an encounter table into a
//! numeric dataset.

use serde::{Deserialize, Serialize};

use crate::data::preprocess::categorical_columns;
use crate::data::{
    count_rare_tests, drop_correlated, drop_sparse_features, Dataset, EncounterTable, EngineerConfig, FeatureEngineer,
    Imputer, OneHotEncoder,
};
use crate::error::{Error, Result};

pub const RARE_TEST_FEATURE: &str = "rare_test_count";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Features missing in at least this share of training rows are dropped
    /// and folded into a single presence count.
    pub missing_threshold: f64,
    pub correlation_threshold: Option<f64>,
    pub engineer: bool,
    pub engineer_config: EngineerConfig,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            missing_threshold: 0.75,
            correlation_threshold: Some(0.9),
            engineer: true,
            engineer_config: EngineerConfig::default(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.missing_threshold) {
            return Err(Error::config("preprocess.missing_threshold", "must lie in [0,1]"));
        }
        if let Some(r) = self.correlation_threshold {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::config("preprocess.correlation_threshold", "must lie in (0,1]"));
            }
        }
        Ok(())
    }
}

/// Every statistic frozen from the fit table.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    engineer: Option<FeatureEngineer>,
    sparse: Vec<String>,
    imputer: Imputer,
    encoder: OneHotEncoder,
    correlated: Vec<String>,
}

impl FittedPipeline {
    pub fn fit(train: &EncounterTable, cfg: &PreprocessConfig) -> Result<Self> {
        cfg.validate()?;
        let engineer = cfg
            .engineer
            .then(|| FeatureEngineer::fit(train, cfg.engineer_config.clone()));
        let table = match &engineer {
            Some(e) => e.apply(train.clone())?,
            None => train.clone(),
        };
        let (kept, sparse) = drop_sparse_features(table.clone(), cfg.missing_threshold)?;
        let kept = count_rare_tests(kept, &table, &sparse, RARE_TEST_FEATURE)?;
        let imputer = Imputer::fit(&kept)?;
        let kept = imputer.apply(kept)?;
        let encoder = OneHotEncoder::fit(&kept, &categorical_columns(&kept))?;
        let kept = encoder.apply(kept)?;
        let correlated = match cfg.correlation_threshold {
            Some(r) => drop_correlated(kept, r)?.1,
            None => Vec::new(),
        };
        Ok(Self {
            engineer,
            sparse,
            imputer,
            encoder,
            correlated,
        })
    }

    pub fn transform(&self, table: &EncounterTable) -> Result<EncounterTable> {
        let table = match &self.engineer {
            Some(e) => e.apply(table.clone())?,
            None => table.clone(),
        };
        let kept = table.clone().without_columns(&self.sparse);
        let kept = count_rare_tests(kept, &table, &self.sparse, RARE_TEST_FEATURE)?;
        let kept = self.imputer.apply(kept)?;
        let kept = self.encoder.apply(kept)?;
        Ok(kept.without_columns(&self.correlated))
    }

    pub fn dataset(&self, table: &EncounterTable, threshold_hours: f64) -> Result<Dataset> {
        self.transform(table)?.to_dataset(threshold_hours)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_cohort, CohortConfig};

    #[test]
    fn train_and_test_share_columns() {
        let t = generate_cohort(&CohortConfig {
            n_patients: 300,
            seed: 4,
            ..CohortConfig::default()
        })
        .unwrap();
        let train = t.select_rows(&(0..200).collect::<Vec<_>>());
        let test = t.select_rows(&(200..300).collect::<Vec<_>>());
        let p = FittedPipeline::fit(&train, &PreprocessConfig::default()).unwrap();
        let a = p.dataset(&train, 72.0).unwrap();
        let b = p.dataset(&test, 72.0).unwrap();
        assert_eq!(a.feature_names, b.feature_names);
        assert!(a.x.iter().chain(&b.x).flatten().all(|v| v.is_finite()));
        let loose = PreprocessConfig {
            correlation_threshold: None,
            ..PreprocessConfig::default()
        };
        let names = FittedPipeline::fit(&train, &loose).unwrap().dataset(&test, 72.0).unwrap().feature_names;
        assert!(names.iter().any(|n| n == RARE_TEST_FEATURE));
    }
}
