//! Versioned JSON configs for the CLI commands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::prep::PreprocessConfig;
use crate::classify::{TrainerSpec};
use crate::data::{CohortConfig, CsvSchema};
use crate::domain::{Capacity, Scenario};
use crate::error::{Error, Result};
use crate::eval::{ComparisonMetric, Resampling};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

fn version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

/// Parses `path`; failures name the offending field path.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::config(shown.clone(), e.to_string()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Error::config(format!("{shown}: {field}"), e.into_inner().to_string())
    })
}

pub(crate) fn check_version(found: u32) -> Result<()> {
    if found != CONFIG_SCHEMA_VERSION {
        return Err(Error::config(
            "schema_version",
            format!("expected {CONFIG_SCHEMA_VERSION}, found {found}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Synthetic cohort; regenerated per replication from the master seed.
    Cohort {
        #[serde(default)]
        cohort: CohortConfig,
    },
    /// Encounter CSV.
    Encounters {
        path: PathBuf,
        #[serde(default)]
        schema: CsvSchema,
    },
    /// Simulator input CSV with labels already attached.
    SimPatients { path: PathBuf },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Cohort {
            cohort: CohortConfig::default(),
        }
    }
}

fn half() -> f64 {
    0.5
}

fn default_train_fraction() -> f64 {
    0.7
}

/// How simulated patients get their predicted labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifierSpec {
    /// Keep the labels of a `sim_patients` source.
    Given,
    Perfect,
    Random {
        #[serde(default = "half")]
        p_ls: f64,
    },
    ConfusionNoise {
        fp_rate: f64,
        fn_rate: f64,
    },
    /// Fit on the earliest `train_fraction` of encounters (by triage time),
    /// then simulate the remainder.
    Trained {
        trainer: TrainerSpec,
        #[serde(default = "default_train_fraction")]
        train_fraction: f64,
        #[serde(default)]
        preprocess: PreprocessConfig,
    },
}

impl ClassifierSpec {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, ClassifierSpec::Random { .. } | ClassifierSpec::ConfusionNoise { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let rate = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(format!("classifier.{name}"), format!("{v} outside [0,1]")))
            }
        };
        match self {
            ClassifierSpec::Random { p_ls } => rate("p_ls", *p_ls),
            ClassifierSpec::ConfusionNoise { fp_rate, fn_rate } => {
                rate("fp_rate", *fp_rate)?;
                rate("fn_rate", *fn_rate)
            }
            ClassifierSpec::Trained { train_fraction, .. } if !(*train_fraction > 0.0 && *train_fraction < 1.0) => {
                Err(Error::config("classifier.train_fraction", "must lie in (0,1)"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedClassifier {
    pub name: String,
    pub classifier: ClassifierSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedTrainer {
    pub name: String,
    pub trainer: TrainerSpec,
}

fn default_k() -> usize {
    10
}
fn default_permutations() -> usize {
    1000
}
fn default_mi_bins() -> usize {
    crate::eval::features::DEFAULT_MI_BINS
}
fn default_threshold() -> f64 {
    crate::domain::DEFAULT_LOS_THRESHOLD_HOURS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "version")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: DataSource,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    pub trainers: Vec<NamedTrainer>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub resampling: Resampling,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default)]
    pub ttest_metric: ComparisonMetric,
    #[serde(default = "default_mi_bins")]
    pub mi_bins: usize,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        if self.trainers.is_empty() {
            return Err(Error::config("trainers", "at least one trainer is required"));
        }
        unique_names(self.trainers.iter().map(|t| t.name.as_str()), "trainers")?;
        if self.k < 2 {
            return Err(Error::config("k", "must be at least 2"));
        }
        if matches!(self.data, DataSource::SimPatients { .. }) {
            return Err(Error::config("data.source", "pipeline needs encounters or a cohort"));
        }
        self.preprocess.validate()
    }
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>, field: &str) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for n in names {
        if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.') {
            return Err(Error::config(field, format!("name `{n}` must be non-empty [A-Za-z0-9_.-]")));
        }
        if !seen.insert(n) {
            return Err(Error::config(field, format!("duplicate name `{n}`")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "version")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: DataSource,
    pub classifier: ClassifierSpec,
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default = "default_threshold")]
    pub label_threshold_hours: f64,
    #[serde(default)]
    pub write_trace: bool,
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        self.classifier.validate()?;
        self.scenario.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub gw: Capacity,
    pub ssu: Capacity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySweepConfig {
    #[serde(default = "version")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: DataSource,
    pub classifiers: Vec<NamedClassifier>,
    pub grid: Vec<GridPoint>,
    /// Shared settings; capacities are overridden per grid point.
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default = "default_threshold")]
    pub label_threshold_hours: f64,
}

impl CapacitySweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        if self.grid.is_empty() {
            return Err(Error::config("grid", "must not be empty"));
        }
        if self.classifiers.is_empty() {
            return Err(Error::config("classifiers", "at least one classifier is required"));
        }
        unique_names(self.classifiers.iter().map(|c| c.name.as_str()), "classifiers")?;
        for c in &self.classifiers {
            c.classifier.validate()?;
        }
        self.scenario.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatePair {
    pub fp_rate: f64,
    pub fn_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpFnSweepConfig {
    #[serde(default = "version")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: DataSource,
    pub pairs: Vec<RatePair>,
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default = "default_threshold")]
    pub label_threshold_hours: f64,
}

impl FpFnSweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        if self.pairs.is_empty() {
            return Err(Error::config("pairs", "must not be empty"));
        }
        for p in &self.pairs {
            ClassifierSpec::ConfusionNoise {
                fp_rate: p.fp_rate,
                fn_rate: p.fn_rate,
            }
            .validate()?;
        }
        self.scenario.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummarizeConfig {
    #[serde(default = "version")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: DataSource,
    #[serde(default = "default_threshold")]
    pub label_threshold_hours: f64,
}

impl SummarizeConfig {
    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        if matches!(self.data, DataSource::SimPatients { .. }) {
            return Err(Error::config("data.source", "summarize needs encounters or a cohort"));
        }
        Ok(())
    }
}
