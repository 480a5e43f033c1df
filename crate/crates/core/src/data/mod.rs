//! Encounter ingestion, preprocessing, resampling and synthetic cohorts.

pub mod cohort;
pub mod csv_io;
pub mod engineer;
pub mod preprocess;
pub mod resample;
pub mod table;

pub use cohort::{generate_cohort, CohortConfig, LosDistribution};
pub use csv_io::{load_encounters, write_encounters, CsvSchema, TimeFormat};
pub use engineer::{engineer_features, EngineerConfig, FeatureEngineer};
pub use preprocess::{
    count_rare_tests, drop_correlated, drop_sparse_features, impute, one_hot_encode, temporal_split, Imputer,
    OneHotEncoder,
};
pub use resample::{smote, undersample, undersample_indices, undersample_table};
pub use table::{Column, Dataset, EncounterRecord, EncounterTable, FeatureKind, FeatureMeta};
