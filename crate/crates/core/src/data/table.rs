use std::collections::{BTreeMap, HashMap};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::domain::{label_from_los, ClassLabel, Encounter, FeatureValue};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    pub missing_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub meta: FeatureMeta,
    pub values: Vec<FeatureValue>,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: FeatureKind, values: Vec<FeatureValue>) -> Self {
        let mut col = Column {
            meta: FeatureMeta {
                name: name.into(),
                kind,
                missing_ratio: 0.0,
            },
            values,
        };
        col.refresh_missing_ratio();
        col
    }

    /// Kind is numeric when every non-missing cell is numeric.
    pub fn inferred(name: impl Into<String>, values: Vec<FeatureValue>) -> Self {
        let numeric = values
            .iter()
            .all(|v| matches!(v, FeatureValue::Numeric(_) | FeatureValue::Missing));
        let kind = if numeric {
            FeatureKind::Numeric
        } else {
            FeatureKind::Categorical
        };
        let values = if numeric {
            values
        } else {
            values
                .into_iter()
                .map(|v| match v {
                    FeatureValue::Numeric(x) => FeatureValue::Categorical(format!("{x}")),
                    other => other,
                })
                .collect()
        };
        Column::new(name, kind, values)
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_missing()).count()
    }

    pub fn refresh_missing_ratio(&mut self) {
        self.meta.missing_ratio = if self.values.is_empty() {
            0.0
        } else {
            self.missing_count() as f64 / self.values.len() as f64
        };
    }

    pub fn numeric_values(&self) -> Vec<Option<f64>> {
        self.values.iter().map(FeatureValue::as_f64).collect()
    }
}

/// The fixed (non-feature) part of an encounter row.
#[derive(Debug, Clone, PartialEq)]
pub struct EncounterRecord {
    pub encounter_id: String,
    pub patient_hash: String,
    pub triage_time: f64,
    pub admit_decision_time: f64,
    pub los_hours: f64,
}

/// Columnar collection of encounters. All rows share one feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct EncounterTable {
    pub records: Vec<EncounterRecord>,
    pub columns: Vec<Column>,
    /// Calendar instant corresponding to hour 0.
    pub epoch: NaiveDateTime,
}

pub fn default_epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(1970, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid epoch")
}

impl EncounterTable {
    pub fn new(records: Vec<EncounterRecord>, columns: Vec<Column>, epoch: NaiveDateTime) -> Result<Self> {
        let n = records.len();
        for col in &columns {
            if col.values.len() != n {
                return Err(Error::invalid(format!(
                    "column `{}` has {} values for {} rows",
                    col.name(),
                    col.values.len(),
                    n
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for col in &columns {
            if !seen.insert(col.name().to_string()) {
                return Err(Error::invalid(format!("duplicate feature `{}`", col.name())));
            }
        }
        Ok(Self {
            records,
            columns,
            epoch,
        })
    }

    /// Builds a table from row values; rows missing a feature get `Missing`.
    pub fn from_encounters(encounters: Vec<Encounter>) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for e in &encounters {
            e.validate()?;
            for name in e.features.keys() {
                if !index.contains_key(name) {
                    index.insert(name.clone(), names.len());
                    names.push(name.clone());
                }
            }
        }
        let mut cols: Vec<Vec<FeatureValue>> = vec![Vec::with_capacity(encounters.len()); names.len()];
        let mut records = Vec::with_capacity(encounters.len());
        for e in encounters {
            for (j, name) in names.iter().enumerate() {
                cols[j].push(e.features.get(name).cloned().unwrap_or(FeatureValue::Missing));
            }
            records.push(EncounterRecord {
                encounter_id: e.encounter_id,
                patient_hash: e.patient_hash,
                triage_time: e.triage_time,
                admit_decision_time: e.admit_decision_time,
                los_hours: e.los_hours,
            });
        }
        let columns = names
            .into_iter()
            .zip(cols)
            .map(|(n, v)| Column::inferred(n, v))
            .collect();
        Self::new(records, columns, default_epoch())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.meta.name.clone()).collect()
    }

    pub fn feature_meta(&self) -> Vec<FeatureMeta> {
        self.columns.iter().map(|c| c.meta.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.meta.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.meta.name == name)
    }

    pub fn push_column(&mut self, column: Column) -> Result<()> {
        if column.values.len() != self.len() {
            return Err(Error::invalid(format!(
                "column `{}` length {} does not match {} rows",
                column.name(),
                column.values.len(),
                self.len()
            )));
        }
        if self.column_index(column.name()).is_some() {
            return Err(Error::invalid(format!("duplicate feature `{}`", column.name())));
        }
        self.columns.push(column);
        Ok(())
    }

    /// Removes the named columns; unknown names are ignored.
    pub fn without_columns(mut self, names: &[String]) -> Self {
        self.columns.retain(|c| !names.contains(&c.meta.name));
        self
    }

    pub fn encounter(&self, row: usize) -> Encounter {
        let r = &self.records[row];
        let features: BTreeMap<String, FeatureValue> = self
            .columns
            .iter()
            .map(|c| (c.meta.name.clone(), c.values[row].clone()))
            .collect();
        Encounter {
            encounter_id: r.encounter_id.clone(),
            patient_hash: r.patient_hash.clone(),
            triage_time: r.triage_time,
            admit_decision_time: r.admit_decision_time,
            los_hours: r.los_hours,
            features,
        }
    }

    /// Subset of rows in the given order; missing ratios are recomputed.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let records = rows.iter().map(|&i| self.records[i].clone()).collect();
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut col = Column {
                    meta: c.meta.clone(),
                    values: rows.iter().map(|&i| c.values[i].clone()).collect(),
                };
                col.refresh_missing_ratio();
                col
            })
            .collect();
        Self {
            records,
            columns,
            epoch: self.epoch,
        }
    }

    pub fn labels(&self, threshold_hours: f64) -> Result<Vec<ClassLabel>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                label_from_los(r.los_hours, threshold_hours).map_err(|e| Error::Row {
                    row: i,
                    message: e.to_string(),
                })
            })
            .collect()
    }

    /// Numeric design matrix over every feature. Fails on categorical or
    /// missing cells (encode and impute first).
    pub fn to_dataset(&self, threshold_hours: f64) -> Result<Dataset> {
        let labels = self.labels(threshold_hours)?;
        let mut x = vec![Vec::with_capacity(self.columns.len()); self.len()];
        for col in &self.columns {
            if col.meta.kind != FeatureKind::Numeric {
                return Err(Error::data(format!(
                    "feature `{}` is categorical; one-hot encode it first",
                    col.name()
                )));
            }
            for (row, v) in col.values.iter().enumerate() {
                match v {
                    FeatureValue::Numeric(val) => x[row].push(*val),
                    _ => {
                        return Err(Error::data(format!(
                            "feature `{}` has a missing value at row {row}; impute first",
                            col.name()
                        )))
                    }
                }
            }
        }
        Ok(Dataset {
            ids: self.records.iter().map(|r| r.encounter_id.clone()).collect(),
            feature_names: self.feature_names(),
            x,
            y: labels,
        })
    }
}

/// Dense numeric design matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<ClassLabel>,
}

impl Dataset {
    pub fn new(ids: Vec<String>, feature_names: Vec<String>, x: Vec<Vec<f64>>, y: Vec<ClassLabel>) -> Result<Self> {
        if ids.len() != x.len() || x.len() != y.len() {
            return Err(Error::invalid("ids, rows and labels must have equal length"));
        }
        if x.iter().any(|r| r.len() != feature_names.len()) {
            return Err(Error::invalid("row width does not match feature count"));
        }
        Ok(Self {
            ids,
            feature_names,
            x,
            y,
        })
    }

    /// Rows without ids; ids become the row index.
    pub fn from_rows(x: Vec<Vec<f64>>, y: Vec<ClassLabel>) -> Result<Self> {
        let d = x.first().map_or(0, Vec::len);
        let ids = (0..x.len()).map(|i| i.to_string()).collect();
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Self::new(ids, names, x, y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let ls = self.y.iter().filter(|l| l.is_ls()).count();
        (ls, self.y.len() - ls)
    }
}
