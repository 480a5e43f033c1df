//! Engineered features computed from information available before each
//! row's admission decision.
//!
//! Column conventions: lab results are numeric features prefixed `lab_`,
//! vital signs are prefixed `vit_`, systolic blood pressure readings are
//! prefixed `vit_sbp`, inpatient diagnoses are prefixed `diag_`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Datelike, Duration, Weekday};
use serde::{Deserialize, Serialize};

use super::table::{Column, EncounterTable, FeatureKind};
use crate::domain::FeatureValue;
use crate::error::Result;
use crate::stats::percentile_linear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineerConfig {
    pub lab_prefix: String,
    pub vital_prefix: String,
    pub bp_prefix: String,
    pub diag_prefix: String,
    /// Systolic reading above this counts as high. Not a clinical standard
    /// baked into the method; tune per site.
    pub bp_high_cutoff: f64,
    /// Systolic reading below this counts as low.
    pub bp_low_cutoff: f64,
    pub lab_percentile: f64,
}

impl Default for EngineerConfig {
    fn default() -> Self {
        Self {
            lab_prefix: "lab_".into(),
            vital_prefix: "vit_".into(),
            bp_prefix: "vit_sbp".into(),
            diag_prefix: "diag_".into(),
            bp_high_cutoff: 140.0,
            bp_low_cutoff: 90.0,
            lab_percentile: 0.75,
        }
    }
}

/// Feature engineering with lab reference percentiles frozen from a fit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEngineer {
    pub config: EngineerConfig,
    pub lab_reference: BTreeMap<String, f64>,
}

pub const ENGINEERED_FEATURES: &[&str] = &[
    "triage_dayofweek",
    "wait_time_to_admit",
    "vit_current_visit_vital_test_count",
    "previous_encounter_count",
    "previous_encounter_most_recent_los",
    "previous_lab_test_count",
    "previous_lab_test_uniq_count",
    "previous_ip_diag_count",
    "outlier_lab_result_with_percentile_75",
    "vit_total_bp_count",
    "vit_high_bp_count",
    "vit_low_bp_count",
];

fn weekday_name(d: Weekday) -> &'static str {
    match d {
        Weekday::Mon => "mon",
        Weekday::Tue => "tue",
        Weekday::Wed => "wed",
        Weekday::Thu => "thu",
        Weekday::Fri => "fri",
        Weekday::Sat => "sat",
        Weekday::Sun => "sun",
    }
}

fn present(v: &FeatureValue) -> bool {
    match v {
        FeatureValue::Numeric(x) => *x != 0.0,
        FeatureValue::Categorical(_) => true,
        FeatureValue::Missing => false,
    }
}

impl FeatureEngineer {
    /// Freezes the lab percentile reference from `train`.
    pub fn fit(train: &EncounterTable, config: EngineerConfig) -> Self {
        let mut lab_reference = BTreeMap::new();
        for col in &train.columns {
            if col.meta.kind != FeatureKind::Numeric || !col.meta.name.starts_with(&config.lab_prefix) {
                continue;
            }
            let mut observed: Vec<f64> = col.values.iter().filter_map(FeatureValue::as_f64).collect();
            observed.sort_by(f64::total_cmp);
            if let Some(p) = percentile_linear(&observed, config.lab_percentile) {
                lab_reference.insert(col.meta.name.clone(), p);
            }
        }
        Self { config, lab_reference }
    }

    pub fn apply(&self, table: EncounterTable) -> Result<EncounterTable> {
        let n = table.len();
        let cfg = &self.config;
        let by_prefix = |p: &str| -> Vec<usize> {
            table
                .columns
                .iter()
                .enumerate()
                .filter(|(_, c)| {
                    c.meta.name.starts_with(p) && !ENGINEERED_FEATURES.contains(&c.meta.name.as_str())
                })
                .map(|(i, _)| i)
                .collect()
        };
        let lab_cols: Vec<usize> = by_prefix(&cfg.lab_prefix)
            .into_iter()
            .filter(|&i| table.columns[i].meta.kind == FeatureKind::Numeric)
            .collect();
        let vital_cols = by_prefix(&cfg.vital_prefix);
        let bp_cols: Vec<usize> = by_prefix(&cfg.bp_prefix)
            .into_iter()
            .filter(|&i| table.columns[i].meta.kind == FeatureKind::Numeric)
            .collect();
        let diag_cols = by_prefix(&cfg.diag_prefix);

        let cell = |col: usize, row: usize| &table.columns[col].values[row];

        // Encounters grouped by patient, in triage order.
        let mut by_patient: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, r) in table.records.iter().enumerate() {
            by_patient.entry(r.patient_hash.as_str()).or_default().push(i);
        }
        for rows in by_patient.values_mut() {
            rows.sort_by(|&a, &b| {
                let ra = &table.records[a];
                let rb = &table.records[b];
                ra.triage_time.total_cmp(&rb.triage_time).then(a.cmp(&b))
            });
        }

        let mut out: BTreeMap<&str, Vec<FeatureValue>> = ENGINEERED_FEATURES
            .iter()
            .map(|&name| (name, Vec::with_capacity(n)))
            .collect();
        let mut push = |name: &'static str, v: FeatureValue| out.get_mut(name).expect("known").push(v);

        for row in 0..n {
            let rec = &table.records[row];
            let when = table.epoch + Duration::milliseconds((rec.triage_time * 3_600_000.0).round() as i64);
            push(
                "triage_dayofweek",
                FeatureValue::Categorical(weekday_name(when.weekday()).to_string()),
            );
            push(
                "wait_time_to_admit",
                FeatureValue::Numeric(rec.admit_decision_time - rec.triage_time),
            );
            let vitals = vital_cols.iter().filter(|&&c| !cell(c, row).is_missing()).count();
            push("vit_current_visit_vital_test_count", FeatureValue::Numeric(vitals as f64));

            // Earlier encounters already discharged at this admission decision.
            let history: Vec<usize> = by_patient[rec.patient_hash.as_str()]
                .iter()
                .copied()
                .filter(|&j| {
                    let r = &table.records[j];
                    j != row && r.admit_decision_time + r.los_hours <= rec.admit_decision_time
                })
                .collect();
            push("previous_encounter_count", FeatureValue::Numeric(history.len() as f64));
            let most_recent = history.iter().copied().max_by(|&a, &b| {
                let ra = &table.records[a];
                let rb = &table.records[b];
                (ra.admit_decision_time + ra.los_hours)
                    .total_cmp(&(rb.admit_decision_time + rb.los_hours))
                    .then(a.cmp(&b))
            });
            push(
                "previous_encounter_most_recent_los",
                most_recent.map_or(FeatureValue::Missing, |j| FeatureValue::Numeric(table.records[j].los_hours)),
            );
            let mut lab_count = 0usize;
            let mut lab_names = BTreeSet::new();
            let mut diag_count = 0usize;
            for &j in &history {
                for &c in &lab_cols {
                    if !cell(c, j).is_missing() {
                        lab_count += 1;
                        lab_names.insert(c);
                    }
                }
                diag_count += diag_cols.iter().filter(|&&c| present(cell(c, j))).count();
            }
            push("previous_lab_test_count", FeatureValue::Numeric(lab_count as f64));
            push("previous_lab_test_uniq_count", FeatureValue::Numeric(lab_names.len() as f64));
            push("previous_ip_diag_count", FeatureValue::Numeric(diag_count as f64));

            let outliers = lab_cols
                .iter()
                .filter(|&&c| {
                    let name = &table.columns[c].meta.name;
                    match (cell(c, row).as_f64(), self.lab_reference.get(name)) {
                        (Some(v), Some(p)) => v > *p,
                        _ => false,
                    }
                })
                .count();
            push("outlier_lab_result_with_percentile_75", FeatureValue::Numeric(outliers as f64));

            let readings: Vec<f64> = bp_cols.iter().filter_map(|&c| cell(c, row).as_f64()).collect();
            push("vit_total_bp_count", FeatureValue::Numeric(readings.len() as f64));
            push(
                "vit_high_bp_count",
                FeatureValue::Numeric(readings.iter().filter(|&&v| v > cfg.bp_high_cutoff).count() as f64),
            );
            push(
                "vit_low_bp_count",
                FeatureValue::Numeric(readings.iter().filter(|&&v| v < cfg.bp_low_cutoff).count() as f64),
            );
        }

        let mut table = table;
        for &name in ENGINEERED_FEATURES {
            let values = out.remove(name).expect("known");
            let kind = if name == "triage_dayofweek" {
                FeatureKind::Categorical
            } else {
                FeatureKind::Numeric
            };
            if let Some(idx) = table.column_index(name) {
                table.columns.remove(idx);
            }
            table.push_column(Column::new(name, kind, values))?;
        }
        Ok(table)
    }
}

/// Fits the lab reference on `table` itself and applies it.
pub fn engineer_features(table: EncounterTable) -> Result<EncounterTable> {
    let eng = FeatureEngineer::fit(&table, EngineerConfig::default());
    eng.apply(table)
}
