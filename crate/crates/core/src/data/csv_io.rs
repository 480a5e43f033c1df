//! Encounter CSV ingestion and export.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::table::{default_epoch, Column, EncounterRecord, EncounterTable, FeatureKind};
use crate::domain::FeatureValue;
use crate::error::{Error, Result};

/// How timestamp cells are written.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFormat {
    /// Real hours from the schema epoch.
    #[default]
    Hours,
    /// ISO-8601 date-times, converted to hours from the schema epoch.
    Iso8601,
}

/// Column mapping for the required fields plus timestamp handling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvSchema {
    pub encounter_id: String,
    pub patient_hash: String,
    pub triage_time: String,
    pub admit_decision_time: String,
    pub los_hours: String,
    pub time_format: TimeFormat,
    pub epoch: NaiveDateTime,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            encounter_id: "encounter_id".into(),
            patient_hash: "patient_hash".into(),
            triage_time: "triage_time".into(),
            admit_decision_time: "admit_decision_time".into(),
            los_hours: "los_hours".into(),
            time_format: TimeFormat::Hours,
            epoch: default_epoch(),
        }
    }
}

const MISSING_TOKENS: &[&str] = &["", "NA", "N/A", "NaN", "nan", "null", "NULL", "?"];

fn is_missing_token(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell.trim())
}

fn parse_time(cell: &str, schema: &CsvSchema) -> Option<f64> {
    let cell = cell.trim();
    match schema.time_format {
        TimeFormat::Hours => cell.parse::<f64>().ok().filter(|v| v.is_finite()),
        TimeFormat::Iso8601 => {
            let parsed = DateTime::parse_from_rfc3339(cell)
                .map(|d| d.naive_utc())
                .or_else(|_| NaiveDateTime::parse_from_str(cell, "%Y-%m-%dT%H:%M:%S%.f"))
                .or_else(|_| NaiveDateTime::parse_from_str(cell, "%Y-%m-%d %H:%M:%S%.f"))
                .or_else(|_| NaiveDateTime::parse_from_str(cell, "%Y-%m-%dT%H:%M"))
                .ok()?;
            let delta = parsed - schema.epoch;
            Some(delta.num_milliseconds() as f64 / 3_600_000.0)
        }
    }
}

/// Reads an encounter CSV. Every non-required column becomes a feature.
pub fn load_encounters<R: Read>(source: R, schema: &CsvSchema) -> Result<EncounterTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let id_col = find(&schema.encounter_id)?;
    let patient_col = find(&schema.patient_hash)?;
    let triage_col = find(&schema.triage_time)?;
    let admit_col = find(&schema.admit_decision_time)?;
    let los_col = find(&schema.los_hours)?;
    let required = [id_col, patient_col, triage_col, admit_col, los_col];
    let feature_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !required.contains(i))
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect();

    let mut records = Vec::new();
    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); feature_cols.len()];
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?;
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let row_err = |field: &str, value: &str| Error::Row {
            row,
            message: format!("malformed {field} `{value}`"),
        };
        let encounter_id = cell(id_col).trim().to_string();
        if encounter_id.is_empty() {
            return Err(row_err("encounter_id", ""));
        }
        let triage_time = parse_time(cell(triage_col), schema)
            .ok_or_else(|| row_err("triage_time", cell(triage_col)))?;
        let admit_decision_time = parse_time(cell(admit_col), schema)
            .ok_or_else(|| row_err("admit_decision_time", cell(admit_col)))?;
        let los_hours = cell(los_col)
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v > 0.0)
            .ok_or_else(|| row_err("los_hours", cell(los_col)))?;
        if admit_decision_time < triage_time {
            return Err(Error::Row {
                row,
                message: "admit_decision_time precedes triage_time".into(),
            });
        }
        records.push(EncounterRecord {
            encounter_id,
            patient_hash: cell(patient_col).trim().to_string(),
            triage_time,
            admit_decision_time,
            los_hours,
        });
        for (j, (i, _)) in feature_cols.iter().enumerate() {
            let c = cell(*i);
            raw[j].push(if is_missing_token(c) {
                None
            } else {
                Some(c.trim().to_string())
            });
        }
    }

    let columns = feature_cols
        .into_iter()
        .zip(raw)
        .map(|((_, name), cells)| {
            let numeric = cells
                .iter()
                .flatten()
                .all(|c| c.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false));
            if numeric {
                let values = cells
                    .into_iter()
                    .map(|c| match c {
                        Some(c) => FeatureValue::Numeric(c.parse().expect("checked numeric")),
                        None => FeatureValue::Missing,
                    })
                    .collect();
                Column::new(name, FeatureKind::Numeric, values)
            } else {
                let values = cells
                    .into_iter()
                    .map(|c| c.map_or(FeatureValue::Missing, FeatureValue::Categorical))
                    .collect();
                Column::new(name, FeatureKind::Categorical, values)
            }
        })
        .collect();
    EncounterTable::new(records, columns, schema.epoch)
}

fn fmt_value(v: &FeatureValue) -> String {
    match v {
        FeatureValue::Numeric(x) => format!("{x}"),
        FeatureValue::Categorical(c) => c.clone(),
        FeatureValue::Missing => String::new(),
    }
}

/// Writes the table with hour-valued timestamps (the default schema).
pub fn write_encounters<W: Write>(table: &EncounterTable, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec![
        "encounter_id".to_string(),
        "patient_hash".into(),
        "triage_time".into(),
        "admit_decision_time".into(),
        "los_hours".into(),
    ];
    header.extend(table.feature_names());
    w.write_record(&header)?;
    for (i, r) in table.records.iter().enumerate() {
        let mut row = vec![
            r.encounter_id.clone(),
            r.patient_hash.clone(),
            format!("{}", r.triage_time),
            format!("{}", r.admit_decision_time),
            format!("{}", r.los_hours),
        ];
        row.extend(table.columns.iter().map(|c| fmt_value(&c.values[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
