//! Scores produced outside this crate, keyed by encounter id.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExternalScores {
    pub scores: BTreeMap<String, f64>,
}

impl ExternalScores {
    pub fn get(&self, encounter_id: &str) -> Result<f64> {
        self.scores
            .get(encounter_id)
            .copied()
            .ok_or_else(|| Error::data(format!("no external score for encounter `{encounter_id}`")))
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Deserialize)]
struct Row {
    encounter_id: String,
    score: String,
}

/// Reads `encounter_id,score` rows; scores must lie in [0,1] and ids be unique.
pub fn load_external_predictions<R: Read>(source: R) -> Result<ExternalScores> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    for col in ["encounter_id", "score"] {
        if !headers.iter().any(|h| h.trim() == col) {
            return Err(Error::MissingColumn(col.into()));
        }
    }
    let mut scores = BTreeMap::new();
    for (row, rec) in reader.deserialize::<Row>().enumerate() {
        let rec = rec.map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?;
        let score: f64 = rec.score.trim().parse().map_err(|_| Error::Row {
            row,
            message: format!("malformed score `{}`", rec.score),
        })?;
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Row {
                row,
                message: format!("score {score} outside [0,1]"),
            });
        }
        if scores.insert(rec.encounter_id.clone(), score).is_some() {
            return Err(Error::Row {
                row,
                message: format!("duplicate encounter_id `{}`", rec.encounter_id),
            });
        }
    }
    Ok(ExternalScores { scores })
}

pub fn write_predictions<W: Write>(sink: W, ids: &[String], scores: &[f64]) -> Result<()> {
    if ids.len() != scores.len() {
        return Err(Error::invalid("ids and scores differ in length"));
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["encounter_id", "score"])?;
    for (id, s) in ids.iter().zip(scores) {
        w.write_record([id.as_str(), &format!("{s}")])?;
    }
    w.flush()?;
    Ok(())
}
