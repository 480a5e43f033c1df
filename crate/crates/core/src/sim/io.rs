use std::io::{Read, Write};

use serde::Deserialize;

use super::{to_hours, SimPatient, SimTrace};
use crate::domain::ClassLabel;
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct Row {
    encounter_id: String,
    arrival_time: String,
    los_hours: String,
    true_label: String,
    predicted_label: String,
}

fn field<T: std::str::FromStr>(row: usize, name: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Row {
        row,
        message: format!("malformed {name} `{raw}`"),
    })
}

/// Reads `encounter_id,arrival_time,los_hours,true_label,predicted_label`.
pub fn load_sim_patients<R: Read>(source: R) -> Result<Vec<SimPatient>> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    for col in ["encounter_id", "arrival_time", "los_hours", "true_label", "predicted_label"] {
        if !headers.iter().any(|h| h.trim() == col) {
            return Err(Error::MissingColumn(col.into()));
        }
    }
    let mut out = Vec::new();
    for (row, rec) in reader.deserialize::<Row>().enumerate() {
        let rec = rec.map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?;
        out.push(SimPatient {
            encounter_id: rec.encounter_id,
            arrival_time: field(row, "arrival_time", &rec.arrival_time)?,
            los_hours: field(row, "los_hours", &rec.los_hours)?,
            true_label: field::<ClassLabel>(row, "true_label", &rec.true_label)?,
            predicted_label: field::<ClassLabel>(row, "predicted_label", &rec.predicted_label)?,
        });
    }
    Ok(out)
}

pub fn write_sim_patients<W: Write>(sink: W, patients: &[SimPatient]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["encounter_id", "arrival_time", "los_hours", "true_label", "predicted_label"])?;
    for p in patients {
        w.write_record([
            p.encounter_id.clone(),
            format!("{}", p.arrival_time),
            format!("{}", p.los_hours),
            p.true_label.to_string(),
            p.predicted_label.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Audit log as `time,event,patient,unit,bed`.
pub fn write_trace_csv<W: Write>(sink: W, trace: &SimTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["time", "event", "patient", "unit", "bed"])?;
    for r in &trace.records {
        w.write_record([
            format!("{}", to_hours(r.time_us)),
            r.event.as_str().to_string(),
            r.patient.map(|p| trace.patients[p].encounter_id.clone()).unwrap_or_default(),
            r.unit.map(|u| u.as_str().to_string()).unwrap_or_default(),
            r.bed.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
