//! Discrete-event patient-flow simulation across the general ward (GW),
//! short stay unit (SSU) and waiting area (WA).
//!
//! Times are kept internally as integer micro-hours so that residency
//! identities such as "SSU stay = transfer threshold" hold exactly.

pub mod engine;
pub mod io;
pub mod report;
pub mod trace;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use engine::{run_simulation, Departure, PatientHistory, SimOutcome, Stay};
pub use io::{load_sim_patients, write_sim_patients, write_trace_csv};
pub use report::{build_report, SimReport};
pub use trace::{
    occupancy_statistics, wait_time_statistics, OccupancyStats, SimTrace, TraceEvent, TracePatient, TraceRecord,
    UnitOccupancy, WaitStats,
};

use crate::domain::ClassLabel;

pub const MICROS_PER_HOUR: i64 = 1_000_000;

pub fn to_micros(hours: f64) -> i64 {
    (hours * MICROS_PER_HOUR as f64).round() as i64
}

pub fn to_hours(micros: i64) -> f64 {
    micros as f64 / MICROS_PER_HOUR as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "GW")]
    Gw,
    #[serde(rename = "SSU")]
    Ssu,
    #[serde(rename = "WA")]
    Wa,
}

impl Unit {
    pub const ALL: [Unit; 3] = [Unit::Gw, Unit::Ssu, Unit::Wa];

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Gw => "GW",
            Unit::Ssu => "SSU",
            Unit::Wa => "WA",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One patient as handed to the simulator; classification already applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPatient {
    pub encounter_id: String,
    pub arrival_time: f64,
    pub los_hours: f64,
    pub true_label: ClassLabel,
    pub predicted_label: ClassLabel,
}
