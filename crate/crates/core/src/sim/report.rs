use serde::{Deserialize, Serialize};

use super::engine::{Departure, SimOutcome};
use super::to_hours;
use super::trace::{occupancy_statistics, wait_time_statistics, TraceEvent};
use super::Unit;
use crate::domain::ClassLabel;
use crate::error::Result;

/// Keys follow the row names of the reference result tables; rows that do
/// not apply (infinite capacity, empty cell) serialise as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    #[serde(rename = "total sterilization count")]
    pub total_sterilizations: u64,
    #[serde(rename = "GW sterilization count")]
    pub gw_sterilizations: u64,
    #[serde(rename = "SSU sterilization count")]
    pub ssu_sterilizations: u64,
    #[serde(rename = "WA sterilization count")]
    pub wa_sterilizations: u64,
    #[serde(rename = "avg. wait time for GW bed (hr)")]
    pub avg_wait_gw: Option<f64>,
    #[serde(rename = "avg. LS patient time in GW (hr)")]
    pub ls_time_gw: Option<f64>,
    #[serde(rename = "avg. LS patient time in SSU (hr)")]
    pub ls_time_ssu: Option<f64>,
    #[serde(rename = "avg. SS patient time in GW (hr)")]
    pub ss_time_gw: Option<f64>,
    #[serde(rename = "avg. SS patient time in SSU (hr)")]
    pub ss_time_ssu: Option<f64>,
    #[serde(rename = "max. # of patients in GW")]
    pub max_gw: u64,
    #[serde(rename = "max. # of patients in SSU")]
    pub max_ssu: u64,
    #[serde(rename = "max. # of patients in WA")]
    pub max_wa: u64,
    #[serde(rename = "avg. # of patients in GW")]
    pub avg_gw: f64,
    #[serde(rename = "avg. # of patients in SSU")]
    pub avg_ssu: f64,
    #[serde(rename = "avg. # of patients in WA")]
    pub avg_wa: f64,
    #[serde(rename = "GW ≥ 90% utilization rate")]
    pub gw_high_utilization: Option<f64>,
    #[serde(rename = "SSU ≥ 90% utilization rate")]
    pub ssu_high_utilization: Option<f64>,
    #[serde(rename = "LS misclassification count")]
    pub ls_misclassified: u64,
    #[serde(rename = "SS misclassification count")]
    pub ss_misclassified: u64,
    pub patients: u64,
    pub discharged_from_gw: u64,
    pub discharged_from_ssu: u64,
    pub wa_discharge_count: u64,
    pub in_system_at_horizon: u64,
    pub not_arrived_by_horizon: u64,
    pub gw_entries: u64,
    pub window_start_hr: f64,
    pub window_end_hr: f64,
}

impl SimReport {
    /// Every numeric field in a fixed order, keyed by its snake_case name.
    pub fn metrics(&self) -> Vec<(&'static str, Option<f64>)> {
        let c = |v: u64| Some(v as f64);
        vec![
            ("total_sterilizations", c(self.total_sterilizations)),
            ("gw_sterilizations", c(self.gw_sterilizations)),
            ("ssu_sterilizations", c(self.ssu_sterilizations)),
            ("wa_sterilizations", c(self.wa_sterilizations)),
            ("avg_wait_gw", self.avg_wait_gw),
            ("ls_time_gw", self.ls_time_gw),
            ("ls_time_ssu", self.ls_time_ssu),
            ("ss_time_gw", self.ss_time_gw),
            ("ss_time_ssu", self.ss_time_ssu),
            ("max_gw", c(self.max_gw)),
            ("max_ssu", c(self.max_ssu)),
            ("max_wa", c(self.max_wa)),
            ("avg_gw", Some(self.avg_gw)),
            ("avg_ssu", Some(self.avg_ssu)),
            ("avg_wa", Some(self.avg_wa)),
            ("gw_high_utilization", self.gw_high_utilization),
            ("ssu_high_utilization", self.ssu_high_utilization),
            ("ls_misclassified", c(self.ls_misclassified)),
            ("ss_misclassified", c(self.ss_misclassified)),
            ("wa_discharge_count", c(self.wa_discharge_count)),
            ("in_system_at_horizon", c(self.in_system_at_horizon)),
        ]
    }
}

pub fn build_report(outcome: &SimOutcome) -> Result<SimReport> {
    let trace = &outcome.trace;
    let occ = occupancy_statistics(trace)?;
    let waits = wait_time_statistics(trace);
    let steril = |u: Unit| trace.count(TraceEvent::Vacate, Some(u));
    let departed = |d: Departure| outcome.patients.iter().filter(|p| p.departure == d).count() as u64;
    let arrived = outcome.patients.iter().filter(|p| p.departure != Departure::NotArrived);
    let (mut ls_mis, mut ss_mis) = (0, 0);
    for p in arrived {
        match (p.true_label, p.predicted_label) {
            (ClassLabel::Ls, ClassLabel::Ss) => ls_mis += 1,
            (ClassLabel::Ss, ClassLabel::Ls) => ss_mis += 1,
            _ => {}
        }
    }
    let (gw, ssu, wa) = (steril(Unit::Gw), steril(Unit::Ssu), steril(Unit::Wa));
    Ok(SimReport {
        total_sterilizations: gw + ssu + wa,
        gw_sterilizations: gw,
        ssu_sterilizations: ssu,
        wa_sterilizations: wa,
        avg_wait_gw: waits.avg_wait_gw,
        ls_time_gw: waits.ls_time_gw,
        ls_time_ssu: waits.ls_time_ssu,
        ss_time_gw: waits.ss_time_gw,
        ss_time_ssu: waits.ss_time_ssu,
        max_gw: occ.gw.max_count,
        max_ssu: occ.ssu.max_count,
        max_wa: occ.wa.max_count,
        avg_gw: occ.gw.time_avg_count,
        avg_ssu: occ.ssu.time_avg_count,
        avg_wa: occ.wa.time_avg_count,
        gw_high_utilization: occ.gw.high_utilization_rate,
        ssu_high_utilization: occ.ssu.high_utilization_rate,
        ls_misclassified: ls_mis,
        ss_misclassified: ss_mis,
        patients: outcome.patients.len() as u64,
        discharged_from_gw: departed(Departure::Gw),
        discharged_from_ssu: departed(Departure::Ssu),
        wa_discharge_count: departed(Departure::Wa),
        in_system_at_horizon: departed(Departure::InSystem),
        not_arrived_by_horizon: departed(Departure::NotArrived),
        gw_entries: waits.gw_entries,
        window_start_hr: to_hours(trace.start_us),
        window_end_hr: to_hours(trace.end_us),
    })
}
