use serde::{Deserialize, Serialize};

use super::{to_hours, Unit};
use crate::domain::{Capacity, ClassLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    Arrival,
    Occupy,
    Vacate,
    JoinQueue,
    TransferDue,
    Discharge,
    SterilizationDone,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Arrival => "arrival",
            TraceEvent::Occupy => "occupy",
            TraceEvent::Vacate => "vacate",
            TraceEvent::JoinQueue => "join_queue",
            TraceEvent::TransferDue => "transfer_due",
            TraceEvent::Discharge => "discharge",
            TraceEvent::SterilizationDone => "sterilization_done",
        }
    }
}

/// `patient` indexes [`SimTrace::patients`]. WA records carry no bed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time_us: i64,
    pub event: TraceEvent,
    pub patient: Option<usize>,
    pub unit: Option<Unit>,
    pub bed: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePatient {
    pub encounter_id: String,
    pub true_label: ClassLabel,
    pub predicted_label: ClassLabel,
}

/// Time-ordered event log of one run, with the measurement window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub patients: Vec<TracePatient>,
    pub records: Vec<TraceRecord>,
    pub start_us: i64,
    pub end_us: i64,
    pub gw_capacity: Capacity,
    pub ssu_capacity: Capacity,
}

impl SimTrace {
    pub fn capacity(&self, unit: Unit) -> Capacity {
        match unit {
            Unit::Gw => self.gw_capacity,
            Unit::Ssu => self.ssu_capacity,
            Unit::Wa => Capacity::Infinite,
        }
    }

    pub fn count(&self, event: TraceEvent, unit: Option<Unit>) -> u64 {
        self.records
            .iter()
            .filter(|r| r.event == event && (unit.is_none() || r.unit == unit))
            .count() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitOccupancy {
    pub max_count: u64,
    pub time_avg_count: f64,
    /// Fraction of the window with occupancy >= 90% of capacity; only for
    /// finite, non-zero capacity.
    pub high_utilization_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancyStats {
    pub gw: UnitOccupancy,
    pub ssu: UnitOccupancy,
    pub wa: UnitOccupancy,
}

impl OccupancyStats {
    pub fn unit(&self, unit: Unit) -> &UnitOccupancy {
        match unit {
            Unit::Gw => &self.gw,
            Unit::Ssu => &self.ssu,
            Unit::Wa => &self.wa,
        }
    }
}

/// Step-function integrals of patient counts over `[start, end]`.
pub fn occupancy_statistics(trace: &SimTrace) -> Result<OccupancyStats> {
    if trace.records.is_empty() {
        return Err(Error::invalid("empty trace"));
    }
    let (start, end) = (trace.start_us, trace.end_us.max(trace.start_us));
    let span = (end - start) as f64;
    let caps = Unit::ALL.map(|u| trace.capacity(u).finite().filter(|&c| c > 0));
    let mut count = [0i64; 3];
    let mut max = [0i64; 3];
    let mut area = [0i128; 3];
    let mut high = [0i64; 3];
    let mut last = start;
    let mut advance = |to: i64, count: &[i64; 3], last: &mut i64| {
        let to = to.clamp(start, end);
        if to > *last {
            let dt = to - *last;
            for u in 0..3 {
                area[u] += count[u] as i128 * dt as i128;
                if caps[u].is_some_and(|c| count[u] * 10 >= 9 * c as i64) {
                    high[u] += dt;
                }
            }
            *last = to;
        }
    };
    for r in &trace.records {
        let delta = match r.event {
            TraceEvent::Occupy => 1,
            TraceEvent::Vacate => -1,
            _ => continue,
        };
        let Some(unit) = r.unit else { continue };
        advance(r.time_us, &count, &mut last);
        let u = unit.index();
        count[u] += delta;
        max[u] = max[u].max(count[u]);
    }
    advance(end, &count, &mut last);
    let make = |u: usize| UnitOccupancy {
        max_count: max[u] as u64,
        time_avg_count: if span > 0.0 { area[u] as f64 / span } else { 0.0 },
        high_utilization_rate: caps[u].map(|_| if span > 0.0 { high[u] as f64 / span } else { 0.0 }),
    };
    Ok(OccupancyStats {
        gw: make(0),
        ssu: make(1),
        wa: make(2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaitStats {
    /// Mean of (GW bed entry - last GW queue entry) over every GW entry,
    /// zero for entries without queueing. `None` for an infinite GW.
    pub avg_wait_gw: Option<f64>,
    pub gw_entries: u64,
    pub ls_time_gw: Option<f64>,
    pub ls_time_ssu: Option<f64>,
    pub ss_time_gw: Option<f64>,
    pub ss_time_ssu: Option<f64>,
    pub ls_time_wa: Option<f64>,
    pub ss_time_wa: Option<f64>,
}

/// GW waits and mean per-patient residency by (true label, unit), counting
/// closed stays only.
pub fn wait_time_statistics(trace: &SimTrace) -> WaitStats {
    let n = trace.patients.len();
    let mut pending: Vec<Option<i64>> = vec![None; n];
    let mut open: Vec<[Option<i64>; 3]> = vec![[None; 3]; n];
    let mut total: Vec<[Option<i64>; 3]> = vec![[None; 3]; n];
    let (mut wait_sum, mut entries) = (0i64, 0u64);
    for r in &trace.records {
        let Some(p) = r.patient else { continue };
        match (r.event, r.unit) {
            (TraceEvent::JoinQueue, Some(Unit::Gw)) => pending[p] = Some(r.time_us),
            (TraceEvent::Occupy, Some(unit)) => {
                if unit == Unit::Gw {
                    wait_sum += r.time_us - pending[p].unwrap_or(r.time_us);
                    entries += 1;
                }
                if unit != Unit::Wa {
                    pending[p] = None;
                }
                open[p][unit.index()] = Some(r.time_us);
            }
            (TraceEvent::Vacate, Some(unit)) => {
                if let Some(t0) = open[p][unit.index()].take() {
                    *total[p][unit.index()].get_or_insert(0) += r.time_us - t0;
                }
            }
            (TraceEvent::Discharge, _) => pending[p] = None,
            _ => {}
        }
    }
    let mean_time = |label: ClassLabel, unit: Unit| {
        let vals: Vec<i64> = (0..n)
            .filter(|&p| trace.patients[p].true_label == label)
            .filter_map(|p| total[p][unit.index()])
            .collect();
        (!vals.is_empty()).then(|| to_hours(vals.iter().sum::<i64>()) / vals.len() as f64)
    };
    WaitStats {
        avg_wait_gw: (!trace.gw_capacity.is_infinite() && entries > 0)
            .then(|| to_hours(wait_sum) / entries as f64),
        gw_entries: entries,
        ls_time_gw: mean_time(ClassLabel::Ls, Unit::Gw),
        ls_time_ssu: mean_time(ClassLabel::Ls, Unit::Ssu),
        ss_time_gw: mean_time(ClassLabel::Ss, Unit::Gw),
        ss_time_ssu: mean_time(ClassLabel::Ss, Unit::Ssu),
        ls_time_wa: mean_time(ClassLabel::Ls, Unit::Wa),
        ss_time_wa: mean_time(ClassLabel::Ss, Unit::Wa),
    }
}
