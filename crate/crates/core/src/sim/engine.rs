use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use super::trace::{SimTrace, TraceEvent, TracePatient, TraceRecord};
use super::{to_micros, SimPatient, Unit};
use crate::domain::{Capacity, ClassLabel, Horizon, Scenario};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, keyed_uniform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Discharge(usize),
    SterilizationDone(Unit, u32),
    TransferDue(usize),
    Arrival(usize),
}

impl Event {
    /// Order among events sharing a timestamp.
    fn priority(self) -> u8 {
        match self {
            Event::Discharge(_) => 0,
            Event::SterilizationDone(..) => 1,
            Event::TransferDue(_) => 2,
            Event::Arrival(_) => 3,
        }
    }
}

type Queued = Reverse<(i64, u8, u64, Event)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bed {
    Free,
    Occupied(usize),
    Sterilizing,
}

struct Ward {
    capacity: Capacity,
    beds: Vec<Bed>,
    free: BTreeSet<u32>,
}

impl Ward {
    fn new(capacity: Capacity) -> Self {
        let n = capacity.finite().unwrap_or(0);
        Self {
            capacity,
            beds: vec![Bed::Free; n as usize],
            free: (0..n).collect(),
        }
    }

    fn has_free(&self) -> bool {
        self.capacity.is_infinite() || !self.free.is_empty()
    }

    /// Lowest-numbered free bed; an infinite ward grows on demand.
    fn take(&mut self, patient: usize) -> u32 {
        let bed = match self.free.pop_first() {
            Some(b) => b,
            None => {
                debug_assert!(self.capacity.is_infinite());
                self.beds.push(Bed::Free);
                (self.beds.len() - 1) as u32
            }
        };
        self.beds[bed as usize] = Bed::Occupied(patient);
        bed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Loc {
    NotArrived,
    Wa,
    Bed(Unit, u32),
    Gone,
}

/// A closed stay in one unit, in micro-hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stay {
    pub unit: Unit,
    pub enter_us: i64,
    pub exit_us: i64,
}

impl Stay {
    pub fn hours(&self) -> f64 {
        super::to_hours(self.exit_us - self.enter_us)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Departure {
    Gw,
    Ssu,
    Wa,
    InSystem,
    NotArrived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientHistory {
    pub encounter_id: String,
    pub true_label: ClassLabel,
    pub predicted_label: ClassLabel,
    pub arrival_us: i64,
    pub discharge_us: i64,
    /// Closed stays in order; a stay still open at the horizon is omitted.
    pub stays: Vec<Stay>,
    pub departure: Departure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    /// Patients in arrival order (ties keep input order).
    pub patients: Vec<PatientHistory>,
    pub trace: SimTrace,
}

struct PState {
    loc: Loc,
    enter_us: i64,
    waiting_gw: bool,
    waiting_ssu: bool,
    vacancies: u32,
    stays: Vec<Stay>,
    departure: Option<Departure>,
}

struct Engine<'a> {
    scenario: &'a Scenario,
    patients: Vec<&'a SimPatient>,
    arrival_us: Vec<i64>,
    discharge_us: Vec<i64>,
    state: Vec<PState>,
    wards: [Ward; 2],
    gw_queue: VecDeque<usize>,
    ssu_queue: VecDeque<usize>,
    events: BinaryHeap<Queued>,
    seq: u64,
    steril_seed: u64,
    threshold_us: i64,
    records: Vec<TraceRecord>,
}

impl<'a> Engine<'a> {
    fn ward(&mut self, unit: Unit) -> &mut Ward {
        &mut self.wards[unit.index()]
    }

    fn schedule(&mut self, time: i64, event: Event) {
        self.events.push(Reverse((time, event.priority(), self.seq, event)));
        self.seq += 1;
    }

    fn record(&mut self, time_us: i64, event: TraceEvent, patient: Option<usize>, unit: Option<Unit>, bed: Option<u32>) {
        self.records.push(TraceRecord {
            time_us,
            event,
            patient,
            unit,
            bed,
        });
    }

    fn sterilization_us(&self, p: usize, ordinal: u32) -> i64 {
        let (lo, hi) = (self.scenario.sterilization_min_hours, self.scenario.sterilization_max_hours);
        if lo == hi {
            return to_micros(lo);
        }
        let key = format!("{}#{}", self.patients[p].encounter_id, ordinal);
        to_micros(lo + (hi - lo) * keyed_uniform(self.steril_seed, &key))
    }

    fn close_stay(&mut self, p: usize, unit: Unit, t: i64) {
        let enter_us = self.state[p].enter_us;
        self.state[p].stays.push(Stay {
            unit,
            enter_us,
            exit_us: t,
        });
    }

    fn vacate_bed(&mut self, p: usize, unit: Unit, bed: u32, t: i64) {
        self.close_stay(p, unit, t);
        self.record(t, TraceEvent::Vacate, Some(p), Some(unit), Some(bed));
        self.ward(unit).beds[bed as usize] = Bed::Sterilizing;
        let ordinal = self.state[p].vacancies;
        self.state[p].vacancies += 1;
        let d = self.sterilization_us(p, ordinal);
        self.schedule(t + d, Event::SterilizationDone(unit, bed));
    }

    fn leave_wa(&mut self, p: usize, t: i64) {
        self.close_stay(p, Unit::Wa, t);
        self.record(t, TraceEvent::Vacate, Some(p), Some(Unit::Wa), None);
    }

    fn place(&mut self, p: usize, unit: Unit, t: i64) {
        match self.state[p].loc {
            Loc::Wa => self.leave_wa(p, t),
            Loc::Bed(from, bed) => self.vacate_bed(p, from, bed, t),
            Loc::NotArrived | Loc::Gone => {}
        }
        let bed = self.ward(unit).take(p);
        let s = &mut self.state[p];
        s.loc = Loc::Bed(unit, bed);
        s.enter_us = t;
        s.waiting_gw = false;
        s.waiting_ssu = false;
        self.record(t, TraceEvent::Occupy, Some(p), Some(unit), Some(bed));
        if unit == Unit::Ssu
            && self.patients[p].true_label.is_ls()
            && t + self.threshold_us < self.discharge_us[p]
        {
            self.schedule(t + self.threshold_us, Event::TransferDue(p));
        }
    }

    fn enter_wa(&mut self, p: usize, t: i64) {
        self.state[p].loc = Loc::Wa;
        self.state[p].enter_us = t;
        self.record(t, TraceEvent::Occupy, Some(p), Some(Unit::Wa), None);
    }

    fn join_queue(&mut self, p: usize, unit: Unit, t: i64) {
        match unit {
            Unit::Gw => {
                self.state[p].waiting_gw = true;
                self.gw_queue.push_back(p);
            }
            Unit::Ssu => {
                self.state[p].waiting_ssu = true;
                self.ssu_queue.push_back(p);
            }
            Unit::Wa => unreachable!("WA has no queue"),
        }
        self.record(t, TraceEvent::JoinQueue, Some(p), Some(unit), None);
    }

    fn arrival(&mut self, p: usize, t: i64) {
        self.record(t, TraceEvent::Arrival, Some(p), None, None);
        self.schedule(self.discharge_us[p], Event::Discharge(p));
        match self.patients[p].predicted_label {
            ClassLabel::Ls => {
                if self.wards[Unit::Gw.index()].has_free() {
                    self.place(p, Unit::Gw, t);
                } else {
                    self.enter_wa(p, t);
                    self.join_queue(p, Unit::Gw, t);
                }
            }
            ClassLabel::Ss => {
                if self.wards[Unit::Ssu.index()].has_free() {
                    self.place(p, Unit::Ssu, t);
                } else if self.wards[Unit::Gw.index()].has_free() {
                    self.place(p, Unit::Gw, t);
                } else {
                    self.enter_wa(p, t);
                    self.join_queue(p, Unit::Ssu, t);
                    self.join_queue(p, Unit::Gw, t);
                }
            }
        }
    }

    fn discharge(&mut self, p: usize, t: i64) {
        let departure = match self.state[p].loc {
            Loc::Wa => {
                self.leave_wa(p, t);
                Departure::Wa
            }
            Loc::Bed(unit, bed) => {
                self.vacate_bed(p, unit, bed, t);
                if unit == Unit::Gw {
                    Departure::Gw
                } else {
                    Departure::Ssu
                }
            }
            Loc::NotArrived | Loc::Gone => return,
        };
        let s = &mut self.state[p];
        s.loc = Loc::Gone;
        s.waiting_gw = false;
        s.waiting_ssu = false;
        s.departure = Some(departure);
        self.record(t, TraceEvent::Discharge, Some(p), None, None);
    }

    fn transfer_due(&mut self, p: usize, t: i64) {
        if !matches!(self.state[p].loc, Loc::Bed(Unit::Ssu, _)) {
            return;
        }
        self.record(t, TraceEvent::TransferDue, Some(p), Some(Unit::Ssu), None);
        if self.wards[Unit::Gw.index()].has_free() {
            self.place(p, Unit::Gw, t);
        } else {
            // Keeps the SSU bed while queued for GW.
            self.join_queue(p, Unit::Gw, t);
        }
    }

    fn next_waiting(&mut self, unit: Unit) -> Option<usize> {
        loop {
            let p = match unit {
                Unit::Gw => self.gw_queue.pop_front()?,
                Unit::Ssu => self.ssu_queue.pop_front()?,
                Unit::Wa => return None,
            };
            let s = &self.state[p];
            let valid = match unit {
                Unit::Gw => s.waiting_gw,
                _ => s.waiting_ssu,
            };
            if valid {
                return Some(p);
            }
        }
    }

    fn dispatch(&mut self, t: i64) {
        for unit in [Unit::Ssu, Unit::Gw] {
            while self.wards[unit.index()].has_free() {
                match self.next_waiting(unit) {
                    Some(p) => self.place(p, unit, t),
                    None => break,
                }
            }
        }
    }

    fn sterilization_done(&mut self, unit: Unit, bed: u32, t: i64) {
        let w = self.ward(unit);
        w.beds[bed as usize] = Bed::Free;
        w.free.insert(bed);
        self.record(t, TraceEvent::SterilizationDone, None, Some(unit), Some(bed));
    }

    fn run(&mut self) -> i64 {
        let limit = match self.scenario.horizon {
            Horizon::Drain => None,
            Horizon::At(h) => Some(to_micros(h)),
        };
        let mut last_discharge = self.arrival_us.first().copied().unwrap_or(0);
        while let Some(Reverse((t, _, _, event))) = self.events.pop() {
            if limit.is_some_and(|l| t > l) {
                break;
            }
            match event {
                Event::Arrival(p) => self.arrival(p, t),
                Event::Discharge(p) => {
                    self.discharge(p, t);
                    last_discharge = last_discharge.max(t);
                }
                Event::TransferDue(p) => self.transfer_due(p, t),
                Event::SterilizationDone(unit, bed) => {
                    self.sterilization_done(unit, bed, t);
                    // Free every bed finishing now before anyone is placed.
                    while let Some(Reverse((t2, _, _, Event::SterilizationDone(u2, b2)))) = self.events.peek().copied() {
                        if t2 != t {
                            break;
                        }
                        self.events.pop();
                        self.sterilization_done(u2, b2, t);
                    }
                    self.dispatch(t);
                }
            }
        }
        limit.unwrap_or(last_discharge)
    }
}

fn validate(patients: &[SimPatient]) -> Result<()> {
    if patients.is_empty() {
        return Err(Error::invalid("simulation needs at least one patient"));
    }
    for (i, p) in patients.iter().enumerate() {
        if !(p.arrival_time >= 0.0) || !p.arrival_time.is_finite() {
            return Err(Error::Row {
                row: i,
                message: format!("arrival_time {} must be finite and non-negative", p.arrival_time),
            });
        }
        if !(p.los_hours > 0.0) || !p.los_hours.is_finite() {
            return Err(Error::Row {
                row: i,
                message: format!("los_hours {} must be finite and positive", p.los_hours),
            });
        }
    }
    Ok(())
}

/// Runs the event loop until the horizon, or until every patient has left
/// when the horizon is `drain`. Deterministic in `(scenario, patients)`.
pub fn run_simulation(scenario: &Scenario, patients: &[SimPatient]) -> Result<SimOutcome> {
    scenario.validate()?;
    validate(patients)?;
    let mut order: Vec<&SimPatient> = patients.iter().collect();
    order.sort_by_key(|p| to_micros(p.arrival_time));
    let arrival_us: Vec<i64> = order.iter().map(|p| to_micros(p.arrival_time)).collect();
    let discharge_us: Vec<i64> = order
        .iter()
        .zip(&arrival_us)
        .map(|(p, a)| a + to_micros(p.los_hours))
        .collect();
    let n = order.len();
    let mut engine = Engine {
        scenario,
        patients: order,
        arrival_us: arrival_us.clone(),
        discharge_us: discharge_us.clone(),
        state: (0..n)
            .map(|_| PState {
                loc: Loc::NotArrived,
                enter_us: 0,
                waiting_gw: false,
                waiting_ssu: false,
                vacancies: 0,
                stays: Vec::new(),
                departure: None,
            })
            .collect(),
        wards: [Ward::new(scenario.gw_capacity), Ward::new(scenario.ssu_capacity)],
        gw_queue: VecDeque::new(),
        ssu_queue: VecDeque::new(),
        events: BinaryHeap::new(),
        seq: 0,
        steril_seed: derive_seed(scenario.seed, "sim/sterilization"),
        threshold_us: to_micros(scenario.transfer_threshold_hours),
        records: Vec::new(),
    };
    for (p, &a) in arrival_us.iter().enumerate() {
        engine.schedule(a, Event::Arrival(p));
    }
    let end_us = engine.run();
    let start_us = arrival_us[0];

    let Engine {
        patients: order,
        state,
        records,
        ..
    } = engine;
    let histories: Vec<PatientHistory> = order
        .iter()
        .zip(state)
        .enumerate()
        .map(|(i, (p, s))| PatientHistory {
            encounter_id: p.encounter_id.clone(),
            true_label: p.true_label,
            predicted_label: p.predicted_label,
            arrival_us: arrival_us[i],
            discharge_us: discharge_us[i],
            stays: s.stays,
            departure: match (s.departure, s.loc) {
                (Some(d), _) => d,
                (None, Loc::NotArrived) => Departure::NotArrived,
                (None, _) => Departure::InSystem,
            },
        })
        .collect();
    let trace = SimTrace {
        patients: histories
            .iter()
            .map(|h| TracePatient {
                encounter_id: h.encounter_id.clone(),
                true_label: h.true_label,
                predicted_label: h.predicted_label,
            })
            .collect(),
        records,
        start_us,
        end_us,
        gw_capacity: scenario.gw_capacity,
        ssu_capacity: scenario.ssu_capacity,
    };
    Ok(SimOutcome {
        patients: histories,
        trace,
    })
}
