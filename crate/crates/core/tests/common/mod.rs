//! Shared test helpers, including a fixed-step reference simulator.
#![allow(dead_code)]

use losflow::domain::{Capacity, ClassLabel, Scenario};
use losflow::sim::{SimPatient, Unit};
use rand::Rng;

/// Length of one reference tick in micro-hours (0.01 h).
pub const TICK_US: i64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TickBed {
    Free,
    Busy,
    Sterilizing(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Where {
    Pending,
    Wa,
    Bed(Unit, usize),
    Gone,
}

struct TickUnit {
    cap: Option<usize>,
    beds: Vec<TickBed>,
}

impl TickUnit {
    fn free_bed(&mut self) -> Option<usize> {
        if let Some(i) = self.beds.iter().position(|b| *b == TickBed::Free) {
            return Some(i);
        }
        if self.cap.is_none() {
            self.beds.push(TickBed::Free);
            return Some(self.beds.len() - 1);
        }
        None
    }
}

fn ticks(hours: f64) -> i64 {
    let t = (hours * 100.0).round() as i64;
    assert!(((t as f64) / 100.0 - hours).abs() < 1e-9, "{hours} is not on the 0.01 h grid");
    t
}

/// Location histories `(unit, enter_us, exit_us)` per patient, in arrival
/// order, produced by stepping a 0.01-hour clock. Requires a fixed
/// sterilization duration, grid-aligned times, and a drain horizon.
pub fn tick_oracle(scenario: &Scenario, patients: &[SimPatient]) -> Vec<Vec<(Unit, i64, i64)>> {
    assert_eq!(scenario.sterilization_min_hours, scenario.sterilization_max_hours);
    let steril = ticks(scenario.sterilization_min_hours);
    let thr = ticks(scenario.transfer_threshold_hours);
    let mut order: Vec<&SimPatient> = patients.iter().collect();
    order.sort_by_key(|p| ticks(p.arrival_time));
    let n = order.len();
    let arrive: Vec<i64> = order.iter().map(|p| ticks(p.arrival_time)).collect();
    let leave: Vec<i64> = order.iter().zip(&arrive).map(|(p, a)| a + ticks(p.los_hours)).collect();
    let cap = |c: Capacity| c.finite().map(|v| v as usize);
    let mut units = [
        TickUnit { cap: cap(scenario.gw_capacity), beds: vec![TickBed::Free; cap(scenario.gw_capacity).unwrap_or(0)] },
        TickUnit { cap: cap(scenario.ssu_capacity), beds: vec![TickBed::Free; cap(scenario.ssu_capacity).unwrap_or(0)] },
    ];
    let mut loc = vec![Where::Pending; n];
    let mut since = vec![0i64; n];
    let mut hist: Vec<Vec<(Unit, i64, i64)>> = vec![Vec::new(); n];
    // Queue tickets: lower ticket = earlier queue entry.
    let mut gw_ticket: Vec<Option<u64>> = vec![None; n];
    let mut ssu_ticket: Vec<Option<u64>> = vec![None; n];
    let mut ssu_entry: Vec<u64> = vec![0; n];
    let mut counter = 0u64;
    let end = *leave.iter().max().unwrap();

    let ui = |u: Unit| if u == Unit::Gw { 0 } else { 1 };

    macro_rules! close {
        ($p:expr, $k:expr) => {{
            let k: i64 = $k;
            match loc[$p] {
                Where::Wa => hist[$p].push((Unit::Wa, since[$p] * TICK_US, k * TICK_US)),
                Where::Bed(u, b) => {
                    hist[$p].push((u, since[$p] * TICK_US, k * TICK_US));
                    units[ui(u)].beds[b] = TickBed::Sterilizing(k + steril);
                }
                _ => {}
            }
        }};
    }
    macro_rules! put {
        ($p:expr, $u:expr, $k:expr) => {{
            let (p, u, k): (usize, Unit, i64) = ($p, $u, $k);
            close!(p, k);
            let b = units[ui(u)].free_bed().expect("free bed");
            units[ui(u)].beds[b] = TickBed::Busy;
            loc[p] = Where::Bed(u, b);
            since[p] = k;
            gw_ticket[p] = None;
            ssu_ticket[p] = None;
            if u == Unit::Ssu {
                ssu_entry[p] = counter;
                counter += 1;
            }
        }};
    }

    for k in 0..=end {
        for p in 0..n {
            if leave[p] == k && loc[p] != Where::Pending && loc[p] != Where::Gone {
                close!(p, k);
                loc[p] = Where::Gone;
                gw_ticket[p] = None;
                ssu_ticket[p] = None;
            }
        }
        for u in &mut units {
            for b in &mut u.beds {
                if *b == TickBed::Sterilizing(k) {
                    *b = TickBed::Free;
                }
            }
        }
        for u in [Unit::Ssu, Unit::Gw] {
            loop {
                let has_free = units[ui(u)].cap.is_none() || units[ui(u)].beds.contains(&TickBed::Free);
                let tickets = if u == Unit::Gw { &gw_ticket } else { &ssu_ticket };
                let next = (0..n).filter(|&p| tickets[p].is_some()).min_by_key(|&p| tickets[p]);
                match (has_free, next) {
                    (true, Some(p)) => put!(p, u, k),
                    _ => break,
                }
            }
        }
        let mut due: Vec<usize> = (0..n)
            .filter(|&p| matches!(loc[p], Where::Bed(Unit::Ssu, _)))
            .filter(|&p| order[p].true_label == ClassLabel::Ls && since[p] + thr == k && k < leave[p])
            .collect();
        due.sort_by_key(|&p| ssu_entry[p]);
        for p in due {
            if units[0].cap.is_none() || units[0].beds.contains(&TickBed::Free) {
                put!(p, Unit::Gw, k);
            } else {
                gw_ticket[p] = Some(counter);
                counter += 1;
            }
        }
        for p in 0..n {
            if arrive[p] != k {
                continue;
            }
            let gw_free = units[0].cap.is_none() || units[0].beds.contains(&TickBed::Free);
            let ssu_free = units[1].cap.is_none() || units[1].beds.contains(&TickBed::Free);
            match order[p].predicted_label {
                ClassLabel::Ls if gw_free => put!(p, Unit::Gw, k),
                ClassLabel::Ls => {
                    loc[p] = Where::Wa;
                    since[p] = k;
                    gw_ticket[p] = Some(counter);
                    counter += 1;
                }
                ClassLabel::Ss if ssu_free => put!(p, Unit::Ssu, k),
                ClassLabel::Ss if gw_free => put!(p, Unit::Gw, k),
                ClassLabel::Ss => {
                    loc[p] = Where::Wa;
                    since[p] = k;
                    ssu_ticket[p] = Some(counter);
                    gw_ticket[p] = Some(counter);
                    counter += 1;
                }
            }
        }
    }
    hist
}

fn random_label<R: Rng>(rng: &mut R) -> ClassLabel {
    if rng.random::<bool>() {
        ClassLabel::Ls
    } else {
        ClassLabel::Ss
    }
}

/// Small grid-aligned scenario: at most 6 patients, capacities at most 2,
/// fixed sterilization, and a short transfer threshold so transfers occur.
pub fn micro_scenario<R: Rng>(rng: &mut R) -> (Scenario, Vec<SimPatient>) {
    let cap = |rng: &mut R| {
        if rng.random_bool(0.15) {
            Capacity::Infinite
        } else {
            Capacity::Finite(rng.random_range(0..=2))
        }
    };
    let mut s = Scenario::new(cap(rng), cap(rng))
        .with_fixed_sterilization(rng.random_range(10..=300) as f64 / 100.0);
    s.transfer_threshold_hours = rng.random_range(100..=1200) as f64 / 100.0;
    let n = rng.random_range(1..=6);
    let patients = (0..n)
        .map(|i| SimPatient {
            encounter_id: format!("M{i}"),
            arrival_time: rng.random_range(0..=1500) as f64 / 100.0,
            los_hours: rng.random_range(1..=3000) as f64 / 100.0,
            true_label: random_label(rng),
            predicted_label: random_label(rng),
        })
        .collect();
    (s, patients)
}

pub fn patient(id: &str, arrival: f64, los: f64, truth: ClassLabel, pred: ClassLabel) -> SimPatient {
    SimPatient {
        encounter_id: id.into(),
        arrival_time: arrival,
        los_hours: los,
        true_label: truth,
        predicted_label: pred,
    }
}
