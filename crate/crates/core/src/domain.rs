//! Value types shared by the pipeline, the classifiers and the simulator.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default LOS cut between short and long stay, in hours.
pub const DEFAULT_LOS_THRESHOLD_HOURS: f64 = 72.0;

/// Length-of-stay class. `Ls` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "SS")]
    Ss,
    #[serde(rename = "LS")]
    Ls,
}

impl ClassLabel {
    pub fn is_ls(self) -> bool {
        self == ClassLabel::Ls
    }

    /// 1.0 for LS, 0.0 for SS.
    pub fn indicator(self) -> f64 {
        if self.is_ls() {
            1.0
        } else {
            0.0
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            ClassLabel::Ss => ClassLabel::Ls,
            ClassLabel::Ls => ClassLabel::Ss,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Ss => "SS",
            ClassLabel::Ls => "LS",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "SS" | "ss" => Ok(ClassLabel::Ss),
            "LS" | "ls" => Ok(ClassLabel::Ls),
            other => Err(Error::invalid(format!("unknown class label `{other}`"))),
        }
    }
}

/// LS iff `los_hours > threshold_hours`; a tie goes to SS.
pub fn label_from_los(los_hours: f64, threshold_hours: f64) -> Result<ClassLabel> {
    if !(los_hours > 0.0) || !los_hours.is_finite() {
        return Err(Error::invalid(format!("los_hours must be positive, got {los_hours}")));
    }
    if !(threshold_hours > 0.0) || !threshold_hours.is_finite() {
        return Err(Error::invalid(format!(
            "threshold_hours must be positive, got {threshold_hours}"
        )));
    }
    Ok(if los_hours > threshold_hours {
        ClassLabel::Ls
    } else {
        ClassLabel::Ss
    })
}

/// A single feature cell.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Numeric(f64),
    Categorical(String),
    Missing,
}

impl FeatureValue {
    pub fn is_missing(&self) -> bool {
        matches!(self, FeatureValue::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            FeatureValue::Numeric(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            FeatureValue::Categorical(c) => Some(c),
            _ => None,
        }
    }
}

/// One hospital admission. Times are hours from the table's epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Encounter {
    pub encounter_id: String,
    pub patient_hash: String,
    pub triage_time: f64,
    pub admit_decision_time: f64,
    pub los_hours: f64,
    pub features: BTreeMap<String, FeatureValue>,
}

impl Encounter {
    pub fn validate(&self) -> Result<()> {
        if !self.triage_time.is_finite() || !self.admit_decision_time.is_finite() {
            return Err(Error::invalid(format!(
                "encounter {}: non-finite timestamp",
                self.encounter_id
            )));
        }
        if self.admit_decision_time < self.triage_time {
            return Err(Error::invalid(format!(
                "encounter {}: admit_decision_time precedes triage_time",
                self.encounter_id
            )));
        }
        if !(self.los_hours > 0.0) || !self.los_hours.is_finite() {
            return Err(Error::invalid(format!(
                "encounter {}: los_hours must be positive",
                self.encounter_id
            )));
        }
        Ok(())
    }

    pub fn label(&self, threshold_hours: f64) -> Result<ClassLabel> {
        label_from_los(self.los_hours, threshold_hours)
    }
}

/// Confusion counts with LS as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, predicted: ClassLabel, truth: ClassLabel) {
        match (predicted, truth) {
            (ClassLabel::Ls, ClassLabel::Ls) => self.tp += 1,
            (ClassLabel::Ss, ClassLabel::Ss) => self.tn += 1,
            (ClassLabel::Ls, ClassLabel::Ss) => self.fp += 1,
            (ClassLabel::Ss, ClassLabel::Ls) => self.fn_ += 1,
        }
    }

    /// Counts with SS treated as the positive class.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }
}

/// Bed capacity of a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capacity {
    Finite(u32),
    Infinite,
}

impl Capacity {
    pub fn is_infinite(self) -> bool {
        matches!(self, Capacity::Infinite)
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Capacity::Finite(n) => Some(n),
            Capacity::Infinite => None,
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(n) => write!(f, "{n}"),
            Capacity::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Capacity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "Infinite" => Ok(Capacity::Infinite),
            other => other
                .parse::<u32>()
                .map(Capacity::Finite)
                .map_err(|_| Error::invalid(format!("bad capacity `{other}`"))),
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Capacity::Finite(n) => s.serialize_u32(*n),
            Capacity::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Capacity::Finite(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// When the simulation stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Run until every patient has departed.
    Drain,
    At(f64),
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Horizon::Drain => s.serialize_str("drain"),
            Horizon::At(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) => Ok(Horizon::At(t)),
            Raw::Text(t) if t == "drain" => Ok(Horizon::Drain),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad horizon `{t}`"))),
        }
    }
}

/// Bed routing discipline.
///
/// `SsuFirst`: predicted-LS patients need GW; predicted-SS patients request
/// SSU and, once waiting, accept whichever of SSU or GW frees first (SSU on a
/// tie). Misclassified LS patients move from SSU to GW after the transfer
/// threshold; misclassified SS patients stay in GW.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingPolicy {
    #[default]
    SsuFirst,
}

/// Which encounter timestamp marks arrival into the simulated admission flow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalField {
    TriageTime,
    #[default]
    AdmitDecisionTime,
}

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Simulation configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "scenario_schema_version")]
    pub schema_version: u32,
    pub gw_capacity: Capacity,
    pub ssu_capacity: Capacity,
    #[serde(default = "default_transfer_threshold")]
    pub transfer_threshold_hours: f64,
    #[serde(default = "default_steril_min")]
    pub sterilization_min_hours: f64,
    #[serde(default = "default_steril_max")]
    pub sterilization_max_hours: f64,
    #[serde(default)]
    pub routing_policy: RoutingPolicy,
    #[serde(default = "default_horizon")]
    pub horizon: Horizon,
    #[serde(default)]
    pub arrival_field: ArrivalField,
    #[serde(default)]
    pub seed: u64,
}

fn scenario_schema_version() -> u32 {
    SCENARIO_SCHEMA_VERSION
}
fn default_transfer_threshold() -> f64 {
    DEFAULT_LOS_THRESHOLD_HOURS
}
fn default_steril_min() -> f64 {
    1.0
}
fn default_steril_max() -> f64 {
    3.0
}
fn default_horizon() -> Horizon {
    Horizon::Drain
}

impl Default for Scenario {
    fn default() -> Self {
        Self::capacitated(70, 10)
    }
}

impl Scenario {
    pub fn new(gw_capacity: Capacity, ssu_capacity: Capacity) -> Self {
        Self {
            schema_version: SCENARIO_SCHEMA_VERSION,
            gw_capacity,
            ssu_capacity,
            transfer_threshold_hours: default_transfer_threshold(),
            sterilization_min_hours: default_steril_min(),
            sterilization_max_hours: default_steril_max(),
            routing_policy: RoutingPolicy::default(),
            horizon: Horizon::Drain,
            arrival_field: ArrivalField::default(),
            seed: 0,
        }
    }

    pub fn infinite() -> Self {
        Self::new(Capacity::Infinite, Capacity::Infinite)
    }

    pub fn capacitated(gw: u32, ssu: u32) -> Self {
        Self::new(Capacity::Finite(gw), Capacity::Finite(ssu))
    }

    pub fn with_fixed_sterilization(mut self, hours: f64) -> Self {
        self.sterilization_min_hours = hours;
        self.sterilization_max_hours = hours;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        if !(self.transfer_threshold_hours > 0.0) || !self.transfer_threshold_hours.is_finite() {
            return Err(Error::config("transfer_threshold_hours", "must be positive"));
        }
        if !(self.sterilization_min_hours > 0.0) || !self.sterilization_min_hours.is_finite() {
            return Err(Error::config("sterilization_min_hours", "must be positive"));
        }
        if !self.sterilization_max_hours.is_finite()
            || self.sterilization_max_hours < self.sterilization_min_hours
        {
            return Err(Error::config(
                "sterilization_max_hours",
                "must be finite and >= sterilization_min_hours",
            ));
        }
        if let Horizon::At(t) = self.horizon {
            if !t.is_finite() {
                return Err(Error::config("horizon", "must be finite or \"drain\""));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_examples() {
        assert_eq!(label_from_los(100.0, 72.0).unwrap(), ClassLabel::Ls);
        assert_eq!(label_from_los(72.0, 72.0).unwrap(), ClassLabel::Ss);
        assert_eq!(label_from_los(41.7, 72.0).unwrap(), ClassLabel::Ss);
    }

    #[test]
    fn label_rejects_non_positive() {
        assert!(label_from_los(0.0, 72.0).is_err());
        assert!(label_from_los(10.0, -1.0).is_err());
        assert!(label_from_los(f64::NAN, 72.0).is_err());
    }

    #[test]
    fn encounter_validation() {
        let mut e = Encounter {
            encounter_id: "e1".into(),
            patient_hash: "p1".into(),
            triage_time: 5.0,
            admit_decision_time: 7.0,
            los_hours: 10.0,
            features: BTreeMap::new(),
        };
        assert!(e.validate().is_ok());
        e.admit_decision_time = 4.0;
        assert!(e.validate().is_err());
        e.admit_decision_time = 7.0;
        e.los_hours = 0.0;
        assert!(e.validate().is_err());
    }

    #[test]
    fn confusion_record_and_swap() {
        let mut c = ConfusionCounts::default();
        c.record(ClassLabel::Ls, ClassLabel::Ls);
        c.record(ClassLabel::Ls, ClassLabel::Ss);
        c.record(ClassLabel::Ss, ClassLabel::Ls);
        assert_eq!(c, ConfusionCounts::new(1, 0, 1, 1));
        assert_eq!(c.swapped(), ConfusionCounts::new(0, 1, 1, 1));
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn scenario_json_defaults() {
        let s: Scenario =
            serde_json::from_str(r#"{"gw_capacity": 70, "ssu_capacity": "infinite"}"#).unwrap();
        assert_eq!(s.gw_capacity, Capacity::Finite(70));
        assert_eq!(s.ssu_capacity, Capacity::Infinite);
        assert_eq!(s.transfer_threshold_hours, 72.0);
        assert_eq!((s.sterilization_min_hours, s.sterilization_max_hours), (1.0, 3.0));
        assert_eq!(s.horizon, Horizon::Drain);
        s.validate().unwrap();
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn scenario_validation() {
        let mut s = Scenario::infinite();
        s.sterilization_min_hours = 4.0;
        assert!(s.validate().is_err());
        let mut s = Scenario::infinite();
        s.transfer_threshold_hours = 0.0;
        assert!(s.validate().is_err());
    }
}
