//! Table-level preprocessing: sparsity pruning, rare-test counting,
//! imputation, correlation pruning, one-hot encoding and temporal splits.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::table::{Column, EncounterTable, FeatureKind};
use crate::domain::FeatureValue;
use crate::error::{Error, Result};
use crate::stats::{mean, pearson};

/// Keeps features whose missing ratio is strictly below `threshold`.
pub fn drop_sparse_features(table: EncounterTable, threshold: f64) -> Result<(EncounterTable, Vec<String>)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("missing-ratio threshold {threshold} outside [0,1]")));
    }
    let mut table = table;
    for c in &mut table.columns {
        c.refresh_missing_ratio();
    }
    let dropped: Vec<String> = table
        .columns
        .iter()
        .filter(|c| c.meta.missing_ratio >= threshold)
        .map(|c| c.meta.name.clone())
        .collect();
    Ok((table.without_columns(&dropped), dropped))
}

/// Appends `new_feature_name` to `target`: per row, the number of present
/// values among the `dropped` columns of `source` (the pre-pruning table,
/// row-aligned with `target`).
pub fn count_rare_tests(
    target: EncounterTable,
    source: &EncounterTable,
    dropped: &[String],
    new_feature_name: &str,
) -> Result<EncounterTable> {
    if source.len() != target.len()
        || source
            .records
            .iter()
            .zip(&target.records)
            .any(|(a, b)| a.encounter_id != b.encounter_id)
    {
        return Err(Error::invalid("source and target tables are not row-aligned"));
    }
    let cols = dropped
        .iter()
        .map(|name| {
            source
                .column(name)
                .ok_or_else(|| Error::invalid(format!("unknown dropped feature `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let counts = (0..source.len())
        .map(|row| {
            let n = cols.iter().filter(|c| !c.values[row].is_missing()).count();
            FeatureValue::Numeric(n as f64)
        })
        .collect();
    let mut target = target;
    target.push_column(Column::new(new_feature_name, FeatureKind::Numeric, counts))?;
    Ok(target)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", content = "value", rename_all = "snake_case")]
pub enum FillValue {
    Mean(f64),
    Mode(String),
}

/// Mean/mode imputation statistics, fit on one table and applied to others.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub fills: BTreeMap<String, FillValue>,
}

impl Imputer {
    pub fn fit(table: &EncounterTable) -> Result<Self> {
        let mut fills = BTreeMap::new();
        for col in &table.columns {
            let fill = match col.meta.kind {
                FeatureKind::Numeric => {
                    let observed: Vec<f64> = col.values.iter().filter_map(FeatureValue::as_f64).collect();
                    FillValue::Mean(mean(&observed).ok_or_else(|| all_missing(col))?)
                }
                FeatureKind::Categorical => {
                    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
                    for v in col.values.iter().filter_map(FeatureValue::as_category) {
                        *freq.entry(v).or_default() += 1;
                    }
                    // BTreeMap iterates in lexicographic order, so the first
                    // maximum is the smallest category among ties.
                    let mut best: Option<(&str, usize)> = None;
                    for (cat, n) in freq {
                        if best.is_none_or(|(_, b)| n > b) {
                            best = Some((cat, n));
                        }
                    }
                    FillValue::Mode(best.ok_or_else(|| all_missing(col))?.0.to_string())
                }
            };
            fills.insert(col.meta.name.clone(), fill);
        }
        Ok(Self { fills })
    }

    /// Fills missing cells of every fitted feature present in `table`.
    pub fn apply(&self, table: EncounterTable) -> Result<EncounterTable> {
        let mut table = table;
        for col in &mut table.columns {
            let Some(fill) = self.fills.get(&col.meta.name) else {
                continue;
            };
            let replacement = match (fill, col.meta.kind) {
                (FillValue::Mean(m), FeatureKind::Numeric) => FeatureValue::Numeric(*m),
                (FillValue::Mode(c), FeatureKind::Categorical) => FeatureValue::Categorical(c.clone()),
                _ => {
                    return Err(Error::data(format!(
                        "feature `{}` changed kind between fit and apply",
                        col.meta.name
                    )))
                }
            };
            for v in &mut col.values {
                if v.is_missing() {
                    *v = replacement.clone();
                }
            }
            col.refresh_missing_ratio();
        }
        Ok(table)
    }
}

fn all_missing(col: &Column) -> Error {
    Error::data(format!(
        "feature `{}` has no observed values; remove it with drop_sparse_features",
        col.meta.name
    ))
}

/// Mean (numeric) / mode (categorical) imputation fit on `table` itself.
pub fn impute(table: EncounterTable) -> Result<EncounterTable> {
    let imputer = Imputer::fit(&table)?;
    imputer.apply(table)
}

/// Drops the later numeric feature of every pair whose |Pearson| exceeds
/// `rho_threshold`, scanning in column order against retained features.
pub fn drop_correlated(table: EncounterTable, rho_threshold: f64) -> Result<(EncounterTable, Vec<String>)> {
    if !(rho_threshold > 0.0 && rho_threshold <= 1.0) {
        return Err(Error::invalid(format!("rho threshold {rho_threshold} outside (0,1]")));
    }
    let numeric: Vec<(String, Vec<Option<f64>>)> = table
        .columns
        .iter()
        .filter(|c| c.meta.kind == FeatureKind::Numeric)
        .map(|c| (c.meta.name.clone(), c.numeric_values()))
        .collect();
    let mut kept: Vec<usize> = Vec::new();
    let mut dropped = Vec::new();
    for (j, (name, col)) in numeric.iter().enumerate() {
        let redundant = kept.iter().any(|&i| {
            let (a, b): (Vec<f64>, Vec<f64>) = numeric[i]
                .1
                .iter()
                .zip(col)
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .unzip();
            pearson(&a, &b).is_some_and(|r| r.abs() > rho_threshold)
        });
        if redundant {
            dropped.push(name.clone());
        } else {
            kept.push(j);
        }
    }
    Ok((table.without_columns(&dropped), dropped))
}

/// Category vocabularies for one-hot encoding.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OneHotEncoder {
    pub categories: BTreeMap<String, Vec<String>>,
}

impl OneHotEncoder {
    pub fn fit(table: &EncounterTable, columns: &[String]) -> Result<Self> {
        let mut categories = BTreeMap::new();
        for name in columns {
            let col = table
                .column(name)
                .ok_or_else(|| Error::invalid(format!("unknown column `{name}`")))?;
            if col.meta.kind != FeatureKind::Categorical {
                return Err(Error::invalid(format!("column `{name}` is not categorical")));
            }
            let cats: BTreeSet<String> = col
                .values
                .iter()
                .filter_map(FeatureValue::as_category)
                .map(str::to_string)
                .collect();
            categories.insert(name.clone(), cats.into_iter().collect());
        }
        Ok(Self { categories })
    }

    /// Replaces each fitted column with `name=category` 0/1 columns in place.
    /// Missing or unseen values become an all-zero row.
    pub fn apply(&self, table: EncounterTable) -> Result<EncounterTable> {
        let mut out = Vec::with_capacity(table.columns.len());
        for col in table.columns {
            let Some(cats) = self.categories.get(&col.meta.name) else {
                out.push(col);
                continue;
            };
            if col.meta.kind != FeatureKind::Categorical {
                return Err(Error::invalid(format!("column `{}` is not categorical", col.meta.name)));
            }
            for cat in cats {
                let values = col
                    .values
                    .iter()
                    .map(|v| FeatureValue::Numeric(if v.as_category() == Some(cat) { 1.0 } else { 0.0 }))
                    .collect();
                out.push(Column::new(format!("{}={}", col.meta.name, cat), FeatureKind::Numeric, values));
            }
        }
        EncounterTable::new(table.records, out, table.epoch)
    }
}

pub fn one_hot_encode(table: EncounterTable, columns: &[String]) -> Result<EncounterTable> {
    let enc = OneHotEncoder::fit(&table, columns)?;
    enc.apply(table)
}

/// Names of every categorical feature, in column order.
pub fn categorical_columns(table: &EncounterTable) -> Vec<String> {
    table
        .columns
        .iter()
        .filter(|c| c.meta.kind == FeatureKind::Categorical)
        .map(|c| c.meta.name.clone())
        .collect()
}

/// `train` holds rows with `triage_time < cutoff`; `test` the rest. Order is kept.
pub fn temporal_split(table: &EncounterTable, cutoff: f64) -> (EncounterTable, EncounterTable) {
    let (train, test): (Vec<usize>, Vec<usize>) =
        (0..table.len()).partition(|&i| table.records[i].triage_time < cutoff);
    (table.select_rows(&train), table.select_rows(&test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::table::{default_epoch, EncounterRecord};

    fn table(cols: Vec<Column>) -> EncounterTable {
        let n = cols.first().map_or(0, |c| c.values.len());
        let records = (0..n)
            .map(|i| EncounterRecord {
                encounter_id: format!("e{i}"),
                patient_hash: format!("p{i}"),
                triage_time: i as f64,
                admit_decision_time: i as f64 + 1.0,
                los_hours: 10.0,
            })
            .collect();
        EncounterTable::new(records, cols, default_epoch()).unwrap()
    }

    fn num(xs: &[Option<f64>]) -> Vec<FeatureValue> {
        xs.iter()
            .map(|x| x.map_or(FeatureValue::Missing, FeatureValue::Numeric))
            .collect()
    }

    fn cat(xs: &[Option<&str>]) -> Vec<FeatureValue> {
        xs.iter()
            .map(|x| x.map_or(FeatureValue::Missing, |s| FeatureValue::Categorical(s.into())))
            .collect()
    }

    #[test]
    fn sparse_threshold_rules() {
        let mk = || {
            table(vec![
                Column::new("dense", FeatureKind::Numeric, num(&[Some(1.0); 5])),
                Column::new("sparse", FeatureKind::Numeric, num(&[Some(1.0), None, None, None, None])),
                Column::new("empty", FeatureKind::Numeric, num(&[None; 5])),
            ])
        };
        let (t, dropped) = drop_sparse_features(mk(), 0.75).unwrap();
        assert_eq!(dropped, vec!["sparse", "empty"]);
        assert_eq!(t.feature_names(), vec!["dense"]);
        let (_, dropped) = drop_sparse_features(mk(), 1.0).unwrap();
        assert_eq!(dropped, vec!["empty"]);
        assert!(drop_sparse_features(mk(), 1.5).is_err());
    }

    #[test]
    fn rare_test_counts() {
        let src = table(vec![
            Column::new("a", FeatureKind::Numeric, num(&[Some(1.0), None, None])),
            Column::new("b", FeatureKind::Numeric, num(&[Some(1.0), Some(2.0), None])),
            Column::new("keep", FeatureKind::Numeric, num(&[Some(0.0); 3])),
        ]);
        let dropped = vec!["a".to_string(), "b".to_string()];
        let pruned = src.clone().without_columns(&dropped);
        let out = count_rare_tests(pruned, &src, &dropped, "lab_test_count_rare").unwrap();
        let vals = out.column("lab_test_count_rare").unwrap().numeric_values();
        assert_eq!(vals, vec![Some(2.0), Some(1.0), Some(0.0)]);
        let err = count_rare_tests(src.clone(), &src, &["zzz".to_string()], "x");
        assert!(err.is_err());
    }

    #[test]
    fn impute_mean_and_mode() {
        let t = table(vec![
            Column::new("n", FeatureKind::Numeric, num(&[Some(1.0), None, Some(3.0), Some(2.0)])),
            Column::new("c", FeatureKind::Categorical, cat(&[Some("a"), Some("a"), None, Some("b")])),
        ]);
        let t = impute(t).unwrap();
        assert_eq!(t.column("n").unwrap().values[1], FeatureValue::Numeric(2.0));
        assert_eq!(t.column("c").unwrap().values[2], FeatureValue::Categorical("a".into()));
        assert_eq!(t.column("n").unwrap().meta.missing_ratio, 0.0);
    }

    #[test]
    fn impute_mode_tie_picks_smallest() {
        // Enumerate both candidates: each appears once, so the tie goes to "a".
        for order in [[Some("b"), Some("a"), None], [Some("a"), Some("b"), None]] {
            let t = table(vec![Column::new("c", FeatureKind::Categorical, cat(&order))]);
            let t = impute(t).unwrap();
            assert_eq!(t.column("c").unwrap().values[2], FeatureValue::Categorical("a".into()));
        }
    }

    #[test]
    fn impute_all_missing_errors() {
        let t = table(vec![Column::new("n", FeatureKind::Numeric, num(&[None, None]))]);
        assert!(matches!(impute(t), Err(Error::Data(_))));
    }

    #[test]
    fn correlated_columns() {
        let x = [Some(1.0), Some(2.0), Some(4.0), Some(3.0)];
        let neg: Vec<Option<f64>> = x.iter().map(|v| v.map(|v| -v)).collect();
        let t = table(vec![
            Column::new("x", FeatureKind::Numeric, num(&x)),
            Column::new("x2", FeatureKind::Numeric, num(&x)),
            Column::new("neg", FeatureKind::Numeric, num(&neg)),
            Column::new("other", FeatureKind::Numeric, num(&[Some(1.0), Some(0.0), Some(0.0), Some(1.0)])),
        ]);
        let (t, dropped) = drop_correlated(t, 0.99).unwrap();
        assert_eq!(dropped, vec!["x2", "neg"]);
        assert_eq!(t.feature_names(), vec!["x", "other"]);
    }

    #[test]
    fn one_hot_blocks() {
        let t = table(vec![Column::new(
            "dow",
            FeatureKind::Categorical,
            cat(&[Some("mon"), Some("tue"), None]),
        )]);
        let enc = OneHotEncoder::fit(&t, &["dow".to_string()]).unwrap();
        let out = enc.apply(t).unwrap();
        assert_eq!(out.feature_names(), vec!["dow=mon", "dow=tue"]);
        let rows: Vec<f64> = (0..3)
            .map(|i| out.columns.iter().map(|c| c.values[i].as_f64().unwrap()).sum())
            .collect();
        assert_eq!(rows, vec![1.0, 1.0, 0.0]);

        let unseen = table(vec![Column::new("dow", FeatureKind::Categorical, cat(&[Some("sun")]))]);
        let out = enc.apply(unseen).unwrap();
        assert!(out.columns.iter().all(|c| c.values[0] == FeatureValue::Numeric(0.0)));

        let numeric = table(vec![Column::new("x", FeatureKind::Numeric, num(&[Some(1.0)]))]);
        assert!(OneHotEncoder::fit(&numeric, &["x".to_string()]).is_err());
    }

    #[test]
    fn split_half_open() {
        let t = table(vec![Column::new("x", FeatureKind::Numeric, num(&[Some(0.0); 4]))]);
        let (train, test) = temporal_split(&t, 2.0);
        assert_eq!(train.len(), 2);
        assert_eq!(test.records[0].triage_time, 2.0);
        let (train, test) = temporal_split(&t, -1.0);
        assert!(train.is_empty());
        assert_eq!(test.len(), 4);
    }
}
