use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Column, EncounterTable, FeatureKind};
use crate::domain::{ClassLabel, FeatureValue};
use crate::error::{Error, Result};
use crate::stats::{average_ranks, pearson};

pub const DEFAULT_MI_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    Pearson,
    Spearman,
    CramersV,
    ChiSquare,
    FStatistic,
    MutualInformation,
}

impl Scorer {
    pub const ALL: [Scorer; 6] = [
        Scorer::Pearson,
        Scorer::Spearman,
        Scorer::CramersV,
        Scorer::ChiSquare,
        Scorer::FStatistic,
        Scorer::MutualInformation,
    ];
}

/// Scores of one feature against the LS indicator. `None` means the
/// scorer does not apply or is undefined (e.g. a constant feature).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScores {
    pub name: String,
    pub kind: FeatureKind,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub cramers_v: Option<f64>,
    pub chi_square: Option<f64>,
    pub f_statistic: Option<f64>,
    pub mutual_information: Option<f64>,
}

impl FeatureScores {
    pub fn get(&self, scorer: Scorer) -> Option<f64> {
        match scorer {
            Scorer::Pearson => self.pearson,
            Scorer::Spearman => self.spearman,
            Scorer::CramersV => self.cramers_v,
            Scorer::ChiSquare => self.chi_square,
            Scorer::FStatistic => self.f_statistic,
            Scorer::MutualInformation => self.mutual_information,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScoreTable {
    pub features: Vec<FeatureScores>,
}

/// Equal-frequency bin of each value; tied values share a bin.
pub fn equal_frequency_bins(xs: &[f64], bins: usize) -> Vec<usize> {
    let n = xs.len() as f64;
    average_ranks(xs)
        .into_iter()
        .map(|r| (((r - 1.0) * bins as f64 / n).floor() as usize).min(bins - 1))
        .collect()
}

/// 2 x c contingency table of label against category codes.
fn contingency(codes: &[usize], y: &[bool]) -> Vec<[f64; 2]> {
    let c = codes.iter().max().map_or(0, |m| m + 1);
    let mut t = vec![[0.0; 2]; c];
    for (&k, &l) in codes.iter().zip(y) {
        t[k][usize::from(l)] += 1.0;
    }
    t.retain(|r| r[0] + r[1] > 0.0);
    t
}

/// Pearson chi-square statistic of a c x 2 table.
pub fn chi_square(table: &[[f64; 2]]) -> f64 {
    let n: f64 = table.iter().map(|r| r[0] + r[1]).sum();
    let col = [0, 1].map(|j| table.iter().map(|r| r[j]).sum::<f64>());
    let mut chi = 0.0;
    for r in table {
        let row = r[0] + r[1];
        for j in 0..2 {
            let e = row * col[j] / n;
            if e > 0.0 {
                chi += (r[j] - e).powi(2) / e;
            }
        }
    }
    chi
}

fn cramers_v(table: &[[f64; 2]], chi: f64) -> Option<f64> {
    let n: f64 = table.iter().map(|r| r[0] + r[1]).sum();
    let cols_used = [0, 1].iter().filter(|&&j| table.iter().any(|r| r[j] > 0.0)).count();
    let dof = (table.len().min(cols_used)).checked_sub(1).filter(|&d| d > 0)?;
    Some((chi / (n * dof as f64)).sqrt().min(1.0))
}

/// Plug-in mutual information in nats.
pub fn mutual_information(table: &[[f64; 2]]) -> f64 {
    let n: f64 = table.iter().map(|r| r[0] + r[1]).sum();
    let col = [0, 1].map(|j| table.iter().map(|r| r[j]).sum::<f64>());
    let mut mi = 0.0;
    for r in table {
        let row = r[0] + r[1];
        for j in 0..2 {
            if r[j] > 0.0 {
                mi += r[j] / n * (r[j] * n / (row * col[j])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// One-way ANOVA F between the LS and SS groups.
pub fn anova_f(xs: &[f64], y: &[bool]) -> Option<f64> {
    let n = xs.len() as f64;
    let mut sums = [0.0; 2];
    let mut counts = [0.0; 2];
    for (&x, &l) in xs.iter().zip(y) {
        sums[usize::from(l)] += x;
        counts[usize::from(l)] += 1.0;
    }
    if counts.contains(&0.0) || n < 3.0 {
        return None;
    }
    let grand = (sums[0] + sums[1]) / n;
    let means = [sums[0] / counts[0], sums[1] / counts[1]];
    let ssb: f64 = (0..2).map(|g| counts[g] * (means[g] - grand).powi(2)).sum();
    let ssw: f64 = xs.iter().zip(y).map(|(&x, &l)| (x - means[usize::from(l)]).powi(2)).sum();
    (ssw > 0.0).then(|| ssb / (ssw / (n - 2.0)))
}

fn score_column(col: &Column, labels: &[ClassLabel], bins: usize) -> FeatureScores {
    let present: Vec<usize> = (0..col.values.len()).filter(|&i| !col.values[i].is_missing()).collect();
    let y: Vec<bool> = present.iter().map(|&i| labels[i].is_ls()).collect();
    let mut s = FeatureScores {
        name: col.name().to_string(),
        kind: col.meta.kind,
        pearson: None,
        spearman: None,
        cramers_v: None,
        chi_square: None,
        f_statistic: None,
        mutual_information: None,
    };
    if present.is_empty() {
        return s;
    }
    let codes: Vec<usize> = match col.meta.kind {
        FeatureKind::Numeric => {
            let xs: Vec<f64> = present.iter().filter_map(|&i| col.values[i].as_f64()).collect();
            let yf: Vec<f64> = y.iter().map(|&b| f64::from(u8::from(b))).collect();
            s.pearson = pearson(&xs, &yf);
            s.spearman = pearson(&average_ranks(&xs), &average_ranks(&yf));
            s.f_statistic = anova_f(&xs, &y);
            equal_frequency_bins(&xs, bins)
        }
        FeatureKind::Categorical => {
            let mut index: BTreeMap<&str, usize> = BTreeMap::new();
            present
                .iter()
                .map(|&i| {
                    let key = match &col.values[i] {
                        FeatureValue::Categorical(c) => c.as_str(),
                        _ => "",
                    };
                    let next = index.len();
                    *index.entry(key).or_insert(next)
                })
                .collect()
        }
    };
    let table = contingency(&codes, &y);
    let chi = chi_square(&table);
    s.chi_square = Some(chi);
    s.cramers_v = cramers_v(&table, chi);
    s.mutual_information = Some(mutual_information(&table));
    s
}

/// Scores every feature column; missing cells are skipped per feature.
pub fn feature_scores(table: &EncounterTable, labels: &[ClassLabel], bins: usize) -> Result<FeatureScoreTable> {
    if labels.len() != table.len() {
        return Err(Error::invalid("labels and table rows differ in length"));
    }
    if bins < 2 {
        return Err(Error::invalid("need at least 2 bins"));
    }
    Ok(FeatureScoreTable {
        features: table.columns.iter().map(|c| score_column(c, labels, bins)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub name: String,
    /// Mean over applicable scorers of the per-scorer rank (1 = best).
    pub mean_rank: f64,
    /// 1-based position in the final ordering.
    pub ensemble_rank: usize,
}

/// Mean-rank aggregation across scorers; ordering by mean rank, then name.
pub fn ensemble_rank(scores: &FeatureScoreTable) -> Result<Vec<RankedFeature>> {
    if scores.features.is_empty() {
        return Err(Error::invalid("empty feature score table"));
    }
    let mut sum = vec![0.0; scores.features.len()];
    let mut used = vec![0usize; scores.features.len()];
    for scorer in Scorer::ALL {
        let present: Vec<(usize, f64)> = scores
            .features
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.get(scorer).map(|v| (i, -v.abs())))
            .collect();
        let ranks = average_ranks(&present.iter().map(|p| p.1).collect::<Vec<_>>());
        for ((i, _), r) in present.iter().zip(ranks) {
            sum[*i] += r;
            used[*i] += 1;
        }
    }
    if let Some(i) = used.iter().position(|&u| u == 0) {
        return Err(Error::invalid(format!("feature `{}` has no applicable scorer", scores.features[i].name)));
    }
    let mut out: Vec<RankedFeature> = scores
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| RankedFeature {
            name: f.name.clone(),
            mean_rank: sum[i] / used[i] as f64,
            ensemble_rank: 0,
        })
        .collect();
    out.sort_by(|a, b| a.mean_rank.total_cmp(&b.mean_rank).then_with(|| a.name.cmp(&b.name)));
    for (pos, r) in out.iter_mut().enumerate() {
        r.ensemble_rank = pos + 1;
    }
    Ok(out)
}
