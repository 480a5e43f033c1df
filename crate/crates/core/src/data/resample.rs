//! Class rebalancing: random undersampling of the majority class and SMOTE
//! oversampling of the minority class.

use rand::seq::index::sample;
use rand::Rng;

use super::table::{Dataset, EncounterTable};
use crate::domain::ClassLabel;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

fn split_classes(labels: &[ClassLabel]) -> Result<(Vec<usize>, Vec<usize>)> {
    let (ls, ss): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i].is_ls());
    if ls.is_empty() || ss.is_empty() {
        return Err(Error::invalid("resampling needs both classes present"));
    }
    Ok((ls, ss))
}

/// Returns (minority, majority) row indices; ties treat SS as the minority.
fn minority_majority(labels: &[ClassLabel]) -> Result<(Vec<usize>, Vec<usize>)> {
    let (ls, ss) = split_classes(labels)?;
    Ok(if ls.len() < ss.len() { (ls, ss) } else { (ss, ls) })
}

/// Row indices (ascending) keeping every minority row and an equally sized
/// without-replacement sample of the majority.
pub fn undersample_indices(labels: &[ClassLabel], seed: u64) -> Result<Vec<usize>> {
    let (minority, majority) = minority_majority(labels)?;
    let mut rng = rng_from_seed(seed);
    let picked = sample(&mut rng, majority.len(), minority.len());
    let mut rows: Vec<usize> = minority;
    rows.extend(picked.iter().map(|k| majority[k]));
    rows.sort_unstable();
    Ok(rows)
}

pub fn undersample(data: &Dataset, seed: u64) -> Result<Dataset> {
    Ok(data.select(&undersample_indices(&data.y, seed)?))
}

pub fn undersample_table(table: &EncounterTable, labels: &[ClassLabel], seed: u64) -> Result<(EncounterTable, Vec<ClassLabel>)> {
    if labels.len() != table.len() {
        return Err(Error::invalid("labels and table rows differ in length"));
    }
    let rows = undersample_indices(labels, seed)?;
    Ok((table.select_rows(&rows), rows.iter().map(|&i| labels[i]).collect()))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For each minority row, the positions (into `minority`) of its `k` nearest
/// other minority rows by Euclidean distance, ties broken by position.
pub fn minority_neighbors(x: &[Vec<f64>], minority: &[usize], k: usize) -> Vec<Vec<usize>> {
    minority
        .iter()
        .enumerate()
        .map(|(a, &i)| {
            let mut cand: Vec<(f64, usize)> = minority
                .iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(b, &j)| (sq_dist(&x[i], &x[j]), b))
                .collect();
            cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            cand.truncate(k);
            cand.into_iter().map(|(_, b)| b).collect()
        })
        .collect()
}

/// SMOTE: appends `majority - minority` synthetic minority rows
/// `x_i + lambda * (x_nn - x_i)` with `lambda ~ U(0,1)` and `x_nn` one of the
/// `k` nearest minority neighbours of a uniformly chosen minority `x_i`.
/// Original rows come first, unchanged.
pub fn smote(data: &Dataset, k_neighbors: usize, seed: u64) -> Result<Dataset> {
    if k_neighbors == 0 {
        return Err(Error::invalid("k_neighbors must be positive"));
    }
    let (minority, majority) = minority_majority(&data.y)?;
    if minority.len() <= k_neighbors {
        return Err(Error::invalid(format!(
            "minority class has {} rows; SMOTE needs more than k = {k_neighbors}",
            minority.len()
        )));
    }
    let label = data.y[minority[0]];
    let neighbors = minority_neighbors(&data.x, &minority, k_neighbors);
    let mut rng = rng_from_seed(seed);
    let mut out = data.clone();
    let needed = majority.len() - minority.len();
    for s in 0..needed {
        let a = rng.random_range(0..minority.len());
        let b = neighbors[a][rng.random_range(0..neighbors[a].len())];
        let lambda: f64 = rng.random();
        let xi = &data.x[minority[a]];
        let xn = &data.x[minority[b]];
        let row: Vec<f64> = xi.iter().zip(xn).map(|(p, q)| p + lambda * (q - p)).collect();
        out.x.push(row);
        out.y.push(label);
        out.ids.push(format!("smote-{s}"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::{Ls, Ss};

    #[test]
    fn undersample_balances_and_keeps_minority() {
        let y = vec![Ls, Ls, Ss, Ls, Ss, Ls];
        let rows = undersample_indices(&y, 3).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.contains(&2) && rows.contains(&4));
        assert_eq!(rows.iter().filter(|&&i| y[i] == Ls).count(), 2);
        assert_eq!(rows, undersample_indices(&y, 3).unwrap());
    }

    #[test]
    fn undersample_balanced_is_identity() {
        let y = vec![Ls, Ss, Ls, Ss, Ls, Ss];
        assert_eq!(undersample_indices(&y, 9).unwrap(), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn single_class_rejected() {
        assert!(undersample_indices(&[Ls, Ls], 1).is_err());
        let d = Dataset::from_rows(vec![vec![0.0], vec![1.0]], vec![Ss, Ss]).unwrap();
        assert!(smote(&d, 1, 1).is_err());
    }

    #[test]
    fn smote_segment_geometry() {
        let d = Dataset::from_rows(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, 5.0], vec![6.0, 5.0], vec![7.0, 5.0], vec![8.0, 5.0]],
            vec![Ss, Ss, Ls, Ls, Ls, Ls],
        )
        .unwrap();
        let out = smote(&d, 1, 11).unwrap();
        assert_eq!(out.len(), 8);
        assert_eq!(&out.x[..6], &d.x[..]);
        for row in &out.x[6..] {
            assert_eq!(row[0], row[1]);
            assert!((0.0..=1.0).contains(&row[0]));
        }
        assert_eq!(out.class_counts(), (4, 4));
    }

    #[test]
    fn smote_identical_minority() {
        let d = Dataset::from_rows(
            vec![vec![2.0, 3.0], vec![2.0, 3.0], vec![2.0, 3.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![9.0, 9.0]],
            vec![Ss, Ss, Ss, Ls, Ls, Ls, Ls, Ls],
        )
        .unwrap();
        let out = smote(&d, 2, 5).unwrap();
        assert!(out.x[8..].iter().all(|r| r == &vec![2.0, 3.0]));
    }

    #[test]
    fn smote_needs_more_than_k() {
        let d = Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]], vec![Ss, Ls, Ls, Ls]).unwrap();
        assert!(smote(&d, 1, 1).is_err());
    }
}
