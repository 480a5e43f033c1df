//! L2-regularised logistic regression fit by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::domain::ClassLabel;
use crate::error::{Error, Result};
use crate::stats::{sigmoid, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticHyper {
    pub learning_rate: f64,
    pub max_iters: usize,
    pub l2_penalty: f64,
    pub tolerance: f64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            max_iters: 2_000,
            l2_penalty: 1e-3,
            tolerance: 1e-6,
        }
    }
}

/// Per-column z-score transform fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in x {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Fitted model: `score(x) = sigmoid(intercept + weights . z(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub standardizer: Standardizer,
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    pub fn linear_predictor(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.transform_row(row);
        self.intercept + dot(&self.weights, &z)
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(row))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean negative log-likelihood plus `l2/2 * |w|^2` (intercept unpenalised).
/// `params[0]` is the intercept.
pub fn penalized_loss(params: &[f64], x: &[Vec<f64>], y: &[f64], l2: f64) -> f64 {
    let n = x.len() as f64;
    let (w0, w) = (params[0], &params[1..]);
    let nll: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &t)| {
            let eta = w0 + dot(w, row);
            softplus(eta) - t * eta
        })
        .sum();
    nll / n + 0.5 * l2 * dot(w, w)
}

/// Analytic gradient of [`penalized_loss`].
pub fn penalized_gradient(params: &[f64], x: &[Vec<f64>], y: &[f64], l2: f64) -> Vec<f64> {
    let n = x.len() as f64;
    let (w0, w) = (params[0], &params[1..]);
    let mut grad = vec![0.0; params.len()];
    for (row, &t) in x.iter().zip(y) {
        let r = sigmoid(w0 + dot(w, row)) - t;
        grad[0] += r;
        for (g, v) in grad[1..].iter_mut().zip(row) {
            *g += r * v;
        }
    }
    grad.iter_mut().for_each(|g| *g /= n);
    for (g, wj) in grad[1..].iter_mut().zip(w) {
        *g += l2 * wj;
    }
    grad
}

pub(crate) fn check_finite(x: &[Vec<f64>]) -> Result<()> {
    for (i, row) in x.iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!("non-finite feature value at row {i}, column {j}")));
        }
    }
    Ok(())
}

/// Standardises `x`, then runs gradient descent from zero until the
/// gradient infinity-norm drops below `tolerance` or `max_iters` is hit.
pub fn train_logistic(x: &[Vec<f64>], labels: &[ClassLabel], hyper: &LogisticHyper) -> Result<LogisticModel> {
    if x.len() != labels.len() {
        return Err(Error::invalid("feature rows and labels differ in length"));
    }
    if x.is_empty() {
        return Err(Error::invalid("cannot train on zero rows"));
    }
    if !(hyper.learning_rate > 0.0) || hyper.l2_penalty < 0.0 || !(hyper.tolerance > 0.0) {
        return Err(Error::invalid("learning_rate and tolerance must be positive, l2_penalty non-negative"));
    }
    check_finite(x)?;
    let standardizer = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.transform_row(r)).collect();
    let y: Vec<f64> = labels.iter().map(|l| l.indicator()).collect();
    let mut params = vec![0.0; standardizer.mean.len() + 1];
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..hyper.max_iters {
        let grad = penalized_gradient(&params, &z, &y, hyper.l2_penalty);
        let norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if norm < hyper.tolerance {
            converged = true;
            iterations = it;
            break;
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= hyper.learning_rate * g;
        }
        iterations = it + 1;
    }
    Ok(LogisticModel {
        standardizer,
        intercept: params[0],
        weights: params[1..].to_vec(),
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::{Ls, Ss};

    #[test]
    fn zero_model_scores_half() {
        let m = LogisticModel {
            standardizer: Standardizer::identity(3),
            intercept: 0.0,
            weights: vec![0.0; 3],
            iterations: 0,
            converged: true,
        };
        assert_eq!(m.score(&[5.0, -2.0, 100.0]), 0.5);
    }

    #[test]
    fn separable_one_dimensional() {
        let x: Vec<Vec<f64>> = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0].iter().map(|&v| vec![v]).collect();
        let y = vec![Ss, Ss, Ss, Ls, Ls, Ls];
        let m = train_logistic(&x, &y, &LogisticHyper::default()).unwrap();
        assert!(m.weights[0] > 0.0);
        let acc = x
            .iter()
            .zip(&y)
            .filter(|(r, l)| (m.score(r) >= 0.5) == l.is_ls())
            .count();
        assert_eq!(acc, 6);

        // Brute-force scan: the penalised loss on the standardised data is
        // minimised at a positive weight, matching the sign found above.
        let z: Vec<Vec<f64>> = x.iter().map(|r| m.standardizer.transform_row(r)).collect();
        let yf: Vec<f64> = y.iter().map(|l| l.indicator()).collect();
        let l2 = LogisticHyper::default().l2_penalty;
        let best = (-400..=400)
            .map(|k| k as f64 * 0.05)
            .min_by(|a, b| {
                penalized_loss(&[0.0, *a], &z, &yf, l2).total_cmp(&penalized_loss(&[0.0, *b], &z, &yf, l2))
            })
            .unwrap();
        assert!(best > 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        let x = vec![vec![f64::NAN], vec![1.0]];
        assert!(matches!(train_logistic(&x, &[Ss, Ls], &LogisticHyper::default()), Err(Error::Data(_))));
    }

    #[test]
    fn deterministic() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let y: Vec<ClassLabel> = (0..20).map(|i| if i % 3 == 0 { Ls } else { Ss }).collect();
        let a = train_logistic(&x, &y, &LogisticHyper::default()).unwrap();
        let b = train_logistic(&x, &y, &LogisticHyper::default()).unwrap();
        assert_eq!(a, b);
    }
}
