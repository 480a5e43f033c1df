//! Two-class linear discriminant analysis with a shared (pooled) covariance.
//!
//! Posterior of LS is obtained from Bayes' rule over the two class-conditional
//! Gaussians `N(mu_k, Sigma)` weighted by empirical priors.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::logistic::check_finite;
use crate::domain::ClassLabel;
use crate::error::{Error, Result};

/// Relative ridge used when no explicit regularization is given:
/// `ridge = DEFAULT_RELATIVE_RIDGE * trace(Sigma) / d`.
pub const DEFAULT_RELATIVE_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaModel {
    /// `[P(SS), P(LS)]`.
    pub priors: [f64; 2],
    /// `[mu_SS, mu_LS]`.
    pub means: [Vec<f64>; 2],
    /// Pooled covariance including the ridge term.
    pub covariance: Vec<Vec<f64>>,
    pub ridge: f64,
    #[serde(skip)]
    factor: Option<Cholesky<f64, Dyn>>,
}

impl PartialEq for LdaModel {
    fn eq(&self, other: &Self) -> bool {
        self.priors == other.priors
            && self.means == other.means
            && self.covariance == other.covariance
            && self.ridge == other.ridge
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows.len();
    DMatrix::from_fn(d, d, |i, j| rows[i][j])
}

fn factorize(cov: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let max_diag = cov.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let chol = Cholesky::new(cov.clone())
        .ok_or_else(|| Error::Singular("pooled covariance is not positive definite; use regularization > 0".into()))?;
    let l = chol.l();
    let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if !(min_pivot > 1e-12 * max_diag.max(f64::MIN_POSITIVE)) {
        return Err(Error::Singular(
            "pooled covariance is numerically singular; use regularization > 0".into(),
        ));
    }
    Ok(chol)
}

impl LdaModel {
    fn factor(&self) -> Result<Cholesky<f64, Dyn>> {
        match &self.factor {
            Some(f) => Ok(f.clone()),
            None => factorize(&to_matrix(&self.covariance)),
        }
    }

    /// Recomputes the cached factorisation (needed after deserialisation).
    pub fn prepare(&mut self) -> Result<()> {
        self.factor = Some(factorize(&to_matrix(&self.covariance))?);
        Ok(())
    }

    /// Log of `P(x | y = k) P(y = k)` up to a constant shared by both classes.
    fn log_joint(chol: &Cholesky<f64, Dyn>, mean: &[f64], prior: f64, x: &[f64]) -> f64 {
        let diff = DVector::from_iterator(x.len(), x.iter().zip(mean).map(|(a, b)| a - b));
        let solved = chol.solve(&diff);
        -0.5 * diff.dot(&solved) + prior.ln()
    }

    /// `[P(SS | x), P(LS | x)]`.
    pub fn posteriors(&self, x: &[f64]) -> Result<[f64; 2]> {
        let chol = self.factor()?;
        Ok(self.posteriors_with(&chol, x))
    }

    fn posteriors_with(&self, chol: &Cholesky<f64, Dyn>, x: &[f64]) -> [f64; 2] {
        let a = Self::log_joint(chol, &self.means[0], self.priors[0], x);
        let b = Self::log_joint(chol, &self.means[1], self.priors[1], x);
        let m = a.max(b);
        let (ea, eb) = ((a - m).exp(), (b - m).exp());
        let total = ea + eb;
        let p_ls = eb / total;
        [1.0 - p_ls, p_ls]
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.posteriors(x)?[1])
    }

    pub fn score_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let chol = self.factor()?;
        Ok(rows.iter().map(|r| self.posteriors_with(&chol, r)[1]).collect())
    }
}

/// Fits priors, class means and the pooled covariance plus `ridge * I`.
/// `regularization = None` uses the relative default.
pub fn train_lda(x: &[Vec<f64>], labels: &[ClassLabel], regularization: Option<f64>) -> Result<LdaModel> {
    if x.len() != labels.len() {
        return Err(Error::invalid("feature rows and labels differ in length"));
    }
    check_finite(x)?;
    let d = x.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::invalid("LDA needs at least one feature"));
    }
    let groups: [Vec<&Vec<f64>>; 2] = [
        x.iter().zip(labels).filter(|(_, l)| !l.is_ls()).map(|(r, _)| r).collect(),
        x.iter().zip(labels).filter(|(_, l)| l.is_ls()).map(|(r, _)| r).collect(),
    ];
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("LDA needs at least 2 samples per class"));
    }
    let n = x.len() as f64;
    let means: [Vec<f64>; 2] = [0, 1].map(|k| {
        let g = &groups[k];
        let mut m = vec![0.0; d];
        for r in g {
            for (a, b) in m.iter_mut().zip(r.iter()) {
                *a += b;
            }
        }
        m.iter_mut().for_each(|a| *a /= g.len() as f64);
        m
    });
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for k in 0..2 {
        for r in &groups[k] {
            let diff = DVector::from_iterator(d, r.iter().zip(&means[k]).map(|(a, b)| a - b));
            cov += &diff * diff.transpose();
        }
    }
    cov /= n - 2.0;
    let ridge = match regularization {
        Some(r) if r < 0.0 || !r.is_finite() => {
            return Err(Error::invalid("regularization must be non-negative"));
        }
        Some(r) => r,
        None => DEFAULT_RELATIVE_RIDGE * cov.trace() / d as f64,
    };
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    // Symmetrise against accumulated rounding.
    let cov = (&cov + cov.transpose()) * 0.5;
    let factor = factorize(&cov)?;
    let priors = [groups[0].len() as f64 / n, groups[1].len() as f64 / n];
    Ok(LdaModel {
        priors,
        means,
        covariance: (0..d).map(|i| (0..d).map(|j| cov[(i, j)]).collect()).collect(),
        ridge,
        factor: Some(factor),
    })
}
