//! Replication-level accuracy and edge-recovery metrics.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ising::IsingMatrix;

/// A true matrix and `K >= 1` estimates of it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSet {
    truth: IsingMatrix,
    estimates: Vec<IsingMatrix>,
}

impl ReplicationSet {
    pub fn new(truth: IsingMatrix, estimates: Vec<IsingMatrix>) -> Result<Self> {
        if estimates.is_empty() {
            return Err(Error::InvalidConfig("no replication supplied".into()));
        }
        if let Some(e) = estimates.iter().find(|e| e.dim() != truth.dim()) {
            return Err(Error::DimensionMismatch {
                expected: truth.dim(),
                found: e.dim(),
            });
        }
        Ok(ReplicationSet { truth, estimates })
    }

    pub fn truth(&self) -> &IsingMatrix {
        &self.truth
    }

    pub fn estimates(&self) -> &[IsingMatrix] {
        &self.estimates
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}

/// Per-parameter MSE and bias over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct MseBias {
    pub mse: Array2<f64>,
    pub bias: Array2<f64>,
}

impl MseBias {
    /// Rows `(j, l, mse, bias)` for the lower triangle including the diagonal, 0-based.
    pub fn lower_rows(&self) -> Vec<(usize, usize, f64, f64)> {
        let dim = self.mse.nrows();
        let mut out = Vec::new();
        for l in 0..dim {
            for j in l..dim {
                out.push((j, l, self.mse[[j, l]], self.bias[[j, l]]));
            }
        }
        out
    }

    /// MSEs of the off-diagonal parameters `j < l`.
    pub fn edge_mse(&self) -> Vec<f64> {
        let dim = self.mse.nrows();
        IsingMatrix::edge_pairs(dim).map(|(j, l)| self.mse[[j, l]]).collect()
    }
}

pub fn mse_bias(reps: &ReplicationSet) -> MseBias {
    let dim = reps.truth.dim();
    let k = reps.len() as f64;
    let mut mse = Array2::zeros((dim, dim));
    let mut bias = Array2::zeros((dim, dim));
    for e in &reps.estimates {
        let d = e.values() - reps.truth.values();
        mse += &d.mapv(|v| v * v);
        bias += &d;
    }
    MseBias { mse: mse / k, bias: bias / k }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

struct EdgeCounts {
    positives: usize,
    negatives: usize,
}

fn edge_counts(truth: &IsingMatrix) -> EdgeCounts {
    let dim = truth.dim();
    let positives = IsingMatrix::edge_pairs(dim).filter(|&(j, l)| truth.get(j, l) != 0.0).count();
    EdgeCounts {
        positives,
        negatives: dim * (dim - 1) / 2 - positives,
    }
}

/// Every distinct `|s_hat_jl|` (j < l) plus `0` and `+inf`, ascending.
pub fn threshold_grid(reps: &ReplicationSet) -> Vec<f64> {
    let dim = reps.truth.dim();
    let mut grid: Vec<f64> = reps
        .estimates
        .iter()
        .flat_map(|e| IsingMatrix::edge_pairs(dim).map(move |(j, l)| e.get(j, l).abs()))
        .chain([0.0, f64::INFINITY])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Pooled `(TPR, FPR)` at each threshold, an edge being selected when `|s_hat| > tau`.
pub fn roc_curve(reps: &ReplicationSet, thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    let counts = edge_counts(&reps.truth);
    if counts.positives == 0 || counts.negatives == 0 {
        return Err(Error::DegenerateTruth(format!(
            "{} nonzero and {} zero edges; both classes are required",
            counts.positives, counts.negatives
        )));
    }
    let dim = reps.truth.dim();
    let k = reps.len() as f64;
    let mut out = Vec::with_capacity(thresholds.len());
    for &tau in thresholds {
        let (mut tp, mut fp) = (0usize, 0usize);
        for e in &reps.estimates {
            for (j, l) in IsingMatrix::edge_pairs(dim) {
                if e.get(j, l).abs() > tau {
                    if reps.truth.get(j, l) != 0.0 {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
        }
        out.push(RocPoint {
            threshold: tau,
            tpr: tp as f64 / (k * counts.positives as f64),
            fpr: fp as f64 / (k * counts.negatives as f64),
        });
    }
    Ok(out)
}

/// Trapezoidal area under `(FPR, TPR)` points with `(0,0)` and `(1,1)` appended.
pub fn auc(curve: &[RocPoint]) -> f64 {
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.fpr, p.tpr)).collect();
    pts.push((0.0, 0.0));
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum()
}

/// Pooled Jaccard index of `{|s_hat| > tau}` against the true edge set; 0 for an empty union.
pub fn jaccard(reps: &ReplicationSet, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidConfig(format!("threshold {tau} must be positive")));
    }
    let dim = reps.truth.dim();
    let (mut inter, mut union) = (0usize, 0usize);
    for e in &reps.estimates {
        for (j, l) in IsingMatrix::edge_pairs(dim) {
            let selected = e.get(j, l).abs() > tau;
            let present = reps.truth.get(j, l) != 0.0;
            inter += usize::from(selected && present);
            union += usize::from(selected || present);
        }
    }
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(fpr: f64, tpr: f64) -> RocPoint {
        RocPoint { threshold: 0.0, tpr, fpr }
    }

    #[test]
    fn mse_bias_hand() {
        let truth = IsingMatrix::zeros(2);
        let reps = ReplicationSet::new(
            truth,
            [-0.1, 0.0, 0.4]
                .iter()
                .map(|&d| IsingMatrix::from_entries(2, &[(1, 0, d)]))
                .collect(),
        )
        .unwrap();
        let m = mse_bias(&reps);
        assert!((m.mse[[1, 0]] - 0.17 / 3.0).abs() < 1e-15);
        assert!((m.bias[[1, 0]] - 0.1).abs() < 1e-15);
        assert_eq!(m.mse[[0, 0]], 0.0);
    }

    #[test]
    fn auc_examples() {
        assert!((auc(&[pt(0.25, 1.0)]) - 0.875).abs() < 1e-15);
        assert_eq!(auc(&[pt(0.0, 1.0)]), 1.0);
        assert_eq!(auc(&[pt(0.5, 0.5)]), 0.5);
    }

    #[test]
    fn jaccard_toy() {
        let truth = IsingMatrix::from_entries(3, &[(1, 0, 1.0), (2, 1, -1.0)]);
        let est = IsingMatrix::from_entries(3, &[(1, 0, 0.9), (2, 0, 0.8)]);
        let reps = ReplicationSet::new(truth.clone(), vec![est]).unwrap();
        assert!((jaccard(&reps, 0.3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let reps = ReplicationSet::new(truth, vec![IsingMatrix::zeros(3)]).unwrap();
        assert_eq!(jaccard(&reps, 0.3).unwrap(), 0.0);
        assert!(jaccard(&reps, 0.0).is_err());
    }

    #[test]
    fn degenerate_truth() {
        let reps = ReplicationSet::new(IsingMatrix::zeros(3), vec![IsingMatrix::zeros(3)]).unwrap();
        assert!(matches!(roc_curve(&reps, &[0.1]), Err(Error::DegenerateTruth(_))));
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
