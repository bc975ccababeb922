//! Identifiability of the Ising model when the first two items are screening
//! items: the probabilities of every pattern with `y_1 = 1` or `y_2 = 1`,
//! together with `P(Y_1 = 0, Y_2 = 0)`, determine `S` uniquely.
//!
//! [`recover_from_restricted`] makes the argument constructive. Log-ratios
//! against the baseline pattern `y_d = (1, 0, ..., 0)` are linear in `S` and
//! pin down everything except the one-dimensional family
//! `s_11 - s_22 = const`, `2 s_12 + s_22 = const`. The remaining scalar
//! equation `P(0,0) / P(y_d)` is strictly decreasing in `s_11` and is solved
//! by bisection.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::halfvec::{half_len, vech_index};
use crate::ising::{log_normalizing_constant, log_pmf_table, IsingMatrix, ENUMERATION_LIMIT};
use crate::linalg::Cholesky;

const SUM_TOLERANCE: f64 = 1e-12;
const RECOVERY_TOLERANCE: f64 = 1e-8;
const INITIAL_HALF_WIDTH: f64 = 50.0;

/// Pattern probabilities observable under screening on items 1 and 2.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedDistribution {
    dim: usize,
    probs_a: BTreeMap<u32, f64>,
    prob_00: f64,
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn in_screened_set(bits: u32) -> bool {
    bits & 0b11 != 0
}

impl RestrictedDistribution {
    /// Validates the table: `3 * 2^(J-2)` patterns, each with `y_1 = 1` or
    /// `y_2 = 1`, all probabilities positive and summing (with `prob_00`) to one.
    pub fn new(dim: usize, probs_a: BTreeMap<u32, f64>, prob_00: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::DimensionTooSmall { dim, min: 3 });
        }
        if dim > ENUMERATION_LIMIT {
            return Err(Error::DimensionTooLarge {
                dim,
                max: ENUMERATION_LIMIT,
            });
        }
        let expected = 3usize << (dim - 2);
        if probs_a.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: probs_a.len(),
            });
        }
        for (&bits, &p) in &probs_a {
            if bits >> dim != 0 || !in_screened_set(bits) {
                return Err(Error::Parse(format!(
                    "pattern {bits:#b} is outside the screened set"
                )));
            }
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Parse(format!("probability {p} is not positive")));
            }
        }
        if !(prob_00 > 0.0 && prob_00.is_finite()) {
            return Err(Error::Parse(format!("P(0,0) = {prob_00} is not positive")));
        }
        let total = neumaier_sum(probs_a.values().copied().chain(std::iter::once(prob_00)));
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Parse(format!("probabilities sum to {total}, not 1")));
        }
        Ok(RestrictedDistribution {
            dim,
            probs_a,
            prob_00,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn probs_a(&self) -> &BTreeMap<u32, f64> {
        &self.probs_a
    }

    pub fn prob_00(&self) -> f64 {
        self.prob_00
    }

    pub fn prob(&self, bits: u32) -> Option<f64> {
        self.probs_a.get(&bits).copied()
    }
}

/// Exact restricted distribution of `S` by enumeration.
pub fn restricted_distribution(s: &IsingMatrix) -> Result<RestrictedDistribution> {
    let dim = s.dim();
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim, min: 3 });
    }
    let table = log_pmf_table(s)?;
    let mut probs_a = BTreeMap::new();
    let mut zero_zero = Vec::with_capacity(1 << (dim - 2));
    for (bits, lp) in table.iter().enumerate() {
        let bits = bits as u32;
        if in_screened_set(bits) {
            probs_a.insert(bits, lp.exp());
        } else {
            zero_zero.push(lp.exp());
        }
    }
    let prob_00 = neumaier_sum(zero_zero.into_iter());
    Ok(RestrictedDistribution {
        dim,
        probs_a,
        prob_00,
    })
}

/// Patterns used for the linear equations: the screened patterns whose
/// support beyond items 1 and 2 has at most two items.
fn equation_patterns(dim: usize) -> Vec<u32> {
    let mut tails = vec![0u32];
    for a in 2..dim {
        tails.push(1 << a);
    }
    for a in 2..dim {
        for b in a + 1..dim {
            tails.push((1 << a) | (1 << b));
        }
    }
    let mut out = Vec::with_capacity(3 * tails.len());
    for tail in tails {
        for head in [0b01u32, 0b10, 0b11] {
            let bits = head | tail;
            if bits != 0b01 {
                out.push(bits);
            }
        }
    }
    out
}

/// Row of the linear system for pattern `bits` over `vech(S)` minus `s_11`:
/// coefficient of each parameter in `y'Sy / 2`.
fn equation_row(bits: u32, dim: usize) -> Array1<f64> {
    let mut row = Array1::zeros(half_len(dim) - 1);
    let on: Vec<usize> = (0..dim).filter(|&k| bits >> k & 1 == 1).collect();
    for (a, &i) in on.iter().enumerate() {
        let idx = vech_index(i, i, dim);
        if idx != 0 {
            row[idx - 1] += 0.5;
        }
        for &k in &on[..a] {
            row[vech_index(i, k, dim) - 1] += 1.0;
        }
    }
    row
}

/// Reconstructs `S` from its restricted distribution.
pub fn recover_from_restricted(r: &RestrictedDistribution) -> Result<IsingMatrix> {
    let dim = r.dim;
    let baseline = r.prob(0b01).ok_or(Error::RankDeficient)?;
    let log_base = baseline.ln();

    // (a) linear equations with s_11 held at zero
    let patterns = equation_patterns(dim);
    let unknowns = half_len(dim) - 1;
    let mut design = Array2::zeros((patterns.len(), unknowns));
    let mut target = Array1::zeros(patterns.len());
    for (e, &bits) in patterns.iter().enumerate() {
        design.row_mut(e).assign(&equation_row(bits, dim));
        let p = r.prob(bits).ok_or(Error::RankDeficient)?;
        target[e] = p.ln() - log_base;
    }
    let normal = design.t().dot(&design);
    let chol = Cholesky::factor(normal.view()).map_err(|_| Error::RankDeficient)?;
    let max_diag = normal.diag().iter().cloned().fold(0.0, f64::max);
    let min_pivot = chol.lower().diag().iter().map(|d| d * d).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-12 * max_diag {
        return Err(Error::RankDeficient);
    }
    let theta = chol.solve_vec(design.t().dot(&target).view());
    let linear_residual = (design.dot(&theta) - &target)
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);

    let mut base = Array2::zeros((dim, dim));
    for a in 1..half_len(dim) {
        let (i, j) = crate::halfvec::vech_position(a, dim);
        base[[i, j]] = theta[a - 1];
        base[[j, i]] = theta[a - 1];
    }

    // (b) P(0,0) / P(y_d) = exp(-s_11 / 2) * sum_{y_1 = y_2 = 0} exp(y'Sy / 2)
    let log_ratio = r.prob_00.ln() - log_base;
    let tail = base.slice(ndarray::s![2.., 2..]).to_owned();
    let log_tail_sum = log_normalizing_constant(&IsingMatrix::new(tail)?)?;
    let equation = |s11: f64| log_tail_sum - 0.5 * s11 - log_ratio;

    let seed = -2.0 * (log_ratio - (0.5 * base[[2, 2]]).exp().ln_1p());
    let s11 = bisect_decreasing(equation, seed)?;
    let scalar_residual = equation(s11).abs();

    base[[0, 0]] += s11;
    base[[1, 1]] += s11;
    base[[0, 1]] -= 0.5 * s11;
    base[[1, 0]] -= 0.5 * s11;

    let residual = linear_residual.max(scalar_residual);
    if residual > RECOVERY_TOLERANCE {
        return Err(Error::Inconsistent(residual));
    }
    IsingMatrix::new(base)
}

/// Root of a strictly decreasing function, bracketing around `seed` and
/// widening the bracket geometrically when needed.
fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, seed: f64) -> Result<f64> {
    let mut half = INITIAL_HALF_WIDTH;
    let (mut lo, mut hi) = (seed - half, seed + half);
    let mut tries = 0;
    while !(f(lo) >= 0.0 && f(hi) <= 0.0) {
        tries += 1;
        if tries > 20 || !seed.is_finite() {
            return Err(Error::NotBracketed { lo, hi });
        }
        half *= 2.0;
        lo = seed - half;
        hi = seed + half;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_restricted() {
        let r = restricted_distribution(&IsingMatrix::zeros(3)).unwrap();
        assert_eq!(r.probs_a().len(), 6);
        for &p in r.probs_a().values() {
            assert!((p - 0.125).abs() < 1e-15);
        }
        assert!((r.prob_00() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_matrix_round_trip() {
        let r = restricted_distribution(&IsingMatrix::zeros(4)).unwrap();
        let s = recover_from_restricted(&r).unwrap();
        assert!(s.max_abs_diff(&IsingMatrix::zeros(4)) < 1e-10);
    }

    #[test]
    fn too_small_rejected() {
        assert_eq!(
            restricted_distribution(&IsingMatrix::zeros(2)).unwrap_err(),
            Error::DimensionTooSmall { dim: 2, min: 3 }
        );
    }

    #[test]
    fn equation_counts() {
        // J = 4: 12 patterns in A_{3,4}, minus the baseline
        assert_eq!(equation_patterns(4).len(), 11);
        assert_eq!(equation_patterns(3).len(), 5);
    }

    #[test]
    fn validation_catches_bad_tables() {
        let r = restricted_distribution(&IsingMatrix::zeros(3)).unwrap();
        let mut probs = r.probs_a().clone();
        assert!(RestrictedDistribution::new(3, probs.clone(), 0.25).is_ok());
        assert!(RestrictedDistribution::new(3, probs.clone(), 0.3).is_err());
        probs.remove(&0b01);
        assert!(RestrictedDistribution::new(3, probs, 0.375).is_err());
    }

    #[test]
    fn inconsistent_table_detected() {
        let r = restricted_distribution(&IsingMatrix::zeros(4)).unwrap();
        let mut probs = r.probs_a().clone();
        // perturb two patterns while keeping the total at one
        *probs.get_mut(&0b0111).unwrap() += 0.01;
        *probs.get_mut(&0b1011).unwrap() -= 0.01;
        let bad = RestrictedDistribution::new(4, probs, r.prob_00()).unwrap();
        assert!(matches!(recover_from_restricted(&bad), Err(Error::Inconsistent(_))));
    }
}
