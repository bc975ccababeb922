//! Exact evaluation of the Ising model
//! `p(y | S) = exp(y'Sy / 2) / c(S)` over binary patterns `y ∈ {0,1}^J`.
//!
//! The diagonal of `S` carries the intercepts; because of the quadratic form
//! the effective logistic intercept of item `j` is `s_jj / 2`.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `J` for which the exact operations enumerate all `2^J` patterns.
pub const ENUMERATION_LIMIT: usize = 20;

/// Symmetric `J x J` Ising parameter matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct IsingMatrix {
    values: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRepr> for IsingMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        if repr.matrix.len() != repr.dim {
            return Err(Error::DimensionMismatch {
                expected: repr.dim,
                found: repr.matrix.len(),
            });
        }
        IsingMatrix::from_rows(&repr.matrix)
    }
}

impl From<IsingMatrix> for MatrixRepr {
    fn from(m: IsingMatrix) -> Self {
        MatrixRepr {
            dim: m.dim(),
            matrix: m.to_rows(),
        }
    }
}

impl IsingMatrix {
    /// Wraps a square matrix, rejecting any asymmetry (exact comparison).
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        if r == 0 {
            return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
        }
        for i in 0..r {
            for j in 0..i {
                if values[[i, j]] != values[[j, i]] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(IsingMatrix { values })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "Ising matrix needs at least one item");
        IsingMatrix {
            values: Array2::zeros((dim, dim)),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut values = Array2::zeros((dim, dim));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                values[[i, j]] = v;
            }
        }
        Self::new(values)
    }

    /// Builds a matrix from `(row, col, value)` triples, mirroring each entry.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut values = Array2::zeros((dim, dim));
        for &(i, j, v) in entries {
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
        IsingMatrix { values }
    }

    /// Symmetrises by copying the lower triangle onto the upper one.
    pub fn from_lower(mut values: Array2<f64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        for i in 0..r {
            for j in 0..i {
                values[[j, i]] = values[[i, j]];
            }
        }
        Self::new(values)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Row (equivalently column) `j`, the coefficient vector of item `j`'s conditional.
    pub fn row(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.row(j)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.outer_iter().map(|r| r.to_vec()).collect()
    }

    /// `y'Sy / 2` for a binary pattern given as a bitmask (bit `k` is item `k`).
    pub fn energy_bits(&self, bits: u32) -> f64 {
        let j = self.dim();
        let mut e = 0.0;
        for a in 0..j {
            if bits >> a & 1 == 0 {
                continue;
            }
            e += 0.5 * self.values[[a, a]];
            for b in 0..a {
                if bits >> b & 1 == 1 {
                    e += self.values[[a, b]];
                }
            }
        }
        e
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &IsingMatrix) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Off-diagonal pairs `(j, l)` with `j < l`.
    pub fn edge_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..dim).flat_map(move |j| (j + 1..dim).map(move |l| (j, l)))
    }
}

/// Converts a binary slice into a pattern bitmask.
pub fn pattern_bits(y: &[u8]) -> Result<u32> {
    if y.len() > 32 {
        return Err(Error::DimensionTooLarge {
            dim: y.len(),
            max: 32,
        });
    }
    let mut bits = 0u32;
    for (k, &v) in y.iter().enumerate() {
        match v {
            0 => {}
            1 => bits |= 1 << k,
            other => return Err(Error::NonBinary { index: k, value: other }),
        }
    }
    Ok(bits)
}

pub fn bits_to_pattern(bits: u32, dim: usize) -> Vec<u8> {
    (0..dim).map(|k| (bits >> k & 1) as u8).collect()
}

fn check_enumerable(dim: usize) -> Result<()> {
    if dim > ENUMERATION_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            max: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Visits every pattern in Gray-code order with its energy `y'Sy / 2`.
///
/// Each step flips one item, so the energy is updated in `O(J)` from a
/// running local field instead of recomputed.
pub fn for_each_pattern<F: FnMut(u32, f64)>(s: &IsingMatrix, mut visit: F) -> Result<()> {
    let dim = s.dim();
    check_enumerable(dim)?;
    let vals = s.values();
    // field[k] = sum_{l != k} s_kl y_l
    let mut field = vec![0.0; dim];
    let mut bits = 0u32;
    let mut energy = 0.0;
    visit(bits, energy);
    for i in 1u64..(1u64 << dim) {
        let k = i.trailing_zeros() as usize;
        let turning_on = bits >> k & 1 == 0;
        let delta = 0.5 * vals[[k, k]] + field[k];
        let sign = if turning_on { 1.0 } else { -1.0 };
        energy += sign * delta;
        bits ^= 1 << k;
        for (l, f) in field.iter_mut().enumerate() {
            if l != k {
                *f += sign * vals[[l, k]];
            }
        }
        visit(bits, energy);
    }
    Ok(())
}

/// `log c(S)` by streaming log-sum-exp over all `2^J` patterns.
pub fn log_normalizing_constant(s: &IsingMatrix) -> Result<f64> {
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for_each_pattern(s, |_, e| {
        if e > max {
            acc = acc * (max - e).exp() + 1.0;
            max = e;
        } else {
            acc += (e - max).exp();
        }
    })?;
    Ok(max + acc.ln())
}

/// `c(S) = sum_y exp(y'Sy / 2)`.
pub fn normalizing_constant(s: &IsingMatrix) -> Result<f64> {
    Ok(log_normalizing_constant(s)?.exp())
}

/// `log p(y | S)`.
pub fn log_pmf(y: &[u8], s: &IsingMatrix) -> Result<f64> {
    if y.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: y.len(),
        });
    }
    let bits = pattern_bits(y)?;
    Ok(s.energy_bits(bits) - log_normalizing_constant(s)?)
}

/// Log probabilities of all `2^J` patterns, indexed by bitmask.
pub fn log_pmf_table(s: &IsingMatrix) -> Result<Vec<f64>> {
    let dim = s.dim();
    check_enumerable(dim)?;
    let mut table = vec![0.0; 1usize << dim];
    for_each_pattern(s, |bits, e| table[bits as usize] = e)?;
    let max = table.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_c = max + table.iter().map(|e| (e - max).exp()).sum::<f64>().ln();
    for v in &mut table {
        *v -= log_c;
    }
    Ok(table)
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logit of item `j`'s conditional: `s_jj / 2 + sum_{k != j} s_jk y_k`.
pub fn conditional_logit(j: usize, y: &[u8], row: ArrayView1<'_, f64>) -> Result<f64> {
    if row.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: row.len(),
            found: y.len(),
        });
    }
    if j >= y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: j + 1,
        });
    }
    let mut logit = 0.5 * row[j];
    for (k, (&yk, &sk)) in y.iter().zip(row.iter()).enumerate() {
        if k != j && yk != 0 {
            logit += sk;
        }
    }
    Ok(logit)
}

/// `P(Y_j = 1 | y_{-j})` under coefficient row `row`; `y[j]` is ignored.
pub fn conditional_success_prob(j: usize, y: &[u8], row: ArrayView1<'_, f64>) -> Result<f64> {
    Ok(logistic(conditional_logit(j, y, row)?))
}

/// Log pseudo-likelihood `sum_i sum_j log p(y_ij | y_i,-j, S)` of complete data.
pub fn pseudo_log_likelihood(data: ArrayView2<'_, u8>, s: &IsingMatrix) -> Result<f64> {
    let (_, dim) = data.dim();
    if dim != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: dim,
        });
    }
    let mut total = 0.0;
    for row in data.outer_iter() {
        let y = row.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| row.to_vec());
        for (idx, &v) in y.iter().enumerate() {
            if v > 1 {
                return Err(Error::MissingCells);
            }
            let logit = conditional_logit(idx, &y, s.row(idx))?;
            // log sigma(x) = -softplus(-x); log(1 - sigma(x)) = -softplus(x)
            total -= if v == 1 {
                softplus(-logit)
            } else {
                softplus(logit)
            };
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn zero_matrix_constant_is_two_to_the_j() {
        let s = IsingMatrix::zeros(3);
        assert_abs_diff_eq!(normalizing_constant(&s).unwrap(), 8.0, epsilon = 1e-12);
    }

    #[test]
    fn single_item_closed_form() {
        let s = IsingMatrix::new(array![[2.0 * 3f64.ln()]]).unwrap();
        assert_abs_diff_eq!(normalizing_constant(&s).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn enumeration_bound_enforced() {
        let s = IsingMatrix::zeros(21);
        assert!(matches!(
            normalizing_constant(&s),
            Err(Error::DimensionTooLarge { dim: 21, .. })
        ));
    }

    #[test]
    fn uniform_log_pmf() {
        let s = IsingMatrix::zeros(4);
        let lp = log_pmf(&[1, 0, 1, 1], &s).unwrap();
        assert_abs_diff_eq!(lp, (1.0f64 / 16.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn two_item_log_pmf() {
        let s = IsingMatrix::from_entries(2, &[(0, 1, 2f64.ln())]);
        let lp = log_pmf(&[1, 1], &s).unwrap();
        assert_abs_diff_eq!(lp, (2.0f64 / 5.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn log_pmf_rejects_bad_input() {
        let s = IsingMatrix::zeros(3);
        assert!(matches!(log_pmf(&[0, 2, 1], &s), Err(Error::NonBinary { index: 1, value: 2 })));
        assert!(matches!(log_pmf(&[0, 1], &s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn conditional_examples() {
        let zero = ndarray::Array1::<f64>::zeros(3);
        assert_eq!(conditional_success_prob(0, &[0, 1, 1], zero.view()).unwrap(), 0.5);
        let row = ndarray::array![0.0, 3f64.ln(), 0.0];
        let p = conditional_success_prob(0, &[1, 1, 0], row.view()).unwrap();
        assert_abs_diff_eq!(p, 0.75, epsilon = 1e-15);
        assert!(conditional_success_prob(0, &[1, 1], row.view()).is_err());
    }

    #[test]
    fn pseudo_likelihood_examples() {
        let data = Array2::<u8>::from_shape_vec((3, 2), vec![1, 0, 0, 0, 1, 1]).unwrap();
        let s = IsingMatrix::zeros(2);
        let pl = pseudo_log_likelihood(data.view(), &s).unwrap();
        assert_abs_diff_eq!(pl, 6.0 * 0.5f64.ln(), epsilon = 1e-12);

        let s = IsingMatrix::from_entries(2, &[(0, 1, 1.0)]);
        let one = Array2::<u8>::from_shape_vec((1, 2), vec![1, 0]).unwrap();
        let expected = logistic(0.0).ln() + (1.0 - logistic(1.0)).ln();
        assert_abs_diff_eq!(
            pseudo_log_likelihood(one.view(), &s).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pseudo_likelihood_rejects_missing() {
        let data = Array2::<u8>::from_shape_vec((1, 2), vec![1, 255]).unwrap();
        assert_eq!(
            pseudo_log_likelihood(data.view(), &IsingMatrix::zeros(2)),
            Err(Error::MissingCells)
        );
    }

    #[test]
    fn asymmetric_rejected() {
        let err = IsingMatrix::new(array![[0.0, 1.0], [0.5, 0.0]]).unwrap_err();
        assert_eq!(err, Error::NotSymmetric { row: 1, col: 0 });
    }

    #[test]
    fn gray_code_matches_direct_energy() {
        let s = IsingMatrix::from_rows(&[
            vec![0.3, -0.7, 1.1],
            vec![-0.7, -0.2, 0.4],
            vec![1.1, 0.4, 0.9],
        ])
        .unwrap();
        let mut seen = 0;
        for_each_pattern(&s, |bits, e| {
            seen += 1;
            assert_abs_diff_eq!(e, s.energy_bits(bits), epsilon = 1e-12);
        })
        .unwrap();
        assert_eq!(seen, 8);
    }

    #[test]
    fn json_round_trip() {
        let s = IsingMatrix::from_entries(3, &[(0, 1, 0.25), (2, 2, -1.5)]);
        let text = serde_json::to_string(&s).unwrap();
        let back: IsingMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
        assert!(serde_json::from_str::<IsingMatrix>(r#"{"dim":2,"matrix":[[0,1],[2,0]]}"#).is_err());
    }
}
