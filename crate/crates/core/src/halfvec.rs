//! Half-vectorization of symmetric matrices and the duplication/selection
//! matrices that relate `vech(S)` to `vec(S)` and to individual columns.
//!
//! Ordering is column-major over the lower triangle:
//! `(s_11, ..., s_J1, s_22, ..., s_J2, ..., s_JJ)`.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::ising::IsingMatrix;

/// `alpha = vech(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfVec {
    dim: usize,
    values: Array1<f64>,
}

/// Number of free parameters `J(J+1)/2`.
#[inline]
pub fn half_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Position of `s_ij` (`i >= j`, zero based) inside `vech(S)`.
#[inline]
pub fn vech_index(i: usize, j: usize, dim: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    j * dim + i - j * (j + 1) / 2
}

/// Inverse of [`vech_index`]: the `(row, col)` pair with `row >= col`.
pub fn vech_position(index: usize, dim: usize) -> (usize, usize) {
    let mut start = 0;
    for col in 0..dim {
        let len = dim - col;
        if index < start + len {
            return (col + index - start, col);
        }
        start += len;
    }
    panic!("vech index {index} out of range for dimension {dim}");
}

/// Solves `J(J+1)/2 = len` for `J`.
pub fn dim_from_half_len(len: usize) -> Result<usize> {
    let mut dim = 0usize;
    while half_len(dim) < len {
        dim += 1;
    }
    if half_len(dim) != len || dim == 0 {
        return Err(Error::InvalidHalfVecLength(len));
    }
    Ok(dim)
}

impl HalfVec {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        let dim = dim_from_half_len(values.len())?;
        Ok(HalfVec { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array1<f64> {
        self.values
    }
}

pub fn vech(s: &IsingMatrix) -> HalfVec {
    let dim = s.dim();
    let mut values = Array1::zeros(half_len(dim));
    let mut k = 0;
    for j in 0..dim {
        for i in j..dim {
            values[k] = s.get(i, j);
            k += 1;
        }
    }
    HalfVec { dim, values }
}

pub fn vech_inverse(alpha: &HalfVec) -> IsingMatrix {
    let dim = alpha.dim;
    let mut m = Array2::zeros((dim, dim));
    let mut k = 0;
    for j in 0..dim {
        for i in j..dim {
            m[[i, j]] = alpha.values[k];
            m[[j, i]] = alpha.values[k];
            k += 1;
        }
    }
    IsingMatrix::new(m).expect("vech inverse is symmetric by construction")
}

/// Column-major `vec(S)`.
pub fn vec(s: &IsingMatrix) -> Array1<f64> {
    let dim = s.dim();
    Array1::from_iter((0..dim).flat_map(|j| (0..dim).map(move |i| (i, j))).map(|(i, j)| s.get(i, j)))
}

/// Dense duplication matrix `D_J` and column selectors `T_j = E_j D_J`.
#[derive(Debug, Clone)]
pub struct TransformSet {
    dim: usize,
    duplication: Array2<f64>,
    selectors: Vec<Array2<f64>>,
}

impl TransformSet {
    pub fn new(dim: usize) -> Self {
        let p = half_len(dim);
        let mut duplication = Array2::zeros((dim * dim, p));
        for j in 0..dim {
            for i in 0..dim {
                duplication[[j * dim + i, vech_index(i, j, dim)]] = 1.0;
            }
        }
        let selectors = (0..dim)
            .map(|j| duplication.slice(ndarray::s![j * dim..(j + 1) * dim, ..]).to_owned())
            .collect();
        TransformSet {
            dim,
            duplication,
            selectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `D_J`, shape `J^2 x J(J+1)/2`.
    pub fn duplication(&self) -> &Array2<f64> {
        &self.duplication
    }

    /// `T_j`, shape `J x J(J+1)/2`.
    pub fn selector(&self, j: usize) -> &Array2<f64> {
        &self.selectors[j]
    }

    /// `E_j`, shape `J x J^2`: picks block `j` of `vec(S)`.
    pub fn block_selector(&self, j: usize) -> Array2<f64> {
        let mut e = Array2::zeros((self.dim, self.dim * self.dim));
        for k in 0..self.dim {
            e[[k, j * self.dim + k]] = 1.0;
        }
        e
    }

    /// Stacked `T = (T_1', ..., T_J')'`, shape `J^2 x J(J+1)/2` (equal to `D_J`).
    pub fn stacked(&self) -> &Array2<f64> {
        &self.duplication
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_by_two_order() {
        let s = IsingMatrix::new(array![[1.0, 2.0], [2.0, 3.0]]).unwrap();
        assert_eq!(vech(&s).values().to_vec(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn bad_length_rejected() {
        assert_eq!(
            HalfVec::new(Array1::zeros(4)).unwrap_err(),
            Error::InvalidHalfVecLength(4)
        );
        assert!(HalfVec::new(Array1::zeros(0)).is_err());
        assert_eq!(HalfVec::new(Array1::zeros(6)).unwrap().dim(), 3);
    }

    #[test]
    fn index_round_trip() {
        for dim in 1..9 {
            for k in 0..half_len(dim) {
                let (i, j) = vech_position(k, dim);
                assert!(i >= j);
                assert_eq!(vech_index(i, j, dim), k);
                assert_eq!(vech_index(j, i, dim), k);
            }
        }
    }

    #[test]
    fn duplication_rows_have_single_one() {
        let t = TransformSet::new(5);
        for row in t.duplication().outer_iter() {
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v != 0.0).count(), 1);
        }
    }

    #[test]
    fn selector_equals_block_times_duplication() {
        let t = TransformSet::new(4);
        for j in 0..4 {
            assert_eq!(t.block_selector(j).dot(t.duplication()), *t.selector(j));
        }
    }
}
