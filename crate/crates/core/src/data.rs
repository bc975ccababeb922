//! Binary response data with missing cells.

use ndarray::Array2;

use crate::error::{Error, Result};

/// One response cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Missing,
}

impl Cell {
    pub fn from_binary(v: u8) -> Cell {
        if v == 0 {
            Cell::Zero
        } else {
            Cell::One
        }
    }

    pub fn value(self) -> Option<u8> {
        match self {
            Cell::Zero => Some(0),
            Cell::One => Some(1),
            Cell::Missing => None,
        }
    }

    pub fn is_missing(self) -> bool {
        self == Cell::Missing
    }
}

/// `N x J` response matrix plus the per-item missing index sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedDataset {
    cells: Array2<Cell>,
    missing_sets: Vec<Vec<usize>>,
}

impl ObservedDataset {
    /// Rejects rows whose every cell is missing.
    pub fn new(cells: Array2<Cell>) -> Result<Self> {
        for (i, row) in cells.outer_iter().enumerate() {
            if !row.is_empty() && row.iter().all(|c| c.is_missing()) {
                return Err(Error::EmptyRow(i));
            }
        }
        if cells.ncols() == 0 {
            return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
        }
        let missing_sets = Self::index_missing(&cells);
        Ok(ObservedDataset {
            cells,
            missing_sets,
        })
    }

    /// Drops rows whose every cell is missing, then builds the dataset.
    pub fn dropping_empty_rows(cells: Array2<Cell>) -> Result<Self> {
        let keep: Vec<usize> = cells
            .outer_iter()
            .enumerate()
            .filter(|(_, row)| !row.iter().all(|c| c.is_missing()))
            .map(|(i, _)| i)
            .collect();
        if keep.len() == cells.nrows() {
            return Self::new(cells);
        }
        Self::new(cells.select(ndarray::Axis(0), &keep))
    }

    pub fn from_complete(data: &Array2<u8>) -> Self {
        let cells = data.mapv(Cell::from_binary);
        Self::new(cells).expect("complete data has no empty rows")
    }

    fn index_missing(cells: &Array2<Cell>) -> Vec<Vec<usize>> {
        (0..cells.ncols())
            .map(|j| {
                cells
                    .column(j)
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_missing())
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }

    pub fn n_rows(&self) -> usize {
        self.cells.nrows()
    }

    pub fn n_items(&self) -> usize {
        self.cells.ncols()
    }

    pub fn cells(&self) -> &Array2<Cell> {
        &self.cells
    }

    /// `Omega_j`: rows whose item `j` is missing.
    pub fn missing_set(&self, j: usize) -> &[usize] {
        &self.missing_sets[j]
    }

    pub fn missing_count(&self) -> usize {
        self.missing_sets.iter().map(Vec::len).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_count() == 0
    }

    /// The binary matrix when no cell is missing.
    pub fn to_complete(&self) -> Result<Array2<u8>> {
        if !self.is_complete() {
            return Err(Error::MissingCells);
        }
        Ok(self.cells.mapv(|c| c.value().unwrap_or(0)))
    }

    /// Fills missing cells using `fill(i, j)`; observed cells keep their values.
    pub fn fill_with<F: FnMut(usize, usize) -> u8>(&self, mut fill: F) -> Array2<u8> {
        let mut out = Array2::zeros(self.cells.raw_dim());
        for ((i, j), c) in self.cells.indexed_iter() {
            out[[i, j]] = match c.value() {
                Some(v) => v,
                None => fill(i, j),
            };
        }
        out
    }

    /// Rows with no missing cell, in original order.
    pub fn complete_rows(&self) -> Vec<usize> {
        self.cells
            .outer_iter()
            .enumerate()
            .filter(|(_, row)| !row.iter().any(|c| c.is_missing()))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Checks that a complete matrix is binary.
pub fn validate_binary(data: &Array2<u8>) -> Result<()> {
    if let Some((idx, &v)) = data.iter().enumerate().find(|(_, &v)| v > 1) {
        if v == u8::MAX {
            return Err(Error::MissingCells);
        }
        return Err(Error::NonBinary { index: idx, value: v });
    }
    Ok(())
}
