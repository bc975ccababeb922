//! Ising data generation, missingness mechanisms and the simulation-study
//! parameter matrices.

use std::str::FromStr;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Cell, ObservedDataset};
use crate::error::{Error, Result};
use crate::ising::{conditional_success_prob, log_pmf_table, IsingMatrix};

/// Largest `J` for inverse-CDF sampling (a `2^16` table).
pub const EXACT_SAMPLING_LIMIT: usize = 16;

/// Default burn-in sweeps per row for [`sample_ising_gibbs`].
pub const DEFAULT_GIBBS_SWEEPS: usize = 500;

/// `N` i.i.d. draws by inverse-CDF lookup over all `2^J` patterns.
pub fn sample_ising_exact<R: Rng + ?Sized>(s: &IsingMatrix, n: usize, rng: &mut R) -> Result<Array2<u8>> {
    let dim = s.dim();
    if dim > EXACT_SAMPLING_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            max: EXACT_SAMPLING_LIMIT,
        });
    }
    let table = log_pmf_table(s)?;
    let mut cdf = Vec::with_capacity(table.len());
    let mut acc = 0.0;
    for lp in &table {
        acc += lp.exp();
        cdf.push(acc);
    }
    let total = acc;
    let mut out = Array2::zeros((n, dim));
    for i in 0..n {
        let u = rng.random::<f64>() * total;
        let bits = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        for k in 0..dim {
            out[[i, k]] = (bits >> k & 1) as u8;
        }
    }
    Ok(out)
}

/// `N` rows, each from an independent single-site Gibbs run of
/// `sweeps` full sweeps started at a uniform random pattern.
pub fn sample_ising_gibbs<R: Rng + ?Sized>(
    s: &IsingMatrix,
    n: usize,
    sweeps: usize,
    rng: &mut R,
) -> Result<Array2<u8>> {
    if sweeps == 0 {
        return Err(Error::InvalidConfig("at least one Gibbs sweep is required".into()));
    }
    let dim = s.dim();
    let mut out = Array2::zeros((n, dim));
    let mut y = vec![0u8; dim];
    for i in 0..n {
        for v in y.iter_mut() {
            *v = u8::from(rng.random::<f64>() < 0.5);
        }
        for _ in 0..sweeps {
            for j in 0..dim {
                let p = conditional_success_prob(j, &y, s.row(j))?;
                y[j] = u8::from(rng.random::<f64>() < p);
            }
        }
        out.row_mut(i).assign(&ndarray::ArrayView1::from(&y));
    }
    Ok(out)
}

/// Missingness mechanism. Column indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MissingnessSpec {
    None,
    /// Each cell of `columns` (all columns when absent) is missing with probability `rate`.
    Mcar {
        rate: f64,
        #[serde(default)]
        columns: Option<Vec<usize>>,
    },
    /// Cell `(i, j)` is missing with probability `table[y_{i,anchor}][j']`,
    /// `j'` indexing the non-anchor columns in order. The anchor is always observed.
    MarAnchor { anchor: usize, table: [Vec<f64>; 2] },
    /// Rows whose `screen` items are all 0 lose every `targets` cell.
    Screening { screen: Vec<usize>, targets: Vec<usize> },
}

impl MissingnessSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMissingness(msg));
        let check_col = |c: usize| -> Result<()> {
            if c >= dim {
                return Err(Error::InvalidMissingness(format!("column {c} out of range for J = {dim}")));
            }
            Ok(())
        };
        let check_prob = |p: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidMissingness(format!("probability {p} outside [0, 1]")));
            }
            Ok(())
        };
        match self {
            MissingnessSpec::None => Ok(()),
            MissingnessSpec::Mcar { rate, columns } => {
                check_prob(*rate)?;
                for &c in columns.iter().flatten() {
                    check_col(c)?;
                }
                Ok(())
            }
            MissingnessSpec::MarAnchor { anchor, table } => {
                check_col(*anchor)?;
                for row in table {
                    if row.len() + 1 != dim {
                        return bad(format!("anchor table rows need {} entries, found {}", dim - 1, row.len()));
                    }
                    for &p in row {
                        check_prob(p)?;
                    }
                }
                Ok(())
            }
            MissingnessSpec::Screening { screen, targets } => {
                if screen.is_empty() {
                    return bad("no screening column".into());
                }
                for &c in screen.iter().chain(targets) {
                    check_col(c)?;
                }
                if targets.iter().any(|t| screen.contains(t)) {
                    return bad("a screening column cannot be a target".into());
                }
                Ok(())
            }
        }
    }

    /// Study I: item 6 anchors the missingness of items 1 to 5.
    pub fn study_one() -> Self {
        MissingnessSpec::MarAnchor {
            anchor: 5,
            table: [vec![0.0, 0.1, 0.1, 0.0, 0.3], vec![0.2, 0.0, 0.1, 0.1, 0.2]],
        }
    }

    /// Study II: items 1 and 2 screen items 3 to 6.
    pub fn study_two() -> Self {
        MissingnessSpec::Screening {
            screen: vec![0, 1],
            targets: vec![2, 3, 4, 5],
        }
    }

    /// Study III: half the cells missing completely at random.
    pub fn study_three() -> Self {
        MissingnessSpec::Mcar {
            rate: 0.5,
            columns: None,
        }
    }
}

/// Masks cells of `y` per `spec`. Rows left with every cell missing are dropped.
pub fn apply_missingness<R: Rng + ?Sized>(
    y: &Array2<u8>,
    spec: &MissingnessSpec,
    rng: &mut R,
) -> Result<ObservedDataset> {
    let dim = y.ncols();
    spec.validate(dim)?;
    crate::data::validate_binary(y)?;
    let mut cells = y.mapv(Cell::from_binary);
    match spec {
        MissingnessSpec::None => {}
        MissingnessSpec::Mcar { rate, columns } => {
            let cols: Vec<usize> = columns.clone().unwrap_or_else(|| (0..dim).collect());
            for mut row in cells.outer_iter_mut() {
                for &c in &cols {
                    if rng.random::<f64>() < *rate {
                        row[c] = Cell::Missing;
                    }
                }
            }
        }
        MissingnessSpec::MarAnchor { anchor, table } => {
            for (i, mut row) in cells.outer_iter_mut().enumerate() {
                let probs = &table[y[[i, *anchor]] as usize];
                let others = (0..dim).filter(|&c| c != *anchor);
                for (c, &p) in others.zip(probs) {
                    if rng.random::<f64>() < p {
                        row[c] = Cell::Missing;
                    }
                }
            }
        }
        MissingnessSpec::Screening { screen, targets } => {
            for (i, mut row) in cells.outer_iter_mut().enumerate() {
                if screen.iter().all(|&c| y[[i, c]] == 0) {
                    for &t in targets {
                        row[t] = Cell::Missing;
                    }
                }
            }
        }
    }
    ObservedDataset::dropping_empty_rows(cells)
}

/// The three simulation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Study {
    #[serde(rename = "I")]
    One,
    #[serde(rename = "II")]
    Two,
    #[serde(rename = "III")]
    Three,
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Study::One),
            "II" | "2" => Ok(Study::Two),
            "III" | "3" => Ok(Study::Three),
            other => Err(Error::InvalidConfig(format!("unknown study '{other}'"))),
        }
    }
}

impl std::fmt::Display for Study {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Study::One => "I",
            Study::Two => "II",
            Study::Three => "III",
        })
    }
}

impl Study {
    pub fn true_parameters(self) -> IsingMatrix {
        load_true_parameters(self)
    }

    pub fn missingness(self) -> MissingnessSpec {
        match self {
            Study::One => MissingnessSpec::study_one(),
            Study::Two => MissingnessSpec::study_two(),
            Study::Three => MissingnessSpec::study_three(),
        }
    }
}

// 1-based (row, col, value) with row > col
const STUDY_ONE: [(usize, usize, f64); 6] = [
    (2, 1, -0.737),
    (3, 2, -0.408),
    (4, 3, 0.619),
    (5, 1, 0.769),
    (6, 1, 0.791),
    (6, 5, 0.741),
];

const STUDY_TWO: [(usize, usize, f64); 6] = [
    (2, 1, 0.500),
    (3, 2, 0.514),
    (4, 3, 0.865),
    (5, 1, 1.115),
    (6, 1, 1.151),
    (6, 5, 1.068),
];

const STUDY_THREE: [(usize, usize, f64); 32] = [
    (3, 2, -0.96),
    (4, 2, 1.00),
    (4, 3, 0.5),
    (5, 1, 0.48),
    (6, 3, 0.95),
    (6, 5, 0.47),
    (7, 4, 0.55),
    (7, 5, -0.92),
    (8, 6, 0.98),
    (8, 7, 0.74),
    (9, 1, -0.41),
    (9, 3, -0.54),
    (10, 3, -0.47),
    (10, 7, -0.83),
    (10, 9, -0.41),
    (11, 3, -0.74),
    (11, 4, 0.52),
    (11, 5, -0.55),
    (11, 6, 0.85),
    (11, 8, 0.75),
    (11, 9, -0.98),
    (12, 1, -0.54),
    (12, 3, 0.77),
    (12, 6, 0.41),
    (12, 10, -0.74),
    (13, 6, -0.8),
    (13, 7, 0.56),
    (13, 10, -0.78),
    (14, 7, 0.95),
    (14, 13, -0.96),
    (15, 5, -0.97),
    (15, 8, 0.78),
];

fn one_based(dim: usize, entries: &[(usize, usize, f64)]) -> IsingMatrix {
    let zero_based: Vec<_> = entries.iter().map(|&(i, j, v)| (i - 1, j - 1, v)).collect();
    IsingMatrix::from_entries(dim, &zero_based)
}

/// True `S` of each study; every intercept is zero.
pub fn load_true_parameters(study: Study) -> IsingMatrix {
    match study {
        Study::One => one_based(6, &STUDY_ONE),
        Study::Two => one_based(6, &STUDY_TWO),
        Study::Three => one_based(15, &STUDY_THREE),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use ndarray::array;

    #[test]
    fn study_tables() {
        let s1 = load_true_parameters(Study::One);
        assert_eq!(s1.get(1, 0), -0.737);
        assert_eq!(s1.get(0, 1), -0.737);
        let s2 = load_true_parameters(Study::Two);
        assert_eq!(s2.get(0, 1), 0.5);
        assert!((0..6).all(|j| s2.get(j, j) == 0.0));
        let s3 = load_true_parameters(Study::Three);
        assert_eq!(s3.get(2, 1), -0.96);
        let zeros = IsingMatrix::edge_pairs(15).filter(|&(j, l)| s3.get(j, l) == 0.0).count();
        assert_eq!(zeros, 73);
        assert_eq!("ii".parse::<Study>().unwrap(), Study::Two);
        assert!("IV".parse::<Study>().is_err());
    }

    #[test]
    fn screening_rows() {
        let y = array![[0u8, 0, 1, 1], [1, 0, 1, 0]];
        let spec = MissingnessSpec::Screening {
            screen: vec![0, 1],
            targets: vec![2, 3],
        };
        let d = apply_missingness(&y, &spec, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(d.cells().row(0).to_vec(), vec![Cell::Zero, Cell::Zero, Cell::Missing, Cell::Missing]);
        assert_eq!(d.cells().row(1).to_vec(), vec![Cell::One, Cell::Zero, Cell::One, Cell::Zero]);
    }

    #[test]
    fn zero_rates_mask_nothing() {
        let y = array![[0u8, 1, 1], [1, 0, 1]];
        let mut rng = RngStream::new(3, 0);
        let d = apply_missingness(&y, &MissingnessSpec::Mcar { rate: 0.0, columns: None }, &mut rng).unwrap();
        assert!(d.is_complete());
        let spec = MissingnessSpec::MarAnchor {
            anchor: 2,
            table: [vec![0.0; 2], vec![0.0; 2]],
        };
        assert!(apply_missingness(&y, &spec, &mut rng).unwrap().is_complete());
    }

    #[test]
    fn spec_validation() {
        assert!(MissingnessSpec::study_one().validate(6).is_ok());
        assert!(MissingnessSpec::study_one().validate(5).is_err());
        assert!(MissingnessSpec::Mcar { rate: 1.5, columns: None }.validate(3).is_err());
        let s = MissingnessSpec::Screening {
            screen: vec![0],
            targets: vec![0, 1],
        };
        assert!(s.validate(3).is_err());
    }

    #[test]
    fn exact_single_item() {
        let s = IsingMatrix::from_rows(&[vec![2.0 * 3f64.ln()]]).unwrap();
        let y = sample_ising_exact(&s, 100_000, &mut RngStream::new(1, 0)).unwrap();
        let mean = y.iter().map(|&v| v as f64).sum::<f64>() / 1e5;
        assert!((mean - 0.75).abs() < 0.01, "{mean}");
    }

    #[test]
    fn gibbs_rejects_zero_sweeps() {
        assert!(sample_ising_gibbs(&IsingMatrix::zeros(2), 1, 0, &mut RngStream::new(0, 0)).is_err());
    }
}
