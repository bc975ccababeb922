//! Python bindings. Datasets cross the boundary as lists of rows with
//! `None` for a missing cell.

use std::collections::BTreeMap;

use ising_impute::fit::fit as fit_method;
use ising_impute::study::generate_dataset;
use ising_impute::{Cell, ChainConfig, IsingMatrix, Method, ObservedDataset, PriorSpec, RngStream, Study};
use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: ising_impute::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Symmetric Ising parameter matrix.
#[pyclass(name = "IsingMatrix", module = "ising_impute_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyIsingMatrix {
    inner: IsingMatrix,
}

#[pymethods]
impl PyIsingMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyIsingMatrix {
            inner: IsingMatrix::from_rows(&rows).map_err(err)?,
        })
    }

    #[staticmethod]
    fn zeros(dim: usize) -> PyResult<Self> {
        if dim == 0 {
            return Err(PyValueError::new_err("dim must be at least 1"));
        }
        Ok(PyIsingMatrix {
            inner: IsingMatrix::zeros(dim),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let d = self.inner.dim();
        if i >= d || j >= d {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) out of range for dim {d}")));
        }
        Ok(self.inner.get(i, j))
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    /// Column-major lower triangle, diagonal included.
    fn vech(&self) -> Vec<f64> {
        ising_impute::vech(&self.inner).values().to_vec()
    }

    fn log_normalizing_constant(&self) -> PyResult<f64> {
        ising_impute::ising::log_normalizing_constant(&self.inner).map_err(err)
    }

    fn normalizing_constant(&self) -> PyResult<f64> {
        ising_impute::ising::normalizing_constant(&self.inner).map_err(err)
    }

    fn log_pmf(&self, y: Vec<u8>) -> PyResult<f64> {
        ising_impute::ising::log_pmf(&y, &self.inner).map_err(err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("IsingMatrix({:?})", self.inner.to_rows())
    }
}

fn study_of(name: &str) -> PyResult<Study> {
    name.parse().map_err(err)
}

fn to_rows(data: &ObservedDataset) -> Vec<Vec<Option<u8>>> {
    data.cells().outer_iter().map(|r| r.iter().map(|c| c.value()).collect()).collect()
}

fn from_rows(rows: Vec<Vec<Option<u8>>>) -> PyResult<ObservedDataset> {
    let n = rows.len();
    let j = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != j) {
        return Err(PyValueError::new_err("rows differ in length"));
    }
    let mut cells = Vec::with_capacity(n * j);
    for r in rows {
        for v in r {
            cells.push(match v {
                None => Cell::Missing,
                Some(0) => Cell::Zero,
                Some(1) => Cell::One,
                Some(x) => return Err(PyValueError::new_err(format!("cell value {x} is not 0, 1 or None"))),
            });
        }
    }
    let arr = Array2::from_shape_vec((n, j), cells).map_err(|e| PyValueError::new_err(e.to_string()))?;
    ObservedDataset::new(arr).map_err(err)
}

#[pyfunction]
fn true_parameters(study: &str) -> PyResult<PyIsingMatrix> {
    Ok(PyIsingMatrix {
        inner: study_of(study)?.true_parameters(),
    })
}

/// Dataset with the study's missingness mechanism, as rows with `None` for missing.
#[pyfunction]
#[pyo3(signature = (study, n, seed = 0))]
fn simulate(study: &str, n: usize, seed: u64) -> PyResult<Vec<Vec<Option<u8>>>> {
    let st = study_of(study)?;
    let (_, data) = generate_dataset(&st.true_parameters(), n, &st.missingness(), seed).map_err(err)?;
    Ok(to_rows(&data))
}

#[pyfunction]
fn pg_mean(c: f64) -> f64 {
    ising_impute::pg::pg_mean(c)
}

/// `n` draws of PG(1, c).
#[pyfunction]
#[pyo3(signature = (c, n, seed = 0))]
fn sample_pg1(c: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0);
    (0..n).map(|_| ising_impute::pg::sample_pg1(c, &mut rng)).collect()
}

/// Runs one estimator and returns a dict with the estimate and diagnostics.
#[pyfunction]
#[pyo3(signature = (data, method = "proposed", iterations = 5000, burn_in = 1000, thinning = 10, chains = 1, seed = 0, intercept_variance = 100.0, slope_variance = 1.0))]
#[allow(clippy::too_many_arguments)]
fn fit<'py>(
    py: Python<'py>,
    data: Vec<Vec<Option<u8>>>,
    method: &str,
    iterations: usize,
    burn_in: usize,
    thinning: usize,
    chains: usize,
    seed: u64,
    intercept_variance: f64,
    slope_variance: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let data = from_rows(data)?;
    let method: Method = method.parse().map_err(err)?;
    let config = ChainConfig {
        total_iterations: iterations,
        burn_in,
        thinning,
        priors: PriorSpec {
            intercept_variance,
            slope_variance,
        },
        seed,
        n_chains: chains,
        record_beta: false,
    };
    let result = py.detach(|| fit_method(&data, &config, method)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("method", result.method.tag())?;
    out.set_item("estimate", PyIsingMatrix { inner: result.estimate })?;
    out.set_item("psrf", result.diagnostics.psrf)?;
    out.set_item("max_psrf", result.diagnostics.max_psrf)?;
    out.set_item("retained_per_chain", result.diagnostics.retained_per_chain)?;
    let draws: Vec<Vec<Vec<f64>>> = result
        .chains
        .iter()
        .map(|c| c.outer_iter().map(|r| r.to_vec()).collect())
        .collect();
    out.set_item("chains", draws)?;
    out.set_item("wall_clock_seconds", result.wall_clock.as_secs_f64())?;
    Ok(out)
}

/// `(probabilities of patterns with y1 = 1 or y2 = 1 keyed by bitmask, P(y1 = y2 = 0))`.
#[pyfunction]
fn restricted_distribution(s: &PyIsingMatrix) -> PyResult<(BTreeMap<u32, f64>, f64)> {
    let r = ising_impute::restricted_distribution(&s.inner).map_err(err)?;
    Ok((r.probs_a().clone(), r.prob_00()))
}

#[pyfunction]
fn recover_from_restricted(dim: usize, probs: BTreeMap<u32, f64>, prob_00: f64) -> PyResult<PyIsingMatrix> {
    let r = ising_impute::RestrictedDistribution::new(dim, probs, prob_00).map_err(err)?;
    Ok(PyIsingMatrix {
        inner: ising_impute::recover_from_restricted(&r).map_err(err)?,
    })
}

#[pymodule]
fn ising_impute_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIsingMatrix>()?;
    m.add_function(wrap_pyfunction!(true_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(pg_mean, m)?)?;
    m.add_function(wrap_pyfunction!(sample_pg1, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(restricted_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(recover_from_restricted, m)?)?;
    Ok(())
}
