//! Simulation-study runners: generate, fit every requested method, score.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::ObservedDataset;
use crate::datagen::{apply_missingness, sample_ising_exact, sample_ising_gibbs, MissingnessSpec, Study,
    DEFAULT_GIBBS_SWEEPS, EXACT_SAMPLING_LIMIT};
use crate::error::Result;
use crate::fit::{fit_all, ChainConfig, Method};
use crate::io::vech_labels;
use crate::ising::IsingMatrix;
use crate::metrics::{auc, jaccard, mse_bias, roc_curve, threshold_grid, MseBias, ReplicationSet, RocPoint};
use crate::rng::{derive_seed, RngStream};

/// Complete and masked data drawn from `s` with `spec`, reproducible from `seed`.
pub fn generate_dataset(
    s: &IsingMatrix,
    n: usize,
    spec: &MissingnessSpec,
    seed: u64,
) -> Result<(Array2<u8>, ObservedDataset)> {
    let mut rng = RngStream::new(seed, 0);
    let y = if s.dim() <= EXACT_SAMPLING_LIMIT {
        sample_ising_exact(s, n, &mut rng)?
    } else {
        sample_ising_gibbs(s, n, DEFAULT_GIBBS_SWEEPS, &mut rng)?
    };
    let observed = apply_missingness(&y, spec, &mut rng.substream(1))?;
    Ok((y, observed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub study: Study,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub methods: Vec<Method>,
    pub chain: ChainConfig,
    pub seed: u64,
    /// Thresholds for the Jaccard index.
    #[serde(default = "default_jaccard")]
    pub jaccard_thresholds: Vec<f64>,
}

fn default_jaccard() -> Vec<f64> {
    vec![0.3]
}

impl StudyConfig {
    /// Methods: all three for Studies I and II; the proposed method alone for
    /// Study III, where listwise deletion leaves almost no rows.
    pub fn new(study: Study, sample_sizes: Vec<usize>, replications: usize, seed: u64) -> Self {
        let methods = match study {
            Study::Three => vec![Method::Proposed],
            _ => Method::ALL.to_vec(),
        };
        StudyConfig {
            study,
            sample_sizes,
            replications,
            methods,
            chain: ChainConfig::default(),
            seed,
            jaccard_thresholds: default_jaccard(),
        }
    }

    pub fn data_seed(&self, n: usize, replication: usize) -> u64 {
        derive_seed(derive_seed(self.seed, n as u64), replication as u64)
    }
}

/// Results of one `(N, method)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyCell {
    pub n: usize,
    pub method: Method,
    /// `(replication, estimate)` for each successful fit.
    pub estimates: Vec<(usize, IsingMatrix)>,
    /// `(replication, message)` for each failed fit.
    pub failures: Vec<(usize, String)>,
    pub metrics: Option<MseBias>,
    pub roc: Option<Vec<RocPoint>>,
    pub auc: Option<f64>,
    pub jaccard: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutcome {
    pub config: StudyConfig,
    pub truth: IsingMatrix,
    pub cells: Vec<StudyCell>,
}

impl StudyOutcome {
    pub fn cell(&self, n: usize, method: Method) -> Option<&StudyCell> {
        self.cells.iter().find(|c| c.n == n && c.method == method)
    }
}

pub fn run_study(config: &StudyConfig) -> Result<StudyOutcome> {
    config.chain.validate()?;
    let truth = config.study.true_parameters();
    let spec = config.study.missingness();
    let jobs: Vec<(usize, usize)> = config
        .sample_sizes
        .iter()
        .flat_map(|&n| (0..config.replications).map(move |r| (n, r)))
        .collect();
    let fits: Vec<(usize, usize, Vec<(Method, Result<IsingMatrix>)>)> = jobs
        .par_iter()
        .map(|&(n, r)| {
            let seed = config.data_seed(n, r);
            let (_, observed) = generate_dataset(&truth, n, &spec, seed)?;
            let chain = ChainConfig {
                seed: derive_seed(seed, 1),
                ..config.chain.clone()
            };
            let results = fit_all(&observed, &chain, &config.methods)?
                .into_iter()
                .map(|(m, res)| (m, res.map(|f| f.estimate)))
                .collect();
            Ok((n, r, results))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for &n in &config.sample_sizes {
        for &method in &config.methods {
            let mut estimates = Vec::new();
            let mut failures = Vec::new();
            for (fn_, r, results) in &fits {
                if *fn_ != n {
                    continue;
                }
                for (m, res) in results {
                    if *m == method {
                        match res {
                            Ok(s) => estimates.push((*r, s.clone())),
                            Err(e) => failures.push((*r, e.to_string())),
                        }
                    }
                }
            }
            cells.push(score_cell(n, method, estimates, failures, &truth, config)?);
        }
    }
    Ok(StudyOutcome {
        config: config.clone(),
        truth,
        cells,
    })
}

fn score_cell(
    n: usize,
    method: Method,
    estimates: Vec<(usize, IsingMatrix)>,
    failures: Vec<(usize, String)>,
    truth: &IsingMatrix,
    config: &StudyConfig,
) -> Result<StudyCell> {
    let mut cell = StudyCell {
        n,
        method,
        estimates,
        failures,
        metrics: None,
        roc: None,
        auc: None,
        jaccard: Vec::new(),
    };
    if cell.estimates.is_empty() {
        return Ok(cell);
    }
    let reps = ReplicationSet::new(truth.clone(), cell.estimates.iter().map(|(_, s)| s.clone()).collect())?;
    cell.metrics = Some(mse_bias(&reps));
    if config.study == Study::Three {
        let curve = roc_curve(&reps, &threshold_grid(&reps))?;
        cell.auc = Some(auc(&curve));
        cell.roc = Some(curve);
        for &tau in &config.jaccard_thresholds {
            cell.jaccard.push((tau, jaccard(&reps, tau)?));
        }
    }
    Ok(cell)
}

/// Long-format MSE/bias table: one row per `(N, method, parameter)`.
pub fn mse_bias_rows(outcome: &StudyOutcome) -> Vec<Vec<String>> {
    let labels = vech_labels(outcome.truth.dim());
    let mut rows = Vec::new();
    for cell in &outcome.cells {
        let Some(m) = &cell.metrics else { continue };
        for ((j, l, mse, bias), label) in m.lower_rows().into_iter().zip(&labels) {
            rows.push(vec![
                outcome.config.study.to_string(),
                cell.n.to_string(),
                cell.method.to_string(),
                label.clone(),
                if j == l { "intercept" } else { "edge" }.to_string(),
                outcome.truth.get(j, l).to_string(),
                mse.to_string(),
                bias.to_string(),
                cell.estimates.len().to_string(),
            ]);
        }
    }
    rows
}

pub const MSE_BIAS_HEADER: [&str; 9] = [
    "study",
    "n",
    "method",
    "parameter",
    "kind",
    "truth",
    "mse",
    "bias",
    "replications",
];

/// Plot-ready table: one row per `(N, method, replication, parameter)`.
pub fn estimate_rows(outcome: &StudyOutcome) -> Vec<Vec<String>> {
    let dim = outcome.truth.dim();
    let labels = vech_labels(dim);
    let mut rows = Vec::new();
    for cell in &outcome.cells {
        for (r, s) in &cell.estimates {
            let mut a = 0;
            for l in 0..dim {
                for j in l..dim {
                    rows.push(vec![
                        outcome.config.study.to_string(),
                        cell.n.to_string(),
                        cell.method.to_string(),
                        (r + 1).to_string(),
                        labels[a].clone(),
                        outcome.truth.get(j, l).to_string(),
                        s.get(j, l).to_string(),
                    ]);
                    a += 1;
                }
            }
        }
    }
    rows
}

pub const ESTIMATE_HEADER: [&str; 7] = ["study", "n", "method", "replication", "parameter", "truth", "estimate"];

pub fn roc_rows(outcome: &StudyOutcome) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for cell in &outcome.cells {
        for p in cell.roc.iter().flatten() {
            rows.push(vec![
                cell.n.to_string(),
                cell.method.to_string(),
                p.threshold.to_string(),
                p.tpr.to_string(),
                p.fpr.to_string(),
            ]);
        }
    }
    rows
}

pub const ROC_HEADER: [&str; 5] = ["n", "method", "threshold", "tpr", "fpr"];

pub fn recovery_rows(outcome: &StudyOutcome) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for cell in &outcome.cells {
        let Some(a) = cell.auc else { continue };
        for (tau, jac) in &cell.jaccard {
            rows.push(vec![
                cell.n.to_string(),
                cell.method.to_string(),
                a.to_string(),
                tau.to_string(),
                jac.to_string(),
            ]);
        }
    }
    rows
}

pub const RECOVERY_HEADER: [&str; 5] = ["n", "method", "auc", "jaccard_threshold", "jaccard"];
