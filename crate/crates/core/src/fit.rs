//! Iterative imputation with Pólya-Gamma sampling of `S`, plus the
//! complete-case and single-imputation baselines.
//!
//! Every chain draws from three disjoint streams of the configured seed:
//! initialisation (`S^(0)` first, then the random fill of missing cells),
//! the auxiliary `beta_j` / imputation sweep, and the `S` sampler. Because
//! the `S` stream never depends on the imputation stream, all three methods
//! coincide when no cell is missing.

use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::ObservedDataset;
use crate::diagnostics::gelman_rubin;
use crate::error::{Error, Result};
use crate::gibbs::{sample_alpha, sample_beta, PriorSpec};
use crate::halfvec::{half_len, vech, vech_inverse, HalfVec, TransformSet};
use crate::ising::{logistic, IsingMatrix};
use crate::rng::RngStream;

const STREAMS_PER_CHAIN: u64 = 1 << 8;
const INIT_STREAM: u64 = 0;
const IMPUTE_STREAM: u64 = 1;
const ALPHA_STREAM: u64 = 2;

/// MCMC controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    /// `T`
    pub total_iterations: usize,
    /// `T_0`
    pub burn_in: usize,
    /// `t_0`
    pub thinning: usize,
    pub priors: PriorSpec,
    pub seed: u64,
    pub n_chains: usize,
    pub record_beta: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            total_iterations: 5000,
            burn_in: 1000,
            thinning: 10,
            priors: PriorSpec::default(),
            seed: 0,
            n_chains: 1,
            record_beta: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        self.priors.validate()?;
        if self.thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        if self.burn_in >= self.total_iterations {
            return Err(Error::InvalidConfig(format!(
                "burn-in {} must be below total iterations {}",
                self.burn_in, self.total_iterations
            )));
        }
        if self.n_chains == 0 {
            return Err(Error::InvalidConfig("at least one chain is required".into()));
        }
        if self.retained() == 0 {
            return Err(Error::InvalidConfig(
                "no draw is retained: need floor(T/t0) > floor(T0/t0)".into(),
            ));
        }
        Ok(())
    }

    /// `M - M_0` with `M = floor(T / t_0)`, `M_0 = floor(T_0 / t_0)`.
    pub fn retained(&self) -> usize {
        self.total_iterations / self.thinning - self.burn_in / self.thinning
    }

    /// Whether `S` is sampled (and kept) at iteration `t` (1-based).
    #[inline]
    pub fn samples_at(&self, t: usize) -> bool {
        t > self.burn_in && t % self.thinning == 0
    }
}

/// Estimation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Proposed,
    SingleImputation,
    CompleteCase,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Proposed, Method::SingleImputation, Method::CompleteCase];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::SingleImputation => "single_imputation",
            Method::CompleteCase => "complete_case",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "single" | "single_imputation" => Ok(Method::SingleImputation),
            "complete" | "complete_case" => Ok(Method::CompleteCase),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// PSRF per `vech` coordinate; present with two or more chains of at least 10 draws.
    pub psrf: Option<Vec<f64>>,
    pub max_psrf: Option<f64>,
    pub retained_per_chain: usize,
    pub draws_symmetric: bool,
    pub observed_cells_preserved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub method: Method,
    /// Mean of all retained draws, pooled over chains.
    pub estimate: IsingMatrix,
    /// Retained draws, chain-major.
    pub draws: Vec<IsingMatrix>,
    /// Per chain, a `retained x J(J+1)/2` matrix of `vech` draws.
    pub chains: Vec<Array2<f64>>,
    /// Per chain, the `beta_j` rows (`J x J`) at each retained iteration.
    pub beta_draws: Option<Vec<Vec<Array2<f64>>>>,
    pub diagnostics: Diagnostics,
    pub wall_clock: Duration,
}

/// Redraws `y_ij` for `i` in `missing` from the item-`j` logistic conditional.
pub fn impute_column<R: Rng + ?Sized>(
    j: usize,
    work: &mut Array2<u8>,
    beta: ArrayView1<'_, f64>,
    missing: &[usize],
    rng: &mut R,
) {
    for &i in missing {
        let row = work.row(i);
        let mut eta = 0.5 * beta[j];
        for (k, (&y, &b)) in row.iter().zip(beta.iter()).enumerate() {
            if k != j && y == 1 {
                eta += b;
            }
        }
        let p = logistic(eta);
        work[[i, j]] = u8::from(rng.random::<f64>() < p);
    }
}

/// Removes every row with a missing cell.
pub fn listwise_delete(data: &ObservedDataset) -> Result<ObservedDataset> {
    let keep = data.complete_rows();
    if keep.is_empty() {
        return Err(Error::EmptyCompleteCase);
    }
    ObservedDataset::new(data.cells().select(ndarray::Axis(0), &keep))
}

fn chain_stream(config: &ChainConfig, chain: usize, purpose: u64) -> RngStream {
    RngStream::new(config.seed, chain as u64 * STREAMS_PER_CHAIN + purpose)
}

/// `S^(0)` with `s_jl ~ U(-0.1, 0.1)` drawn in `vech` order.
fn initial_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> IsingMatrix {
    let alpha = Array1::from_iter((0..half_len(dim)).map(|_| rng.random_range(-0.1..0.1)));
    vech_inverse(&HalfVec::new(alpha).expect("length is J(J+1)/2"))
}

struct ChainStart {
    s0: IsingMatrix,
    work: Array2<u8>,
}

fn start_chain(data: &ObservedDataset, config: &ChainConfig, chain: usize) -> ChainStart {
    let mut rng = chain_stream(config, chain, INIT_STREAM);
    let s0 = initial_matrix(data.n_items(), &mut rng);
    let work = data.fill_with(|_, _| u8::from(rng.random::<f64>() < 0.5));
    ChainStart { s0, work }
}

/// Output of one imputation chain.
struct ImputationChain {
    draws: Vec<IsingMatrix>,
    betas: Option<Vec<Array2<f64>>>,
    final_data: Array2<u8>,
    s0: IsingMatrix,
}

fn run_imputation_chain(
    data: &ObservedDataset,
    config: &ChainConfig,
    transforms: &TransformSet,
    chain: usize,
    sample_s: bool,
) -> Result<ImputationChain> {
    let dim = data.n_items();
    let ChainStart { s0, mut work } = start_chain(data, config, chain);
    let mut impute_rng = chain_stream(config, chain, IMPUTE_STREAM);
    let mut alpha_rng = chain_stream(config, chain, ALPHA_STREAM);
    let mut betas: Vec<Array1<f64>> = (0..dim).map(|j| s0.row(j).to_owned()).collect();
    let mut s = s0.clone();
    let mut draws = Vec::new();
    let mut beta_log = config.record_beta.then(Vec::new);

    for t in 1..=config.total_iterations {
        for j in 0..dim {
            betas[j] = sample_beta(work.view(), j, &config.priors, betas[j].view(), &mut impute_rng)?;
            let missing = data.missing_set(j);
            if !missing.is_empty() {
                impute_column(j, &mut work, betas[j].view(), missing, &mut impute_rng);
            }
        }
        if config.samples_at(t) {
            if sample_s {
                s = sample_alpha(work.view(), &config.priors, &s, transforms, &mut alpha_rng)?;
                draws.push(s.clone());
            }
            if let Some(log) = beta_log.as_mut() {
                let mut m = Array2::zeros((dim, dim));
                for (j, b) in betas.iter().enumerate() {
                    m.row_mut(j).assign(b);
                }
                log.push(m);
            }
        }
    }
    Ok(ImputationChain {
        draws,
        betas: beta_log,
        final_data: work,
        s0,
    })
}

/// `S` draws on fixed complete data, following the same thinning schedule.
fn run_complete_chain(
    complete: &Array2<u8>,
    s0: IsingMatrix,
    config: &ChainConfig,
    transforms: &TransformSet,
    chain: usize,
) -> Result<Vec<IsingMatrix>> {
    let mut alpha_rng = chain_stream(config, chain, ALPHA_STREAM);
    let mut s = s0;
    let mut draws = Vec::with_capacity(config.retained());
    for _ in 0..config.retained() {
        s = sample_alpha(complete.view(), &config.priors, &s, transforms, &mut alpha_rng)?;
        draws.push(s.clone());
    }
    Ok(draws)
}

fn assemble(
    method: Method,
    per_chain: Vec<Vec<IsingMatrix>>,
    betas: Option<Vec<Vec<Array2<f64>>>>,
    observed_cells_preserved: bool,
    started: Instant,
) -> Result<FitResult> {
    let dim = per_chain[0][0].dim();
    let p = half_len(dim);
    let retained = per_chain[0].len();
    let chains: Vec<Array2<f64>> = per_chain
        .iter()
        .map(|draws| {
            let mut m = Array2::zeros((draws.len(), p));
            for (r, s) in draws.iter().enumerate() {
                m.row_mut(r).assign(vech(s).values());
            }
            m
        })
        .collect();
    let draws: Vec<IsingMatrix> = per_chain.into_iter().flatten().collect();
    let mut sum = Array2::<f64>::zeros((dim, dim));
    for s in &draws {
        sum += s.values();
    }
    sum /= draws.len() as f64;
    let estimate = IsingMatrix::from_lower(sum)?;
    let draws_symmetric = draws.iter().all(|s| s.values() == s.values().t());
    let psrf = if chains.len() >= 2 && retained >= 10 {
        Some(gelman_rubin(&chains)?)
    } else {
        None
    };
    let max_psrf = psrf
        .as_ref()
        .map(|v| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(FitResult {
        method,
        estimate,
        draws,
        chains,
        beta_draws: betas,
        diagnostics: Diagnostics {
            psrf,
            max_psrf,
            retained_per_chain: retained,
            draws_symmetric,
            observed_cells_preserved,
        },
        wall_clock: started.elapsed(),
    })
}

fn observed_preserved(data: &ObservedDataset, filled: &Array2<u8>) -> bool {
    data.cells()
        .indexed_iter()
        .all(|(idx, c)| c.value().is_none_or(|v| filled[idx] == v))
}

fn chain_indices(config: &ChainConfig) -> Vec<usize> {
    (0..config.n_chains).collect()
}

/// Proposed estimator: iterative imputation with `S` sampled every
/// `thinning` iterations after burn-in.
pub fn run_fit(data: &ObservedDataset, config: &ChainConfig) -> Result<FitResult> {
    Ok(fit_all(data, config, &[Method::Proposed])?.remove(0).1?)
}

/// Complete-case baseline: listwise deletion followed by complete-data sampling of `S`.
pub fn fit_complete_case(data: &ObservedDataset, config: &ChainConfig) -> Result<FitResult> {
    Ok(fit_all(data, config, &[Method::CompleteCase])?.remove(0).1?)
}

/// Single-imputation baseline: the imputed data of iteration `T`, then
/// complete-data sampling of `S` on it.
pub fn fit_single_imputation(data: &ObservedDataset, config: &ChainConfig) -> Result<FitResult> {
    Ok(fit_all(data, config, &[Method::SingleImputation])?.remove(0).1?)
}

pub fn fit(data: &ObservedDataset, config: &ChainConfig, method: Method) -> Result<FitResult> {
    match method {
        Method::Proposed => run_fit(data, config),
        Method::SingleImputation => fit_single_imputation(data, config),
        Method::CompleteCase => fit_complete_case(data, config),
    }
}

/// Fits several methods, sharing one imputation run between the proposed
/// and single-imputation estimators. Results are returned in the order
/// requested; a method-level failure (such as an empty complete-case set)
/// is reported per method while configuration errors abort the call.
pub fn fit_all(
    data: &ObservedDataset,
    config: &ChainConfig,
    methods: &[Method],
) -> Result<Vec<(Method, Result<FitResult>)>> {
    config.validate()?;
    let transforms = TransformSet::new(data.n_items());
    let need_proposed = methods.contains(&Method::Proposed);
    let need_imputation = need_proposed || methods.contains(&Method::SingleImputation);

    let started = Instant::now();
    let imputation: Option<Result<Vec<ImputationChain>>> = need_imputation.then(|| {
        chain_indices(config)
            .into_par_iter()
            .map(|k| run_imputation_chain(data, config, &transforms, k, need_proposed))
            .collect()
    });
    let imputation_time = started.elapsed();

    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let result = match method {
            Method::Proposed => {
                let chains = imputation.as_ref().expect("imputation ran");
                match chains {
                    Err(e) => Err(e.clone()),
                    Ok(chains) => {
                        let preserved = chains.iter().all(|c| observed_preserved(data, &c.final_data));
                        let draws = chains.iter().map(|c| c.draws.clone()).collect();
                        let betas = config
                            .record_beta
                            .then(|| chains.iter().map(|c| c.betas.clone().unwrap_or_default()).collect());
                        let t0 = Instant::now();
                        assemble(method, draws, betas, preserved, t0).map(|mut r| {
                            r.wall_clock += imputation_time;
                            r
                        })
                    }
                }
            }
            Method::SingleImputation => {
                let chains = imputation.as_ref().expect("imputation ran");
                match chains {
                    Err(e) => Err(e.clone()),
                    Ok(chains) => {
                        let t0 = Instant::now();
                        let draws: Result<Vec<_>> = chains
                            .par_iter()
                            .enumerate()
                            .map(|(k, c)| run_complete_chain(&c.final_data, c.s0.clone(), config, &transforms, k))
                            .collect();
                        let preserved = chains.iter().all(|c| observed_preserved(data, &c.final_data));
                        draws.and_then(|d| assemble(method, d, None, preserved, t0)).map(|mut r| {
                            r.wall_clock += imputation_time;
                            r
                        })
                    }
                }
            }
            Method::CompleteCase => {
                let t0 = Instant::now();
                listwise_delete(data).and_then(|cc| {
                    let complete = cc.to_complete()?;
                    let draws: Result<Vec<_>> = chain_indices(config)
                        .into_par_iter()
                        .map(|k| {
                            let start = start_chain(&cc, config, k);
                            run_complete_chain(&complete, start.s0, config, &transforms, k)
                        })
                        .collect();
                    assemble(method, draws?, None, true, t0)
                })
            }
        };
        out.push((method, result));
    }
    Ok(out)
}
