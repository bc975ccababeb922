//! Pólya-Gamma Gibbs transitions for the auxiliary logistic coefficients
//! `beta_j` and for the half-vectorized Ising parameters `alpha = vech(S)`.
//!
//! Both samplers share the design `X_j = Y - kappa_j e_j'` with
//! `kappa_ij = y_ij - 1/2`: row `i` of `X_j` equals `y_i` except that entry
//! `j` is the constant `1/2`, which carries the `s_jj / 2` intercept.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfvec::{half_len, vech_index, vech_inverse, HalfVec, TransformSet};
use crate::ising::IsingMatrix;
use crate::linalg::Cholesky;
use crate::pg::sample_pg1_batch;

/// Independent zero-mean normal priors on intercepts and slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// Prior variance of intercepts (`beta_jj`, `s_jj`).
    pub intercept_variance: f64,
    /// Prior variance of slopes (`beta_jk`, `s_jk`, `k != j`).
    pub slope_variance: f64,
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            intercept_variance: 100.0,
            slope_variance: 1.0,
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("intercept_variance", self.intercept_variance),
            ("slope_variance", self.slope_variance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Prior precision of coordinate `k` of `beta_j`.
    #[inline]
    pub fn precision(&self, j: usize, k: usize) -> f64 {
        if j == k {
            1.0 / self.intercept_variance
        } else {
            1.0 / self.slope_variance
        }
    }
}

/// Normal distribution held as mean and the Cholesky factor of its precision.
#[derive(Debug, Clone)]
pub struct GaussianPosterior {
    mean: Array1<f64>,
    precision_factor: Cholesky,
}

impl GaussianPosterior {
    /// Builds `N(P^{-1} b, P^{-1})` from precision `P` and linear term `b`.
    pub fn from_precision(precision: ArrayView2<'_, f64>, linear: ArrayView1<'_, f64>) -> Result<Self> {
        let precision_factor = Cholesky::factor(precision)?;
        let mean = precision_factor.solve_vec(linear);
        Ok(GaussianPosterior {
            mean,
            precision_factor,
        })
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn precision_factor(&self) -> &Cholesky {
        &self.precision_factor
    }

    /// `Sigma = P^{-1}` from two triangular solves against the identity.
    pub fn covariance(&self) -> Array2<f64> {
        self.precision_factor.inverse()
    }

    /// `mu + L^{-T} z` with `z ~ N(0, I)` and `P = L L'`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Array1<f64> {
        let mut z: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        self.precision_factor.solve_upper_in_place(&mut z);
        &self.mean + &Array1::from(z)
    }
}

fn check_item(data: &ArrayView2<'_, u8>, j: usize) -> Result<()> {
    if j >= data.ncols() {
        return Err(Error::DimensionMismatch {
            expected: data.ncols(),
            found: j + 1,
        });
    }
    Ok(())
}

fn check_complete(data: &ArrayView2<'_, u8>) -> Result<()> {
    if data.iter().any(|&v| v > 1) {
        return Err(Error::MissingCells);
    }
    Ok(())
}

/// `X_j = Y - kappa_j e_j'`.
pub fn beta_design(data: ArrayView2<'_, u8>, j: usize) -> Result<Array2<f64>> {
    check_item(&data, j)?;
    check_complete(&data)?;
    let mut x = data.mapv(f64::from);
    x.column_mut(j).fill(0.5);
    Ok(x)
}

/// `(X_j' D_w X_j, X_j' kappa_j)` for one item.
fn item_gram(data: ArrayView2<'_, u8>, j: usize, omega: ArrayView1<'_, f64>) -> (Array2<f64>, Array1<f64>) {
    let mut x = data.mapv(f64::from);
    let kappa = x.column(j).mapv(|v| v - 0.5);
    x.column_mut(j).fill(0.5);
    let linear = x.t().dot(&kappa);
    let weighted = &x * &omega.insert_axis(Axis(1));
    (x.t().dot(&weighted), linear)
}

/// Posterior of `beta_j` given augmentation variables `omega` (length `N`).
pub fn beta_posterior(
    data: ArrayView2<'_, u8>,
    j: usize,
    omega: ArrayView1<'_, f64>,
    prior: &PriorSpec,
) -> Result<GaussianPosterior> {
    check_item(&data, j)?;
    check_complete(&data)?;
    if omega.len() != data.nrows() {
        return Err(Error::DimensionMismatch {
            expected: data.nrows(),
            found: omega.len(),
        });
    }
    let dim = data.ncols();
    let (mut gram, linear) = item_gram(data, j, omega);
    for k in 0..dim {
        gram[[k, k]] += prior.precision(j, k);
    }
    GaussianPosterior::from_precision(gram.view(), linear.view())
}

/// Linear predictor `x_i' beta = beta_jj / 2 + sum_{k != j} beta_jk y_ik`.
#[inline]
fn item_logit(row: ArrayView1<'_, u8>, j: usize, coef: ArrayView1<'_, f64>) -> f64 {
    let mut eta = 0.5 * coef[j];
    for (k, (&y, &b)) in row.iter().zip(coef.iter()).enumerate() {
        if k != j && y == 1 {
            eta += b;
        }
    }
    eta
}

/// One Pólya-Gamma transition for `beta_j`, starting from `beta_prev`.
pub fn sample_beta<R: Rng + ?Sized>(
    data: ArrayView2<'_, u8>,
    j: usize,
    prior: &PriorSpec,
    beta_prev: ArrayView1<'_, f64>,
    rng: &mut R,
) -> Result<Array1<f64>> {
    check_item(&data, j)?;
    if beta_prev.len() != data.ncols() {
        return Err(Error::DimensionMismatch {
            expected: data.ncols(),
            found: beta_prev.len(),
        });
    }
    let omega = Array1::from(sample_pg1_batch(
        data.outer_iter().map(|row| item_logit(row, j, beta_prev)),
        rng,
    ));
    let post = beta_posterior(data, j, omega.view(), prior)?;
    Ok(post.sample(rng))
}

/// `(i, j) -> s_jj / 2 + sum_{k != j} s_jk y_ik`, i.e. `(YS)_ij - (y_ij - 1/2) s_jj`.
pub fn omega_logit_matrix(data: ArrayView2<'_, u8>, s: &IsingMatrix) -> Result<Array2<f64>> {
    if data.ncols() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: data.ncols(),
        });
    }
    check_complete(&data)?;
    let (n, dim) = data.dim();
    let mut out = Array2::zeros((n, dim));
    for (i, row) in data.outer_iter().enumerate() {
        for j in 0..dim {
            out[[i, j]] = item_logit(row, j, s.row(j));
        }
    }
    Ok(out)
}

/// Posterior of `alpha = vech(S)` given the `N x J` augmentation matrix.
///
/// Precision is `sum_j T_j' (X_j' D_{w_j} X_j + D_{beta_j}) T_j`, assembled by
/// scattering each `J x J` block through the `vech` index map rather than by
/// forming the `NJ`-row stacked design.
pub fn alpha_posterior(
    data: ArrayView2<'_, u8>,
    omega: ArrayView2<'_, f64>,
    prior: &PriorSpec,
    transforms: &TransformSet,
) -> Result<GaussianPosterior> {
    let (n, dim) = data.dim();
    if transforms.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: transforms.dim(),
            found: dim,
        });
    }
    if omega.dim() != (n, dim) {
        return Err(Error::DimensionMismatch {
            expected: n * dim,
            found: omega.len(),
        });
    }
    check_complete(&data)?;
    let p = half_len(dim);
    let mut precision = Array2::zeros((p, p));
    let mut linear = Array1::zeros(p);
    for j in 0..dim {
        let (gram, lin_j) = item_gram(data, j, omega.column(j));
        for k in 0..dim {
            let pk = vech_index(k, j, dim);
            linear[pk] += lin_j[k];
            precision[[pk, pk]] += prior.precision(j, k);
            for l in 0..dim {
                precision[[pk, vech_index(l, j, dim)]] += gram[[k, l]];
            }
        }
    }
    GaussianPosterior::from_precision(precision.view(), linear.view())
}

/// One Pólya-Gamma transition for `S`, starting from `s_prev`.
pub fn sample_alpha<R: Rng + ?Sized>(
    data: ArrayView2<'_, u8>,
    prior: &PriorSpec,
    s_prev: &IsingMatrix,
    transforms: &TransformSet,
    rng: &mut R,
) -> Result<IsingMatrix> {
    let logits = omega_logit_matrix(data, s_prev)?;
    let omega = Array2::from_shape_vec(logits.raw_dim(), sample_pg1_batch(logits.iter().copied(), rng))
        .expect("one draw per logit");
    let post = alpha_posterior(data, omega.view(), prior, transforms)?;
    let alpha = HalfVec::new(post.sample(rng))?;
    Ok(vech_inverse(&alpha))
}
