//! Exact Pólya-Gamma `PG(1, c)` variates.
//!
//! Uses the alternating-series accept/reject scheme for the Jacobi
//! distribution `J*(1, z)` with truncation point `t = 0.64`; a `PG(1, c)` draw
//! is `J*(1, |c| / 2) / 4`.

use std::f64::consts::PI;

use rand::Rng;
use rustc_hash::FxHashMap;
use rand_distr::{Exp1, StandardNormal};
use statrs::function::erf::erfc;

const TRUNC: f64 = 0.64;

/// `E[omega]` for `omega ~ PG(1, c)`: `tanh(c/2) / (2c)`, with limit `1/4` at zero.
pub fn pg_mean(c: f64) -> f64 {
    let c = c.abs();
    if c < 1e-4 {
        // tanh(x)/x = 1 - x^2/3 + 2x^4/15
        let x2 = c * c / 4.0;
        0.25 * (1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0)
    } else {
        (c / 2.0).tanh() / (2.0 * c)
    }
}

/// `Var[omega]` for `omega ~ PG(1, c)`.
pub fn pg_variance(c: f64) -> f64 {
    let c = c.abs();
    if c < 1e-3 {
        // series of (sinh(c) - c) / (4 c^3 cosh^2(c/2)) about 0
        1.0 / 24.0 - c * c / 120.0
    } else {
        (c.sinh() - c) / (4.0 * c.powi(3) * (c / 2.0).cosh().powi(2))
    }
}

/// One exact draw from `PG(1, c)`.
pub fn sample_pg1<R: Rng + ?Sized>(c: f64, rng: &mut R) -> f64 {
    let z = 0.5 * c.abs();
    let fz = 0.125 * PI * PI + 0.5 * z * z;
    0.25 * sample_jacobi(z, fz, tail_mass(z, fz), rng)
}

/// Independent `PG(1, c_i)` draws, one per element of `cs`, in order.
///
/// Binary designs repeat the same `c` many times, so the proposal mixture
/// weight is computed once per distinct value. The output equals
/// `cs.map(|c| sample_pg1(c, rng))` draw for draw.
pub fn sample_pg1_batch<R: Rng + ?Sized>(cs: impl IntoIterator<Item = f64>, rng: &mut R) -> Vec<f64> {
    let mut weights: FxHashMap<u64, f64> = FxHashMap::default();
    cs.into_iter()
        .map(|c| {
            let z = 0.5 * c.abs();
            let fz = 0.125 * PI * PI + 0.5 * z * z;
            let p = *weights.entry(z.to_bits()).or_insert_with(|| tail_mass(z, fz));
            0.25 * sample_jacobi(z, fz, p, rng)
        })
        .collect()
}

fn log_std_normal_cdf(x: f64) -> f64 {
    (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
}

/// Probability of proposing from the exponential tail rather than the
/// truncated inverse Gaussian body.
fn tail_mass(z: f64, fz: f64) -> f64 {
    let root_t = TRUNC.sqrt();
    let b = (TRUNC * z - 1.0) / root_t;
    let a = -(TRUNC * z + 1.0) / root_t;
    let x0 = fz.ln() + fz * TRUNC;
    let xb = x0 - z + log_std_normal_cdf(b);
    let xa = x0 + z + log_std_normal_cdf(a);
    let q_over_p = 4.0 / PI * (xb.exp() + xa.exp());
    1.0 / (1.0 + q_over_p)
}

/// n-th coefficient of the alternating series for the `J*(1, 0)` density.
fn series_coef(n: usize, x: f64) -> f64 {
    let k = (n as f64 + 0.5) * PI;
    if x > TRUNC {
        k * (-0.5 * k * k * x).exp()
    } else if x > 0.0 {
        let log = -1.5 * (0.5 * PI * x).ln() + k.ln() - 2.0 * (n as f64 + 0.5).powi(2) / x;
        log.exp()
    } else {
        0.0
    }
}

/// Inverse Gaussian `IG(1/z, 1)` truncated to `(0, TRUNC)`.
fn truncated_inverse_gaussian<R: Rng + ?Sized>(z: f64, rng: &mut R) -> f64 {
    let mu = if z > 0.0 { 1.0 / z } else { f64::INFINITY };
    if mu > TRUNC {
        loop {
            // chi-square proposal restricted to (0, TRUNC), accepted with exp(-z^2 x / 2)
            let x = loop {
                let e1: f64 = rng.sample(Exp1);
                let e2: f64 = rng.sample(Exp1);
                if e1 * e1 <= 2.0 * e2 / TRUNC {
                    break TRUNC / (1.0 + TRUNC * e1).powi(2);
                }
            };
            let alpha = (-0.5 * z * z * x).exp();
            if rng.random::<f64>() <= alpha {
                return x;
            }
        }
    } else {
        loop {
            let y: f64 = rng.sample::<f64, _>(StandardNormal).powi(2);
            let mu_y = mu * y;
            let mut x = mu + 0.5 * mu * mu_y - 0.5 * mu * (4.0 * mu_y + mu_y * mu_y).sqrt();
            if rng.random::<f64>() > mu / (mu + x) {
                x = mu * mu / x;
            }
            if x < TRUNC {
                return x;
            }
        }
    }
}

fn sample_jacobi<R: Rng + ?Sized>(z: f64, fz: f64, p_tail: f64, rng: &mut R) -> f64 {
    loop {
        let x = if rng.random::<f64>() < p_tail {
            let e: f64 = rng.sample(Exp1);
            TRUNC + e / fz
        } else {
            truncated_inverse_gaussian(z, rng)
        };
        let mut s = series_coef(0, x);
        let y = rng.random::<f64>() * s;
        let mut n = 0;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= series_coef(n, x);
                if y <= s {
                    return x;
                }
            } else {
                s += series_coef(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}
