//! Reference computations for the integration tests. Nothing here calls into
//! the library: every quantity is rebuilt from plain loops over patterns,
//! series definitions or grids.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Symmetric matrix with `N(0, scale^2)`-ish entries (uniform, same spread).
pub fn random_symmetric<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; dim]; dim];
    for a in 0..dim {
        for b in 0..=a {
            let v = (rng.random::<f64>() * 2.0 - 1.0) * scale * 3f64.sqrt();
            s[a][b] = v;
            s[b][a] = v;
        }
    }
    s
}

pub fn pattern(bits: usize, dim: usize) -> Vec<u8> {
    (0..dim).map(|k| ((bits >> k) & 1) as u8).collect()
}

/// `y'Sy / 2` by the double sum.
pub fn energy(s: &[Vec<f64>], y: &[u8]) -> f64 {
    let mut e = 0.0;
    for a in 0..y.len() {
        for b in 0..y.len() {
            e += f64::from(y[a]) * s[a][b] * f64::from(y[b]);
        }
    }
    0.5 * e
}

/// Joint pmf of every pattern, indexed by bitmask, by brute force.
pub fn pmf_table(s: &[Vec<f64>]) -> Vec<f64> {
    let dim = s.len();
    let energies: Vec<f64> = (0..1usize << dim).map(|b| energy(s, &pattern(b, dim))).collect();
    let max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = energies.iter().map(|e| (e - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

pub fn log_normalizer(s: &[Vec<f64>]) -> f64 {
    let dim = s.len();
    let energies: Vec<f64> = (0..1usize << dim).map(|b| energy(s, &pattern(b, dim))).collect();
    let max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + energies.iter().map(|e| (e - max).exp()).sum::<f64>().ln()
}

/// `P(Y_j = 1 | y_{-j})` as a ratio of joint probabilities.
pub fn conditional_from_joint(s: &[Vec<f64>], y: &[u8], j: usize) -> f64 {
    let mut one = y.to_vec();
    one[j] = 1;
    let mut zero = y.to_vec();
    zero[j] = 0;
    let (e1, e0) = (energy(s, &one), energy(s, &zero));
    // p1 / (p0 + p1) with the shared normaliser cancelled
    1.0 / (1.0 + (e0 - e1).exp())
}

/// `PG(1, c)` from its defining series, truncated after `terms` and with the
/// mean of the dropped tail added back.
pub struct PgSeries {
    terms: usize,
    d: f64,
    tail_mean: f64,
}

impl PgSeries {
    pub fn new(c: f64, terms: usize) -> Self {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let d = c * c / (4.0 * pi2);
        let tail_mean = (terms + 1..terms + 2_000_000)
            .map(|k| {
                let h = k as f64 - 0.5;
                1.0 / (2.0 * pi2 * (h * h + d))
            })
            .sum();
        PgSeries { terms, d, tail_mean }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut acc = 0.0;
        for k in 1..=self.terms {
            let h = k as f64 - 0.5;
            let g: f64 = Exp1.sample(rng);
            acc += g / (h * h + self.d);
        }
        acc / (2.0 * pi2) + self.tail_mean
    }
}

/// `E[PG(1, c)]` by summing the series means directly.
pub fn pg_mean_series(c: f64) -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let d = c * c / (4.0 * pi2);
    let mut total = 0.0;
    // terms decay like k^-2; add the integral tail after the cut
    let cut = 1_000_000usize;
    for k in 1..=cut {
        let h = k as f64 - 0.5;
        total += 1.0 / (h * h + d);
    }
    total += 1.0 / (cut as f64);
    total / (2.0 * pi2)
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_sf(lambda))
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut total = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        total += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * total).clamp(0.0, 1.0)
}

/// Posterior mean of a density given on log scale, by a tensor grid over
/// `[lo, hi]^d` with `points` nodes per axis. Returns `(mean, sd)`.
pub fn grid_moments(log_density: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], points: usize) -> (Vec<f64>, Vec<f64>) {
    let dim = lo.len();
    let total_nodes = points.pow(dim as u32);
    let node = |idx: usize| -> Vec<f64> {
        let mut rest = idx;
        (0..dim)
            .map(|d| {
                let i = rest % points;
                rest /= points;
                lo[d] + (hi[d] - lo[d]) * i as f64 / (points - 1) as f64
            })
            .collect()
    };
    let logs: Vec<f64> = (0..total_nodes).map(|i| log_density(&node(i))).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut m1 = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];
    for (i, l) in logs.iter().enumerate() {
        let w = (l - max).exp();
        let x = node(i);
        z += w;
        for d in 0..dim {
            m1[d] += w * x[d];
            m2[d] += w * x[d] * x[d];
        }
    }
    let mean: Vec<f64> = m1.iter().map(|v| v / z).collect();
    let sd = m2
        .iter()
        .zip(&mean)
        .map(|(v, m)| (v / z - m * m).max(0.0).sqrt())
        .collect();
    (mean, sd)
}

/// Two passes: a wide coarse grid to locate the mass, then a fine grid over
/// mean +- 8 sd.
pub fn adaptive_posterior_mean(log_density: &dyn Fn(&[f64]) -> f64, dim: usize) -> Vec<f64> {
    let (m, sd) = grid_moments(log_density, &vec![-12.0; dim], &vec![12.0; dim], if dim > 2 { 49 } else { 241 });
    let lo: Vec<f64> = m.iter().zip(&sd).map(|(m, s)| m - 8.0 * s.max(0.05)).collect();
    let hi: Vec<f64> = m.iter().zip(&sd).map(|(m, s)| m + 8.0 * s.max(0.05)).collect();
    grid_moments(log_density, &lo, &hi, if dim > 2 { 61 } else { 301 }).0
}

fn log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Counts of the four J=2 patterns, indexed `y1 + 2 y2`.
pub fn pattern_counts_j2(rows: &[[u8; 2]]) -> [f64; 4] {
    let mut c = [0.0; 4];
    for r in rows {
        c[(r[0] + 2 * r[1]) as usize] += 1.0;
    }
    c
}

/// Log posterior of `(beta_jj, beta_jk)` for item `j` of J=2 data:
/// logistic regression with logit `beta_jj / 2 + beta_jk y_k`, prior
/// variances `v_int` and `v_slope`.
pub fn beta_log_post_j2(counts: &[f64; 4], j: usize, v_int: f64, v_slope: f64) -> impl Fn(&[f64]) -> f64 + '_ {
    move |b: &[f64]| {
        let mut lp = -0.5 * b[0] * b[0] / v_int - 0.5 * b[1] * b[1] / v_slope;
        for (idx, &n) in counts.iter().enumerate() {
            let y = [(idx & 1) as f64, (idx >> 1) as f64];
            let k = 1 - j;
            let eta = 0.5 * b[0] + b[1] * y[k];
            lp += n * if y[j] == 1.0 { log_sigmoid(eta) } else { log_sigmoid(-eta) };
        }
        lp
    }
}

/// Log pseudo-posterior of `(s11, s21, s22)` for J=2 data. Each item's
/// conditional carries its own copy of the normal prior on the coordinates it
/// touches, so the shared edge gets the slope precision twice.
pub fn alpha_log_post_j2(counts: &[f64; 4], v_int: f64, v_slope: f64) -> impl Fn(&[f64]) -> f64 + '_ {
    move |a: &[f64]| {
        let (s11, s21, s22) = (a[0], a[1], a[2]);
        let mut lp = -0.5 * s11 * s11 / v_int - 0.5 * s22 * s22 / v_int - s21 * s21 / v_slope;
        for (idx, &n) in counts.iter().enumerate() {
            let y1 = (idx & 1) as f64;
            let y2 = (idx >> 1) as f64;
            let eta1 = 0.5 * s11 + s21 * y2;
            let eta2 = 0.5 * s22 + s21 * y1;
            lp += n * if y1 == 1.0 { log_sigmoid(eta1) } else { log_sigmoid(-eta1) };
            lp += n * if y2 == 1.0 { log_sigmoid(eta2) } else { log_sigmoid(-eta2) };
        }
        lp
    }
}

/// Pearson chi-square of observed counts against expected probabilities;
/// cells with expectation under 5 are pooled. Returns `(stat, dof)`.
pub fn chi_square(counts: &[usize], probs: &[f64]) -> (f64, usize) {
    let n: usize = counts.iter().sum();
    let mut cells = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in counts.iter().zip(probs) {
        let e = p * n as f64;
        if e < 5.0 {
            pool_o += o as f64;
            pool_e += e;
        } else {
            cells.push((o as f64, e));
        }
    }
    if pool_e > 0.0 {
        cells.push((pool_o, pool_e));
    }
    let stat = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    (stat, cells.len() - 1)
}

/// Upper 0.1% point of chi-square with `dof` degrees of freedom
/// (Wilson-Hilferty).
pub fn chi_square_crit_001(dof: usize) -> f64 {
    let k = dof as f64;
    let z = 3.090232306167813;
    k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3)
}
