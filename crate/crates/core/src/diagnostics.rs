//! Gelman-Rubin potential scale reduction factor.

use ndarray::Array2;

use crate::error::{Error, Result};

/// PSRF per column for `m >= 2` chains, each an `n x p` matrix of retained
/// draws with `n >= 10`. Chains are not split.
///
/// With `W` the mean within-chain variance and `B/n` the variance of the
/// chain means, `R = sqrt(((n-1)/n W + B/n) / W)`. When every chain is
/// constant and they agree, `R = 1`; constant chains that disagree give
/// `+inf`.
pub fn gelman_rubin(chains: &[Array2<f64>]) -> Result<Vec<f64>> {
    if chains.len() < 2 {
        return Err(Error::InvalidChains(format!("{} chain(s) supplied", chains.len())));
    }
    let (n, p) = chains[0].dim();
    if chains.iter().any(|c| c.dim() != (n, p)) {
        return Err(Error::InvalidChains("chains differ in shape".into()));
    }
    if n < 10 {
        return Err(Error::InvalidChains(format!("chain length {n} < 10")));
    }
    let m = chains.len() as f64;
    let nf = n as f64;
    let mut out = Vec::with_capacity(p);
    for col in 0..p {
        let mut means = Vec::with_capacity(chains.len());
        let mut within = 0.0;
        for c in chains {
            let x = c.column(col);
            let mean = x.sum() / nf;
            let var = if x.iter().all(|&v| v == x[0]) {
                0.0
            } else {
                x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)
            };
            means.push(mean);
            within += var;
        }
        within /= m;
        let grand = means.iter().sum::<f64>() / m;
        let between_over_n = if means.iter().all(|&v| v == means[0]) {
            0.0
        } else {
            means.iter().map(|v| (v - grand).powi(2)).sum::<f64>() / (m - 1.0)
        };
        let psrf = if within <= 0.0 {
            if between_over_n <= 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            (((nf - 1.0) / nf * within + between_over_n) / within).sqrt()
        };
        out.push(psrf);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_chain(seed: u64, n: usize, shift: f64) -> Array2<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, 2), |_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z + shift
        })
    }

    #[test]
    fn same_distribution_near_one() {
        let chains = vec![normal_chain(1, 10_000, 0.0), normal_chain(2, 10_000, 0.0)];
        for r in gelman_rubin(&chains).unwrap() {
            assert!(r < 1.02, "psrf {r}");
        }
    }

    #[test]
    fn shifted_chains_flagged() {
        let chains = vec![normal_chain(1, 10_000, 0.0), normal_chain(2, 10_000, 3.0)];
        for r in gelman_rubin(&chains).unwrap() {
            assert!(r > 1.5, "psrf {r}");
        }
    }

    #[test]
    fn constant_chains() {
        let c = Array2::from_elem((20, 3), 0.7);
        assert_eq!(gelman_rubin(&[c.clone(), c.clone()]).unwrap(), vec![1.0; 3]);
        let d = Array2::from_elem((20, 3), 0.1);
        assert!(gelman_rubin(&[c, d]).unwrap()[0].is_infinite());
    }

    #[test]
    fn invalid_inputs() {
        let c = Array2::<f64>::zeros((20, 1));
        assert!(gelman_rubin(std::slice::from_ref(&c)).is_err());
        assert!(gelman_rubin(&[c.clone(), Array2::zeros((19, 1))]).is_err());
        let short = Array2::<f64>::zeros((9, 1));
        assert!(gelman_rubin(&[short.clone(), short]).is_err());
    }
}
