//! Seeded direct Monte Carlo for the product tail.
//!
//! Samples are split into fixed-size shards. Shard `i` draws from ChaCha8
//! seeded with `seed` on stream `i`, so the estimate depends only on
//! `(model, n, samples, seed)` and not on how many threads ran the shards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PoissonModel;

pub const MIN_SAMPLES: u64 = 10_000;
const SHARD_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub p_hat: f64,
    /// `sqrt(p_hat (1 - p_hat) / samples)`.
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
    pub seed: u64,
}

/// One Poisson draw by sequential inversion of the CDF.
///
/// Exact for moderate rates; `exp(-lambda)` underflows past `lambda ~ 745`.
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u >= cdf && p > 0.0 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn count_hits(lambdas: &[f64], n: u64, draws: u64, rng: &mut ChaCha8Rng) -> u64 {
    let mut hits = 0;
    'sample: for _ in 0..draws {
        let mut product = 1u64;
        for &l in lambdas {
            let k = sample_poisson(l, rng);
            if k == 0 {
                continue 'sample;
            }
            product = product.saturating_mul(k);
        }
        if product >= n {
            hits += 1;
        }
    }
    hits
}

/// Fraction of `samples` seeded draws with `X1 ... Xm >= n`.
///
/// Runs on the current rayon pool. Below roughly `1 / samples` the estimate
/// is usually exactly 0 with zero standard error.
pub fn mc_tail(model: &PoissonModel, n: u64, samples: u64, seed: u64) -> Result<McEstimate> {
    if n < 1 {
        return Err(Error::InvalidArgument("threshold n must be >= 1".into()));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let shards = samples.div_ceil(SHARD_SIZE);
    let lambdas = model.lambdas();
    let per_shard: Vec<u64> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let draws = SHARD_SIZE.min(samples - i * SHARD_SIZE);
            count_hits(lambdas, n, draws, &mut shard_rng(seed, i))
        })
        .collect();
    let hits: u64 = per_shard.iter().sum();
    let p_hat = hits as f64 / samples as f64;
    Ok(McEstimate {
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / samples as f64).sqrt(),
        hits,
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(lambda: f64, draws: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..draws).map(|_| sample_poisson(lambda, &mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        (mean, var)
    }

    #[test]
    fn sample_mean_in_band() {
        let (mean, _) = moments(2.0, 1_000_000, 7);
        assert!((mean - 2.0).abs() <= 4.0 * (2.0f64 / 1e6).sqrt(), "{mean}");
    }

    #[test]
    fn sample_variance_in_band() {
        // Var of the sample variance for Poisson: (mu4 - sigma^4 (d-3)/(d-1)) / d,
        // with mu4 = lambda (1 + 3 lambda).
        let (lambda, d) = (3.0, 1_000_000usize);
        let (_, var) = moments(lambda, d, 11);
        let mu4 = lambda * (1.0 + 3.0 * lambda);
        let sd = ((mu4 - lambda * lambda) / d as f64).sqrt();
        assert!((var - lambda).abs() <= 4.0 * sd, "{var}");
    }

    #[test]
    fn reproducible_draws() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10).map(|_| sample_poisson(2.0, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }

    #[test]
    fn independent_of_thread_count() {
        let model = PoissonModel::pair(2.0, 3.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_tail(&model, 10, 300_000, 5).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn stderr_formula_and_degenerate_tail() {
        let model = PoissonModel::pair(2.0, 3.0).unwrap();
        let est = mc_tail(&model, 5, 100_000, 1).unwrap();
        let expect = (est.p_hat * (1.0 - est.p_hat) / 1e5).sqrt();
        assert_eq!(est.stderr, expect);
        let far = mc_tail(&model, 10_000, 100_000, 1).unwrap();
        assert_eq!((far.p_hat, far.stderr), (0.0, 0.0));
    }

    #[test]
    fn argument_checks() {
        let model = PoissonModel::pair(2.0, 3.0).unwrap();
        assert!(mc_tail(&model, 0, 100_000, 1).is_err());
        assert!(mc_tail(&model, 5, 9_999, 1).is_err());
    }
}
