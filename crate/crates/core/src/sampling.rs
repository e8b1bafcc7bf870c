//! Seeded, worker-partitioned Monte Carlo plumbing.
//!
//! Worker `w` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `w`
//! and handles a fixed share of the samples. Partial results are merged in
//! worker order, so output depends only on `(seed, workers)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl Estimate {
    /// Binomial estimate from a success count.
    pub fn from_count(successes: u64, samples: u64) -> Estimate {
        let p = successes as f64 / samples as f64;
        Estimate {
            mean: p,
            std_err: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }

    /// Mean with `stddev / sqrt(N)`, from a running sum and sum of squares.
    pub fn from_moments(sum: f64, sum_sq: f64, samples: u64) -> Estimate {
        let n = samples as f64;
        let mean = sum / n;
        let var = if samples > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_err: (var / n).sqrt(),
            samples,
        }
    }
}

pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

/// Sample counts per worker: an even split, remainder to the first workers.
pub fn split(samples: u64, workers: usize) -> Vec<u64> {
    let w = workers as u64;
    (0..w)
        .map(|i| samples / w + u64::from(i < samples % w))
        .collect()
}

/// Runs `task(rng, share)` once per worker in parallel; results come back in worker order.
pub fn run_workers<T, F>(seed: u64, workers: usize, samples: u64, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<T> + Sync,
{
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    split(samples, workers)
        .into_par_iter()
        .enumerate()
        .map(|(w, share)| task(&mut worker_rng(seed, w), share))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn split_is_exact() {
        assert_eq!(split(10, 3), vec![4, 3, 3]);
        assert_eq!(split(2, 4), vec![1, 1, 0, 0]);
        assert_eq!(split(7, 1).iter().sum::<u64>(), 7);
    }

    #[test]
    fn deterministic_per_seed_and_workers() {
        let run = |seed| {
            run_workers(seed, 4, 1000, |rng, n| {
                Ok((0..n).map(|_| rng.random::<u32>() as u64).sum::<u64>())
            })
            .unwrap()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn rejects_zero_workers() {
        assert!(run_workers(1, 0, 10, |_, _| Ok(())).is_err());
    }

    #[test]
    fn moments() {
        let e = Estimate::from_moments(3.0, 5.0, 2);
        assert_eq!(e.mean, 1.5);
        assert!((e.std_err - 0.5).abs() < 1e-12);
        assert_eq!(Estimate::from_count(1, 4).mean, 0.25);
    }
}
