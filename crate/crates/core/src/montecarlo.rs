//! Reproducible ensemble execution.
//!
//! Trial `i` of a run with master seed `s` draws from the ChaCha8 stream
//! `(key = s, stream = i)`. Streams are addressed directly rather than
//! obtained by jumping ahead, so trials can run on any number of threads and
//! still see the same numbers. Results are always returned in trial order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Seed used whenever the caller does not choose one.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Independent random stream for one trial.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// How trials are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Global,
    /// A dedicated pool with this many threads.
    Threads(usize),
}

#[derive(Debug, Error)]
pub enum EnsembleError<E: std::error::Error + 'static> {
    #[error("an ensemble needs at least one trial")]
    NoTrials,
    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: E,
    },
    #[error("could not build thread pool: {0}")]
    Pool(String),
}

/// Runs `task(i, stream_i)` for `i in 0..n_trials` and returns the results
/// in trial order. The first failing trial (lowest index) aborts the run.
pub fn run_ensemble<T, E, F>(
    n_trials: usize,
    master_seed: u64,
    parallelism: Parallelism,
    task: F,
) -> Result<Vec<T>, EnsembleError<E>>
where
    T: Send,
    E: std::error::Error + Send + 'static,
    F: Fn(usize, &mut RngStream) -> Result<T, E> + Sync,
{
    if n_trials == 0 {
        return Err(EnsembleError::NoTrials);
    }
    let run_one = |i: usize| {
        let mut stream = RngStream::new(master_seed, i as u64);
        task(i, &mut stream).map_err(|source| EnsembleError::Trial { trial: i, source })
    };
    // Collect every outcome before short-circuiting so the reported failure
    // is the lowest failing index regardless of scheduling.
    let outcomes: Vec<Result<T, EnsembleError<E>>> = match parallelism {
        Parallelism::Sequential => (0..n_trials).map(run_one).collect(),
        Parallelism::Global => (0..n_trials).into_par_iter().map(run_one).collect(),
        Parallelism::Threads(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| EnsembleError::Pool(e.to_string()))?;
            pool.install(|| (0..n_trials).into_par_iter().map(run_one).collect())
        }
    };
    outcomes.into_iter().collect()
}

/// Infallible variant of [`run_ensemble`].
pub fn run_trials<T, F>(n_trials: usize, master_seed: u64, parallelism: Parallelism, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut RngStream) -> T + Sync,
{
    run_ensemble::<T, std::convert::Infallible, _>(n_trials, master_seed, parallelism, |i, s| Ok(task(i, s)))
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor `n − 1`); absent for `n = 1`.
    pub std_dev: Option<f64>,
    /// `std_dev / √n`; absent for `n = 1`.
    pub standard_error: Option<f64>,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("cannot summarise an empty sample")]
    Empty,
}

pub fn summarize(values: &[f64]) -> Result<EnsembleStats, StatsError> {
    let n = values.len();
    if n == 0 {
        return Err(StatsError::Empty);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let (std_dev, standard_error) = if n >= 2 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n as f64 - 1.0)).sqrt();
        (Some(sd), Some(sd / (n as f64).sqrt()))
    } else {
        (None, None)
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(EnsembleStats {
        n,
        mean,
        std_dev,
        standard_error,
        min,
        max,
    })
}

/// A binomial proportion with its standard error.
///
/// The standard error uses the Agresti–Coull centre `(k + 2) / (n + 4)`, so
/// it stays positive when every trial agrees; a zero error would turn a
/// "within three standard errors" comparison into an exact-equality test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub standard_error: f64,
}

impl Proportion {
    pub fn new(successes: usize, trials: usize) -> Self {
        let n = trials as f64;
        let centre = (successes as f64 + 2.0) / (n + 4.0);
        Self {
            successes,
            trials,
            estimate: successes as f64 / n,
            standard_error: (centre * (1.0 - centre) / (n + 4.0)).sqrt(),
        }
    }

    /// `|estimate − target| ≤ k · SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.standard_error
    }

    /// `estimate ± 1.96 · SE`, clipped to `[0, 1]`.
    pub fn confidence_interval(&self) -> (f64, f64) {
        let half = 1.96 * self.standard_error;
        ((self.estimate - half).max(0.0), (self.estimate + half).min(1.0))
    }
}
