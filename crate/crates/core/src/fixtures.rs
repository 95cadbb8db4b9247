//! Random finite filtered spaces and processes for property testing.
//!
//! All generators draw small rationals (numerators in `-9..=9`, denominators
//! in `1..=6`) so that exact arithmetic stays cheap.

use std::sync::Arc;

use rand::Rng;

use crate::prob::{conditional_expectation, FiniteSpace, Partition};
use crate::process::{AdaptedProcess, Filtration, PredictableProcess, ProcessError};
use crate::scalar::Scalar;
use crate::upcrossing::SamplePath;

fn small<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> S {
    S::from_ratio(rng.random_range(-9..=9), rng.random_range(1..=6))
}

/// Strictly positive probabilities on `n` outcomes from integer weights.
pub fn random_space<S: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Arc<FiniteSpace<S>> {
    let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..=12)).collect();
    let total: i64 = weights.iter().sum();
    let probs = weights.iter().map(|&w| S::from_ratio(w, total)).collect();
    Arc::new(FiniteSpace::new(probs).expect("positive weights normalised by their sum"))
}

/// A uniformly random assignment of `n` outcomes to at most `max_blocks` labels.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, n: usize, max_blocks: usize) -> Partition {
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..max_blocks.max(1))).collect();
    Partition::from_labels(&labels).expect("non-empty label list")
}

/// Splits every block of `coarse` at random, giving a refinement.
pub fn random_refinement<R: Rng + ?Sized>(rng: &mut R, coarse: &Partition) -> Partition {
    let mut labels = vec![(0, 0); coarse.size()];
    for (b, block) in coarse.blocks().iter().enumerate() {
        let pieces = rng.random_range(1..=block.len().min(3));
        for &i in block {
            labels[i] = (b, rng.random_range(0..pieces));
        }
    }
    Partition::from_labels(&labels).expect("non-empty label list")
}

/// A filtration `F_0 = {Ω} ⊆ F_1 ⊆ … ⊆ F_steps` of random refinements.
pub fn random_filtration<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    space: Arc<FiniteSpace<S>>,
    steps: usize,
) -> Arc<Filtration<S>> {
    let mut partitions = vec![Partition::trivial(space.len())];
    for _ in 0..steps {
        let next = random_refinement(rng, partitions.last().unwrap());
        partitions.push(next);
    }
    Arc::new(Filtration::new(space, partitions).expect("refinements by construction"))
}

/// A random adapted process: independent random values per block.
pub fn random_adapted<S: Scalar, R: Rng + ?Sized>(rng: &mut R, filtration: &Arc<Filtration<S>>) -> AdaptedProcess<S> {
    let n = filtration.space().len();
    let values = filtration
        .partitions()
        .iter()
        .map(|p| {
            let per_block: Vec<S> = (0..p.num_blocks()).map(|_| small(rng)).collect();
            (0..n).map(|w| per_block[p.block_of(w)].clone()).collect()
        })
        .collect();
    AdaptedProcess::new(filtration.clone(), values).expect("block-constant by construction")
}

/// A random process with prescribed one-step drift sign.
///
/// Starts from a random adapted process and recentres each increment so that
/// `E[X_{n+1} | F_n] − X_n` equals `drift` times a random non-negative
/// block-constant amount. `drift = 0` gives a martingale, `+1` a
/// submartingale, `-1` a supermartingale.
pub fn random_with_drift<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    filtration: &Arc<Filtration<S>>,
    drift: i64,
) -> AdaptedProcess<S> {
    let raw = random_adapted(rng, filtration);
    let n = filtration.space().len();
    let mut values: Vec<Vec<S>> = vec![raw.at(0).values().to_vec()];
    for t in 0..filtration.horizon() {
        let partition = filtration.at(t);
        let innovation = raw.at(t + 1);
        let centre = conditional_expectation(innovation, partition).expect("same space");
        let push: Vec<S> = (0..partition.num_blocks())
            .map(|_| S::from_ratio(drift * rng.random_range(0..=4), rng.random_range(1..=3)))
            .collect();
        let next = (0..n)
            .map(|w| {
                values[t][w].clone() + innovation.values()[w].clone() - centre.values()[w].clone()
                    + push[partition.block_of(w)].clone()
            })
            .collect();
        values.push(next);
    }
    AdaptedProcess::new(filtration.clone(), values).expect("adapted by construction")
}

pub fn random_martingale<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    filtration: &Arc<Filtration<S>>,
) -> AdaptedProcess<S> {
    random_with_drift(rng, filtration, 0)
}

/// Random predictable process with values in `[lo, hi]` (given as small
/// integers), declared bound `max(|lo|, |hi|)`.
pub fn random_predictable<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    filtration: &Arc<Filtration<S>>,
    lo: i64,
    hi: i64,
) -> Result<PredictableProcess<S>, ProcessError> {
    let n = filtration.space().len();
    let denom = 4;
    let values = (1..=filtration.horizon())
        .map(|time| {
            let p = filtration.at(time - 1);
            let per_block: Vec<S> = (0..p.num_blocks())
                .map(|_| S::from_ratio(rng.random_range(lo * denom..=hi * denom), denom))
                .collect();
            (0..n).map(|w| per_block[p.block_of(w)].clone()).collect()
        })
        .collect();
    let bound = S::from_ratio(lo.abs().max(hi.abs()), 1);
    PredictableProcess::new(filtration.clone(), values, bound)
}

/// Shapes of fuzzed sample paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathFamily {
    /// `±1` random walk from a random integer start.
    Walk,
    /// Independent values in `[-3, 3]` on a grid of halves.
    Noise,
    /// Nondecreasing or nonincreasing steps.
    Monotone,
    /// Alternates between a low and a high level with random jitter.
    Alternating,
}

impl PathFamily {
    pub const ALL: [PathFamily; 4] = [
        PathFamily::Walk,
        PathFamily::Noise,
        PathFamily::Monotone,
        PathFamily::Alternating,
    ];
}

/// A random path `X_0, …, X_len` from `family`; values are multiples of 1/2.
pub fn random_path<S: Scalar, R: Rng + ?Sized>(rng: &mut R, family: PathFamily, len: usize) -> SamplePath<S> {
    let half = |k: i64| S::from_ratio(k, 2);
    let values: Vec<S> = match family {
        PathFamily::Walk => {
            let mut x = rng.random_range(-3i64..=3) * 2;
            let mut v = vec![half(x)];
            for _ in 0..len {
                x += if rng.random::<bool>() { 2 } else { -2 };
                v.push(half(x));
            }
            v
        }
        PathFamily::Noise => (0..=len).map(|_| half(rng.random_range(-6..=6))).collect(),
        PathFamily::Monotone => {
            let sign = if rng.random::<bool>() { 1 } else { -1 };
            let mut x = rng.random_range(-6i64..=6);
            let mut v = vec![half(x)];
            for _ in 0..len {
                x += sign * rng.random_range(0..=2);
                v.push(half(x));
            }
            v
        }
        PathFamily::Alternating => {
            let lo = rng.random_range(-6i64..=0);
            let hi = lo + rng.random_range(1..=6);
            (0..=len)
                .map(|n| {
                    let jitter = rng.random_range(-1..=1);
                    half(if n % 2 == 0 { lo + jitter } else { hi + jitter })
                })
                .collect()
        }
    };
    SamplePath::new(values).expect("non-empty finite path")
}
