//! Finite probability spaces, partitions, random variables and exact
//! conditional expectation.
//!
//! On a finite space where every outcome has positive probability, a
//! sub-σ-algebra is the same thing as a partition of the outcomes, and a
//! random variable is measurable exactly when it is constant on every block.
//! The conditional expectation of `X` given a partition is then the
//! probability-weighted block average of `X`, which is what
//! [`conditional_expectation`] computes.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("a probability space needs at least one outcome")]
    EmptySpace,
    #[error("outcome {index} has non-positive probability {value}")]
    NonPositiveProbability { index: usize, value: String },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: String },
    #[error("{labels} outcome labels given for {outcomes} outcomes")]
    LabelCount { labels: usize, outcomes: usize },
    #[error("partition has an empty block")]
    EmptyBlock,
    #[error("outcome {0} appears in more than one block")]
    OverlappingBlocks(usize),
    #[error("outcome {0} is not covered by any block")]
    UncoveredOutcome(usize),
    #[error("outcome index {index} is out of range for a space of {size} outcomes")]
    OutcomeOutOfRange { index: usize, size: usize },
    #[error("objects live on different spaces ({left} vs {right} outcomes)")]
    SpaceMismatch { left: usize, right: usize },
    #[error("random variable has {got} values, space has {expected} outcomes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value at outcome {0} is not finite")]
    NonFiniteValue(usize),
    #[error("random variable is not measurable: it varies within block {block}")]
    NotMeasurable { block: usize },
}

/// A finite sample space with strictly positive outcome probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<S> {
    labels: Vec<String>,
    probs: Vec<S>,
}

impl<S: Scalar> FiniteSpace<S> {
    /// Builds a space whose outcomes are labelled `0..n`.
    pub fn new(probs: Vec<S>) -> Result<Self, ProbError> {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::with_labels(labels, probs)
    }

    pub fn with_labels(labels: Vec<String>, probs: Vec<S>) -> Result<Self, ProbError> {
        if probs.is_empty() {
            return Err(ProbError::EmptySpace);
        }
        if labels.len() != probs.len() {
            return Err(ProbError::LabelCount {
                labels: labels.len(),
                outcomes: probs.len(),
            });
        }
        for (index, p) in probs.iter().enumerate() {
            if !p.is_finite() || !p.is_positive() {
                return Err(ProbError::NonPositiveProbability {
                    index,
                    value: p.to_string(),
                });
            }
        }
        let sum = probs.iter().fold(S::zero(), |acc, p| acc + p.clone());
        if !sum.within(&S::one(), S::default_tol()) {
            return Err(ProbError::NotNormalized { sum: sum.to_string() });
        }
        Ok(Self { labels, probs })
    }

    /// Uniform distribution on `n` outcomes.
    pub fn uniform(n: usize) -> Result<Self, ProbError> {
        if n == 0 {
            return Err(ProbError::EmptySpace);
        }
        Self::new(vec![S::one() / S::from_usize(n); n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Probability of a set of outcome indices.
    pub fn prob_of(&self, outcomes: &[usize]) -> S {
        outcomes.iter().fold(S::zero(), |acc, &i| acc + self.probs[i].clone())
    }
}

/// A partition of `0..n` into disjoint non-empty blocks.
///
/// Blocks are stored in canonical order: each block sorted, blocks sorted by
/// their smallest outcome. Two partitions describing the same σ-algebra are
/// therefore equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(size: usize, blocks: Vec<Vec<usize>>) -> Result<Self, ProbError> {
        let mut owner: Vec<Option<usize>> = vec![None; size];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ProbError::EmptyBlock);
            }
            for &i in block {
                if i >= size {
                    return Err(ProbError::OutcomeOutOfRange { index: i, size });
                }
                if owner[i].replace(b).is_some() {
                    return Err(ProbError::OverlappingBlocks(i));
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(ProbError::UncoveredOutcome(i));
        }
        if size == 0 {
            return Err(ProbError::EmptySpace);
        }
        Ok(Self::canonical(size, blocks))
    }

    /// Groups outcomes by label: outcomes with equal labels share a block.
    pub fn from_labels<T: Ord + Clone>(labels: &[T]) -> Result<Self, ProbError> {
        if labels.is_empty() {
            return Err(ProbError::EmptySpace);
        }
        let mut groups: std::collections::BTreeMap<T, Vec<usize>> = Default::default();
        for (i, l) in labels.iter().enumerate() {
            groups.entry(l.clone()).or_default().push(i);
        }
        Ok(Self::canonical(labels.len(), groups.into_values().collect()))
    }

    /// The single-block partition, i.e. the trivial σ-algebra `{∅, Ω}`.
    pub fn trivial(size: usize) -> Self {
        Self::canonical(size, vec![(0..size).collect()])
    }

    /// The all-singletons partition, i.e. the power set.
    pub fn discrete(size: usize) -> Self {
        Self::canonical(size, (0..size).map(|i| vec![i]).collect())
    }

    fn canonical(size: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut block_of = vec![0; size];
        for (b, block) in blocks.iter().enumerate() {
            for &i in block {
                block_of[i] = b;
            }
        }
        Self { blocks, block_of }
    }

    /// Number of outcomes covered.
    pub fn size(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing `outcome`.
    pub fn block_of(&self, outcome: usize) -> usize {
        self.block_of[outcome]
    }

    /// True iff every block of `self` lies inside a block of `coarse`, i.e.
    /// σ(coarse) ⊆ σ(self).
    pub fn refines(&self, coarse: &Partition) -> bool {
        self.size() == coarse.size()
            && self.blocks.iter().all(|block| {
                let owner = coarse.block_of(block[0]);
                block.iter().all(|&i| coarse.block_of(i) == owner)
            })
    }
}

/// True iff `fine` refines `coarse`. Partitions of different sizes are never
/// comparable and give `false`.
pub fn refine_check(coarse: &Partition, fine: &Partition) -> bool {
    fine.refines(coarse)
}

/// A real random variable: one value per outcome.
#[derive(Debug, Clone)]
pub struct RandomVector<S> {
    space: Arc<FiniteSpace<S>>,
    values: Vec<S>,
}

impl<S: Scalar> PartialEq for RandomVector<S> {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.values == other.values
    }
}

pub(crate) fn same_space<S: Scalar>(a: &Arc<FiniteSpace<S>>, b: &Arc<FiniteSpace<S>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl<S: Scalar> RandomVector<S> {
    pub fn new(space: Arc<FiniteSpace<S>>, values: Vec<S>) -> Result<Self, ProbError> {
        if values.len() != space.len() {
            return Err(ProbError::LengthMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ProbError::NonFiniteValue(i));
        }
        Ok(Self { space, values })
    }

    pub fn constant(space: Arc<FiniteSpace<S>>, c: S) -> Self {
        let values = vec![c; space.len()];
        Self { space, values }
    }

    /// Indicator of a set of outcomes.
    pub fn indicator(space: Arc<FiniteSpace<S>>, outcomes: &[usize]) -> Result<Self, ProbError> {
        let mut values = vec![S::zero(); space.len()];
        for &i in outcomes {
            *values.get_mut(i).ok_or(ProbError::OutcomeOutOfRange {
                index: i,
                size: space.len(),
            })? = S::one();
        }
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &Arc<FiniteSpace<S>> {
        &self.space
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    /// `Σ P(ω) X(ω)`.
    pub fn expectation(&self) -> S {
        expectation(self)
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: &S, other: &Self, b: &S) -> Result<Self, ProbError> {
        self.check_space(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, w)| a.clone() * x.clone() + b.clone() * w.clone())
            .collect();
        Ok(Self {
            space: self.space.clone(),
            values,
        })
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Whether the variable is constant (within `tol`) on every block.
    /// Returns the first offending block otherwise.
    pub fn measurable_violation(&self, partition: &Partition, tol: f64) -> Option<usize> {
        partition.blocks().iter().position(|block| {
            let first = &self.values[block[0]];
            block.iter().any(|&i| !self.values[i].within(first, tol))
        })
    }

    pub fn is_measurable(&self, partition: &Partition, tol: f64) -> bool {
        self.measurable_violation(partition, tol).is_none()
    }

    fn check_space(&self, other: &Self) -> Result<(), ProbError> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(ProbError::SpaceMismatch {
                left: self.space.len(),
                right: other.space.len(),
            })
        }
    }

    fn check_partition(&self, partition: &Partition) -> Result<(), ProbError> {
        if partition.size() == self.space.len() {
            Ok(())
        } else {
            Err(ProbError::SpaceMismatch {
                left: self.space.len(),
                right: partition.size(),
            })
        }
    }
}

/// `E[X] = Σ P(ω) X(ω)`.
pub fn expectation<S: Scalar>(x: &RandomVector<S>) -> S {
    x.space
        .probs()
        .iter()
        .zip(&x.values)
        .fold(S::zero(), |acc, (p, v)| acc + p.clone() * v.clone())
}

/// `E[X 𝕀_A]` for a set of outcomes `A`.
fn restricted_expectation<S: Scalar>(x: &RandomVector<S>, outcomes: &[usize]) -> S {
    let probs = x.space.probs();
    outcomes
        .iter()
        .fold(S::zero(), |acc, &i| acc + probs[i].clone() * x.values[i].clone())
}

/// `E[X | G]`: on every block `A` of `G`, the value `E[X 𝕀_A] / P(A)`.
pub fn conditional_expectation<S: Scalar>(x: &RandomVector<S>, g: &Partition) -> Result<RandomVector<S>, ProbError> {
    x.check_partition(g)?;
    let mut values = vec![S::zero(); x.space.len()];
    for block in g.blocks() {
        let mean = restricted_expectation(x, block) / x.space.prob_of(block);
        for &i in block {
            values[i] = mean.clone();
        }
    }
    Ok(RandomVector {
        space: x.space.clone(),
        values,
    })
}

/// One row of a [`DefiningPropertyReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck<S> {
    pub block: usize,
    pub outcomes: Vec<usize>,
    /// `E[X 𝕀_A]`
    pub x_integral: S,
    /// `E[Y 𝕀_A]`
    pub y_integral: S,
    pub abs_diff: S,
    pub ok: bool,
}

/// Outcome of [`verify_defining_property`].
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningPropertyReport<S> {
    pub tol: f64,
    pub blocks: Vec<BlockCheck<S>>,
    pub passed: bool,
    pub note: &'static str,
}

pub const GENERATING_BLOCKS_NOTE: &str = "every event of the sigma-algebra is a disjoint union of \
     blocks, so by additivity checking the generating blocks covers all events";

/// Checks `E[X 𝕀_A] = E[Y 𝕀_A]` on every block `A` of `G`.
///
/// Fails with [`ProbError::NotMeasurable`] when `Y` is not constant on some
/// block, because then `Y` is not a candidate at all.
pub fn verify_defining_property<S: Scalar>(
    x: &RandomVector<S>,
    y: &RandomVector<S>,
    g: &Partition,
    tol: f64,
) -> Result<DefiningPropertyReport<S>, ProbError> {
    x.check_space(y)?;
    x.check_partition(g)?;
    if let Some(block) = y.measurable_violation(g, tol) {
        return Err(ProbError::NotMeasurable { block });
    }
    let blocks: Vec<_> = g
        .blocks()
        .iter()
        .enumerate()
        .map(|(b, outcomes)| {
            let x_integral = restricted_expectation(x, outcomes);
            let y_integral = restricted_expectation(y, outcomes);
            let diff = (x_integral.clone() - y_integral.clone()).abs();
            BlockCheck {
                block: b,
                outcomes: outcomes.clone(),
                ok: diff.abs_within(tol),
                x_integral,
                y_integral,
                abs_diff: diff,
            }
        })
        .collect();
    let passed = blocks.iter().all(|b| b.ok);
    Ok(DefiningPropertyReport {
        tol,
        blocks,
        passed,
        note: GENERATING_BLOCKS_NOTE,
    })
}
