//! Filtrations, adapted and predictable processes, martingale classification
//! and the martingale transform.

use std::sync::Arc;

use thiserror::Error;

use crate::prob::{conditional_expectation, refine_check, same_space, FiniteSpace, Partition, ProbError, RandomVector};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("a filtration needs at least one partition")]
    EmptyFiltration,
    #[error("partition {time} covers {got} outcomes, the space has {expected}")]
    PartitionSize { time: usize, expected: usize, got: usize },
    #[error("F_{next} does not refine F_{time}")]
    NotRefining { time: usize, next: usize },
    #[error("process has {got} time points, filtration has {expected}")]
    HorizonMismatch { expected: usize, got: usize },
    #[error("X_{time} is not F_{time}-measurable: it varies within block {block}")]
    NotAdapted { time: usize, block: usize },
    #[error("C_{time} is not F_{prev}-measurable: it varies within block {block}", prev = .time - 1)]
    NotPredictable { time: usize, block: usize },
    #[error("|C_{time}| exceeds the declared bound {bound} at outcome {outcome}")]
    BoundExceeded { time: usize, outcome: usize, bound: String },
    #[error("declared bound must be non-negative")]
    NegativeBound,
    #[error("processes are defined on different filtrations")]
    FiltrationMismatch,
    #[error("tree depth {0} is outside 1..=16")]
    DepthOutOfRange(usize),
    #[error("up probability must lie strictly between 0 and 1")]
    InvalidUpProbability,
}

/// An increasing sequence of partitions `F_0, …, F_T`, each refining the one
/// before it.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration<S> {
    space: Arc<FiniteSpace<S>>,
    partitions: Vec<Partition>,
}

impl<S: Scalar> Filtration<S> {
    pub fn new(space: Arc<FiniteSpace<S>>, partitions: Vec<Partition>) -> Result<Self, ProcessError> {
        if partitions.is_empty() {
            return Err(ProcessError::EmptyFiltration);
        }
        for (time, p) in partitions.iter().enumerate() {
            if p.size() != space.len() {
                return Err(ProcessError::PartitionSize {
                    time,
                    expected: space.len(),
                    got: p.size(),
                });
            }
        }
        for (time, pair) in partitions.windows(2).enumerate() {
            if !refine_check(&pair[0], &pair[1]) {
                return Err(ProcessError::NotRefining { time, next: time + 1 });
            }
        }
        Ok(Self { space, partitions })
    }

    pub fn space(&self) -> &Arc<FiniteSpace<S>> {
        &self.space
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn at(&self, time: usize) -> &Partition {
        &self.partitions[time]
    }

    /// The last time index `T`.
    pub fn horizon(&self) -> usize {
        self.partitions.len() - 1
    }
}

fn same_filtration<S: Scalar>(a: &Arc<Filtration<S>>, b: &Arc<Filtration<S>>) -> bool {
    Arc::ptr_eq(a, b) || (same_space(&a.space, &b.space) && a.partitions == b.partitions)
}

/// `(X_0, …, X_T)` with `X_n` constant on every block of `F_n`.
#[derive(Debug, Clone)]
pub struct AdaptedProcess<S> {
    filtration: Arc<Filtration<S>>,
    vars: Vec<RandomVector<S>>,
}

impl<S: Scalar> AdaptedProcess<S> {
    /// `values[n][ω]` is `X_n(ω)`. Adaptedness is checked exactly for
    /// rationals and to `1e-12` for floats.
    pub fn new(filtration: Arc<Filtration<S>>, values: Vec<Vec<S>>) -> Result<Self, ProcessError> {
        let expected = filtration.partitions.len();
        if values.len() != expected {
            return Err(ProcessError::HorizonMismatch {
                expected,
                got: values.len(),
            });
        }
        let vars = values
            .into_iter()
            .map(|v| RandomVector::new(filtration.space.clone(), v))
            .collect::<Result<Vec<_>, _>>()?;
        for (time, x) in vars.iter().enumerate() {
            if let Some(block) = x.measurable_violation(filtration.at(time), S::default_tol()) {
                return Err(ProcessError::NotAdapted { time, block });
            }
        }
        Ok(Self { filtration, vars })
    }

    pub fn filtration(&self) -> &Arc<Filtration<S>> {
        &self.filtration
    }

    pub fn vars(&self) -> &[RandomVector<S>] {
        &self.vars
    }

    pub fn at(&self, time: usize) -> &RandomVector<S> {
        &self.vars[time]
    }

    pub fn horizon(&self) -> usize {
        self.vars.len() - 1
    }

    /// The trajectory `(X_0(ω), …, X_T(ω))` of one outcome.
    pub fn path(&self, outcome: usize) -> Vec<S> {
        self.vars.iter().map(|x| x.values()[outcome].clone()).collect()
    }

    /// `a·self + b·other` on the same filtration.
    pub fn linear_combination(&self, a: &S, other: &Self, b: &S) -> Result<Self, ProcessError> {
        if !same_filtration(&self.filtration, &other.filtration) {
            return Err(ProcessError::FiltrationMismatch);
        }
        let vars = self
            .vars
            .iter()
            .zip(&other.vars)
            .map(|(x, y)| x.linear_combination(a, y, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            filtration: self.filtration.clone(),
            vars,
        })
    }
}

/// `(C_1, …, C_T)` with `C_n` constant on every block of `F_{n-1}` and
/// `|C_n| ≤ bound` everywhere.
#[derive(Debug, Clone)]
pub struct PredictableProcess<S> {
    filtration: Arc<Filtration<S>>,
    vars: Vec<RandomVector<S>>,
    bound: S,
}

impl<S: Scalar> PredictableProcess<S> {
    /// `values[k][ω]` is `C_{k+1}(ω)`.
    pub fn new(filtration: Arc<Filtration<S>>, values: Vec<Vec<S>>, bound: S) -> Result<Self, ProcessError> {
        if bound.is_negative() {
            return Err(ProcessError::NegativeBound);
        }
        let expected = filtration.horizon();
        if values.len() != expected {
            return Err(ProcessError::HorizonMismatch {
                expected,
                got: values.len(),
            });
        }
        let vars = values
            .into_iter()
            .map(|v| RandomVector::new(filtration.space.clone(), v))
            .collect::<Result<Vec<_>, _>>()?;
        for (k, c) in vars.iter().enumerate() {
            let time = k + 1;
            if let Some(block) = c.measurable_violation(filtration.at(k), S::default_tol()) {
                return Err(ProcessError::NotPredictable { time, block });
            }
            if let Some(outcome) = c.values().iter().position(|v| v.abs() > bound) {
                return Err(ProcessError::BoundExceeded {
                    time,
                    outcome,
                    bound: bound.to_string(),
                });
            }
        }
        Ok(Self {
            filtration,
            vars,
            bound,
        })
    }

    /// `C_n ≡ c` for every `n`.
    pub fn constant(filtration: Arc<Filtration<S>>, c: S) -> Result<Self, ProcessError> {
        let n = filtration.space.len();
        let values = vec![vec![c.clone(); n]; filtration.horizon()];
        Self::new(filtration, values, c.abs())
    }

    pub fn filtration(&self) -> &Arc<Filtration<S>> {
        &self.filtration
    }

    /// `C_n` for `n ≥ 1`.
    pub fn at(&self, time: usize) -> &RandomVector<S> {
        &self.vars[time - 1]
    }

    pub fn bound(&self) -> &S {
        &self.bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Martingale,
    Supermartingale,
    Submartingale,
    None,
}

impl std::fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProcessKind::Martingale => "martingale",
            ProcessKind::Supermartingale => "supermartingale",
            ProcessKind::Submartingale => "submartingale",
            ProcessKind::None => "none",
        })
    }
}

/// `E[X_{n+1} | F_n] − X_n` on one block of `F_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDefect<S> {
    pub time: usize,
    pub block: usize,
    pub outcomes: Vec<usize>,
    pub defect: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleClass<S> {
    pub kind: ProcessKind,
    pub tol: f64,
    /// `defects[n]` lists one entry per block of `F_n`, for `n < T`.
    pub defects: Vec<Vec<BlockDefect<S>>>,
}

impl<S: Scalar> MartingaleClass<S> {
    pub fn all_defects(&self) -> impl Iterator<Item = &BlockDefect<S>> {
        self.defects.iter().flatten()
    }
}

/// Classifies `X` by the sign of every one-step defect.
///
/// A process whose defects are all within `tol` of zero is reported as a
/// martingale even though it is also a super- and submartingale. With
/// `T = 0` there are no steps and the answer is martingale.
pub fn classify<S: Scalar>(x: &AdaptedProcess<S>, tol: f64) -> MartingaleClass<S> {
    let filtration = &x.filtration;
    let defects: Vec<Vec<BlockDefect<S>>> = (0..x.horizon())
        .map(|n| {
            let partition = filtration.at(n);
            let next_mean =
                conditional_expectation(x.at(n + 1), partition).expect("process and filtration share a space");
            partition
                .blocks()
                .iter()
                .enumerate()
                .map(|(block, outcomes)| {
                    let i = outcomes[0];
                    BlockDefect {
                        time: n,
                        block,
                        outcomes: outcomes.clone(),
                        defect: next_mean.values()[i].clone() - x.at(n).values()[i].clone(),
                    }
                })
                .collect()
        })
        .collect();

    let tol_s = S::from_f64(tol).unwrap_or_else(S::zero);
    let neg_tol = -tol_s.clone();
    let all = || defects.iter().flatten().map(|d| &d.defect);
    let kind = if all().all(|d| d.abs_within(tol)) {
        ProcessKind::Martingale
    } else if all().all(|d| *d <= tol_s) {
        ProcessKind::Supermartingale
    } else if all().all(|d| *d >= neg_tol) {
        ProcessKind::Submartingale
    } else {
        ProcessKind::None
    };
    MartingaleClass { kind, tol, defects }
}

/// `(C·X)_n = Σ_{i=1..n} C_i (X_i − X_{i−1})`, with `(C·X)_0 = 0`.
pub fn martingale_transform<S: Scalar>(
    c: &PredictableProcess<S>,
    x: &AdaptedProcess<S>,
) -> Result<AdaptedProcess<S>, ProcessError> {
    if !same_filtration(&c.filtration, &x.filtration) {
        return Err(ProcessError::FiltrationMismatch);
    }
    if c.vars.len() != x.horizon() {
        return Err(ProcessError::HorizonMismatch {
            expected: x.horizon(),
            got: c.vars.len(),
        });
    }
    let size = x.filtration.space.len();
    let mut running = vec![S::zero(); size];
    let mut values = Vec::with_capacity(x.vars.len());
    values.push(running.clone());
    for n in 1..=x.horizon() {
        let (cur, prev, bet) = (x.at(n).values(), x.at(n - 1).values(), c.at(n).values());
        for w in 0..size {
            running[w] = running[w].clone() + bet[w].clone() * (cur[w].clone() - prev[w].clone());
        }
        values.push(running.clone());
    }
    AdaptedProcess::new(x.filtration.clone(), values)
}

/// Random walk on the space of all `±` step sequences of length `depth`.
#[derive(Debug, Clone)]
pub struct BinaryTree<S> {
    pub depth: usize,
    pub space: Arc<FiniteSpace<S>>,
    pub filtration: Arc<Filtration<S>>,
    /// `X_n` is the sum of the first `n` steps, `X_0 = 0`.
    pub walk: AdaptedProcess<S>,
}

pub const MAX_TREE_DEPTH: usize = 16;

/// Builds the `2^depth`-outcome walk space.
///
/// Outcome `ω` encodes its step signs in binary, most significant bit first,
/// with `1` meaning an up step. `F_n` groups outcomes that share their first
/// `n` steps, so its blocks are the contiguous ranges of length
/// `2^(depth − n)`.
pub fn make_binary_tree_space<S: Scalar>(
    depth: usize,
    up_prob: S,
    step_up: S,
    step_down: S,
) -> Result<BinaryTree<S>, ProcessError> {
    if !(1..=MAX_TREE_DEPTH).contains(&depth) {
        return Err(ProcessError::DepthOutOfRange(depth));
    }
    if !up_prob.is_positive() || up_prob >= S::one() {
        return Err(ProcessError::InvalidUpProbability);
    }
    let down_prob = S::one() - up_prob.clone();
    let size = 1usize << depth;

    let mut up_pow = vec![S::one()];
    let mut down_pow = vec![S::one()];
    for k in 0..depth {
        up_pow.push(up_pow[k].clone() * up_prob.clone());
        down_pow.push(down_pow[k].clone() * down_prob.clone());
    }

    let is_up = |w: usize, step: usize| (w >> (depth - 1 - step)) & 1 == 1;
    let mut probs = Vec::with_capacity(size);
    let mut labels = Vec::with_capacity(size);
    for w in 0..size {
        let ups = w.count_ones() as usize;
        probs.push(up_pow[ups].clone() * down_pow[depth - ups].clone());
        labels.push((0..depth).map(|s| if is_up(w, s) { '+' } else { '-' }).collect());
    }
    let space = Arc::new(FiniteSpace::with_labels(labels, probs)?);

    let partitions = (0..=depth)
        .map(|n| {
            let width = 1usize << (depth - n);
            Partition::new(
                size,
                (0..size / width)
                    .map(|b| (b * width..(b + 1) * width).collect())
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let filtration = Arc::new(Filtration::new(space.clone(), partitions)?);

    let mut values = vec![vec![S::zero(); size]];
    for step in 0..depth {
        let next = (0..size)
            .map(|w| {
                let inc = if is_up(w, step) { &step_up } else { &step_down };
                values[step][w].clone() + inc.clone()
            })
            .collect();
        values.push(next);
    }
    let walk = AdaptedProcess::new(filtration.clone(), values)?;
    Ok(BinaryTree {
        depth,
        space,
        filtration,
        walk,
    })
}
