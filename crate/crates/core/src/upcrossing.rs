//! Upcrossings of a band `[a, b]`: crossing times, the betting indicator
//! `H`, the gains `S_N = Σ H_n (X_n − X_{n−1})`, the pathwise and expected
//! upcrossing inequalities, and empirical convergence diagnostics.
//!
//! # Two forms of the pathwise inequality
//!
//! Write `W_n = (X_n − a)⁻ = max(a − X_n, 0)`. The report produced by
//! [`check_pathwise_inequality`] evaluates two right-hand sides:
//!
//! * the *literal* form `S_N + W_0 − W_N`, and
//! * the *corrected* form `S_N − W_0 + W_N`.
//!
//! Only the corrected form holds on every path: the first completed
//! excursion starting at time 0 gains at least `(b − a) + W_0`, and an open
//! final excursion loses at most `W_N`. The literal form fails whenever a path
//! ends far below `a` (for example `(1, −10)` with band `(0, 1)`), and the
//! report flags that as a [`PathwiseVerdict::Violated`] result. Taking
//! expectations of the corrected form gives
//! `(b − a) E[U_N] ≤ E[W_N] − E[W_0]` whenever `E[S_N] ≤ 0`, i.e. for
//! supermartingales; [`doob_bound_check`] evaluates that bound together with
//! `E[S_N]` and the positive-part bound that holds for submartingales.

use serde::Serialize;
use thiserror::Error;

use crate::montecarlo::summarize;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UpcrossingError {
    #[error("a sample path needs at least one value")]
    EmptyPath,
    #[error("path value at n = {0} is not finite")]
    NonFinite(usize),
    #[error("band needs a < b, got a = {lower}, b = {upper}")]
    InvalidBand { lower: String, upper: String },
    #[error("indicator has {indicator} entries, path has {increments} increments")]
    LengthMismatch { indicator: usize, increments: usize },
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("{weights} weights given for {paths} paths")]
    WeightMismatch { paths: usize, weights: usize },
    #[error("weights sum to {0}, not 1")]
    WeightsNotNormalized(String),
    #[error("path {index} has length {got}, expected {expected}")]
    Ragged { index: usize, expected: usize, got: usize },
    #[error("statistical mode needs uniform weights")]
    WeightedStatistical,
}

/// A finite trajectory `(X_0, …, X_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath<S>(Vec<S>);

impl<S: Scalar> SamplePath<S> {
    pub fn new(values: Vec<S>) -> Result<Self, UpcrossingError> {
        if values.is_empty() {
            return Err(UpcrossingError::EmptyPath);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(UpcrossingError::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[S] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Final time index `N`.
    pub fn horizon(&self) -> usize {
        self.0.len() - 1
    }

    pub fn first(&self) -> &S {
        &self.0[0]
    }

    pub fn last(&self) -> &S {
        &self.0[self.0.len() - 1]
    }

    /// `(X_0, …, X_n)`.
    pub fn truncated(&self, n: usize) -> Self {
        Self(self.0[..=n.min(self.horizon())].to_vec())
    }
}

/// The band `[a, b]` with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band<S> {
    pub lower: S,
    pub upper: S,
}

impl<S: Scalar> Band<S> {
    pub fn new(lower: S, upper: S) -> Result<Self, UpcrossingError> {
        if lower < upper {
            Ok(Self { lower, upper })
        } else {
            Err(UpcrossingError::InvalidBand {
                lower: lower.to_string(),
                upper: upper.to_string(),
            })
        }
    }

    pub fn width(&self) -> S {
        self.upper.clone() - self.lower.clone()
    }
}

/// Crossing times of one path. Infinite times are simply not recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingRecord<S> {
    pub band: Band<S>,
    /// `τ_1 < τ_2 < …`: times the path is at or below `a` after the previous
    /// upcrossing.
    pub taus: Vec<usize>,
    /// `σ_1 < σ_2 < …`: times the path is at or above `b` after `τ_k`.
    pub sigmas: Vec<usize>,
    /// `U_N[a, b]`, the number of recorded `σ`s.
    pub count: usize,
}

impl<S: Scalar> CrossingRecord<S> {
    /// `U_n[a, b]` for `n ≤ N`.
    pub fn count_by(&self, n: usize) -> usize {
        self.sigmas.iter().take_while(|&&s| s <= n).count()
    }

    /// True when the last excursion started but has not reached `b`.
    pub fn open_excursion(&self) -> bool {
        self.taus.len() > self.sigmas.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingEvent {
    Down(usize),
    Up(usize),
}

/// Online crossing detector. Feeding it `X_0, …, X_{n−1}` is enough to know
/// `H_n`, which is what makes `H` predictable.
#[derive(Debug, Clone)]
pub struct CrossingTracker<S> {
    band: Band<S>,
    seen: usize,
    awaiting_upper: bool,
}

impl<S: Scalar> CrossingTracker<S> {
    pub fn new(band: Band<S>) -> Self {
        Self {
            band,
            seen: 0,
            awaiting_upper: false,
        }
    }

    /// Feeds the next value `X_n` (with `n` the number of values seen so far).
    pub fn push(&mut self, value: &S) -> Option<CrossingEvent> {
        let n = self.seen;
        self.seen += 1;
        if !self.awaiting_upper && *value <= self.band.lower {
            self.awaiting_upper = true;
            Some(CrossingEvent::Down(n))
        } else if self.awaiting_upper && *value >= self.band.upper {
            self.awaiting_upper = false;
            Some(CrossingEvent::Up(n))
        } else {
            None
        }
    }

    /// `H_{n}` where `n` is the number of values fed so far.
    pub fn holding(&self) -> bool {
        self.awaiting_upper
    }
}

/// Crossing times of `path` for the band `[a, b]`, using the closed
/// conditions `X_n ≤ a` and `X_n ≥ b` with no tolerance.
pub fn crossing_times<S: Scalar>(path: &SamplePath<S>, a: &S, b: &S) -> Result<CrossingRecord<S>, UpcrossingError> {
    let band = Band::new(a.clone(), b.clone())?;
    let mut tracker = CrossingTracker::new(band.clone());
    let (mut taus, mut sigmas) = (Vec::new(), Vec::new());
    for v in path.values() {
        match tracker.push(v) {
            Some(CrossingEvent::Down(n)) => taus.push(n),
            Some(CrossingEvent::Up(n)) => sigmas.push(n),
            None => {}
        }
    }
    let count = sigmas.len();
    Ok(CrossingRecord {
        band,
        taus,
        sigmas,
        count,
    })
}

/// `H_n = 1` iff `τ_k < n ≤ σ_k` for some `k` (an open last excursion has
/// `σ_k = ∞`), for `n = 1..=horizon`.
pub fn predictable_indicator<S: Scalar>(record: &CrossingRecord<S>, horizon: usize) -> Vec<bool> {
    let mut h = vec![false; horizon];
    for (k, &tau) in record.taus.iter().enumerate() {
        let end = record.sigmas.get(k).copied().unwrap_or(horizon).min(horizon);
        for n in tau + 1..=end {
            h[n - 1] = true;
        }
    }
    h
}

/// `H_n` computed from `(X_0, …, X_{n−1})` alone.
pub fn predictable_indicator_online<S: Scalar>(path: &SamplePath<S>, band: &Band<S>) -> Vec<bool> {
    let mut tracker = CrossingTracker::new(band.clone());
    let values = path.values();
    values[..values.len() - 1]
        .iter()
        .map(|v| {
            tracker.push(v);
            tracker.holding()
        })
        .collect()
}

/// `S_N = Σ_{n=1..N} H_n (X_n − X_{n−1})`.
pub fn stochastic_integral<S: Scalar>(indicator: &[bool], path: &SamplePath<S>) -> Result<S, UpcrossingError> {
    if indicator.len() != path.horizon() {
        return Err(UpcrossingError::LengthMismatch {
            indicator: indicator.len(),
            increments: path.horizon(),
        });
    }
    let x = path.values();
    Ok(indicator
        .iter()
        .enumerate()
        .filter(|(_, &h)| h)
        .fold(S::zero(), |acc, (i, _)| acc + x[i + 1].clone() - x[i].clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathwiseVerdict {
    Holds,
    Violated,
}

/// One time step of an [`UpcrossingReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<S> {
    pub n: usize,
    pub value: S,
    /// `H_n`; absent at `n = 0`.
    pub indicator: Option<bool>,
    /// `S_n`
    pub running_integral: S,
    /// `U_n[a, b]`
    pub running_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpcrossingReport<S> {
    pub record: CrossingRecord<S>,
    pub indicator: Vec<bool>,
    /// `S_N`
    pub integral: S,
    /// `(b − a) U_N[a, b]`
    pub lhs: S,
    /// `(X_0 − a)⁻`
    pub initial_correction: S,
    /// `(X_N − a)⁻`
    pub final_correction: S,
    /// `S_N + (X_0 − a)⁻ − (X_N − a)⁻`
    pub rhs: S,
    pub slack: S,
    /// `S_N − (X_0 − a)⁻ + (X_N − a)⁻`
    pub corrected_rhs: S,
    pub corrected_slack: S,
    pub trace: Vec<TraceRow<S>>,
}

impl<S: Scalar> UpcrossingReport<S> {
    /// Verdict for the literal form.
    pub fn verdict(&self) -> PathwiseVerdict {
        if self.slack.is_negative() {
            PathwiseVerdict::Violated
        } else {
            PathwiseVerdict::Holds
        }
    }

    /// Verdict for the corrected form.
    pub fn corrected_verdict(&self) -> PathwiseVerdict {
        if self.corrected_slack.is_negative() {
            PathwiseVerdict::Violated
        } else {
            PathwiseVerdict::Holds
        }
    }
}

/// Computes the crossing record, `H`, `S_N` and both sides of the pathwise
/// inequality.
pub fn check_pathwise_inequality<S: Scalar>(
    path: &SamplePath<S>,
    a: &S,
    b: &S,
) -> Result<UpcrossingReport<S>, UpcrossingError> {
    let record = crossing_times(path, a, b)?;
    let horizon = path.horizon();
    let indicator = predictable_indicator(&record, horizon);
    let integral = stochastic_integral(&indicator, path)?;

    let lhs = record.band.width() * S::from_usize(record.count);
    let initial_correction = (path.first().clone() - a.clone()).neg_part();
    let final_correction = (path.last().clone() - a.clone()).neg_part();
    let rhs = integral.clone() + initial_correction.clone() - final_correction.clone();
    let corrected_rhs = integral.clone() - initial_correction.clone() + final_correction.clone();

    let x = path.values();
    let mut trace = Vec::with_capacity(x.len());
    let mut running = S::zero();
    for n in 0..=horizon {
        let h = (n > 0).then(|| indicator[n - 1]);
        if h == Some(true) {
            running = running + x[n].clone() - x[n - 1].clone();
        }
        trace.push(TraceRow {
            n,
            value: x[n].clone(),
            indicator: h,
            running_integral: running.clone(),
            running_count: record.count_by(n),
        });
    }

    Ok(UpcrossingReport {
        slack: rhs.clone() - lhs.clone(),
        corrected_slack: corrected_rhs.clone() - lhs.clone(),
        record,
        indicator,
        integral,
        lhs,
        initial_correction,
        final_correction,
        rhs,
        corrected_rhs,
        trace,
    })
}

/// Path weights for [`doob_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub enum Weights<S> {
    Uniform,
    Explicit(Vec<S>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// The ensemble is a full enumeration: compare exactly (rationals) or to
    /// `1e-12` (floats).
    Exact,
    /// The ensemble is a Monte Carlo sample: flag only violations beyond
    /// three standard errors.
    Statistical,
}

/// Number of standard errors tolerated before a Monte Carlo comparison fails.
pub const STANDARD_ERRORS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DoobReport<S> {
    pub mode: BoundMode,
    pub band: Band<S>,
    pub paths: usize,
    /// `(b − a) E[U_N]`
    pub lhs: S,
    /// `E[(X_N − a)⁻]`
    pub final_negative: S,
    /// `E[(X_0 − a)⁻]`
    pub initial_negative: S,
    /// `E[(X_N − a)⁻] − E[(X_0 − a)⁻]`
    pub rhs: S,
    /// `E[(X_N − a)⁺] − E[(X_0 − a)⁺]`
    pub positive_part_rhs: S,
    /// `E[S_N]`
    pub mean_integral: S,
    /// Standard error of `lhs − rhs` (statistical mode).
    pub gap_standard_error: Option<f64>,
    /// Standard error of `lhs − positive_part_rhs` (statistical mode).
    pub positive_gap_standard_error: Option<f64>,
    /// `lhs ≤ rhs`
    pub holds: bool,
    /// `lhs ≤ E[(X_N − a)⁻]`
    pub weak_holds: bool,
    /// `lhs ≤ positive_part_rhs`
    pub positive_part_holds: bool,
}

/// Evaluates `(b − a) E[U_N] ≤ E[(X_N − a)⁻] − E[(X_0 − a)⁻] ≤ E[(X_N − a)⁻]`
/// over an ensemble, alongside `E[S_N]` and the positive-part bound.
pub fn doob_bound_check<S: Scalar>(
    ensemble: &[SamplePath<S>],
    weights: &Weights<S>,
    a: &S,
    b: &S,
    mode: BoundMode,
) -> Result<DoobReport<S>, UpcrossingError> {
    let band = Band::new(a.clone(), b.clone())?;
    let first = ensemble.first().ok_or(UpcrossingError::EmptyEnsemble)?;
    check_rectangular(ensemble, first.len())?;
    let m = ensemble.len();
    let w: Vec<S> = match weights {
        Weights::Uniform => vec![S::one() / S::from_usize(m); m],
        Weights::Explicit(w) => {
            if mode == BoundMode::Statistical {
                return Err(UpcrossingError::WeightedStatistical);
            }
            if w.len() != m {
                return Err(UpcrossingError::WeightMismatch {
                    paths: m,
                    weights: w.len(),
                });
            }
            let total = w.iter().fold(S::zero(), |acc, x| acc + x.clone());
            if !total.within(&S::one(), S::default_tol()) {
                return Err(UpcrossingError::WeightsNotNormalized(total.to_string()));
            }
            w.clone()
        }
    };

    struct PerPath<S> {
        lhs: S,
        final_neg: S,
        initial_neg: S,
        final_pos: S,
        initial_pos: S,
        integral: S,
    }
    let per_path: Vec<PerPath<S>> = ensemble
        .iter()
        .map(|p| {
            let report = check_pathwise_inequality(p, a, b)?;
            Ok(PerPath {
                lhs: report.lhs,
                final_neg: report.final_correction,
                initial_neg: report.initial_correction,
                final_pos: (p.last().clone() - a.clone()).pos_part(),
                initial_pos: (p.first().clone() - a.clone()).pos_part(),
                integral: report.integral,
            })
        })
        .collect::<Result<_, UpcrossingError>>()?;

    let mean = |f: &dyn Fn(&PerPath<S>) -> S| {
        per_path
            .iter()
            .zip(&w)
            .fold(S::zero(), |acc, (p, wi)| acc + wi.clone() * f(p))
    };
    let lhs = mean(&|p| p.lhs.clone());
    let final_negative = mean(&|p| p.final_neg.clone());
    let initial_negative = mean(&|p| p.initial_neg.clone());
    let positive_part_rhs = mean(&|p| p.final_pos.clone() - p.initial_pos.clone());
    let mean_integral = mean(&|p| p.integral.clone());
    let rhs = final_negative.clone() - initial_negative.clone();

    let (holds, weak_holds, positive_part_holds, gap_se, pos_gap_se) = match mode {
        BoundMode::Exact => {
            let tol = S::from_f64(S::default_tol()).unwrap_or_else(S::zero);
            (
                lhs <= rhs.clone() + tol.clone(),
                lhs <= final_negative.clone() + tol.clone(),
                lhs <= positive_part_rhs.clone() + tol,
                None,
                None,
            )
        }
        BoundMode::Statistical => {
            let gaps: Vec<f64> = per_path
                .iter()
                .map(|p| (p.lhs.clone() - p.final_neg.clone() + p.initial_neg.clone()).to_f64())
                .collect();
            let weak: Vec<f64> = per_path
                .iter()
                .map(|p| (p.lhs.clone() - p.final_neg.clone()).to_f64())
                .collect();
            let pos: Vec<f64> = per_path
                .iter()
                .map(|p| (p.lhs.clone() - p.final_pos.clone() + p.initial_pos.clone()).to_f64())
                .collect();
            let within = |xs: &[f64]| {
                let s = summarize(xs).expect("non-empty");
                let se = s.standard_error.unwrap_or(0.0);
                (s.mean <= STANDARD_ERRORS * se + 1e-12, se)
            };
            let (holds, se) = within(&gaps);
            let (weak_holds, _) = within(&weak);
            let (pos_holds, pos_se) = within(&pos);
            (holds, weak_holds, pos_holds, Some(se), Some(pos_se))
        }
    };

    Ok(DoobReport {
        mode,
        band,
        paths: m,
        lhs,
        final_negative,
        initial_negative,
        rhs,
        positive_part_rhs,
        mean_integral,
        gap_standard_error: gap_se,
        positive_gap_standard_error: pos_gap_se,
        holds,
        weak_holds,
        positive_part_holds,
    })
}

fn check_rectangular<S: Scalar>(ensemble: &[SamplePath<S>], expected: usize) -> Result<(), UpcrossingError> {
    match ensemble.iter().position(|p| p.len() != expected) {
        Some(index) => Err(UpcrossingError::Ragged {
            index,
            expected,
            got: ensemble[index].len(),
        }),
        None => Ok(()),
    }
}

/// `E[U_N[a, b]]` as a function of `N` for one band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandGrowth {
    pub lower: f64,
    pub upper: f64,
    /// Entry `N` is the ensemble mean of `U_N[a, b]`.
    pub mean_upcrossings: Vec<f64>,
}

impl BandGrowth {
    /// `E[U_N] − E[U_{N/2}]` at the final horizon: near zero once the
    /// upcrossing count has levelled off.
    pub fn doubling_increment(&self) -> f64 {
        let n = self.mean_upcrossings.len() - 1;
        self.mean_upcrossings[n] - self.mean_upcrossings[n / 2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceDiagnostics {
    pub paths: usize,
    /// `E[X_n⁺]` per `n`.
    pub positive_part_means: Vec<f64>,
    /// `max_{m ≤ n} E[X_m⁺]`.
    pub positive_part_sups: Vec<f64>,
    /// `E[X_n]` per `n`.
    pub mean_trace: Vec<f64>,
    pub bands: Vec<BandGrowth>,
}

impl ConvergenceDiagnostics {
    /// Whether `E[X_n]` never drops by more than `tol` between steps.
    pub fn mean_trace_nondecreasing(&self, tol: f64) -> bool {
        self.mean_trace.windows(2).all(|w| w[1] >= w[0] - tol)
    }
}

/// Ensemble averages of `X_n⁺`, `X_n` and `U_n[a, b]` per band.
pub fn convergence_diagnostics<S: Scalar>(
    ensemble: &[SamplePath<S>],
    bands: &[(S, S)],
) -> Result<ConvergenceDiagnostics, UpcrossingError> {
    let first = ensemble.first().ok_or(UpcrossingError::EmptyEnsemble)?;
    let len = first.len();
    check_rectangular(ensemble, len)?;
    let m = ensemble.len() as f64;

    let mut pos = vec![0.0; len];
    let mut mean = vec![0.0; len];
    for path in ensemble {
        for (n, v) in path.values().iter().enumerate() {
            pos[n] += v.pos_part().to_f64();
            mean[n] += v.to_f64();
        }
    }
    pos.iter_mut().for_each(|v| *v /= m);
    mean.iter_mut().for_each(|v| *v /= m);
    let sups = pos
        .iter()
        .scan(f64::NEG_INFINITY, |acc, &v| {
            *acc = acc.max(v);
            Some(*acc)
        })
        .collect();

    let bands = bands
        .iter()
        .map(|(a, b)| {
            let mut totals = vec![0usize; len];
            for path in ensemble {
                let record = crossing_times(path, a, b)?;
                for &s in &record.sigmas {
                    totals[s] += 1;
                }
            }
            let mut running = 0usize;
            let mean_upcrossings = totals
                .iter()
                .map(|&t| {
                    running += t;
                    running as f64 / m
                })
                .collect();
            Ok(BandGrowth {
                lower: a.to_f64(),
                upper: b.to_f64(),
                mean_upcrossings,
            })
        })
        .collect::<Result<_, UpcrossingError>>()?;

    Ok(ConvergenceDiagnostics {
        paths: ensemble.len(),
        positive_part_means: pos,
        positive_part_sups: sups,
        mean_trace: mean,
        bands,
    })
}
