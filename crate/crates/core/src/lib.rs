//! Discrete-time martingales on finite probability spaces.
//!
//! * [`prob`]: finite spaces, partitions, conditional expectation.
//! * [`process`]: filtrations, adapted and predictable processes,
//!   martingale classification and transforms.
//! * [`upcrossing`]: crossing times, the upcrossing inequalities and
//!   convergence diagnostics.
//! * [`branching`]: Galton–Watson processes.
//! * [`montecarlo`]: seeded, thread-count independent ensembles.
//!
//! Exact work uses [`Rational`]; every generic routine also runs on `f64`.

pub mod branching;
pub mod fixtures;
pub mod io;
pub mod montecarlo;
pub mod prob;
pub mod process;
pub mod scalar;
pub mod upcrossing;

pub use prob::{
    conditional_expectation, expectation, refine_check, verify_defining_property, FiniteSpace, Partition, ProbError,
    RandomVector,
};
pub use process::{
    classify, make_binary_tree_space, martingale_transform, AdaptedProcess, Filtration, PredictableProcess,
    ProcessError, ProcessKind,
};
pub use scalar::{parse_rational, Rational, Scalar};
pub use upcrossing::{
    check_pathwise_inequality, crossing_times, doob_bound_check, predictable_indicator, stochastic_integral, Band,
    SamplePath,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/conditional-expectation.md")]
    struct ConditionalExpectation;
    #[doc = include_str!("../../../book/src/martingales.md")]
    struct Martingales;
    #[doc = include_str!("../../../book/src/upcrossings.md")]
    struct Upcrossings;
    #[doc = include_str!("../../../book/src/convergence.md")]
    struct Convergence;
    #[doc = include_str!("../../../book/src/branching.md")]
    struct Branching;
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    struct Reproducibility;
}
