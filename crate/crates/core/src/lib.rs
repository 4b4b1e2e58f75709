//! Exact computations for KL-constrained alignment over finite alphabets.
//!
//! * [`dist`]: categorical distributions, sequences, types and type classes.
//! * [`metrics`]: entropy, cross entropy, KL divergence, Rényi cross entropy.
//! * [`tilt`]: the tilt family `p·q^α` and its KL-budget solver.
//! * [`bon`]: best-of-N laws, exact, by types, by brute force, and sampled.
//! * [`ldp`]: rate function and cumulants of the per-symbol reward.
//!
//! Rewards are log-likelihoods under a distribution `q`; all logarithms are
//! natural. The guide in `book/` walks through each module.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bon;
pub mod dist;
pub mod error;
pub mod ldp;
pub mod logspace;
pub mod metrics;
pub mod root;
pub mod seed;
pub mod tilt;

pub use dist::{CategoricalDistribution, Sequence, TypeVector};
pub use error::{Error, Result};
pub use seed::SeedSpec;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/types.md")]
    mod types {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/tilt.md")]
    mod tilt {}
    #[doc = include_str!("../../../book/src/best_of_n.md")]
    mod best_of_n {}
    #[doc = include_str!("../../../book/src/large_deviations.md")]
    mod large_deviations {}
}
