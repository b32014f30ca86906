//! Numerical toolkit for inner functions on the unit disc.
//!
//! The crate evaluates Blaschke products, the atomic singular inner function
//! and Frostman shifts with certified truncation error, extracts and bins
//! their zero sequences, computes weighted mixed-norm / Hardy / Besov
//! integrals and dyadic characterization sums, and classifies truncated
//! quantities as convergent or divergent so that independent pipelines for
//! the same membership question can be cross-checked.
//!
//! Module map:
//!
//! * [`weights`] — radial weights, tail integrals, doubling-class reports.
//! * [`inner`] — inner function variants, derivatives, separation diagnostics.
//! * [`zeros`] — Frostman-shift zero sequences, dyadic profiles, disc averages.
//! * [`norms`] — circle means, truncated norms, characterization sums.
//! * [`verify`] — convergence verdicts, ratio reports, named suites.
//! * [`config`] — JSON specifications for functions, weights and experiments.
//!
//! All computations are pure and deterministic: reductions use a fixed-tree
//! pairwise order (see [`exec`]) so results are bit-identical with and
//! without the `parallel` feature.

pub mod config;
pub mod error;
pub mod exec;
pub mod inner;
pub mod norms;
pub mod quad;
pub mod verify;
pub mod weights;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64;
